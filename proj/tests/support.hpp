#pragma once

// Test-side generators and oracles. Random draws use std::mt19937_64 so the
// fixtures do not depend on the library's own generator.

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

/// G G^T / d + floor I: well conditioned for floor ~ 0.1.
inline Eigen::MatrixXd random_spd(Eigen::Index d, std::mt19937_64& rng, double floor = 0.1) {
  const Eigen::MatrixXd g = gaussian(d, d, rng);
  return g * g.transpose() / static_cast<double>(d) + floor * Eigen::MatrixXd::Identity(d, d);
}

/// Rank-deficient PSD: G G^T with G d x r.
inline Eigen::MatrixXd random_psd(Eigen::Index d, Eigen::Index r, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = gaussian(d, r, rng);
  return g * g.transpose();
}

/// Determinant by LU, independent of the spectral routines under test.
inline double lu_det(const Eigen::MatrixXd& m) { return m.partialPivLu().determinant(); }

inline double rel_err(double got, double want, double scale) {
  return std::abs(got - want) / std::max(std::abs(want), scale);
}

}  // namespace testing
