#pragma once

// Symmetric-matrix algebra and PSD-cone primitives. Everything here is
// templated on the scalar type; the rest of the library uses the double
// aliases at the bottom.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conewalk/error.hpp"

namespace conewalk {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Relative cone-membership band: an eigenvalue >= -kConeAtol * ||x|| counts
/// as nonnegative.
inline constexpr double kConeAtol = 1e-12;
/// Relative threshold under which a PD matrix is treated as singular.
inline constexpr double kSingularTol = 1e-13;

/// Dense symmetric matrix. Construction symmetrizes (A + A^T) / 2 and keeps
/// the size of the correction so callers can audit it.
template <typename Scalar>
class SymMatrix {
 public:
  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
      throw DimensionError("SymMatrix requires a non-empty square matrix, got " +
                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    Matrix<Scalar> m = a.template cast<Scalar>();
    if (!m.allFinite()) throw Error("SymMatrix entries must be finite");
    asymmetry_ = Scalar(0.5) * (m - m.transpose()).norm();
    m_ = Scalar(0.5) * (m + m.transpose());
  }

  static SymMatrix identity(Index d) { return SymMatrix(Matrix<Scalar>::Identity(d, d)); }
  static SymMatrix zero(Index d) { return SymMatrix(Matrix<Scalar>::Zero(d, d)); }

  template <typename Derived>
  static SymMatrix diagonal(const Eigen::MatrixBase<Derived>& diag) {
    return SymMatrix(Matrix<Scalar>(diag.template cast<Scalar>().asDiagonal()));
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix<Scalar>& matrix() const noexcept { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  /// Frobenius norm of the antisymmetric part removed at construction.
  Scalar asymmetry() const noexcept { return asymmetry_; }
  Scalar norm() const { return m_.norm(); }
  Scalar trace() const { return m_.trace(); }

  SymMatrix operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }
  SymMatrix operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }
  SymMatrix operator*(Scalar s) const { return SymMatrix(Matrix<Scalar>(s * m_)); }
  friend SymMatrix operator*(Scalar s, const SymMatrix& x) { return x * s; }

  bool operator==(const SymMatrix& o) const {
    return m_.rows() == o.m_.rows() && m_ == o.m_;
  }

 private:
  Matrix<Scalar> m_;
  Scalar asymmetry_{0};
};

/// Eigenvalues ascending with orthonormal eigenvectors as columns.
template <typename Scalar>
struct SpectralForm {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;

  Index dim() const noexcept { return eigenvalues.size(); }
  Scalar lambda_min() const { return eigenvalues(0); }
  Scalar lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }

  /// V diag(fn(lambda)) V^T.
  template <typename Fn>
  Matrix<Scalar> apply(Fn&& fn) const {
    Vector<Scalar> mapped = eigenvalues.unaryExpr(fn);
    return eigenvectors * mapped.asDiagonal() * eigenvectors.transpose();
  }

  Matrix<Scalar> reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }
};

/// Dense 4-index array T(i, j, k, l), each index in [0, d).
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Index d) : d_(d), data_(static_cast<std::size_t>(d * d * d * d), Scalar(0)) {}

  Index dim() const noexcept { return d_; }
  Scalar& operator()(Index i, Index j, Index k, Index l) { return data_[offset(i, j, k, l)]; }
  Scalar operator()(Index i, Index j, Index k, Index l) const { return data_[offset(i, j, k, l)]; }

  Scalar max_abs() const {
    Scalar m(0);
    for (Scalar v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest violation of T_ijkl = T_jikl = T_ijlk = T_klij.
  Scalar symmetry_defect() const {
    Scalar worst(0);
    for (Index i = 0; i < d_; ++i)
      for (Index j = 0; j < d_; ++j)
        for (Index k = 0; k < d_; ++k)
          for (Index l = 0; l < d_; ++l) {
            const Scalar v = (*this)(i, j, k, l);
            worst = std::max({worst, std::abs(v - (*this)(j, i, k, l)),
                              std::abs(v - (*this)(i, j, l, k)),
                              std::abs(v - (*this)(k, l, i, j))});
          }
    return worst;
  }

 private:
  std::size_t offset(Index i, Index j, Index k, Index l) const {
    return static_cast<std::size_t>(((i * d_ + j) * d_ + k) * d_ + l);
  }

  Index d_{0};
  std::vector<Scalar> data_;
};

template <typename Scalar>
SpectralForm<Scalar> spectral_decompose(const SymMatrix<Scalar>& x) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(x.matrix());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolver did not converge",
                           x.matrix().template cast<double>());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Scalar>
Scalar cone_atol(const SymMatrix<Scalar>& x) {
  return Scalar(kConeAtol) * x.norm();
}

template <typename Scalar>
Scalar lambda_min(const SymMatrix<Scalar>& x) {
  return spectral_decompose(x).lambda_min();
}

template <typename Scalar>
bool is_psd(const SymMatrix<Scalar>& x) {
  return lambda_min(x) >= -cone_atol(x);
}

namespace detail {

template <typename Scalar>
void require_in_cone(const SymMatrix<Scalar>& x, const SpectralForm<Scalar>& s,
                     const char* op) {
  const Scalar lmin = s.lambda_min();
  if (lmin < -cone_atol(x)) {
    std::ostringstream msg;
    msg << op << ": matrix not in cone (lambda_min = " << lmin << ")";
    throw NotInConeError(msg.str(), static_cast<double>(lmin));
  }
}

template <typename Scalar>
void require_nonsingular(const SymMatrix<Scalar>& x, const SpectralForm<Scalar>& s,
                         const char* op) {
  const Scalar lmin = s.lambda_min();
  if (lmin <= Scalar(kSingularTol) * x.norm()) {
    std::ostringstream msg;
    msg << op << ": matrix on the boundary of the cone (lambda_min = " << lmin << ")";
    throw SingularError(msg.str(), static_cast<double>(lmin));
  }
}

}  // namespace detail

/// x^alpha for PSD x and alpha in [1/2, 1]. Eigenvalues inside the
/// membership band are clamped to zero first.
template <typename Scalar>
SymMatrix<Scalar> psd_power(const SymMatrix<Scalar>& x, Scalar alpha) {
  if (!(alpha >= Scalar(0.5) && alpha <= Scalar(1))) {
    throw std::invalid_argument("psd_power: alpha out of [0.5, 1]");
  }
  const auto s = spectral_decompose(x);
  detail::require_in_cone(x, s, "psd_power");
  return SymMatrix<Scalar>(
      s.apply([alpha](Scalar l) { return std::pow(std::max(l, Scalar(0)), alpha); }));
}

/// x^p for positive definite x and any real p (negative powers included).
template <typename Scalar>
SymMatrix<Scalar> spd_power(const SpectralForm<Scalar>& s, Scalar p) {
  return SymMatrix<Scalar>(s.apply([p](Scalar l) { return std::pow(l, p); }));
}

template <typename Scalar>
SymMatrix<Scalar> spd_power(const SymMatrix<Scalar>& x, Scalar p) {
  const auto s = spectral_decompose(x);
  detail::require_nonsingular(x, s, "spd_power");
  return spd_power(s, p);
}

template <typename Scalar>
SymMatrix<Scalar> inv_spd(const SpectralForm<Scalar>& s) {
  return SymMatrix<Scalar>(s.apply([](Scalar l) { return Scalar(1) / l; }));
}

template <typename Scalar>
SymMatrix<Scalar> inv_spd(const SymMatrix<Scalar>& x) {
  const auto s = spectral_decompose(x);
  detail::require_nonsingular(x, s, "inv_spd");
  return inv_spd(s);
}

template <typename Scalar>
Scalar det_spd(const SpectralForm<Scalar>& s) {
  return s.eigenvalues.prod();
}

template <typename Scalar>
Scalar log_det_spd(const SpectralForm<Scalar>& s) {
  return s.eigenvalues.array().log().sum();
}

/// Gradient of det on the open cone: det(x) x^{-1}.
template <typename Scalar>
SymMatrix<Scalar> det_gradient(const SymMatrix<Scalar>& x) {
  const auto s = spectral_decompose(x);
  detail::require_nonsingular(x, s, "det_gradient");
  return inv_spd(s) * det_spd(s);
}

/// H(i,j,k,l) = d^2 det / dx_ij dx_kl
///            = det(x) [ (x^-1)_kl (x^-1)_ij - (x^-1)_il (x^-1)_jk ].
template <typename Scalar>
Tensor4<Scalar> det_hessian(const SymMatrix<Scalar>& x) {
  const auto s = spectral_decompose(x);
  detail::require_nonsingular(x, s, "det_hessian");
  const Matrix<Scalar> inv = inv_spd(s).matrix();
  const Scalar det = det_spd(s);
  const Index d = x.dim();
  Tensor4<Scalar> h(d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l)
          h(i, j, k, l) = det * (inv(k, l) * inv(i, j) - inv(i, l) * inv(j, k));
  return h;
}

/// Frobenius distance from a PSD matrix to the cone boundary, which is its
/// smallest eigenvalue.
template <typename Scalar>
Scalar boundary_distance(const SymMatrix<Scalar>& x) {
  const auto s = spectral_decompose(x);
  detail::require_in_cone(x, s, "boundary_distance");
  return std::max(s.lambda_min(), Scalar(0));
}

/// Clamps every eigenvalue to at least `floor`.
template <typename Scalar>
SymMatrix<Scalar> cone_project(const SymMatrix<Scalar>& x, Scalar floor) {
  if (floor < Scalar(0)) throw std::invalid_argument("cone_project: negative floor");
  const auto s = spectral_decompose(x);
  if (s.lambda_min() >= floor) return x;
  return SymMatrix<Scalar>(s.apply([floor](Scalar l) { return std::max(l, floor); }));
}

/// <x, y> = Tr(xy).
template <typename Scalar>
Scalar trace_inner(const SymMatrix<Scalar>& x, const SymMatrix<Scalar>& y) {
  if (x.dim() != y.dim()) {
    throw DimensionError("trace_inner: dimension mismatch " + std::to_string(x.dim()) +
                         " vs " + std::to_string(y.dim()));
  }
  return x.matrix().cwiseProduct(y.matrix()).sum();
}

using SymMatrixd = SymMatrix<double>;
using SpectralFormd = SpectralForm<double>;
using Tensor4d = Tensor4<double>;
using MatrixXd = Eigen::MatrixXd;

// Matrix literal text format: rows separated by ';', entries by ','.
// Example: "2,1;1,2".
MatrixXd parse_matrix_literal(const std::string& text);
std::string format_matrix_literal(const MatrixXd& m);

}  // namespace conewalk
