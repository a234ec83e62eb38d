#pragma once

#include <cstddef>
#include <span>

namespace conewalk {

/// Running mean / variance (Welford). Summation order is the insertion
/// order, so a fixed order gives bit-identical results.
class RunningStats {
 public:
  void push(double x) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const noexcept;
  double sd() const noexcept;
  /// sd / sqrt(n); 0 for fewer than two samples.
  double standard_error() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

RunningStats summarize(std::span<const double> xs) noexcept;

/// Linear-interpolation quantile (type 7) of unsorted data, q in [0, 1].
/// Throws std::invalid_argument on empty input.
double quantile(std::span<const double> xs, double q);

}  // namespace conewalk
