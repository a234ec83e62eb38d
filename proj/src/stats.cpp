#include "conewalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace conewalk {

void RunningStats::push(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::sd() const noexcept { return std::sqrt(variance()); }

double RunningStats::standard_error() const noexcept {
  return n_ < 2 ? 0.0 : sd() / std::sqrt(static_cast<double>(n_));
}

RunningStats summarize(std::span<const double> xs) noexcept {
  RunningStats s;
  for (double x : xs) s.push(x);
  return s;
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level out of [0, 1]");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace conewalk
