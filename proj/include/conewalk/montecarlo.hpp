#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conewalk/linalg.hpp"
#include "conewalk/model.hpp"
#include "conewalk/simulator.hpp"

namespace conewalk {

struct PathSummary {
  std::uint64_t seed = 0;
  bool hit = false;
  std::optional<double> first_proximity_time;
  double min_lambda = 0.0;
  std::size_t jumps = 0;
  std::size_t jump_violations = 0;
  std::optional<std::string> error;
};

/// Boundary statistics of an ensemble run with the stop policy. A hit is a
/// path whose lambda_min fell to boundary_eps before the horizon. Paths that
/// raised an error are counted in `errors` and left out of every other
/// statistic, including the hit_fraction denominator.
struct EnsembleResult {
  ModelSpec model;
  SymMatrixd x0;
  SimConfig config;
  std::size_t n_paths = 0;
  std::size_t hits = 0;
  std::size_t errors = 0;
  double hit_fraction = 0.0;
  double min_lambda_q05 = 0.0;
  double min_lambda_q50 = 0.0;
  double min_lambda_q95 = 0.0;
  std::optional<double> mean_first_proximity_time;
  std::size_t jumps = 0;
  std::size_t jump_violations = 0;
  std::vector<PathSummary> paths;
  /// Wall-clock seconds; filled only on request so outputs stay reproducible.
  std::optional<double> runtime_seconds;
};

struct EnsembleOptions {
  std::size_t n_paths = 1000;
  unsigned threads = 0;
  bool timing = false;
};

/// Path i uses seed derive_seed(cfg.seed, i), so two calls with the same
/// master seed drive their paths with the same Brownian streams.
EnsembleResult boundary_stats(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg,
                              const EnsembleOptions& opts);

enum class SweepAxis { delta, alpha, jump_rate, dt };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

/// Copy of (model, cfg) with the axis set to `value`:
///   delta      b = value Q^T Q (wishart, gcir, general)
///   alpha      diffusion exponent (gcir, general)
///   jump_rate  compound Poisson rate (model must have compound Poisson jumps)
///   dt         simulator step
/// Throws on an axis that does not apply to the model.
void apply_axis(SweepAxis axis, double value, ModelSpec& model, SimConfig& cfg);

struct SweepCell {
  double value = 0.0;
  std::optional<EnsembleResult> result;
  std::optional<std::string> error;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::delta;
  std::vector<SweepCell> cells;
};

/// One boundary_stats run per axis value, in the given order. A failing cell
/// records its error and the sweep moves on.
SweepTable regime_sweep(const ModelSpec& base, const SymMatrixd& x0, const SimConfig& cfg,
                        SweepAxis axis, const std::vector<double>& values, const EnsembleOptions& opts);

}  // namespace conewalk
