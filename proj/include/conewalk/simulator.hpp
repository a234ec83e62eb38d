#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conewalk/linalg.hpp"
#include "conewalk/model.hpp"

namespace conewalk {

enum class BoundaryPolicy { stop, clamp, halve };

std::string to_string(BoundaryPolicy p);
BoundaryPolicy policy_from_string(const std::string& s);

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  /// Proposals with lambda_min <= boundary_eps count as boundary contact.
  /// Unset means 1e-8 * ||x0||.
  std::optional<double> boundary_eps;
  BoundaryPolicy policy = BoundaryPolicy::stop;
  int max_halvings = 4;
  std::uint64_t seed = 0;
  /// Every k-th grid point is stored; jump instants and the final point
  /// always are.
  std::size_t record_stride = 1;
  /// Keep the Brownian increment of every interval (requires stride 1).
  bool record_increments = false;

  void validate() const;
  double eps_for(const SymMatrixd& x0) const;
};

/// Matrix of i.i.d. N(0, h) entries. Entries are addressed by
/// (base step, piece within the step, halving level, sub-step, entry) in a
/// counter-based stream, so retries never shift later draws.
struct NoiseIncrement {
  MatrixXd db;

  static NoiseIncrement draw(std::uint64_t path_seed, std::uint64_t base_step, std::uint64_t piece,
                             int level, std::uint64_t sub, Index dim, double h);
  static NoiseIncrement zero(Index dim) { return {MatrixXd::Zero(dim, dim)}; }
};

struct StepDiagnostics {
  double det = 0.0;
  double lambda_min = 0.0;
  double trace = 0.0;
  bool jump = false;
};

struct JumpRecord {
  double time = 0.0;
  std::size_t index = 0;  // position of the post-jump state in Path::states
  SymMatrixd mark;
  SymMatrixd increment;   // K(X_{t-}) mark
  double increment_lambda_min = 0.0;
  double det_before = 0.0;
  double det_after = 0.0;
};

struct BoundaryEvent {
  double time = 0.0;
  double lambda_min = 0.0;
  std::string action;  // stop | clamp | halve_then_clamp
  std::size_t step = 0;
};

struct Path {
  std::vector<double> times;
  std::vector<SymMatrixd> states;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<JumpRecord> jumps;
  std::optional<BoundaryEvent> boundary_event;
  /// increments[i] drove states[i] -> states[i + 1] (record_increments only).
  std::vector<MatrixXd> increments;

  std::uint64_t seed = 0;
  SimConfig config;
  double boundary_eps = 0.0;
  /// Smallest lambda_min over every simulated state, including a rejected
  /// proposal that triggered a stop.
  double min_lambda = 0.0;
  std::size_t steps = 0;
  std::size_t halvings = 0;
  std::size_t clamps = 0;
  bool stopped = false;
};

/// One Euler-Maruyama increment from the left point:
///   x + F dB G + G^T dB^T F^T + H dt + sum_k K(x)(mark_k), symmetrized.
/// The result may leave the cone; boundary handling is the caller's job.
SymMatrixd step(const ModelSpec& model, double t, const SymMatrixd& x, const NoiseIncrement& db,
                double dt, std::span<const SymMatrixd> jump_marks = {});

/// Strong Euler-Maruyama path of the model on [0, horizon]. Jumps are
/// merged into the grid and applied at their exact times after the
/// diffusion sub-step that reaches them.
Path simulate_path(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg);

/// Jumps whose increment left the cone or that lowered det.
std::size_t count_jump_violations(const Path& path);

}  // namespace conewalk
