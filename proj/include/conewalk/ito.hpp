#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conewalk/linalg.hpp"
#include "conewalk/model.hpp"
#include "conewalk/simulator.hpp"

namespace conewalk {

/// ln det X_t = r_0 + M_t + P_t along one path.
///
/// P is the left-endpoint quadrature of
///   Tr(H x^-1) - Tr(f x^-1 g x^-1) - Tr(f x^-1) Tr(g x^-1)
/// plus the exact log-det jumps; M is the residual. qv_predicted integrates
/// 4 Tr(f x^-1 g x^-1) and qv_realized sums (dM)^2. drift_remainder sums
/// (l dt)^2 + Tr((x^-1 H)^2) dt^2, a bound on the second-order drift terms
/// a one-step log-det difference carries but the quadrature does not.
struct DecompositionRecord {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> p;
  std::vector<double> m;
  std::vector<double> floor;
  std::vector<double> qv_predicted;
  std::vector<double> qv_realized;
  std::vector<double> drift_remainder;
  std::size_t floor_violations = 0;
  double quadrature_tol = 0.0;
};

struct LogdetOptions {
  /// Multiplies the quadrature integrand. Anything other than 1 corrupts P
  /// on purpose; used as a negative control.
  double quadrature_scale = 1.0;
};

/// Requires a path recorded at every grid point (record_stride = 1).
DecompositionRecord logdet_decomposition(const Path& path, const ModelSpec& model,
                                         const LogdetOptions& opts = {});

/// Tolerance for P_t >= c t; proportional to dt.
double quadrature_tolerance(double dt, double c);

/// One record reduced to the values the ensemble tests need.
struct CheckpointSample {
  std::vector<double> m;
  std::vector<double> qv_realized;
  std::vector<double> qv_predicted;
  std::vector<double> allowance;
  std::size_t floor_violations = 0;
};

/// Values at the last grid time <= each checkpoint. A checkpoint past the
/// end of the record is an error unless `hold_last`, which freezes the
/// record at its final point (a path stopped at the boundary).
CheckpointSample sample_checkpoints(const DecompositionRecord& rec, std::span<const double> checkpoints,
                                    bool hold_last = false);

/// `n` equally spaced checkpoints in (0, horizon].
std::vector<double> uniform_checkpoints(double horizon, std::size_t n);

struct MartingaleReport {
  std::vector<double> checkpoints;
  std::vector<double> m_mean;
  std::vector<double> m_se;
  std::vector<double> qv_realized;
  std::vector<double> qv_predicted;
  std::vector<double> qv_se;
  std::vector<double> allowance;
  std::vector<bool> mean_pass;
  std::vector<bool> qv_pass;
  std::size_t n_records = 0;
  std::size_t floor_violations = 0;

  bool all_pass() const;
};

inline constexpr std::size_t kMinEnsemble = 100;

/// (i) |mean M_t| <= 3 SE and (ii) mean realized QV within
/// max(5%, 3 SE) of mean predicted QV, at each checkpoint. Both bands are
/// widened by the median drift remainder. Throws GridMismatchError if the
/// records do not share a grid.
MartingaleReport martingale_checks(std::span<const DecompositionRecord> records,
                                   std::span<const double> checkpoints);
MartingaleReport martingale_checks(std::span<const CheckpointSample> samples,
                                   std::span<const double> checkpoints);

/// Empirical d[X_ij, X_kl]/dt from one-step increments with coefficients
/// frozen at (0, x0), compared entrywise with covariation_tensor.
struct CovariationEstimate {
  Tensor4d estimate;
  Tensor4d standard_error;
  Tensor4d expected;
  std::size_t samples = 0;
  double max_z = 0.0;
  bool pass = false;
};

inline constexpr std::size_t kMinCovariationSamples = 10000;

CovariationEstimate covariation_empirical(const ModelSpec& model, const SymMatrixd& x0,
                                          std::size_t n_samples, double dt, std::uint64_t seed);

/// Integrand h(X) of the trace reduction.
struct HForm {
  enum class Kind { constant, sqrt_state, sqrt_state_q, state_power };
  Kind kind = Kind::constant;
  MatrixXd c;        // constant: h; sqrt_state_q: Q
  double power = 0.5;

  static HForm identity(Index d) { return {Kind::constant, MatrixXd::Identity(d, d), 0.0}; }
  static HForm unit(Index d, Index i, Index j);
  static HForm constant(MatrixXd h) { return {Kind::constant, std::move(h), 0.0}; }
  static HForm sqrt_state() { return {Kind::sqrt_state, {}, 0.5}; }
  static HForm sqrt_state_times(MatrixXd q) { return {Kind::sqrt_state_q, std::move(q), 0.5}; }
  static HForm state_power(double p) { return {Kind::state_power, {}, p}; }

  MatrixXd operator()(const SymMatrixd& x) const;
  std::string name() const;
};

/// Names: identity, unit:i,j (1-based), sqrt_state, sqrt_state_q,
/// power:p, const:<matrix literal>. sqrt_state_q takes Q from the model.
HForm hform_from_string(const std::string& s, const ModelSpec& model);

inline constexpr double kTraceDenominatorTol = 1e-14;

/// beta^h along one path: d beta = Tr(h dB) / sqrt(Tr(h^T h)). A vanishing
/// denominator switches to the unit direction e_11 (d beta = dB_11).
struct TraceReduction {
  std::vector<double> times;
  std::vector<double> beta;
  std::vector<double> qv;
  std::size_t degenerate_steps = 0;
};

/// Requires a path with recorded increments.
TraceReduction trace_brownian(const Path& path, const HForm& h);

struct TraceBrownianReport {
  std::string h_form;
  double horizon = 0.0;
  double qv_mean = 0.0;
  double qv_se = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

/// Is the ensemble mean of qv(T) within 3 SE of T?
TraceBrownianReport trace_brownian_check(std::span<const double> terminal_qv, double horizon,
                                         std::string h_form);

/// Drift of det X from Ito's formula assembled from the gradient, the
/// Hessian and the covariation tensor:
///   sum_ij grad_ij H_ij + 1/2 sum_ijkl hess_ijkl T_ijkl.
double det_ito_drift(const CoefficientSet& cs, const SymMatrixd& x);
/// The same drift in reduced form:
///   det(x) [Tr(H x^-1) + Tr(f x^-1 g x^-1) - Tr(f x^-1) Tr(g x^-1)].
double det_ito_drift_reduced(const CoefficientSet& cs, const SymMatrixd& x);

/// Ensemble verification on freshly simulated paths.
struct VerifyOptions {
  std::size_t n_paths = 500;
  std::size_t n_checkpoints = 5;
  std::vector<HForm> h_forms;
  double quadrature_scale = 1.0;
  unsigned threads = 0;
};

/// Stopped paths enter the martingale checks frozen at their stopping time
/// and are left out of the trace-Brownian checks.
struct VerifyReport {
  MartingaleReport martingale;
  std::vector<TraceBrownianReport> trace;
  std::size_t stopped_paths = 0;
  std::size_t jump_violations = 0;

  bool pass() const;
};

VerifyReport verify_ensemble(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg,
                             const VerifyOptions& opts);

}  // namespace conewalk
