#include "conewalk/ito.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "conewalk/parallel.hpp"
#include "conewalk/rng.hpp"
#include "conewalk/stats.hpp"
#include "conewalk/text.hpp"

namespace conewalk {

double quadrature_tolerance(double dt, double c) { return 1e-6 * dt * (1.0 + std::abs(c)); }

DecompositionRecord logdet_decomposition(const Path& path, const ModelSpec& model,
                                         const LogdetOptions& opts) {
  if (path.config.record_stride != 1) {
    throw Error("logdet_decomposition: path must be recorded with record_stride = 1");
  }
  const std::size_t n = path.states.size();
  if (n == 0) throw Error("logdet_decomposition: empty path");

  // Log-det jump sums keyed by the index of the post-jump state.
  std::vector<double> jump_log(n, 0.0);
  for (const auto& j : path.jumps) {
    if (j.index >= n) throw Error("logdet_decomposition: jump record outside the path");
    if (!(j.det_before > 0.0) || !(j.det_after > 0.0)) {
      throw SimulationError("logdet_decomposition: non-positive det at jump", j.index);
    }
    jump_log[j.index] += std::log(j.det_after) - std::log(j.det_before);
  }

  DecompositionRecord rec;
  rec.times = path.times;
  rec.r.reserve(n);
  rec.p.assign(n, 0.0);
  rec.m.assign(n, 0.0);
  rec.floor.assign(n, 0.0);
  rec.qv_predicted.assign(n, 0.0);
  rec.qv_realized.assign(n, 0.0);
  rec.drift_remainder.assign(n, 0.0);

  const double c = model.drift_floor;
  double rounding = 0.0;  // sum of |integrand dt|, scales the round-off band
  double ell = 0.0, qv_rate = 0.0, h_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SymMatrixd& x = path.states[i];
    const auto s = spectral_decompose(x);
    if (!(s.lambda_min() > 0.0)) {
      throw SimulationError("logdet_decomposition: non-positive det", i);
    }
    rec.r.push_back(log_det_spd(s));

    if (i > 0) {
      const double dt = rec.times[i] - rec.times[i - 1];
      const double drift = opts.quadrature_scale * ell * dt;
      rec.p[i] = rec.p[i - 1] + drift + jump_log[i];
      rec.qv_predicted[i] = rec.qv_predicted[i - 1] + 4.0 * qv_rate * dt;
      rec.drift_remainder[i] = rec.drift_remainder[i - 1] + drift * drift + h_sq * dt * dt;
      rec.m[i] = rec.r[i] - rec.r[0] - rec.p[i];
      const double dm = rec.m[i] - rec.m[i - 1];
      rec.qv_realized[i] = rec.qv_realized[i - 1] + dm * dm;
      rounding += std::abs(drift) + std::abs(jump_log[i]);
    }
    rec.floor[i] = c * rec.times[i];

    const double tol = quadrature_tolerance(path.config.dt, c) + 1e-12 * (1.0 + rounding);
    rec.quadrature_tol = std::max(rec.quadrature_tol, tol);
    if (rec.p[i] - rec.floor[i] < -tol) ++rec.floor_violations;

    // Left-endpoint integrands for the interval starting at t_i.
    if (i + 1 < n) {
      const auto cs = coefficients(model, rec.times[i], x, s);
      const SymMatrixd x_inv = inv_spd(s);
      ell = drift_margin(cs, x_inv);
      const MatrixXd fx = cs.f.matrix() * x_inv.matrix();
      const MatrixXd gx = cs.g.matrix() * x_inv.matrix();
      qv_rate = (fx * gx).trace();
      const MatrixXd hx = x_inv.matrix() * cs.h.matrix();
      h_sq = (hx * hx).trace();
    }
  }
  return rec;
}

std::vector<double> uniform_checkpoints(double horizon, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_checkpoints: need at least one checkpoint");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    out.push_back(k == n ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n));
  }
  return out;
}

namespace {

// Index of the last grid time <= t (with a relative slack for rounding).
std::size_t locate(const std::vector<double>& times, double t) {
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  const auto it = std::upper_bound(times.begin(), times.end(), t + slack);
  if (it == times.begin()) throw Error("checkpoint before the start of the path");
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

}  // namespace

CheckpointSample sample_checkpoints(const DecompositionRecord& rec,
                                    std::span<const double> checkpoints, bool hold_last) {
  CheckpointSample out;
  out.floor_violations = rec.floor_violations;
  for (double t : checkpoints) {
    if (rec.times.empty()) throw Error("sample_checkpoints: empty record");
    if (!hold_last && t > rec.times.back() + 1e-9 * std::max(1.0, t)) {
      throw Error("checkpoint " + format_double(t) + " beyond the end of the path");
    }
    const std::size_t i = locate(rec.times, t);
    out.m.push_back(rec.m[i]);
    out.qv_realized.push_back(rec.qv_realized[i]);
    out.qv_predicted.push_back(rec.qv_predicted[i]);
    out.allowance.push_back(rec.drift_remainder[i]);
  }
  return out;
}

bool MartingaleReport::all_pass() const {
  return std::all_of(mean_pass.begin(), mean_pass.end(), [](bool b) { return b; }) &&
         std::all_of(qv_pass.begin(), qv_pass.end(), [](bool b) { return b; });
}

MartingaleReport martingale_checks(std::span<const CheckpointSample> samples,
                                   std::span<const double> checkpoints) {
  if (samples.size() < kMinEnsemble) {
    throw Error("martingale_checks: need at least " + std::to_string(kMinEnsemble) +
                " records, got " + std::to_string(samples.size()));
  }
  MartingaleReport rep;
  rep.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  rep.n_records = samples.size();
  for (const auto& s : samples) {
    if (s.m.size() != checkpoints.size()) {
      throw GridMismatchError("martingale_checks: sample has the wrong number of checkpoints");
    }
    rep.floor_violations += s.floor_violations;
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    RunningStats m, real, pred, diff;
    std::vector<double> allow;
    for (const auto& s : samples) {
      m.push(s.m[c]);
      real.push(s.qv_realized[c]);
      pred.push(s.qv_predicted[c]);
      diff.push(s.qv_realized[c] - s.qv_predicted[c]);
      allow.push_back(s.allowance[c]);
    }
    // Median, not mean: a few paths close to the boundary have remainders
    // orders of magnitude above the rest and would make the bands vacuous.
    const double allowance = quantile(allow, 0.5);
    rep.m_mean.push_back(m.mean());
    rep.m_se.push_back(m.standard_error());
    rep.qv_realized.push_back(real.mean());
    rep.qv_predicted.push_back(pred.mean());
    rep.qv_se.push_back(diff.standard_error());
    rep.allowance.push_back(allowance);
    rep.mean_pass.push_back(std::abs(m.mean()) <= 3.0 * m.standard_error() + allowance);
    const double band = std::max(0.05 * std::abs(pred.mean()), 3.0 * diff.standard_error());
    rep.qv_pass.push_back(std::abs(real.mean() - pred.mean()) <= band + allowance);
  }
  return rep;
}

MartingaleReport martingale_checks(std::span<const DecompositionRecord> records,
                                   std::span<const double> checkpoints) {
  if (records.size() < kMinEnsemble) {
    throw Error("martingale_checks: need at least " + std::to_string(kMinEnsemble) +
                " records, got " + std::to_string(records.size()));
  }
  const auto& grid = records.front().times;
  std::vector<CheckpointSample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    if (r.times != grid) throw GridMismatchError("martingale_checks: records are on different grids");
    samples.push_back(sample_checkpoints(r, checkpoints));
  }
  return martingale_checks(samples, checkpoints);
}

CovariationEstimate covariation_empirical(const ModelSpec& model, const SymMatrixd& x0,
                                          std::size_t n_samples, double dt, std::uint64_t seed) {
  if (n_samples < kMinCovariationSamples) {
    throw Error("covariation_empirical: insufficient sample (" + std::to_string(n_samples) +
                " < " + std::to_string(kMinCovariationSamples) + ")");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("covariation_empirical: dt must be > 0");
  const auto cs = coefficients(model, 0.0, x0);
  const Index d = model.dim;
  const auto d2 = static_cast<std::size_t>(d * d);
  const CounterRng rng(seed);
  const double scale = std::sqrt(dt);

  // Increments flattened row-major, one row of d^2 entries per sample.
  std::vector<double> inc(n_samples * d2);
  std::vector<double> mean(d2, 0.0);
  MatrixXd db(d, d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        db(i, j) = scale * rng.normal(s * d2 + static_cast<std::size_t>(i * d + j));
    const MatrixXd fdbg = cs.big_f * db * cs.big_g;
    const MatrixXd dx = fdbg + fdbg.transpose() + dt * cs.h.matrix();
    for (std::size_t e = 0; e < d2; ++e) {
      const double v = dx(static_cast<Index>(e) / d, static_cast<Index>(e) % d);
      inc[s * d2 + e] = v;
      mean[e] += v;
    }
  }
  for (double& m : mean) m /= static_cast<double>(n_samples);

  CovariationEstimate out{Tensor4d(d), Tensor4d(d), covariation_tensor(cs), n_samples, 0.0, true};
  for (std::size_t a = 0; a < d2; ++a)
    for (std::size_t b = a; b < d2; ++b) {
      RunningStats prod;
      for (std::size_t s = 0; s < n_samples; ++s) {
        prod.push((inc[s * d2 + a] - mean[a]) * (inc[s * d2 + b] - mean[b]) / dt);
      }
      const Index i = static_cast<Index>(a) / d, j = static_cast<Index>(a) % d;
      const Index k = static_cast<Index>(b) / d, l = static_cast<Index>(b) % d;
      const double est = prod.mean();
      const double se = prod.standard_error();
      out.estimate(i, j, k, l) = out.estimate(k, l, i, j) = est;
      out.standard_error(i, j, k, l) = out.standard_error(k, l, i, j) = se;
      const double err = std::abs(est - out.expected(i, j, k, l));
      if (se > 0.0) out.max_z = std::max(out.max_z, err / se);
      if (err > 3.0 * se + 1e-12) out.pass = false;
    }
  return out;
}

HForm HForm::unit(Index d, Index i, Index j) {
  if (i < 0 || j < 0 || i >= d || j >= d) throw std::invalid_argument("HForm::unit: index out of range");
  MatrixXd e = MatrixXd::Zero(d, d);
  e(i, j) = 1.0;
  return constant(std::move(e));
}

MatrixXd HForm::operator()(const SymMatrixd& x) const {
  switch (kind) {
    case Kind::constant:
      if (c.rows() != x.dim() || c.cols() != x.dim()) throw DimensionError("HForm: constant has wrong dimension");
      return c;
    case Kind::sqrt_state:
      return psd_power(x, 0.5).matrix();
    case Kind::sqrt_state_q:
      return psd_power(x, 0.5).matrix() * c;
    case Kind::state_power: {
      const auto s = spectral_decompose(x);
      detail::require_in_cone(x, s, "HForm");
      const double p = power;
      return s.apply([p](double l) { return std::pow(std::max(l, 0.0), p); });
    }
  }
  return c;
}

std::string HForm::name() const {
  switch (kind) {
    case Kind::constant: {
      const Index d = c.rows();
      if (c.isIdentity(0.0)) return "identity";
      Index nonzero = 0, ui = 0, uj = 0;
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < c.cols(); ++j)
          if (c(i, j) != 0.0) {
            ++nonzero;
            ui = i;
            uj = j;
          }
      if (nonzero == 1 && c(ui, uj) == 1.0) {
        return "unit:" + std::to_string(ui + 1) + "," + std::to_string(uj + 1);
      }
      return "const:" + format_matrix_literal(c);
    }
    case Kind::sqrt_state: return "sqrt_state";
    case Kind::sqrt_state_q: return "sqrt_state_q";
    case Kind::state_power: return "power:" + format_double(power);
  }
  return "identity";
}

HForm hform_from_string(const std::string& text, const ModelSpec& model) {
  const std::string s(trim(text));
  const Index d = model.dim;
  if (s == "identity") return HForm::identity(d);
  if (s == "sqrt_state") return HForm::sqrt_state();
  if (s == "sqrt_state_q") {
    if (!model.has_diffusion()) throw Error("h form sqrt_state_q needs a model with Q");
    return HForm::sqrt_state_times(model.q);
  }
  if (s.starts_with("unit:")) {
    const auto parts = split(s.substr(5), ',');
    if (parts.size() != 2) throw Error("h form unit expects unit:i,j");
    const auto i = parse_integer(parts[0]), j = parse_integer(parts[1]);
    if (i < 1 || j < 1 || i > d || j > d) throw Error("h form unit index out of range 1.." + std::to_string(d));
    return HForm::unit(d, i - 1, j - 1);
  }
  if (s.starts_with("power:")) {
    const double p = parse_double(s.substr(6));
    if (p < 0.0) throw Error("h form power must be >= 0");
    return HForm::state_power(p);
  }
  if (s.starts_with("const:")) {
    MatrixXd m = parse_matrix_literal(s.substr(6));
    if (m.rows() != d || m.cols() != d) throw DimensionError("h form constant has wrong dimension");
    return HForm::constant(std::move(m));
  }
  throw Error("unknown h form '" + s + "'");
}

TraceReduction trace_brownian(const Path& path, const HForm& h) {
  if (path.increments.empty() && path.states.size() > 1) {
    throw Error("trace_brownian: increments unavailable (simulate with record_increments)");
  }
  if (path.increments.size() + 1 != path.states.size()) {
    throw Error("trace_brownian: increments do not match the recorded states");
  }
  TraceReduction out;
  out.times = path.times;
  out.beta.push_back(0.0);
  out.qv.push_back(0.0);
  for (std::size_t i = 0; i < path.increments.size(); ++i) {
    const MatrixXd& db = path.increments[i];
    const MatrixXd hm = h(path.states[i]);
    const double den = hm.norm();
    double step;
    if (den < kTraceDenominatorTol) {
      step = db(0, 0);
      ++out.degenerate_steps;
    } else {
      step = (hm * db).trace() / den;
    }
    out.beta.push_back(out.beta.back() + step);
    out.qv.push_back(out.qv.back() + step * step);
  }
  return out;
}

TraceBrownianReport trace_brownian_check(std::span<const double> terminal_qv, double horizon,
                                         std::string h_form) {
  const auto st = summarize(terminal_qv);
  TraceBrownianReport r;
  r.h_form = std::move(h_form);
  r.horizon = horizon;
  r.qv_mean = st.mean();
  r.qv_se = st.standard_error();
  r.n = st.count();
  r.pass = r.n >= 2 && std::abs(r.qv_mean - horizon) <= 3.0 * r.qv_se;
  return r;
}

double det_ito_drift(const CoefficientSet& cs, const SymMatrixd& x) {
  const SymMatrixd grad = det_gradient(x);
  const Tensor4d hess = det_hessian(x);
  const Tensor4d cov = covariation_tensor(cs);
  const Index d = x.dim();
  double first = 0.0, second = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      first += grad(i, j) * cs.h(i, j);
      for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l) second += hess(i, j, k, l) * cov(i, j, k, l);
    }
  return first + 0.5 * second;
}

double det_ito_drift_reduced(const CoefficientSet& cs, const SymMatrixd& x) {
  const auto s = spectral_decompose(x);
  detail::require_nonsingular(x, s, "det_ito_drift_reduced");
  const MatrixXd x_inv = inv_spd(s).matrix();
  const MatrixXd fx = cs.f.matrix() * x_inv;
  const MatrixXd gx = cs.g.matrix() * x_inv;
  return det_spd(s) * ((cs.h.matrix() * x_inv).trace() + (fx * gx).trace() - fx.trace() * gx.trace());
}

bool VerifyReport::pass() const {
  return martingale.all_pass() && martingale.floor_violations == 0 && jump_violations == 0 &&
         std::all_of(trace.begin(), trace.end(), [](const auto& t) { return t.pass; });
}

namespace {

struct PathOutcome {
  bool stopped = false;
  std::optional<CheckpointSample> sample;
  std::vector<double> terminal_qv;
  std::size_t jump_violations = 0;
};

}  // namespace

VerifyReport verify_ensemble(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg,
                             const VerifyOptions& opts) {
  SimConfig run = cfg;
  run.record_stride = 1;
  run.record_increments = !opts.h_forms.empty();
  run.validate();
  const auto checkpoints = uniform_checkpoints(run.horizon, opts.n_checkpoints);
  const LogdetOptions lo{opts.quadrature_scale};

  std::vector<PathOutcome> outcomes(opts.n_paths);
  parallel_for(opts.n_paths, resolve_threads(opts.threads), [&](std::size_t i) {
    SimConfig pc = run;
    pc.seed = derive_seed(run.seed, i);
    const Path path = simulate_path(model, x0, pc);
    PathOutcome& o = outcomes[i];
    o.jump_violations = count_jump_violations(path);
    o.stopped = path.stopped;
    // A stopped path enters with M frozen at the stopping time, which keeps
    // it a martingale; dropping it would bias the ensemble toward survivors.
    o.sample = sample_checkpoints(logdet_decomposition(path, model, lo), checkpoints, path.stopped);
    if (path.stopped) return;
    for (const auto& h : opts.h_forms) o.terminal_qv.push_back(trace_brownian(path, h).qv.back());
  });

  VerifyReport rep;
  std::vector<CheckpointSample> samples;
  std::vector<std::vector<double>> qv(opts.h_forms.size());
  for (auto& o : outcomes) {
    rep.jump_violations += o.jump_violations;
    samples.push_back(std::move(*o.sample));
    if (o.stopped) {
      ++rep.stopped_paths;
      continue;
    }
    for (std::size_t h = 0; h < qv.size(); ++h) qv[h].push_back(o.terminal_qv[h]);
  }
  rep.martingale = martingale_checks(samples, checkpoints);
  for (std::size_t h = 0; h < qv.size(); ++h) {
    rep.trace.push_back(trace_brownian_check(qv[h], run.horizon, opts.h_forms[h].name()));
  }
  return rep;
}

}  // namespace conewalk
