#include "conewalk/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conewalk/rng.hpp"
#include "conewalk/text.hpp"

namespace conewalk {

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::wishart_drift: return "wishart_drift";
    case ConditionId::gcir_pointwise: return "gcir_pointwise";
    case ConditionId::gcir_a: return "gcir_a";
    case ConditionId::gcir_b: return "gcir_b";
    case ConditionId::gcir_c: return "gcir_c";
    case ConditionId::gcir_d: return "gcir_d";
    case ConditionId::gcir_e: return "gcir_e";
    case ConditionId::gcir_f: return "gcir_f";
    case ConditionId::gcir_g: return "gcir_g";
    case ConditionId::theorem_floor: return "theorem_floor";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

ConditionId condition_from_string(const std::string& s) {
  for (auto id : {ConditionId::wishart_drift, ConditionId::gcir_pointwise, ConditionId::gcir_a,
                  ConditionId::gcir_b, ConditionId::gcir_c, ConditionId::gcir_d, ConditionId::gcir_e,
                  ConditionId::gcir_f, ConditionId::gcir_g, ConditionId::theorem_floor}) {
    if (to_string(id) == s) return id;
  }
  throw Error("unknown condition '" + s + "'");
}

ConditionId to_condition(GcirVariant v) {
  return static_cast<ConditionId>(static_cast<int>(ConditionId::gcir_a) + static_cast<int>(v));
}

GcirVariant variant_from_condition(ConditionId id) {
  const int k = static_cast<int>(id) - static_cast<int>(ConditionId::gcir_a);
  if (k < 0 || k > static_cast<int>(GcirVariant::g)) {
    throw std::invalid_argument("not a gcir sufficient-set condition: " + to_string(id));
  }
  return static_cast<GcirVariant>(k);
}

std::string SamplePlan::describe() const {
  std::ostringstream s;
  s << "x = G G^T + eps I, G iid N(0,1), eps in {";
  for (std::size_t i = 0; i < eps_levels.size(); ++i) s << (i ? "," : "") << format_double(eps_levels[i]);
  s << "}";
  if (include_extremes) {
    s << "; extremes diag(eps,1,...,1) and s I, s in {";
    for (std::size_t i = 0; i < large_scales.size(); ++i) s << (i ? "," : "") << format_double(large_scales[i]);
    s << "}";
  }
  return s.str();
}

std::vector<SymMatrixd> sample_states(Index dim, const SamplePlan& plan) {
  std::vector<SymMatrixd> out;
  out.reserve(plan.n + plan.eps_levels.size() + plan.large_scales.size() + 1);
  const CounterRng rng(derive_seed(plan.seed, 0x53414d50ULL));
  std::uint64_t counter = 0;
  const std::size_t levels = std::max<std::size_t>(plan.eps_levels.size(), 1);
  for (std::size_t n = 0; n < plan.n; ++n) {
    MatrixXd g(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) g(i, j) = rng.normal(counter++);
    const double eps = plan.eps_levels.empty() ? 1.0 : plan.eps_levels[n % levels];
    out.emplace_back(MatrixXd(g * g.transpose() + eps * MatrixXd::Identity(dim, dim)));
  }
  if (plan.include_extremes) {
    out.push_back(SymMatrixd::identity(dim));
    for (double eps : plan.eps_levels) {
      Eigen::VectorXd diag = Eigen::VectorXd::Ones(dim);
      diag(0) = eps;
      out.push_back(SymMatrixd::diagonal(diag));
    }
    for (double s : plan.large_scales) out.push_back(SymMatrixd::identity(dim) * s);
  }
  return out;
}

GcirParams GcirParams::from_model(const ModelSpec& m) {
  return {m.diffusion_power(), m.b, m.q, m.gamma};
}

namespace {

double lambda_min_of(const MatrixXd& m) { return lambda_min(SymMatrixd(m)); }

double matrix_tol(const MatrixXd& lhs, const MatrixXd& rhs) {
  return 1e-10 * (lhs.norm() + rhs.norm());
}

double qtq_top(const MatrixXd& q) {
  const SymMatrixd p(MatrixXd(q.transpose() * q));
  return spectral_decompose(p).lambda_max();
}

struct Gap {
  double value;
  double tol;
  bool holds() const { return value >= -tol; }
};

Gap pointwise(const GcirParams& p, const SymMatrixd& x) {
  const auto s = spectral_decompose(x);
  const MatrixXd x_inv = inv_spd(s).matrix();
  const MatrixXd qtq = p.q.transpose() * p.q;
  MatrixXd lhs_m = p.b.matrix();
  if (!p.gamma.is_zero()) lhs_m += p.gamma.evaluate(x, s).matrix();
  const double lhs = (lhs_m * x_inv).trace();
  const double tr_pow = s.eigenvalues.array().pow(2.0 * p.alpha - 1.0).sum();
  const double rhs = tr_pow * (qtq * x_inv).trace() + (spd_power(s, 2.0 * p.alpha - 2.0).matrix() * qtq).trace();
  return {lhs - rhs, 1e-10 * (std::abs(lhs) + std::abs(rhs))};
}

// `gap_e` is max_gap(alpha) when the caller already has it; variant (e)
// otherwise recomputes it, which dominates the cost of a sampled check.
Gap variant_gap(GcirVariant v, const GcirParams& p, const SymMatrixd& x, double gap_e = -1.0) {
  const Index d = p.dim();
  if (x.dim() != d) throw DimensionError("gcir condition: state has wrong dimension");
  const double a = p.alpha;
  if (v == GcirVariant::c && a != 1.0) throw std::invalid_argument("variant (c) requires alpha = 1");
  if (v == GcirVariant::g) {
    if (d != 1 || !(a > 0.5)) throw std::invalid_argument("variant (g) requires d = 1 and alpha > 1/2");
    // Gamma >= 0 holds by construction; what remains is b > 0.
    const double b = p.b(0, 0);
    return {b > 0.0 ? b : std::min(b, -std::numeric_limits<double>::min()), 0.0};
  }
  const auto s = spectral_decompose(x);
  const MatrixXd qtq = p.q.transpose() * p.q;
  const MatrixXd gamma = p.gamma.is_zero() ? MatrixXd::Zero(d, d) : p.gamma.evaluate(x, s).matrix();
  const double tr_pow = s.eigenvalues.array().pow(2.0 * a - 1.0).sum();
  switch (v) {
    case GcirVariant::a: {
      const MatrixXd root = spd_power(s, a - 0.5).matrix();
      const MatrixXd lhs = p.b.matrix() + gamma;
      const MatrixXd rhs = tr_pow * qtq + root * qtq * root;
      return {lambda_min_of(lhs - rhs), matrix_tol(lhs, rhs)};
    }
    case GcirVariant::b: {
      const MatrixXd lhs = p.b.matrix() + gamma;
      const MatrixXd rhs = tr_pow * qtq + qtq_top(p.q) * spd_power(s, 2.0 * a - 1.0).matrix();
      return {lambda_min_of(lhs - rhs), matrix_tol(lhs, rhs)};
    }
    case GcirVariant::c: {
      const MatrixXd lhs = p.b.matrix() + gamma;
      const MatrixXd rhs = x.trace() * qtq + qtq_top(p.q) * x.matrix();
      return {lambda_min_of(lhs - rhs), matrix_tol(lhs, rhs)};
    }
    case GcirVariant::d:
    case GcirVariant::e:
    case GcirVariant::f: {
      double scale = 0.0;
      if (v == GcirVariant::d) {
        scale = 2.0 * tr_pow;
      } else {
        const double gap = v == GcirVariant::e ? (gap_e >= 0.0 ? gap_e : max_gap(a)) : 1.0;
        scale = 2.0 * (x.trace() + static_cast<double>(d) * gap);
      }
      const MatrixXd rhs = scale * qtq;
      const double lb = lambda_min(p.b);
      const Gap b_part{lb, kConeAtol * p.b.norm()};
      const Gap g_part{lambda_min_of(gamma - rhs), matrix_tol(gamma, rhs)};
      return b_part.holds() ? g_part : b_part;
    }
    case GcirVariant::g:
      break;
  }
  return {0.0, 0.0};
}

/// Constant part and (at most one) scaled-trace part of Gamma, when the
/// closed-form reductions apply.
struct GammaParts {
  MatrixXd c0;
  bool has_trace = false;
  GammaTerm trace;
};

std::optional<GammaParts> split_gamma(const GammaSpec& gamma, Index d) {
  GammaParts parts{MatrixXd::Zero(d, d), false, {}};
  for (const auto& t : gamma.terms()) {
    switch (t.form) {
      case GammaTerm::Form::constant:
        parts.c0 += t.c.matrix();
        break;
      case GammaTerm::Form::congruence:
        return std::nullopt;
      case GammaTerm::Form::scaled_trace:
        if (parts.has_trace) return std::nullopt;
        parts.has_trace = true;
        parts.trace = t;
        break;
    }
  }
  return parts;
}

/// Infimum of gamma(x) = offset + coef Tr(x^p) over the open cone, and
/// whether gamma is constant.
std::pair<double, bool> trace_range(const GammaParts& g, Index d) {
  if (!g.has_trace) return {0.0, true};
  const auto& t = g.trace;
  if (t.power == 0.0) return {t.offset + t.coef * static_cast<double>(d), true};
  return {t.offset, t.coef == 0.0};
}

MatrixXd trace_direction(const GammaParts& g, Index d) {
  return g.has_trace ? g.trace.c.matrix() : MatrixXd::Zero(d, d);
}

/// Searches x = s I over s in 10^-12 .. 10^12 for a counterexample.
std::optional<Witness> search_scalar_witness(GcirVariant v, const GcirParams& p) {
  const Index d = p.dim();
  std::vector<double> scales{1.0};
  for (int k = 1; k <= 12; ++k) {
    scales.push_back(std::pow(10.0, k));
    scales.push_back(std::pow(10.0, -k));
  }
  for (double s : scales) {
    const SymMatrixd x = SymMatrixd::identity(d) * s;
    const Gap g = variant_gap(v, p, x);
    if (!g.holds()) return Witness{x.matrix(), g.value, g.value};
  }
  return std::nullopt;
}

struct ExactVerdict {
  bool pass;
  std::optional<Witness> witness;
};

/// Closed-form verdicts for (a)-(f); nullopt when Gamma is not reducible.
std::optional<ExactVerdict> exact_gcir(GcirVariant v, const GcirParams& p) {
  const Index d = p.dim();
  const double dd = static_cast<double>(d);
  const auto parts = split_gamma(p.gamma, d);
  if (!parts) return std::nullopt;
  const auto [gmin, gconst] = trace_range(*parts, d);
  const MatrixXd ct = trace_direction(*parts, d);
  const MatrixXd qtq = p.q.transpose() * p.q;
  const double lq = qtq_top(p.q);
  const bool q_zero = lq <= 0.0;
  const double a = p.alpha;

  auto matrix_check = [](const MatrixXd& lhs, const MatrixXd& rhs) -> ExactVerdict {
    const double l = lambda_min_of(lhs - rhs);
    if (l >= -matrix_tol(lhs, rhs)) return {true, std::nullopt};
    return {false, Witness{std::nullopt, l, l}};
  };
  auto unbounded_fail = [&]() -> std::optional<ExactVerdict> {
    auto w = search_scalar_witness(v, p);
    if (!w) return std::nullopt;
    return ExactVerdict{false, w};
  };

  const MatrixXd lhs_min = p.b.matrix() + parts->c0 + gmin * ct;
  switch (v) {
    case GcirVariant::a:
    case GcirVariant::b:
    case GcirVariant::c: {
      if (v != GcirVariant::c && a == 0.5) {
        const MatrixXd rhs = v == GcirVariant::a ? MatrixXd((dd + 1.0) * qtq)
                                                 : MatrixXd(dd * qtq + lq * MatrixXd::Identity(d, d));
        return matrix_check(lhs_min, rhs);
      }
      if (q_zero) return matrix_check(lhs_min, MatrixXd::Zero(d, d));
      // RHS grows without bound along s I while a constant Gamma does not.
      if (gconst) return unbounded_fail();
      return std::nullopt;
    }
    case GcirVariant::d:
    case GcirVariant::e:
    case GcirVariant::f: {
      const double lb = lambda_min(p.b);
      if (lb < -kConeAtol * p.b.norm()) return ExactVerdict{false, Witness{std::nullopt, lb, lb}};
      if (q_zero) return ExactVerdict{true, std::nullopt};
      const MatrixXd gamma_min = parts->c0 + gmin * ct;
      if (v == GcirVariant::d && a == 0.5) return matrix_check(gamma_min, 2.0 * dd * qtq);
      // The RHS factor (Tr(x^{2a-1}) or Tr(x)) ranges over (0, inf); a
      // Gamma that does not grow with the same trace cannot keep up.
      const double needed_power = v == GcirVariant::d ? 2.0 * a - 1.0 : 1.0;
      if (gconst) return unbounded_fail();
      if (std::abs(parts->trace.power - needed_power) > 1e-15) return std::nullopt;
      const double shift = v == GcirVariant::d ? 0.0 : 2.0 * dd * (v == GcirVariant::e ? max_gap(a) : 1.0);
      // Affine in the trace t >= 0: PSD at t = 0 and along the ray direction.
      const MatrixXd at_zero = parts->c0 + parts->trace.offset * ct;
      const auto base = matrix_check(at_zero, shift * qtq);
      if (!base.pass) return base;
      const auto slope = matrix_check(parts->trace.coef * ct, 2.0 * qtq);
      if (!slope.pass) {
        if (auto w = unbounded_fail()) return w;
      }
      return slope;
    }
    case GcirVariant::g:
      break;
  }
  return std::nullopt;
}

}  // namespace

double gcir_pointwise_gap(const GcirParams& p, const SymMatrixd& x) { return pointwise(p, x).value; }

bool check_gcir_pointwise(const GcirParams& p, const SymMatrixd& x) {
  if (!(p.alpha >= 0.5 && p.alpha <= 1.0)) throw std::invalid_argument("alpha out of [0.5, 1]");
  return pointwise(p, x).holds();
}

double gcir_variant_gap(GcirVariant v, const GcirParams& p, const SymMatrixd& x) {
  return variant_gap(v, p, x).value;
}

bool gcir_variant_holds(GcirVariant v, const GcirParams& p, const SymMatrixd& x) {
  return variant_gap(v, p, x).holds();
}

ConditionReport check_wishart_drift(const SymMatrixd& b, const MatrixXd& q, Index d) {
  if (b.dim() != d || q.rows() != d || q.cols() != d) {
    throw DimensionError("check_wishart_drift: dimension mismatch");
  }
  const MatrixXd qtq = q.transpose() * q;
  const MatrixXd rhs = (static_cast<double>(d) + 1.0) * qtq;
  const double l = lambda_min_of(b.matrix() - rhs);
  const double atol = kConeAtol * (b.norm() + rhs.norm());
  ConditionReport r;
  r.condition_id = ConditionId::wishart_drift;
  r.exact = true;
  r.sampling_law = "none (exact eigenvalue test)";
  r.lambda_qtq = qtq_top(q);
  r.verdict = l >= -atol ? Verdict::pass : Verdict::fail;
  if (r.verdict == Verdict::fail) r.witness = Witness{std::nullopt, l, l};
  return r;
}

ConditionReport check_gcir_sufficient(GcirVariant v, const GcirParams& p, const SamplePlan& plan) {
  if (!(p.alpha >= 0.5 && p.alpha <= 1.0)) throw std::invalid_argument("alpha out of [0.5, 1]");
  if (p.q.rows() != p.dim() || p.q.cols() != p.dim()) throw DimensionError("Q has wrong dimension");
  p.gamma.validate(p.dim());
  ConditionReport r;
  r.condition_id = to_condition(v);
  r.lambda_qtq = qtq_top(p.q);
  r.seed = plan.seed;

  if (v == GcirVariant::g) {
    const Gap g = variant_gap(v, p, SymMatrixd::identity(1));
    r.exact = true;
    r.sampling_law = "none (sign checks)";
    r.verdict = g.value > 0.0 ? Verdict::pass : Verdict::fail;
    if (r.verdict == Verdict::fail) r.witness = Witness{std::nullopt, p.b(0, 0), std::nullopt};
    return r;
  }
  if (v == GcirVariant::c && p.alpha != 1.0) throw std::invalid_argument("variant (c) requires alpha = 1");

  if (auto exact = exact_gcir(v, p)) {
    r.exact = true;
    r.sampling_law = "none (closed-form reduction)";
    r.verdict = exact->pass ? Verdict::pass : Verdict::fail;
    r.witness = exact->witness;
    return r;
  }

  r.exact = false;
  r.sampling_law = plan.describe();
  const auto states = sample_states(p.dim(), plan);
  r.samples_used = states.size();
  r.verdict = Verdict::pass;
  double worst = std::numeric_limits<double>::infinity();
  const double gap_e = v == GcirVariant::e ? max_gap(p.alpha) : -1.0;
  for (const auto& x : states) {
    const Gap g = variant_gap(v, p, x, gap_e);
    if (!g.holds() && g.value < worst) {
      worst = g.value;
      r.verdict = Verdict::fail;
      r.witness = Witness{x.matrix(), g.value, g.value};
    }
  }
  return r;
}

double max_gap(double alpha) {
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw std::invalid_argument("max_gap: alpha out of [0.5, 1]");
  const double p = 2.0 * alpha - 1.0;
  auto phi = [p](double l) { return std::pow(l, p) - l; };  // pow(0, 0) == 1
  constexpr int kGrid = 100000;
  int best = 0;
  double best_val = phi(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = phi(static_cast<double>(i) / kGrid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kGrid);
  double hi = std::min(kGrid, best + 1) / static_cast<double>(kGrid);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = phi(x1);
  double f2 = phi(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = phi(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = phi(x1);
    }
  }
  return std::max({best_val, phi(0.5 * (lo + hi)), f1, f2});
}

namespace {

/// A lower bound on drift_margin valid for every x and t, when one follows
/// in closed form from the family's parameters. `tight_point` is a state
/// where the bound is attained, if known.
struct Certificate {
  double floor;
  std::optional<SymMatrixd> tight_point;
};

std::optional<Certificate> floor_certificate(const ModelSpec& m) {
  const double two_tr_beta = 2.0 * m.beta.trace();
  const Index d = m.dim;
  std::optional<Certificate> best;
  auto offer = [&best](Certificate c) {
    if (!best || c.floor > best->floor) best = std::move(c);
  };
  if (m.family == Family::ou) {
    if (is_psd(m.b)) offer({two_tr_beta, std::nullopt});
    return best;
  }
  if (m.family == Family::general && !m.modulation.is_constant()) return best;

  const double a = m.diffusion_power();
  if (a == 0.5 && check_wishart_drift(m.b, m.q, d).verdict == Verdict::pass) {
    offer({two_tr_beta, std::nullopt});
  }
  const GcirParams p = GcirParams::from_model(m);
  for (auto v : {GcirVariant::a, GcirVariant::b, GcirVariant::c, GcirVariant::d, GcirVariant::e,
                 GcirVariant::f}) {
    if (v == GcirVariant::c && a != 1.0) continue;
    const auto e = exact_gcir(v, p);
    if (e && e->pass) {
      offer({two_tr_beta, std::nullopt});
      break;
    }
  }
  if (d == 1 && a > 0.5 && m.b(0, 0) > 0.0) {
    // l(x) >= 2 beta + b/x - 2 Q^2 x^{2a-2}, bounded below on (0, inf).
    const double b = m.b(0, 0);
    const double q2 = m.q(0, 0) * m.q(0, 0);
    if (q2 == 0.0) {
      offer({two_tr_beta, std::nullopt});
    } else if (a == 1.0) {
      offer({two_tr_beta - 2.0 * q2, std::nullopt});
    } else {
      const double u = std::pow(b / (2.0 * q2 * (2.0 - 2.0 * a)), 1.0 / (2.0 * a - 1.0));
      const double val = b / u - 2.0 * q2 * std::pow(u, 2.0 * a - 2.0);
      std::optional<SymMatrixd> point;
      if (m.gamma.is_zero()) point = SymMatrixd(MatrixXd::Constant(1, 1, u));
      offer({two_tr_beta + val, point});
    }
  }
  return best;
}

}  // namespace

ConditionReport check_theorem_floor(const ModelSpec& model, const SamplePlan& plan, double claimed_c) {
  ConditionReport r;
  r.condition_id = ConditionId::theorem_floor;
  r.seed = plan.seed;
  r.lambda_qtq = qtq_top(model.q);
  const double tol = 1e-10 * (1.0 + std::abs(claimed_c));

  const auto cert = floor_certificate(model);
  auto states = sample_states(model.dim, plan);
  if (cert && cert->tight_point) states.push_back(*cert->tight_point);

  std::vector<double> times{0.0};
  if (model.family == Family::general && !model.modulation.is_constant()) {
    for (int j = 1; j < 16; ++j) times.push_back(j / (16.0 * model.modulation.frequency));
  }

  double inf = std::numeric_limits<double>::infinity();
  std::optional<Witness> worst;
  for (const auto& x : states) {
    for (double t : times) {
      const double l = drift_margin(model, t, x);
      if (l < inf) {
        inf = l;
        worst = Witness{x.matrix(), l, std::nullopt};
      }
    }
  }
  r.samples_used = states.size() * times.size();
  r.floor_estimate = inf;

  if (cert && claimed_c <= cert->floor + tol) {
    r.exact = true;
    r.sampling_law = "closed-form lower bound " + format_double(cert->floor) +
                     "; floor_estimate sampled with " + plan.describe();
    r.verdict = Verdict::pass;
    return r;
  }
  r.exact = false;
  r.sampling_law = plan.describe();
  if (inf < claimed_c - tol) {
    r.verdict = Verdict::fail;
    r.witness = worst;
  } else {
    r.verdict = model.gamma.is_symbolic() ? Verdict::pass : Verdict::indeterminate;
  }
  return r;
}

}  // namespace conewalk
