// Acceptance run: one PASS/FAIL line per criterion, tolerances as pinned
// below. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "conewalk/cli.hpp"
#include "conewalk/conditions.hpp"
#include "conewalk/ito.hpp"
#include "conewalk/montecarlo.hpp"
#include "support.hpp"

using namespace conewalk;
using Eigen::MatrixXd;
namespace fs = std::filesystem;

namespace {

MatrixXd eye(Index d) { return MatrixXd::Identity(d, d); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome matrix_calculus() {
  std::mt19937_64 rng(101);
  double grad_err = 0.0, hess_err = 0.0;
  const Index dims[] = {1, 2, 3, 5};
  for (int rep = 0; rep < 500; ++rep) {
    const Index d = dims[rep % 4];
    const MatrixXd x = testing::random_spd(d, rng);
    const SymMatrixd xs(x);

    const MatrixXd g = det_gradient(xs).matrix();
    const double hg = 1e-5 * x.norm();
    const double gscale = g.cwiseAbs().maxCoeff();
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        MatrixXd up = x, down = x;
        up(i, j) += hg;
        down(i, j) -= hg;
        const double fd = (testing::lu_det(up) - testing::lu_det(down)) / (2 * hg);
        grad_err = std::max(grad_err, testing::rel_err(g(i, j), fd, gscale));
      }

    const Tensor4d hess = det_hessian(xs);
    const double hh = 1e-3 * x.norm();
    // For d = 1 the Hessian vanishes identically; det/|x|^2 is the natural
    // size of a second derivative of a degree-d homogeneous function.
    const double hscale = std::max(hess.max_abs(), std::abs(testing::lu_det(x)) / x.squaredNorm());
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k)
          for (Index l = 0; l < d; ++l) {
            auto f = [&](double a, double b) {
              MatrixXd y = x;
              y(i, j) += a;
              y(k, l) += b;
              return testing::lu_det(y);
            };
            const double fd = (f(hh, hh) - f(hh, -hh) - f(-hh, hh) + f(-hh, -hh)) / (4 * hh * hh);
            hess_err = std::max(hess_err, testing::rel_err(hess(i, j, k, l), fd, hscale));
          }
  }
  return {grad_err <= 1e-6 && hess_err <= 1e-4,
          fmt("gradient rel err %.2e (<= 1e-6), hessian rel err %.2e (<= 1e-4), 500 matrices", grad_err, hess_err)};
}

// 2 -------------------------------------------------------------------------

Outcome margin_algebra() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  double w_err = 0.0, g_err = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const Index d = 1 + rep % 4;
    const MatrixXd q = testing::gaussian(d, d, rng);
    const MatrixXd beta = 0.3 * testing::gaussian(d, d, rng);
    const SymMatrixd b(3.0 * testing::random_spd(d, rng));
    const GammaSpec gamma = GammaSpec::constant(SymMatrixd(testing::random_psd(d, 1, rng))) +
                            GammaSpec::congruence({0.5 * testing::gaussian(d, d, rng)});
    const SymMatrixd x(testing::random_spd(d, rng));
    const auto w = ModelSpec::wishart(q, beta, b, gamma);
    w_err = std::max(w_err, testing::rel_err(wishart_margin_identity(w, x), drift_margin(w, 0.0, x), 1.0));
  }
  for (int rep = 0; rep < 500; ++rep) {
    const Index d = 1 + rep % 4;
    const MatrixXd q = testing::gaussian(d, d, rng);
    const MatrixXd beta = 0.3 * testing::gaussian(d, d, rng);
    const SymMatrixd b(3.0 * testing::random_spd(d, rng));
    const GammaSpec gamma = GammaSpec::scaled_trace(0.2, 1.0, 0.5, SymMatrixd(testing::random_psd(d, 1, rng)));
    const SymMatrixd x(testing::random_spd(d, rng));
    const auto g = ModelSpec::gcir(u(rng), q, beta, b, gamma);
    g_err = std::max(g_err, testing::rel_err(gcir_margin_identity(g, x), drift_margin(g, 0.0, x), 1.0));
  }
  return {w_err <= 1e-10 && g_err <= 1e-10,
          fmt("wishart reduction rel err %.2e, gcir reduction rel err %.2e (<= 1e-10), 500 draws each", w_err, g_err)};
}

// 3 -------------------------------------------------------------------------

Outcome implication_chain() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Link {
    const char* name;
    GcirVariant from;
    std::optional<GcirVariant> to;
    int premises = 0;
    int counterexamples = 0;
  };
  Link links[] = {{"b=>a", GcirVariant::b, GcirVariant::a},
                  {"a=>pointwise", GcirVariant::a, std::nullopt},
                  {"f=>e", GcirVariant::f, GcirVariant::e},
                  {"e=>d", GcirVariant::e, GcirVariant::d},
                  {"d=>pointwise", GcirVariant::d, std::nullopt}};
  for (auto& link : links) {
    for (int rep = 0; rep < 1000; ++rep) {
      const Index d = 1 + rep % 3;
      const double alpha = 0.5 + 0.5 * u(rng);
      const MatrixXd q = 0.5 * testing::gaussian(d, d, rng);
      const SymMatrixd qtq(MatrixXd(q.transpose() * q));
      const double power = u(rng) < 0.5 ? 2 * alpha - 1 : 1.0;
      GcirParams p;
      p.alpha = alpha;
      p.q = q;
      p.b = SymMatrixd(2.0 * testing::random_spd(d, rng));
      p.gamma = GammaSpec::scaled_trace(3 * u(rng), 3 * u(rng), power, qtq) +
                GammaSpec::constant(SymMatrixd(testing::random_psd(d, 1, rng)));
      const SymMatrixd x(testing::random_spd(d, rng, 1e-2));
      if (!gcir_variant_holds(link.from, p, x)) continue;
      ++link.premises;
      const bool ok = link.to ? gcir_variant_holds(*link.to, p, x) : check_gcir_pointwise(p, x);
      if (!ok) ++link.counterexamples;
    }
  }
  bool pass = true;
  std::string detail;
  for (const auto& l : links) {
    pass &= l.counterexamples == 0 && l.premises > 0;
    detail += fmt("%s %d/%d, ", l.name, l.counterexamples, l.premises);
  }
  const double g34 = max_gap(0.75), g1 = max_gap(1.0);
  pass &= std::abs(g34 - 0.25) <= 1e-9 && std::abs(g1) <= 1e-12;
  detail += fmt("max_gap(3/4) = %.12f, max_gap(1) = %.1e", g34, g1);
  return {pass, "counterexamples/premises " + detail};
}

// 4 -------------------------------------------------------------------------

Outcome covariation() {
  const auto m = ModelSpec::wishart_delta(eye(2), 3.0);
  const auto e = covariation_empirical(m, SymMatrixd::identity(2), 100000, 1e-3, 104);
  return {e.pass, fmt("max |z| over 16 entries %.2f (<= 3), T(11,11) est %.4f vs 4", e.max_z,
                      e.estimate(0, 0, 0, 0))};
}

// 5, 6 ----------------------------------------------------------------------

struct VerifyOutcome {
  Outcome decomposition;
  Outcome trace;
};

VerifyOutcome logdet_and_trace() {
  SimConfig c;
  c.dt = 1e-4;
  c.horizon = 0.5;
  c.seed = 105;
  VerifyOptions vo;
  vo.n_paths = 500;
  vo.n_checkpoints = 5;
  vo.h_forms = {HForm::identity(2), HForm::sqrt_state()};
  const auto r = verify_ensemble(ModelSpec::wishart_delta(eye(2), 3.5), SymMatrixd::identity(2), c, vo);
  const auto& m = r.martingale;

  std::string d5;
  for (std::size_t i = 0; i < m.checkpoints.size(); ++i) {
    d5 += fmt("t=%.1f M %+.4f+-%.4f qv %.4f/%.4f; ", m.checkpoints[i], m.m_mean[i], m.m_se[i], m.qv_realized[i],
              m.qv_predicted[i]);
  }
  d5 += fmt("floor violations %zu, stopped %zu", m.floor_violations, r.stopped_paths);

  std::string d6;
  bool tpass = r.trace.size() == 2;
  for (const auto& t : r.trace) {
    tpass &= t.pass;
    d6 += fmt("%s qv(T) %.4f+-%.4f vs %.1f (n=%zu); ", t.h_form.c_str(), t.qv_mean, t.qv_se, t.horizon, t.n);
  }
  return {{m.all_pass() && m.floor_violations == 0, d5}, {tpass, d6}};
}

// 7, 8, 9 -------------------------------------------------------------------

SimConfig regime_config(double dt) {
  SimConfig c;
  c.dt = dt;
  c.horizon = 1.0;
  c.boundary_eps = 1e-4;
  c.seed = 7;
  return c;
}

EnsembleResult arm(const ModelSpec& m, const SymMatrixd& x0, double dt) {
  EnsembleOptions o;
  o.n_paths = 1000;
  return boundary_stats(m, x0, regime_config(dt), o);
}

Outcome regime_contrast(EnsembleResult& upper_out) {
  const SymMatrixd x_up = SymMatrixd::identity(2), x_low(0.05 * eye(2));
  const auto up = ModelSpec::wishart_delta(eye(2), 3.5), low = ModelSpec::wishart_delta(eye(2), 1.5);
  const auto u1 = arm(up, x_up, 1e-4), l1 = arm(low, x_low, 1e-4);
  const auto u2 = arm(up, x_up, 5e-5), l2 = arm(low, x_low, 5e-5);
  upper_out = u1;
  const double gap1 = l1.hit_fraction - u1.hit_fraction, gap2 = l2.hit_fraction - u2.hit_fraction;
  const bool pass = u1.hit_fraction <= 0.05 && l1.hit_fraction >= 0.5 && gap1 >= 0.3 && gap2 >= 0.3;
  return {pass, fmt("dt=1e-4: hit(3.5) %.3f (<= 0.05), hit(1.5) %.3f (>= 0.5), gap %.3f; "
                    "dt=5e-5: hit(3.5) %.3f, hit(1.5) %.3f, gap %.3f (>= 0.3)",
                    u1.hit_fraction, l1.hit_fraction, gap1, u2.hit_fraction, l2.hit_fraction, gap2)};
}

Outcome univariate_sharpness() {
  const MatrixXd one = MatrixXd::Ones(1, 1);
  const auto at = ModelSpec::wishart(one, 0 * one, SymMatrixd(2.0 * one));
  const auto below = ModelSpec::wishart(one, 0 * one, SymMatrixd(one));
  const auto a = arm(at, SymMatrixd(one), 1e-4);
  const auto b = arm(below, SymMatrixd(0.01 * one), 1e-4);
  return {a.hit_fraction <= 0.05 && b.hit_fraction >= 0.5,
          fmt("hit(b=2, x0=1) %.3f (<= 0.05), hit(b=1, x0=0.01) %.3f (>= 0.5)", a.hit_fraction, b.hit_fraction)};
}

Outcome jump_invariants(const EnsembleResult& no_jump) {
  const auto m = ModelSpec::wishart_delta(eye(2), 3.5)
                     .with_jumps(JumpSpec::compound_poisson(1.0, MarkLaw::rank_one), KSpec::identity());
  const auto r = arm(m, SymMatrixd::identity(2), 1e-4);
  const double n = 1000.0;
  // Three standard errors of a difference of two proportions; the pooled
  // rate is floored at 1/n so a zero count does not give a zero band.
  const double p = std::max(0.5 * (r.hit_fraction + no_jump.hit_fraction), 1.0 / n);
  const double noise = 3.0 * std::sqrt(2.0 * p * (1.0 - p) / n);
  const bool pass = r.jump_violations == 0 && r.jumps > 0 && r.errors == 0 &&
                    r.hit_fraction <= no_jump.hit_fraction + noise;
  return {pass, fmt("%zu jumps, %zu violations; hit %.3f vs no-jump %.3f + noise %.3f", r.jumps,
                    r.jump_violations, r.hit_fraction, no_jump.hit_fraction, noise)};
}

// 10 ------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    files[e.path().filename().string()] = s.str();
  }
  return files;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "conewalk_acceptance_determinism";
  const std::string config = R"(seed = 42
[model]
family = wishart
dim = 2
delta = 3.5
jump.kind = compound_poisson
jump.rate = 2
[sim]
dt = 1e-3
horizon = 0.5
[experiment]
n_paths = 100
axis_values = 1.5,2.5,3.5
condition = gcir_a
[output]
per_path_csv = true
)";
  std::size_t compared = 0;
  bool same = true;
  for (const char* sub : {"simulate", "check", "verify", "mc", "sweep"}) {
    std::map<std::string, std::string> runs[2];
    for (auto& snap : runs) {
      fs::remove_all(dir);
      Overrides o;
      o.subcommand = sub;
      o.out_dir = dir.string();
      std::ostringstream out, err;
      const int code = run_text(config, o, out, err);
      if (code != kExitOk && code != kExitCheckFailed) return {false, fmt("%s exited %d: %s", sub, code, err.str().c_str())};
      snap = snapshot(dir);
    }
    same &= runs[0] == runs[1];
    compared += runs[0].size();
  }
  fs::remove_all(dir);
  return {same && compared >= 7, fmt("%zu files over 5 subcommands compared byte for byte", compared)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const Outcome& o, double seconds, double limit) {
    const bool in_time = limit <= 0.0 || seconds < limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %2d %s  %s: %s [%.1f s%s]\n", id, pass ? "PASS" : "FAIL", title, o.detail.c_str(),
                seconds, limit > 0.0 ? fmt(", limit %.0f s", limit).c_str() : "");
    std::fflush(stdout);
  };
  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    return std::pair{std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
  };

  {
    auto [o, s] = timed(matrix_calculus);
    report(1, "matrix calculus", o, s, 10);
  }
  {
    auto [o, s] = timed(margin_algebra);
    report(2, "margin algebra", o, s, 5);
  }
  {
    auto [o, s] = timed(implication_chain);
    report(3, "implication chain", o, s, 0);
  }
  {
    auto [o, s] = timed(covariation);
    report(4, "covariation tensor", o, s, 30);
  }
  {
    auto [o, s] = timed(logdet_and_trace);
    report(5, "log-det decomposition", o.decomposition, s, 300);
    report(6, "trace-Brownian reduction", o.trace, s, 300);
  }
  EnsembleResult upper;
  {
    auto [o, s] = timed([&] { return regime_contrast(upper); });
    report(7, "boundary regime contrast", o, s, 600);
  }
  {
    auto [o, s] = timed(univariate_sharpness);
    report(8, "univariate sharpness", o, s, 0);
  }
  {
    auto [o, s] = timed([&] { return jump_invariants(upper); });
    report(9, "jump invariants", o, s, 0);
  }
  {
    auto [o, s] = timed(determinism);
    report(10, "determinism", o, s, 0);
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
