#include <doctest.h>

#include <cmath>
#include <random>

#include "conewalk/conditions.hpp"
#include "support.hpp"

using namespace conewalk;
using Eigen::MatrixXd;

namespace {

MatrixXd eye(Index d) { return MatrixXd::Identity(d, d); }

SymMatrixd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return SymMatrixd::diagonal(d);
}

GcirParams params(double alpha, SymMatrixd b, MatrixXd q, GammaSpec gamma = {}) {
  GcirParams p;
  p.alpha = alpha;
  p.b = std::move(b);
  p.q = std::move(q);
  p.gamma = std::move(gamma);
  return p;
}

SamplePlan small_plan(std::uint64_t seed = 5) {
  SamplePlan plan;
  plan.n = 300;
  plan.seed = seed;
  return plan;
}

// Brute-force oracle for max_gap: dense grid only.
double grid_max_gap(double alpha) {
  double best = alpha == 0.5 ? 1.0 : 0.0;
  for (int i = 1; i <= 2000000; ++i) {
    const double l = i / 2e6;
    best = std::max(best, std::pow(l, 2 * alpha - 1) - l);
  }
  return best;
}

}  // namespace

TEST_CASE("check_wishart_drift examples") {
  const auto eq = check_wishart_drift(SymMatrixd(3.0 * eye(2)), eye(2), 2);
  CHECK(eq.verdict == Verdict::pass);
  CHECK(eq.exact);

  const auto below = check_wishart_drift(SymMatrixd(2.99 * eye(2)), eye(2), 2);
  CHECK(below.verdict == Verdict::fail);
  REQUIRE(below.witness);
  REQUIRE(below.witness->eigenvalue);
  CHECK(*below.witness->eigenvalue == doctest::Approx(-0.01));

  CHECK(check_wishart_drift(SymMatrixd::zero(2), MatrixXd::Zero(2, 2), 2).verdict == Verdict::pass);
  CHECK_THROWS_AS(check_wishart_drift(SymMatrixd::zero(3), eye(2), 2), DimensionError);
}

TEST_CASE("wishart check is scale covariant") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int rep = 0; rep < 300; ++rep) {
    const Index d = 1 + rep % 4;
    const MatrixXd q = testing::gaussian(d, d, rng);
    const SymMatrixd b(testing::random_spd(d, rng) * 4.0 * static_cast<double>(d));
    const double s = u(rng);
    CHECK(check_wishart_drift(b, q, d).verdict ==
          check_wishart_drift(b * s, std::sqrt(s) * q, d).verdict);
  }
}

TEST_CASE("check_gcir_pointwise examples") {
  const MatrixXd one = MatrixXd::Ones(1, 1);
  CHECK(check_gcir_pointwise(params(0.5, SymMatrixd(2 * one), one), SymMatrixd(one)));
  CHECK(check_gcir_pointwise(params(1.0, SymMatrixd(3 * eye(2)), eye(2)), SymMatrixd::identity(2)));
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const SymMatrixd b(testing::random_psd(3, 2, rng));
    CHECK(check_gcir_pointwise(params(0.75, b, MatrixXd::Zero(3, 3)), SymMatrixd(testing::random_spd(3, rng))));
  }
  CHECK_FALSE(check_gcir_pointwise(params(0.5, SymMatrixd(1.9 * one), one), SymMatrixd(one)));
}

TEST_CASE("wishart drift pass implies the alpha = 1/2 pointwise inequality") {
  std::mt19937_64 rng(43);
  int passes = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Index d = 1 + rep % 3;
    const MatrixXd q = testing::gaussian(d, d, rng) * 0.5;
    const SymMatrixd b(testing::random_spd(d, rng) * 3.0);
    if (check_wishart_drift(b, q, d).verdict != Verdict::pass) continue;
    ++passes;
    for (int k = 0; k < 5; ++k)
      CHECK(check_gcir_pointwise(params(0.5, b, q), SymMatrixd(testing::random_spd(d, rng, 1e-3))));
  }
  CHECK(passes > 20);
}

TEST_CASE("check_gcir_sufficient examples") {
  SUBCASE("f with equality") {
    const MatrixXd q = (MatrixXd(2, 2) << 1, 0.5, -0.3, 2).finished();
    const SymMatrixd qtq(MatrixXd(q.transpose() * q));
    const auto p = params(0.75, SymMatrixd::zero(2), q, GammaSpec::scaled_trace(4.0, 2.0, 1.0, qtq));
    const auto r = check_gcir_sufficient(GcirVariant::f, p, small_plan());
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.exact);
  }
  SUBCASE("g needs b > 0") {
    const MatrixXd one = MatrixXd::Ones(1, 1);
    const auto r = check_gcir_sufficient(GcirVariant::g, params(0.75, SymMatrixd(0 * one), one), small_plan());
    CHECK(r.verdict == Verdict::fail);
    CHECK(r.exact);
    REQUIRE(r.witness);
    CHECK(check_gcir_sufficient(GcirVariant::g, params(0.75, SymMatrixd(0.01 * one), one), small_plan()).verdict ==
          Verdict::pass);
    CHECK_THROWS(check_gcir_sufficient(GcirVariant::g, params(0.5, SymMatrixd(one), one), small_plan()));
  }
  SUBCASE("c fails at the identity when b + Gamma = 0") {
    const auto r = check_gcir_sufficient(GcirVariant::c, params(1.0, SymMatrixd::zero(2), eye(2)), small_plan());
    CHECK(r.verdict == Verdict::fail);
    REQUIRE(r.witness);
    CHECK(r.witness->value < 0.0);
    CHECK(r.lambda_qtq == doctest::Approx(1.0));
    CHECK_THROWS(check_gcir_sufficient(GcirVariant::c, params(0.75, SymMatrixd::zero(2), eye(2)), small_plan()));
  }
  SUBCASE("congruence Gamma is sampled and the pass is qualified") {
    const auto p = params(0.75, SymMatrixd(10 * eye(2)), 0.1 * eye(2), GammaSpec::congruence({eye(2)}));
    const auto r = check_gcir_sufficient(GcirVariant::a, p, small_plan());
    CHECK_FALSE(r.exact);
    CHECK(r.samples_used > 0);
    CHECK(r.verdict == Verdict::pass);
    CHECK_FALSE(r.sampling_law.empty());
  }
}

TEST_CASE("fail verdicts carry a witness") {
  std::mt19937_64 rng(44);
  for (int rep = 0; rep < 60; ++rep) {
    const Index d = 1 + rep % 3;
    const auto p = params(0.5 + 0.5 * (rep % 5) / 4.0, SymMatrixd(testing::random_psd(d, 1, rng)),
                          testing::gaussian(d, d, rng), GammaSpec::congruence({testing::gaussian(d, d, rng)}));
    for (GcirVariant v : {GcirVariant::a, GcirVariant::b, GcirVariant::d, GcirVariant::e, GcirVariant::f}) {
      const auto r = check_gcir_sufficient(v, p, small_plan(rep));
      if (r.verdict == Verdict::fail) CHECK(r.witness.has_value());
    }
  }
}

TEST_CASE("implication chain between the sufficient sets") {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Link {
    GcirVariant from;
    std::optional<GcirVariant> to;  // nullopt: the pointwise inequality
    int premise = 0;
  };
  Link links[] = {{GcirVariant::a, std::nullopt}, {GcirVariant::b, GcirVariant::a},
                  {GcirVariant::d, std::nullopt}, {GcirVariant::e, GcirVariant::d},
                  {GcirVariant::f, GcirVariant::e}};
  for (auto& link : links) {
    for (int rep = 0; rep < 1000; ++rep) {
      const Index d = 1 + rep % 3;
      const double alpha = 0.5 + 0.5 * u(rng);
      const MatrixXd q = testing::gaussian(d, d, rng) * 0.5;
      const SymMatrixd qtq(MatrixXd(q.transpose() * q));
      const double power = u(rng) < 0.5 ? 2 * alpha - 1 : 1.0;
      const GammaSpec gamma = GammaSpec::scaled_trace(3 * u(rng), 3 * u(rng), power, qtq) +
                              GammaSpec::constant(SymMatrixd(testing::random_psd(d, 1, rng)));
      const auto p = params(alpha, SymMatrixd(testing::random_spd(d, rng) * 2.0), q, gamma);
      const SymMatrixd x(testing::random_spd(d, rng, 1e-2));
      if (!gcir_variant_holds(link.from, p, x)) continue;
      ++link.premise;
      const bool conclusion = link.to ? gcir_variant_holds(*link.to, p, x) : check_gcir_pointwise(p, x);
      CHECK(conclusion);
    }
    CHECK(link.premise > 50);
  }
}

TEST_CASE("max_gap") {
  CHECK(max_gap(1.0) == doctest::Approx(0.0));
  CHECK(max_gap(0.5) == doctest::Approx(1.0));
  CHECK(max_gap(0.75) == doctest::Approx(0.25).epsilon(1e-10));
  for (double a : {0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}) {
    const double g = max_gap(a);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    CHECK(g == doctest::Approx(grid_max_gap(a)).epsilon(1e-6));
    // The analytic maximum, not the value printed with the reduction.
    const double closed = (2 - 2 * a) * std::pow(2 * a - 1, (2 * a - 1) / (2 - 2 * a));
    CHECK(g == doctest::Approx(closed).epsilon(1e-9));
  }
  CHECK_THROWS(max_gap(0.4));
  CHECK_THROWS(max_gap(1.1));
}

TEST_CASE("check_theorem_floor examples") {
  SUBCASE("wishart above the threshold") {
    const auto m = ModelSpec::wishart(eye(2), MatrixXd::Zero(2, 2), SymMatrixd(4 * eye(2)));
    const auto r = check_theorem_floor(m, small_plan(), 0.0);
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.exact);
  }
  SUBCASE("ou with zero drift") {
    const auto m = ModelSpec::ou(MatrixXd::Zero(2, 2), SymMatrixd::zero(2));
    CHECK(check_theorem_floor(m, small_plan(), 0.0).verdict == Verdict::pass);
  }
  SUBCASE("univariate gcir has a finite negative floor") {
    const MatrixXd one = MatrixXd::Ones(1, 1);
    const auto m = ModelSpec::gcir(0.75, one, 0 * one, SymMatrixd(0.01 * one));
    // Oracle: min of 0.01/x - 2/sqrt(x) over a log grid.
    double oracle = 1e300;
    for (int i = 0; i <= 160000; ++i) {
      const double x = std::pow(10.0, -8 + i * 1e-4);
      oracle = std::min(oracle, 0.01 / x - 2 / std::sqrt(x));
    }
    CHECK(oracle == doctest::Approx(-100.0).epsilon(1e-6));
    const auto r = check_theorem_floor(m, small_plan(), oracle - 1e-6);
    CHECK(r.verdict == Verdict::pass);
    CHECK(std::isfinite(r.floor_estimate));
    CHECK(r.floor_estimate < 0.0);
    CHECK(r.floor_estimate >= oracle - 1e-6 * std::abs(oracle));
    CHECK(check_theorem_floor(m, small_plan(), 0.0).verdict == Verdict::fail);
  }
  SUBCASE("wishart below the threshold fails with a witness") {
    const auto m = ModelSpec::wishart_delta(eye(2), 1.5);
    const auto r = check_theorem_floor(m, small_plan(), 0.0);
    CHECK(r.verdict == Verdict::fail);
    CHECK(r.witness.has_value());
  }
}

TEST_CASE("sample_states covers the boundary and large norms") {
  const auto xs = sample_states(3, small_plan());
  CHECK(xs.size() >= 300);
  double lo = 1e300, hi = 0.0;
  for (const auto& x : xs) {
    CHECK(lambda_min(x) > 0.0);
    lo = std::min(lo, lambda_min(x));
    hi = std::max(hi, x.norm());
  }
  CHECK(lo <= 1e-5);
  CHECK(hi >= 1e5);
  const auto again = sample_states(3, small_plan());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(xs[i] == again[i]);
}

TEST_CASE("condition names round trip") {
  for (const char* s : {"wishart_drift", "gcir_pointwise", "gcir_a", "gcir_b", "gcir_c", "gcir_d", "gcir_e",
                        "gcir_f", "gcir_g", "theorem_floor"})
    CHECK(to_string(condition_from_string(s)) == s);
  CHECK_THROWS(condition_from_string("gcir_h"));
  CHECK(to_condition(GcirVariant::e) == ConditionId::gcir_e);
  CHECK(to_string(Verdict::indeterminate) == "indeterminate");
}
