#include <doctest.h>

#include <cmath>
#include <random>

#include "conewalk/linalg.hpp"
#include "support.hpp"

using namespace conewalk;
using Eigen::MatrixXd;

namespace {

MatrixXd m2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

SymMatrixd sym(const MatrixXd& m) { return SymMatrixd(m); }

SymMatrixd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return SymMatrixd::diagonal(d);
}

}  // namespace

TEST_CASE("symmetrization records the removed antisymmetric part") {
  const SymMatrixd x(m2(1, 2, 0, 1));
  CHECK(x(0, 1) == 1.0);
  CHECK(x(1, 0) == 1.0);
  CHECK(x.asymmetry() == doctest::Approx(std::sqrt(2.0)));
  CHECK(SymMatrixd::identity(3).asymmetry() == 0.0);
}

TEST_CASE("construction rejects non-finite and non-square input") {
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(SymMatrixd{bad}, Error);
  CHECK_THROWS_AS(SymMatrixd{MatrixXd(2, 3)}, DimensionError);
}

TEST_CASE("spectral_decompose examples") {
  SUBCASE("identity") {
    const auto s = spectral_decompose(SymMatrixd::identity(2));
    CHECK(s.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  }
  SUBCASE("diagonal") {
    const auto s = spectral_decompose(diag({2, 3}));
    CHECK(s.eigenvalues(0) == doctest::Approx(2.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(3.0));
    CHECK(std::abs(s.eigenvectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(s.eigenvectors(1, 1)) == doctest::Approx(1.0));
  }
  SUBCASE("[[2,1],[1,2]] has eigenvalues 1 and 3") {
    const auto s = spectral_decompose(sym(m2(2, 1, 1, 2)));
    CHECK(s.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(3.0));
    const double r = 1.0 / std::sqrt(2.0);
    // Eigenvectors up to sign.
    CHECK(std::abs(s.eigenvectors(0, 0) * r - s.eigenvectors(1, 0) * r) == doctest::Approx(1.0));
    CHECK(std::abs(s.eigenvectors(0, 1) * r + s.eigenvectors(1, 1) * r) == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral form reconstructs and is orthonormal") {
  std::mt19937_64 rng(11);
  for (Index d : {1, 2, 3, 5, 8}) {
    for (int rep = 0; rep < 20; ++rep) {
      const MatrixXd a = testing::gaussian(d, d, rng);
      const SymMatrixd x(a + a.transpose());
      const auto s = spectral_decompose(x);
      CHECK((s.reconstruct() - x.matrix()).norm() <= 1e-10 * x.norm());
      CHECK((s.eigenvectors.transpose() * s.eigenvectors - MatrixXd::Identity(d, d)).norm() <= 1e-10);
      for (Index i = 1; i < d; ++i) CHECK(s.eigenvalues(i - 1) <= s.eigenvalues(i));
    }
  }
}

TEST_CASE("psd_power examples") {
  CHECK((psd_power(SymMatrixd::identity(3), 0.73).matrix() - MatrixXd::Identity(3, 3)).norm() < 1e-14);
  CHECK((psd_power(diag({4, 9}), 0.5).matrix() - diag({2, 3}).matrix()).norm() < 1e-14);
  const double r3 = std::sqrt(3.0);
  const MatrixXd want = m2((r3 + 1) / 2, (r3 - 1) / 2, (r3 - 1) / 2, (r3 + 1) / 2);
  CHECK((psd_power(sym(m2(2, 1, 1, 2)), 0.5).matrix() - want).norm() < 1e-14);
}

TEST_CASE("psd_power tolerance band and errors") {
  // lambda_min = -1e-14 lies inside the band 1e-12 * ||x||.
  const auto inside = psd_power(diag({-1e-14, 1}), 0.5);
  CHECK(inside(0, 0) == 0.0);
  try {
    psd_power(diag({-1e-3, 1}), 0.5);
    FAIL("expected NotInConeError");
  } catch (const NotInConeError& e) {
    CHECK(e.lambda_min() == doctest::Approx(-1e-3));
  }
  CHECK_THROWS_AS(psd_power(SymMatrixd::identity(2), 0.3), std::invalid_argument);
}

TEST_CASE("psd_power properties") {
  std::mt19937_64 rng(12);
  for (Index d : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 25; ++rep) {
      const SymMatrixd x(testing::random_spd(d, rng));
      const SymMatrixd root = psd_power(x, 0.5);
      CHECK((root.matrix() * root.matrix() - x.matrix()).norm() <= 1e-9 * x.norm());
      CHECK((psd_power(root, 1.0).matrix() - root.matrix()).norm() <= 1e-10 * root.norm());
      CHECK((psd_power(x, 1.0).matrix() - x.matrix()).norm() <= 1e-10 * x.norm());
      CHECK(is_psd(root));
    }
  }
}

TEST_CASE("inv_spd examples and errors") {
  CHECK((inv_spd(SymMatrixd::identity(2)).matrix() - MatrixXd::Identity(2, 2)).norm() < 1e-15);
  CHECK((inv_spd(diag({2, 4})).matrix() - diag({0.5, 0.25}).matrix()).norm() < 1e-15);
  CHECK((inv_spd(sym(m2(2, 1, 1, 2))).matrix() - m2(2, -1, -1, 2) / 3.0).norm() < 1e-14);
  CHECK_THROWS_AS(inv_spd(diag({0, 1})), SingularError);
  CHECK_THROWS_AS(inv_spd(diag({1e-15, 1})), SingularError);

  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const SymMatrixd x(testing::random_spd(4, rng));
    const MatrixXd prod = x.matrix() * inv_spd(x).matrix();
    CHECK((prod - MatrixXd::Identity(4, 4)).norm() <= 1e-9);
  }
}

TEST_CASE("det_gradient examples") {
  CHECK((det_gradient(SymMatrixd::identity(3)).matrix() - MatrixXd::Identity(3, 3)).norm() < 1e-14);
  CHECK((det_gradient(diag({2, 3})).matrix() - diag({3, 2}).matrix()).norm() < 1e-13);
  CHECK((det_gradient(sym(m2(2, 1, 1, 2))).matrix() - m2(2, -1, -1, 2)).norm() < 1e-13);
}

TEST_CASE("det_hessian examples") {
  const auto h = det_hessian(SymMatrixd::identity(2));
  CHECK(h(0, 0, 0, 0) == doctest::Approx(0.0));
  CHECK(h(0, 0, 1, 1) == doctest::Approx(1.0));
  CHECK(det_hessian(diag({2, 3}))(0, 0, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("det_gradient matches central differences of an LU determinant") {
  std::mt19937_64 rng(14);
  double worst = 0.0;
  for (Index d : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 25; ++rep) {
      const MatrixXd x = testing::random_spd(d, rng);
      const MatrixXd g = det_gradient(SymMatrixd(x)).matrix();
      const double h = 1e-5 * x.norm();
      const double scale = g.cwiseAbs().maxCoeff();
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
          MatrixXd up = x, down = x;
          up(i, j) += h;
          down(i, j) -= h;
          const double fd = (testing::lu_det(up) - testing::lu_det(down)) / (2 * h);
          worst = std::max(worst, testing::rel_err(g(i, j), fd, scale));
        }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("det_hessian matches mixed second differences") {
  std::mt19937_64 rng(15);
  double worst = 0.0;
  for (Index d : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 10; ++rep) {
      const MatrixXd x = testing::random_spd(d, rng);
      const auto hess = det_hessian(SymMatrixd(x));
      const double h = 1e-3 * x.norm();
      // floor at det/|x|^2 so the identically-zero d = 1 case is measurable
      const double scale = std::max(hess.max_abs(), std::abs(testing::lu_det(x)) / x.squaredNorm());
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
              const double fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
              worst = std::max(worst, testing::rel_err(hess(i, j, k, l), fd, scale));
            }
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("det is non-decreasing along PSD increments") {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 200; ++rep) {
    const Index d = 1 + rep % 4;
    const MatrixXd x = testing::random_spd(d, rng);
    const MatrixXd j = testing::random_psd(d, 1 + rep % d, rng);
    CHECK(det_spd(spectral_decompose(SymMatrixd(MatrixXd(x + j)))) >=
          det_spd(spectral_decompose(SymMatrixd(x))) * (1 - 1e-12));
  }
}

TEST_CASE("boundary_distance") {
  CHECK(boundary_distance(SymMatrixd::identity(3)) == doctest::Approx(1.0));
  CHECK(boundary_distance(diag({0, 1})) == doctest::Approx(0.0));
  CHECK(boundary_distance(diag({0.1, 5})) == doctest::Approx(0.1));
  CHECK_THROWS_AS(boundary_distance(diag({-1, 1})), NotInConeError);

  // No rank-deficient PSD y is closer to x than lambda_min(x).
  std::mt19937_64 rng(17);
  const SymMatrixd x = diag({0.1, 5});
  for (int rep = 0; rep < 2000; ++rep) {
    const MatrixXd v = testing::gaussian(2, 1, rng) * 3.0;
    CHECK((x.matrix() - v * v.transpose()).norm() >= 0.1 - 1e-12);
  }
}

TEST_CASE("cone_project examples") {
  CHECK(cone_project(SymMatrixd::identity(2), 0.0) == SymMatrixd::identity(2));
  CHECK((cone_project(diag({-1, 2}), 0.0).matrix() - diag({0, 2}).matrix()).norm() < 1e-14);
  const auto p = cone_project(diag({-1, 2}), 1e-8);
  CHECK((p.matrix() - diag({1e-8, 2}).matrix()).norm() < 1e-14);
  CHECK(cone_project(p, 1e-8) == p);
  CHECK_THROWS_AS(cone_project(SymMatrixd::identity(2), -1.0), std::invalid_argument);
}

TEST_CASE("trace_inner") {
  CHECK(trace_inner(SymMatrixd::identity(2), SymMatrixd::identity(2)) == 2.0);
  CHECK(trace_inner(diag({1, 2}), diag({3, 4})) == 11.0);
  CHECK_THROWS_AS(trace_inner(SymMatrixd::identity(2), SymMatrixd::identity(3)), DimensionError);
  std::mt19937_64 rng(18);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index d = 1 + rep % 5;
    const SymMatrixd a(testing::random_psd(d, 1 + rep % d, rng));
    const SymMatrixd b(testing::random_psd(d, 1 + (rep / 5) % d, rng));
    CHECK(trace_inner(a, b) >= -1e-12 * a.norm() * b.norm());
  }
}

TEST_CASE("matrix literal parsing") {
  CHECK(parse_matrix_literal("2,1;1,2") == m2(2, 1, 1, 2));
  CHECK(parse_matrix_literal(" 1e-3 , -2 ; +3,4 ") == m2(1e-3, -2, 3, 4));
  CHECK_THROWS_AS(parse_matrix_literal(""), Error);
  CHECK_THROWS_AS(parse_matrix_literal("1,2;3"), Error);
  CHECK_THROWS_AS(parse_matrix_literal("1,x;3,4"), Error);
  CHECK(format_matrix_literal(m2(0.1, 2, 3, 4)) == "0.1,2;3,4");
}

TEST_CASE("templated on the scalar type") {
  const SymMatrix<float> xf(Eigen::MatrixXf::Identity(2, 2) * 4.0f);
  CHECK(psd_power(xf, 0.5f)(0, 0) == doctest::Approx(2.0f));
  const SymMatrix<long double> xl(Matrix<long double>::Identity(2, 2) * 9.0L);
  CHECK(static_cast<double>(det_spd(spectral_decompose(xl))) == doctest::Approx(81.0));
}
