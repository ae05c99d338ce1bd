#include <doctest.h>

#include "nbqi/bspline.hpp"
#include "support/generators.hpp"

using namespace nbqi;
using doctest::Approx;

TEST_CASE("B-spline values match the recursive definition") {
  testgen::Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = g.integer(1, 6);
    const KnotWindow w = testgen::random_window(g, m, m + 6);
    const std::vector<double> k(w.knots().begin(), w.knots().end());
    for (Index j = w.basis_range().first; j <= w.basis_range().last; ++j) {
      const std::size_t first = static_cast<std::size_t>(j - m - w.offset());
      for (int s = 0; s < 20; ++s) {
        const double x = g.uniform(k.front(), k.back());
        const double b = eval_B(w, j, x);
        CHECK(b >= 0.0);
        CHECK(b == Approx(testgen::bspline_recursive(k, first, m, x)).epsilon(1e-12));
        if (x < w.t(j - m) || x >= w.t(j + 1)) CHECK(b == 0.0);
      }
    }
  }
}

TEST_CASE("B-spline basics") {
  const auto w = testgen::uniform_window(1, 6);
  CHECK(eval_B(w, 2, 2.0) == 1.0);
  CHECK(eval_B(w, 2, 1.5) == 0.5);
  CHECK(eval_B(w, 2, 0.5) == 0.0);
  CHECK(eval_B(w, 2, 3.0) == 0.0);
  const auto w3 = testgen::uniform_window(3, 5);
  CHECK_THROWS_AS(eval_B(w3, 2, 1.0), WindowBoundsError);
}

TEST_CASE("partition of unity at random points") {
  testgen::Gen g(17);
  const int m = 4;
  const KnotWindow w = testgen::random_window(g, m, 30);
  const Interval dom = w.eval_interval(w.basis_range());
  for (int s = 0; s < 1000; ++s) {
    const double x = g.uniform(dom.lo, dom.hi);
    double sum = 0.0;
    for (Index j = w.basis_range().first; j <= w.basis_range().last; ++j)
      sum += eval_B(w, j, x);
    CHECK(sum == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("active basis equals individual B-splines") {
  testgen::Gen g(8);
  for (int m = 1; m <= 6; ++m) {
    const KnotWindow w = testgen::random_window(g, m, 3 * m + 4);
    for (Index k = w.first_index() + m - 1; k + m <= w.last_index(); ++k) {
      const double x = g.uniform(w.t(k), w.t(k + 1));
      const Eigen::VectorXd N = active_basis(w, k, x);
      for (int r = 0; r <= m; ++r)
        if (w.contains(k + r - m) && w.contains(k + r + 1))
          CHECK(N(r) == Approx(eval_B(w, k + r, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("M-splines") {
  testgen::Gen g(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = g.integer(2, 6);
    const KnotWindow w = testgen::random_window(g, m, m + 4);
    for (Index j = w.greville_range().first; j <= w.greville_range().last; ++j) {
      double integral = 0.0, first = 0.0;
      for (Index s = j - m + 1; s < j; ++s) {
        integral += testgen::gauss5([&](double x) { return eval_M(w, j, x); }, w.t(s), w.t(s + 1));
        first += testgen::gauss5([&](double x) { return x * eval_M(w, j, x); }, w.t(s), w.t(s + 1));
      }
      CHECK(integral == Approx(1.0).epsilon(1e-10));
      CHECK(first == Approx(theta(w, j)).epsilon(1e-10));
      CHECK(eval_M(w, j, w.t(j - m + 1) - 1e-9) == 0.0);
      CHECK(eval_M(w, j, w.t(j)) == 0.0);
    }
  }
  const KnotWindow w1({0.0, 1.0, 2.0, 3.0}, 1, 0);
  CHECK_THROWS_AS(eval_M(w1, 1, 0.5), UnsupportedDegreeError);
}

TEST_CASE("inner products with M-splines") {
  const KnotWindow hat({-1.0, 0.0, 1.0, 2.0, 3.0}, 3, 0);
  CHECK(inner_product_M(hat, 2, [](double) { return 1.0; }) == Approx(1.0).epsilon(1e-12));
  CHECK(inner_product_M(hat, 2, [](double x) { return x * x; }) == Approx(moment(hat, 2, 2)).epsilon(1e-12));
  testgen::Gen g(2);
  for (int m = 2; m <= 6; ++m) {
    const KnotWindow w = testgen::random_window(g, m, m + 2);
    const Index j = w.greville_range().first;
    CHECK(inner_product_M(w, j, [](double) { return 1.0; }) == Approx(1.0).epsilon(1e-12));
    CHECK(inner_product_M(w, j, [](double x) { return x; }) == Approx(theta(w, j)).epsilon(1e-12));
    CHECK(inner_product_M(w, j, [](double x) { return x * x * x; }, 12) ==
          Approx(moment(w, j, 3)).epsilon(1e-12));
  }
}

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 2, 5, 9, 20}) {
    const GaussRule& r = gauss_legendre(n);
    CHECK(r.weights.sum() == Approx(2.0).epsilon(1e-14));
    // Exact for x^(2n-2).
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += r.weights(k) * std::pow(r.nodes(k), 2 * n - 2);
    CHECK(s == Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0), ParameterError);
  CHECK(default_quadrature_nodes(3) == 5);
  CHECK(default_quadrature_nodes(4) == 5);
}

TEST_CASE("spline expansions reproduce monomials from Greville powers") {
  testgen::Gen g(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = g.integer(1, 6);
    const KnotWindow w = testgen::random_window(g, m, m + 10);
    const IndexRange b = w.basis_range();
    for (int l = 0; l <= std::min(m, 3); ++l) {
      Eigen::VectorXd c(b.size());
      for (Index j = b.first; j <= b.last; ++j) c(j - b.first) = greville_power(w, j, l);
      const SplineExpansion s(w, b.first, c);
      const Interval dom = s.domain();
      for (int k = 0; k < 25; ++k) {
        const double x = g.uniform(dom.lo, dom.hi);
        CHECK(eval_expansion(s, x) == Approx(std::pow(x, l)).epsilon(1e-9));
      }
      CHECK(s(dom.hi) == Approx(std::pow(dom.hi, l)).epsilon(1e-9));
    }
  }
}

TEST_CASE("expansion domain") {
  const auto w = testgen::uniform_window(2, 8);
  const IndexRange b = w.basis_range();
  const SplineExpansion ones(w, b.first, Eigen::VectorXd::Ones(b.size()));
  const Interval dom = ones.domain();
  CHECK(ones(dom.lo) == Approx(1.0));
  CHECK(ones(0.5 * (dom.lo + dom.hi)) == Approx(1.0));
  CHECK_THROWS_AS(ones(dom.hi + 0.1), RangeError);
  CHECK_THROWS_AS(SplineExpansion(w, b.first - 1, Eigen::VectorXd::Ones(2)),
                  WindowBoundsError);
  const SplineExpansion part(w, b.first + 2, Eigen::VectorXd::Ones(1), true);
  CHECK(part(w.t(b.first + 2)) == Approx(eval_B(w, b.first + 2, w.t(b.first + 2))));
}
