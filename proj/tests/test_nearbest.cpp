#include <doctest.h>

#include <Eigen/Dense>

#include "nbqi/dqi.hpp"
#include "nbqi/iqi.hpp"
#include "nbqi/nearbest.hpp"
#include "support/generators.hpp"
#include "support/lp_oracle.hpp"

using namespace nbqi;
using doctest::Approx;

namespace {

L1Problem random_problem(testgen::Gen& g, int p, int q) {
  L1Problem pr;
  pr.p = p;
  pr.q = q;
  pr.V = Eigen::MatrixXd::NullaryExpr(q + 1, 2 * p + 1, [&] { return g.uniform(-1.0, 1.0); });
  pr.V.row(0).setOnes();
  pr.b = Eigen::VectorXd::NullaryExpr(q + 1, [&] { return g.uniform(-1.0, 1.0); });
  pr.b(0) = 1.0;
  return pr;
}

// Smallest objective over all vertices, by an independent loop.
double brute_vertex_min(const L1Problem& pr) {
  const Index n = pr.V.cols(), k = pr.V.rows();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    Eigen::MatrixXd M(k, k);
    Index c = 0;
    for (Index j = 0; j < n; ++j)
      if (mask >> j & 1u) M.col(c++) = pr.V.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (qr.rank() < k) continue;
    best = std::min(best, qr.solve(pr.b).lpNorm<1>());
  }
  return best;
}

Eigen::VectorXd embed(const ThreePointWeights& a, int p) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * p + 1);
  x(0) = a.left;
  x(p) = a.center;
  x(2 * p) = a.right;
  return x;
}

KnotWindow perturbed_uniform(testgen::Gen& g, int intervals, double ratio) {
  return KnotWindow(testgen::random_knots(g, intervals, ratio), 2, 0);
}

}  // namespace

TEST_CASE("solve_l1 on small problems") {
  SUBCASE("single row of ones") {
    L1Problem pr{Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Ones(1), 1, 0, {}};
    const L1Solution s = solve_l1(pr);
    CHECK(s.objective == 1.0);
    CHECK(s.support == std::vector<Index>{0});
  }
  SUBCASE("uniform m = 2, p = 2") {
    const auto w = testgen::uniform_window(2, 20);
    const int p = 2;
    const L1Problem pr = make_discrete_problem(w, 10, p, 2);
    const L1Solution s = solve_l1(pr);
    CHECK(s.objective == Approx(1.0 + 1.0 / (2.0 * p * p)).epsilon(1e-12));
    CHECK(s.support == std::vector<Index>{0, 2, 4});
  }
  SUBCASE("b equal to a column") {
    testgen::Gen g(3);
    const KnotWindow w = testgen::random_window(g, 3, 20);
    L1Problem pr = make_discrete_problem(w, w.valid_range(3).first, 3, 2);
    pr.b = pr.V.col(0);
    const L1Solution s = solve_l1(pr);
    CHECK(s.objective == Approx(1.0).epsilon(1e-12));
    CHECK(s.support == std::vector<Index>{0});
  }
  SUBCASE("rank deficiency") {
    L1Problem pr{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2), 1, 1, {}};
    CHECK_THROWS_AS(solve_l1(pr), DegenerateProblemError);
  }
}

TEST_CASE("solve_l1 matches a simplex reformulation") {
  testgen::Gen g(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = g.integer(1, 4);
    const L1Problem pr = random_problem(g, p, 2);
    const L1Solution s = solve_l1(pr);
    const auto lp = testgen::l1_by_simplex(pr.V, pr.b);
    REQUIRE(lp.has_value());
    CHECK(s.objective == Approx(*lp).epsilon(1e-10));
    CHECK(s.support.size() <= 3u);
    CHECK((pr.V * s.a - pr.b).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("recovered certificates are sound") {
  testgen::Gen g(202);
  for (int trial = 0; trial < 100; ++trial) {
    const L1Problem pr = random_problem(g, g.integer(1, 4), 2);
    const L1Solution s = solve_l1(pr);
    const auto cert = recover_certificate(pr, s);
    REQUIRE(cert.has_value());
    const Verdict v = watson_verify(pr, s.a, *cert);
    CHECK(v.ok);
    CHECK(brute_vertex_min(pr) >= s.objective - 1e-10 * (1.0 + s.objective));
  }
}

TEST_CASE("watson_verify diagnostics") {
  const auto w = testgen::uniform_window(2, 20);
  const int p = 2;
  const Index i = 10;
  const L1Problem pr = make_discrete_problem(w, i, p, 2);
  const Eigen::VectorXd a = embed(three_point_weights(w, i, p), p);
  Certificate v = discrete_certificate(w, i, p);
  CHECK(v.v(0) == -1.0);
  CHECK(v.v(p) == 1.0);
  CHECK(v.v(2 * p) == -1.0);
  CHECK(watson_verify(pr, a, v).ok);
  CHECK(watson_verify(pr, a, v, discrete_null_matrix(w, i, p)).ok);

  Certificate bad = v;
  bad.v(1) = 1.5;
  const Verdict vb = watson_verify(pr, a, bad);
  CHECK_FALSE(vb.ok);
  CHECK(vb.diagnostic.rfind("‖v‖∞ > 1", 0) == 0);
  CHECK(vb.magnitude == 1.5);

  Certificate flipped = v;
  flipped.v(p) = -1.0;
  CHECK_FALSE(watson_verify(pr, a, flipped).ok);

  Eigen::VectorXd off = a;
  off(p) += 0.1;
  CHECK(watson_verify(pr, off, v).diagnostic.rfind("candidate infeasible", 0) == 0);
  CHECK_THROWS_AS(watson_verify(pr, Eigen::VectorXd::Zero(3), v), ParameterError);

  const L1Solution s = solve_l1(pr);
  const auto rec = recover_certificate(pr, s);
  REQUIRE(rec.has_value());
  CHECK(watson_verify(pr, s.a, *rec).ok);
}

TEST_CASE("explicit null matrix spans the constraint kernel") {
  testgen::Gen g(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = g.integer(2, 5), p = m + g.integer(0, 2);
    const KnotWindow w = testgen::random_window(g, m, 2 * p + 2 * m + 4);
    const Index i = w.valid_range(p).first;
    for (const L1Problem& pr : {make_discrete_problem(w, i, p, 2), make_integral_problem(w, i, p, 2)}) {
      const Eigen::MatrixXd A = explicit_null_matrix(pr);
      CHECK((pr.V * A).lpNorm<Eigen::Infinity>() < 1e-10 * (1.0 + A.lpNorm<Eigen::Infinity>()));
      CHECK(numerical_rank(A) == 2 * p - 2);
      const Certificate c = explicit_certificate(pr);
      // v is orthogonal to the kernel by construction.
      CHECK((A.transpose() * c.v).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("knot condition for three-point discrete stencils") {
  const auto w = testgen::uniform_window(3, 30);
  for (int p = 3; p <= 6; ++p)
    for (Index i = w.valid_range(p).first; i <= w.valid_range(p).last; ++i)
      CHECK(knot_condition(w, i, p));

  const KnotWindow jump({-6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 100, 101, 102, 103, 104, 105, 106}, 2, 0);
  CHECK_FALSE(knot_condition(jump, 8, 2));
  CHECK_THROWS_AS(knot_condition(w, 15, 0), ParameterError);
  CHECK_THROWS_AS(knot_condition(w, 15, 2), ParameterError);
}

TEST_CASE("steep geometric partitions break the discrete certificate") {
  // t_k = rho^k; look for a stencil where the explicit certificate fails.
  bool found = false;
  for (double rho : {2.0, 4.0, 8.0})
    for (int p = 2; p <= 5 && !found; ++p) {
      std::vector<double> t;
      for (int k = 0; k <= 4 * p + 8; ++k) t.push_back(std::pow(rho, k));
      const KnotWindow w(t, 2, 0);
      const IndexRange r = w.valid_range(p);
      for (Index i = r.first; i <= r.last && !found; ++i) {
        const L1Problem pr = make_discrete_problem(w, i, p, 2);
        const Eigen::VectorXd a = embed(three_point_weights(w, i, p), p);
        if (!watson_verify(pr, a, discrete_certificate(w, i, p)).ok) {
          found = true;
          CHECK_FALSE(knot_condition(w, i, p));
        }
      }
    }
  CHECK(found);
}

TEST_CASE("three-point discrete operators are near-best under the knot condition") {
  testgen::Gen g(55);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const KnotWindow w = perturbed_uniform(g, 24, trial % 4 == 0 ? 1.0 : 1.1);
    for (int p = 2; p <= 4; ++p) {
      const IndexRange r = w.valid_range(p);
      for (Index i = r.first; i <= r.last; i += 3) {
        if (!knot_condition(w, i, p)) continue;
        const L1Problem pr = make_discrete_problem(w, i, p, 2);
        const ThreePointWeights a = three_point_weights(w, i, p);
        CHECK(solve_l1(pr).objective == Approx(a.l1()).epsilon(1e-10));
        CHECK(watson_verify(pr, embed(a, p), discrete_certificate(w, i, p)).ok);
        ++checked;
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("chord barycenters") {
  testgen::Gen g(61);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = g.integer(2, 6);
    const KnotWindow w = testgen::random_window(g, m, 3 * m + 6);
    const IndexRange r = w.greville_range();
    const Index a = g.integer(static_cast<int>(r.first), static_cast<int>(r.last) - 1);
    const Index b = g.integer(static_cast<int>(a) + 1, static_cast<int>(r.last));
    const double o = theta(w, a);
    const double expect =
        o + (moment(w, b, 2, o) - moment(w, a, 2, o)) / (2.0 * (theta(w, b) - theta(w, a)));
    CHECK(chord_barycenter(w, a, b) == Approx(expect).epsilon(1e-10));
  }
  CHECK_THROWS_AS(chord_barycenter(testgen::uniform_window(2, 8), 4, 4), ParameterError);
}

TEST_CASE("barycenter conditions") {
  const auto w = testgen::uniform_window(2, 20);
  const BarycenterReport rep = barycenter_conditions(w, 10, 2);
  CHECK(rep.holds);
  CHECK(rep.checks.size() == 4u);
  const BarycenterReport one = barycenter_conditions(w, 10, 1);
  CHECK(one.holds);
  CHECK(one.checks.empty());

  testgen::Gen g(71);
  int disagreements = 0, failing = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = g.integer(2, 5), p = g.integer(1, m + 2);
    const KnotWindow wr = testgen::random_window(g, m, 2 * p + 2 * m + 4, 4.0);
    const Index i = wr.valid_range(p).first;
    const BarycenterReport a = barycenter_conditions(wr, i, p);
    const BarycenterReport b = moment_ratio_conditions(wr, i, p);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t k = 0; k < a.checks.size(); ++k)
      disagreements += a.checks[k].holds != b.checks[k].holds;
    failing += !a.holds;
  }
  CHECK(disagreements == 0);
  CHECK(failing > 0);
}

TEST_CASE("three-point integral operators are near-best under the barycenter conditions") {
  testgen::Gen g(83);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + trial % 2;
    const KnotWindow w(testgen::random_knots(g, 28, trial % 4 == 0 ? 1.0 : 1.1), m, 0);
    for (int p = m; p <= m + 2; ++p) {
      const IndexRange r = w.valid_range(p);
      for (Index i = r.first; i <= r.last; i += 4) {
        if (!barycenter_conditions(w, i, p).holds) continue;
        const L1Problem pr = make_integral_problem(w, i, p, 2);
        const ThreePointWeights a = gp_star_weights(w, i, p);
        CHECK(solve_l1(pr).objective == Approx(a.l1()).epsilon(1e-10));
        CHECK(watson_verify(pr, embed(a, p), integral_certificate(w, i, p)).ok);
        ++checked;
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("problem JSON round trip") {
  testgen::Gen g(5);
  const KnotWindow w = testgen::random_window(g, 3, 20);
  const L1Problem pr = make_integral_problem(w, 10, 3, 2);
  const L1Problem back = problem_from_json(problem_to_json(pr));
  CHECK(back.p == 3);
  CHECK(back.q == 2);
  CHECK(back.V == pr.V);
  CHECK(back.b == pr.b);
  CHECK(back.meta.at("family") == "integral");

  const L1Problem nested = problem_from_json(
      R"({"V": [[1, 1, 1]], "b": [1], "p": 1, "q": 0, "meta": {"note": 3}})");
  CHECK(nested.V.cols() == 3);
  CHECK(nested.meta.at("note") == "3");
  CHECK_THROWS_AS(problem_from_json("{"), DataError);
  CHECK_THROWS_AS(problem_from_json(R"({"V": [1, 2], "b": [1], "p": 1, "q": 0})"), DataError);
}
