#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nbqi/knots.hpp"

namespace nbqi {

/// min ||a||_1 subject to V a = b. Columns are stencil offsets -p..p.
struct L1Problem {
  Eigen::MatrixXd V;
  Eigen::VectorXd b;
  int p = 0;
  int q = 0;
  std::map<std::string, std::string> meta;

  int offset_of(Index column) const noexcept { return static_cast<int>(column) - p; }
};

struct L1Solution {
  Eigen::VectorXd a;
  double objective = 0.0;
  std::vector<Index> support;  ///< columns with |a| > 1e-12 ||a||_1
  std::vector<Index> basis;    ///< columns of the square subsystem solved
};

struct Certificate {
  Eigen::VectorXd v;
};

struct Verdict {
  bool ok = false;
  std::string diagnostic;  ///< first violated condition, empty when ok
  double magnitude = 0.0;  ///< size of that violation

  explicit operator bool() const noexcept { return ok; }
};

/// Greville-power constraints V(r, s) = theta_{i+s}^r, b(r) = theta_i^{(r)},
/// written in the local coordinate u = (x - theta_i) / (theta_{i+p} - theta_{i-p}).
/// The feasible set of a is independent of that choice.
L1Problem make_discrete_problem(const KnotWindow& w, Index i, int p, int q);

/// Moment constraints W(r, s) = mu_{i+s}^{(r)}, same right-hand side and
/// local coordinate. Requires m >= 2.
L1Problem make_integral_problem(const KnotWindow& w, Index i, int p, int q);

/// Global minimiser by enumeration of all (q+1)-column subsystems.
/// Ties go to the lexicographically smallest support. Throws
/// DegenerateProblemError when rank V < q+1.
L1Solution solve_l1(const L1Problem& problem);

/// Numerical rank with singular values above 1e-10 sigma_max.
Index numerical_rank(const Eigen::MatrixXd& M);
/// Orthonormal basis of the null space of V (columns).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& V);

/// Optimality test for candidate a with dual vector v:
///   V a = b,  ||v||_inf <= 1 + 1e-10,  A^T v = 0 for a null-space basis A
///   of V,  v_s = sign(a_s) wherever |a_s| > 1e-12 ||a||_1.
Verdict watson_verify(const L1Problem& problem, const Eigen::VectorXd& a,
                      const Certificate& v);
/// Same test with an explicit matrix A whose columns span the null space.
Verdict watson_verify(const L1Problem& problem, const Eigen::VectorXd& a,
                      const Certificate& v, const Eigen::MatrixXd& A);

/// A dual vector for `solution` from the optimal vertex of
/// max b^T y s.t. |V^T y| <= 1, found by enumerating active sets.
std::optional<Certificate> recover_certificate(const L1Problem& problem,
                                               const L1Solution& solution);

/// Coefficients expressing stencil columns through the columns at -p, 0, p.
/// For an offset k in K1 = {-p+1..-1} or K2 = {1..p-1}:
///   c_k = alpha c_{-p} + beta c_0 - gamma c_p      (k in K1)
///   c_k = -alpha c_{-p} + beta c_0 + gamma c_p     (k in K2)
/// with c_k = (1, theta_{i+k}, y_{i+k}) and y the second-order row of V.
struct ThreeColumnCoords {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};
ThreeColumnCoords three_column_coords(const L1Problem& problem, int k);

/// Explicit dual vector: -1, 1, -1 at offsets -p, 0, p and
/// -alpha+beta+gamma on K1, alpha+beta-gamma on K2.
Certificate explicit_certificate(const L1Problem& problem);
/// The (2p+1) x (2p-2) matrix of the general solution a = a* + A t, one
/// column per free offset in K1 then K2.
Eigen::MatrixXd explicit_null_matrix(const L1Problem& problem);

/// Discrete certificate built on make_discrete_problem(w, i, p, 2).
Certificate discrete_certificate(const KnotWindow& w, Index i, int p);
Eigen::MatrixXd discrete_null_matrix(const KnotWindow& w, Index i, int p);
/// theta_{i-1} + theta_i <= theta_{i-p} + theta_{i+p} <= theta_i + theta_{i+1}
/// within 1e-12 times the stencil width. Requires p >= m.
bool knot_condition(const KnotWindow& w, Index i, int p);

/// Integral certificate built on make_integral_problem(w, i, p, 2).
Certificate integral_certificate(const KnotWindow& w, Index i, int p);

/// Weighted mean of the m points (tau_k, w_k) of the chord between index a
/// and index b > a:
///   w_k   = t_{b-m+k} - t_{a-m+k}
///   tau_k = (t_{a-m+k} + ... + t_a + t_{b-m+1} + ... + t_{b-m+k}) / (m+1)
/// It equals (mu_b^{(2)} - mu_a^{(2)}) / (2 (theta_b - theta_a)).
double chord_barycenter(const KnotWindow& w, Index a, Index b);

struct BarycenterCheck {
  int inequality = 0;  ///< 1..4
  int offset = 0;      ///< r (inequalities 1, 2) or s (3, 4), in 1..p-1
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const noexcept { return rhs - lhs; }
  bool holds = false;
};

struct BarycenterReport {
  bool holds = true;
  std::vector<BarycenterCheck> checks;
};

/// For r, s in 1..p-1 (empty when p = 1):
///   (1) bary(i-r, i)   <= bary(i-p, i+p)
///   (2) bary(i-p, i-r) <= bary(i-r, i+p)
///   (3) bary(i-p, i+p) <= bary(i, i+s)
///   (4) bary(i-p, i+s) <= bary(i+s, i+p)
/// with tolerance 1e-12 times the stencil width.
BarycenterReport barycenter_conditions(const KnotWindow& w, Index i, int p);
/// The same comparisons written as moment ratios
/// (mu_b^{(2)} - mu_a^{(2)}) / (theta_b - theta_a).
BarycenterReport moment_ratio_conditions(const KnotWindow& w, Index i,
                                                  int p);

/// JSON {"V": flat row-major array, "b": [...], "p": int, "q": int,
/// "meta": {...}}. The loader also accepts V as an array of rows.
std::string problem_to_json(const L1Problem& problem);
L1Problem problem_from_json(const std::string& text);

}  // namespace nbqi
