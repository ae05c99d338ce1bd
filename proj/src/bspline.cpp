#include "nbqi/bspline.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <string>

namespace nbqi {

double eval_B(const KnotWindow& w, Index j, double x) {
  const int m = w.degree();
  return bspline_basis<double>(w.slice(j - m, j + 1), x);
}

double eval_M(const KnotWindow& w, Index j, double x) {
  const int m = w.degree();
  if (m < 2) throw UnsupportedDegreeError("M-splines need m >= 2");
  const auto knots = w.slice(j - m + 1, j);
  const double scale = (m - 1) / (knots.back() - knots.front());
  return scale * bspline_basis<double>(knots, x);
}

Eigen::VectorXd active_basis(const KnotWindow& w, Index k, double x) {
  const int m = w.degree();
  // Needs t_{k-m+1} .. t_{k+m}.
  const auto knots = w.slice(k - m + 1, k + m);
  const auto t = [&](Index i) { return knots[static_cast<std::size_t>(i - (k - m + 1))]; };
  Eigen::VectorXd N = Eigen::VectorXd::Zero(m + 1);
  Eigen::VectorXd left(m + 1), right(m + 1);
  N(0) = 1.0;
  for (int d = 1; d <= m; ++d) {
    left(d) = x - t(k + 1 - d);
    right(d) = t(k + d) - x;
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      const double temp = N(r) / (right(r + 1) + left(d - r));
      N(r) = saved + right(r + 1) * temp;
      saved = left(d - r) * temp;
    }
    N(d) = saved;
  }
  return N;
}

namespace {

constexpr int kMaxGaussNodes = 64;

GaussRule golub_welsch(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = 2.0 * es.eigenvectors().row(0).array().square().transpose();
  // Symmetrize: the rule is exactly symmetric about 0.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes(n - 1 - k) - rule.nodes(k));
    const double wt = 0.5 * (rule.weights(k) + rule.weights(n - 1 - k));
    rule.nodes(k) = -x;
    rule.nodes(n - 1 - k) = x;
    rule.weights(k) = wt;
    rule.weights(n - 1 - k) = wt;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxGaussNodes)
    throw ParameterError("Gauss-Legendre node count must be in 1.." +
                         std::to_string(kMaxGaussNodes));
  static std::array<GaussRule, kMaxGaussNodes + 1> rules;
  static std::array<std::once_flag, kMaxGaussNodes + 1> once;
  std::call_once(once[n], [n] { rules[n] = golub_welsch(n); });
  return rules[n];
}

int default_quadrature_nodes(int m) { return (m + 7) / 2; }

double inner_product_M(const KnotWindow& w, Index j, const RealFunction& f,
                       int nodes) {
  const int m = w.degree();
  if (m < 2) throw UnsupportedDegreeError("M-splines need m >= 2");
  const GaussRule& rule = gauss_legendre(nodes > 0 ? nodes : default_quadrature_nodes(m));
  const auto knots = w.slice(j - m + 1, j);
  const double scale = (m - 1) / (knots.back() - knots.front());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double part = 0.0;
    for (Index q = 0; q < rule.nodes.size(); ++q) {
      const double x = mid + half * rule.nodes(q);
      part += rule.weights(q) * bspline_basis<double>(knots, x) * f(x);
    }
    sum += half * part;
  }
  return scale * sum;
}

SplineExpansion::SplineExpansion(KnotWindow window, Index first,
                                 Eigen::VectorXd coeffs, bool zero_extended)
    : window_(std::move(window)),
      first_(first),
      coeffs_(std::move(coeffs)),
      zero_extended_(zero_extended) {
  const IndexRange basis = window_.basis_range();
  if (coeffs_.size() == 0 || !basis.contains(first_) ||
      !basis.contains(first_ + coeffs_.size() - 1))
    throw WindowBoundsError("expansion coefficients outside the basis range");
}

double SplineExpansion::coeff(Index j) const {
  if (!indices().contains(j)) {
    if (zero_extended_) return 0.0;
    throw WindowBoundsError("no coefficient for index " + std::to_string(j));
  }
  return coeffs_(j - first_);
}

Interval SplineExpansion::domain() const {
  return window_.eval_interval(zero_extended_ ? window_.basis_range() : indices());
}

Index locate_interval(const KnotWindow& w, const Interval& domain, double x) {
  if (!(x >= domain.lo && x <= domain.hi))
    throw RangeError("x = " + std::to_string(x) + " outside [" +
                     std::to_string(domain.lo) + ", " +
                     std::to_string(domain.hi) + "]");
  if (x < domain.hi) return w.interval_of(x);
  // Left limit at the right end: the interval ending at domain.hi.
  const auto knots = w.knots();
  const auto it = std::lower_bound(knots.begin(), knots.end(), domain.hi);
  return w.offset() + static_cast<Index>(it - knots.begin()) - 1;
}

double SplineExpansion::operator()(double x) const {
  const Interval dom = domain();
  const Index k = locate_interval(window_, dom, x);
  const Eigen::VectorXd N = active_basis(window_, k, x);
  double s = 0.0;
  for (int r = 0; r <= window_.degree(); ++r) s += coeff(k + r) * N(r);
  return s;
}

double eval_expansion(const SplineExpansion& s, double x) { return s(x); }

}  // namespace nbqi
