#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

#include "nbqi/knots.hpp"

namespace nbqi {

using RealFunction = std::function<double(double)>;

/// Value at x of the single B-spline of degree knots.size()-2 on the given
/// knots (Cox-de Boor triangle, right-continuous, zero outside
/// [knots.front(), knots.back())).
template <typename Scalar>
Scalar bspline_basis(std::span<const Scalar> knots, Scalar x) {
  const std::size_t n = knots.size();
  if (n < 2 || x < knots.front() || !(x < knots.back())) return Scalar(0);
  const std::size_t degree = n - 2;
  std::vector<Scalar> N(n - 1, Scalar(0));
  for (std::size_t i = 0; i + 1 < n; ++i)
    N[i] = (knots[i] <= x && x < knots[i + 1]) ? Scalar(1) : Scalar(0);
  for (std::size_t d = 1; d <= degree; ++d) {
    for (std::size_t i = 0; i + d + 1 < n; ++i) {
      Scalar v(0);
      if (N[i] != Scalar(0))
        v += (x - knots[i]) / (knots[i + d] - knots[i]) * N[i];
      if (N[i + 1] != Scalar(0))
        v += (knots[i + d + 1] - x) / (knots[i + d + 1] - knots[i + 1]) * N[i + 1];
      N[i] = v;
    }
  }
  return N[0];
}

/// B_j(x), degree m, support [t_{j-m}, t_{j+1}] (right-continuous).
double eval_B(const KnotWindow& w, Index j, double x);

/// M_j(x): degree m-2 B-spline on T_j scaled to unit integral by the
/// closed-form factor (m-1)/(t_j - t_{j-m+1}). Requires m >= 2.
double eval_M(const KnotWindow& w, Index j, double x);

/// Values of B_k, ..., B_{k+m} at x in [t_k, t_{k+1}] (all B-splines that
/// are active on the k-th knot interval), computed on that interval's
/// polynomial piece so x = t_{k+1} yields the left limit.
Eigen::VectorXd active_basis(const KnotWindow& w, Index k, double x);

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
const GaussRule& gauss_legendre(int n);

/// ceil((m+6)/2) nodes per knot interval.
int default_quadrature_nodes(int m);

/// <M_j, f> by composite Gauss-Legendre over the knot intervals of the
/// support of M_j. nodes <= 0 selects default_quadrature_nodes(m).
double inner_product_M(const KnotWindow& w, Index j, const RealFunction& f,
                       int nodes = 0);

/// sum_j c_j B_j over a contiguous index range.
///
/// A strict expansion is only evaluable where every active B-spline has a
/// coefficient; a zero-extended one treats missing coefficients as zero and
/// is evaluable on the whole basis range of the window.
class SplineExpansion {
 public:
  SplineExpansion(KnotWindow window, Index first, Eigen::VectorXd coeffs,
                  bool zero_extended = false);

  const KnotWindow& window() const noexcept { return window_; }
  IndexRange indices() const noexcept {
    return {first_, first_ + coeffs_.size() - 1};
  }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  double coeff(Index j) const;
  bool zero_extended() const noexcept { return zero_extended_; }

  /// Points where the expansion can be evaluated.
  Interval domain() const;

  double operator()(double x) const;

 private:
  KnotWindow window_;
  Index first_;
  Eigen::VectorXd coeffs_;
  bool zero_extended_;
};

double eval_expansion(const SplineExpansion& s, double x);

/// Locates the knot interval used to evaluate at x inside `domain`:
/// right-continuous, except that the right end of `domain` uses the last
/// interval (left limit).
Index locate_interval(const KnotWindow& w, const Interval& domain, double x);

}  // namespace nbqi
