#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "nbqi/errors.hpp"

namespace nbqi {

using Index = Eigen::Index;

/// Closed range of global indices; empty when last < first.
struct IndexRange {
  Index first = 0;
  Index last = -1;

  bool empty() const noexcept { return last < first; }
  Index size() const noexcept { return empty() ? 0 : last - first + 1; }
  bool contains(Index i) const noexcept { return i >= first && i <= last; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// A finite, strictly increasing slice t_offset, ..., t_{offset+n-1} of a
/// bi-infinite knot sequence, together with the spline degree m.
///
/// Index conventions (global indices throughout):
///   T_j  = {t_{j-m+1}, ..., t_j}          (Greville set, M_j interior)
///   B_j  has support [t_{j-m}, t_{j+1}]   (degree m)
///   M_j  has support [t_{j-m+1}, t_j]     (degree m-2, unit integral)
///
/// Copies share the immutable knot storage.
class KnotWindow {
 public:
  KnotWindow(std::vector<double> knots, int degree, Index offset = 0);

  int degree() const noexcept { return degree_; }
  Index offset() const noexcept { return offset_; }
  Index first_index() const noexcept { return offset_; }
  Index last_index() const noexcept {
    return offset_ + static_cast<Index>(knots_->size()) - 1;
  }
  std::size_t size() const noexcept { return knots_->size(); }
  bool contains(Index i) const noexcept {
    return i >= first_index() && i <= last_index();
  }

  /// t_i; throws WindowBoundsError outside the window.
  double t(Index i) const;
  /// h_i = t_i - t_{i-1}.
  double h(Index i) const { return t(i) - t(i - 1); }

  std::span<const double> knots() const noexcept { return *knots_; }
  /// Knots t_first..t_last (inclusive), bounds-checked.
  std::span<const double> slice(Index first, Index last) const;
  /// T_j = {t_{j-m+1}, ..., t_j}.
  std::span<const double> T(Index j) const { return slice(j - degree_ + 1, j); }

  /// Indices j whose set T_j lies inside the window.
  IndexRange greville_range() const noexcept;
  /// Indices j whose B-spline support lies inside the window.
  IndexRange basis_range() const noexcept;
  /// Indices j with B_j inside the window and T_{j-reach}, T_{j+reach}
  /// inside the window. Callers declare their reach; nothing is clamped.
  IndexRange valid_range(int reach) const noexcept;

  /// The x-interval on which every active B-spline has an index in
  /// `coeffs`. Throws RangeError when no full knot interval qualifies.
  Interval eval_interval(IndexRange coeffs) const;

  /// k with t_k <= x < t_{k+1}; x must lie in [t_first, t_last).
  Index interval_of(double x) const;

  /// max over consecutive steps of max(h_{i+1}/h_i, h_i/h_{i+1}).
  double mesh_ratio() const noexcept;

 private:
  std::shared_ptr<const std::vector<double>> knots_;
  int degree_;
  Index offset_;
};

double binomial(int n, int k);

/// Elementary symmetric function e_l of the entries of x, by the
/// one-variable-at-a-time recurrence. e_0 = 1.
template <typename Scalar>
Scalar elementary_symmetric(std::span<const Scalar> x, int l) {
  if (l < 0 || l > static_cast<int>(x.size())) return Scalar(0);
  std::vector<Scalar> e(static_cast<std::size_t>(l) + 1, Scalar(0));
  e[0] = Scalar(1);
  int seen = 0;
  for (const Scalar& xi : x) {
    ++seen;
    for (int k = std::min(l, seen); k >= 1; --k) e[k] += xi * e[k - 1];
  }
  return e[static_cast<std::size_t>(l)];
}

/// Complete homogeneous symmetric function (the "extended" symmetric
/// function, index tuples non-decreasing). h_0 = 1.
template <typename Scalar>
Scalar complete_symmetric(std::span<const Scalar> x, int l) {
  if (l < 0) return Scalar(0);
  std::vector<Scalar> h(static_cast<std::size_t>(l) + 1, Scalar(0));
  h[0] = Scalar(1);
  for (const Scalar& xi : x)
    for (int k = 1; k <= l; ++k) h[k] += xi * h[k - 1];
  return h[static_cast<std::size_t>(l)];
}

/// Classical divided difference [x_0, ..., x_n] f of arbitrary order.
template <typename Scalar>
Scalar divided_difference(std::span<const Scalar> nodes,
                          std::span<const Scalar> values) {
  if (nodes.size() != values.size() || nodes.empty())
    throw ParameterError("divided_difference: node/value length mismatch");
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (nodes[a] == nodes[b])
        throw DegenerateNodesError("divided_difference: repeated node");
  std::vector<Scalar> table(values.begin(), values.end());
  const std::size_t n = nodes.size();
  for (std::size_t order = 1; order < n; ++order)
    for (std::size_t k = n - 1; k >= order; --k)
      table[k] = (table[k] - table[k - 1]) / (nodes[k] - nodes[k - order]);
  return table[n - 1];
}

/// sigma_l(T_j); l in 0..m, sigma_0 = 1.
double elem_sym(const KnotWindow& w, Index j, int l);
/// sigma-bar_l(T_j); sigma-bar_0 = 1.
double ext_sym(const KnotWindow& w, Index j, int l);

/// sigma_l and sigma-bar_l of the affinely mapped set (T_j - origin)/scale.
double elem_sym_about(const KnotWindow& w, Index j, int l, double origin,
                      double scale = 1.0);
double ext_sym_about(const KnotWindow& w, Index j, int l, double origin,
                     double scale = 1.0);

/// theta_j^{(l)} = sigma_l(T_j)/C(m,l), optionally in local coordinates
/// u = (x - origin)/scale, i.e. the Marsden coefficient of u^l.
double greville_power(const KnotWindow& w, Index j, int l, double origin = 0.0,
                      double scale = 1.0);
/// mu_j^{(l)} = integral of u^l M_j(x) dx with u = (x - origin)/scale.
/// Requires m >= 2.
double moment(const KnotWindow& w, Index j, int l, double origin = 0.0,
              double scale = 1.0);

/// Greville abscissa theta_j (mean of T_j).
double theta(const KnotWindow& w, Index j);
/// theta-bar_j^{(2)} = theta_j^2 - theta_j^{(2)} by the pairwise-difference
/// expansion (1/(m^2(m-1))) sum_{r<s} (t_r - t_s)^2 over T_j.
double theta_bar2(const KnotWindow& w, Index j);
/// omega_j = sum over pairs r<s of T_j of (t_r - t_s)^2.
double omega(const KnotWindow& w, Index j);

struct GrevilleTable {
  IndexRange range;
  Eigen::MatrixXd powers;  ///< row j - range.first, column l in 0..m
  Eigen::VectorXd bar2;

  double theta(Index j) const { return powers(row(j), 1); }
  double power(Index j, int l) const { return powers(row(j), l); }
  double theta_bar2(Index j) const { return bar2(row(j)); }

 private:
  Index row(Index j) const;
};

struct MomentTable {
  IndexRange range;
  Eigen::MatrixXd values;  ///< row j - range.first, column l

  double mu(Index j, int l) const;
};

GrevilleTable greville(const KnotWindow& w);
MomentTable moments(const KnotWindow& w, int l_max);

/// Reads a knot file: one number per line, `#` comment lines and blank
/// lines allowed, strictly increasing. Errors name the offending line.
std::vector<double> read_knots(std::istream& in,
                               std::string_view source = "<stream>");
KnotWindow load_knot_file(const std::filesystem::path& path, int degree,
                          Index offset = 0);

}  // namespace nbqi
