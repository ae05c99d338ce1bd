#include "nbqi/knots.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

namespace nbqi {

KnotWindow::KnotWindow(std::vector<double> knots, int degree, Index offset)
    : degree_(degree), offset_(offset) {
  if (degree < 1) throw ParameterError("KnotWindow: degree must be >= 1");
  if (knots.size() < static_cast<std::size_t>(degree) + 2)
    throw ParameterError("KnotWindow: need at least m+2 knots, got " +
                         std::to_string(knots.size()));
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]))
      throw ParameterError("KnotWindow: non-finite knot at slot " +
                           std::to_string(i));
    if (i > 0 && !(knots[i - 1] < knots[i]))
      throw ParameterError("KnotWindow: knots not strictly increasing at slot " +
                           std::to_string(i));
  }
  knots_ = std::make_shared<const std::vector<double>>(std::move(knots));
}

double KnotWindow::t(Index i) const {
  if (!contains(i))
    throw WindowBoundsError("knot index " + std::to_string(i) +
                            " outside window [" + std::to_string(first_index()) +
                            ", " + std::to_string(last_index()) + "]");
  return (*knots_)[static_cast<std::size_t>(i - offset_)];
}

std::span<const double> KnotWindow::slice(Index first, Index last) const {
  if (!contains(first) || !contains(last) || last < first)
    throw WindowBoundsError("knot slice [" + std::to_string(first) + ", " +
                            std::to_string(last) + "] outside window [" +
                            std::to_string(first_index()) + ", " +
                            std::to_string(last_index()) + "]");
  return std::span<const double>(*knots_).subspan(
      static_cast<std::size_t>(first - offset_),
      static_cast<std::size_t>(last - first + 1));
}

IndexRange KnotWindow::greville_range() const noexcept {
  return {first_index() + degree_ - 1, last_index()};
}

IndexRange KnotWindow::basis_range() const noexcept {
  return {first_index() + degree_, last_index() - 1};
}

IndexRange KnotWindow::valid_range(int reach) const noexcept {
  const IndexRange b = basis_range();
  const IndexRange g = greville_range();
  return {std::max(b.first, g.first + reach), std::min(b.last, g.last - reach)};
}

Interval KnotWindow::eval_interval(IndexRange coeffs) const {
  // Interval k is complete iff B_k..B_{k+m} all carry coefficients.
  const Index k_first = coeffs.first;
  const Index k_last = coeffs.last - degree_;
  if (coeffs.empty() || k_last < k_first || !contains(k_first) ||
      !contains(k_last + 1))
    throw RangeError("no complete knot interval for coefficient range [" +
                     std::to_string(coeffs.first) + ", " +
                     std::to_string(coeffs.last) + "]");
  return {t(k_first), t(k_last + 1)};
}

Index KnotWindow::interval_of(double x) const {
  const auto& k = *knots_;
  if (!(x >= k.front() && x < k.back()))
    throw RangeError("point outside knot window");
  const auto it = std::upper_bound(k.begin(), k.end(), x);
  return offset_ + static_cast<Index>(it - k.begin()) - 1;
}

double KnotWindow::mesh_ratio() const noexcept {
  const auto& k = *knots_;
  double r = 1.0;
  for (std::size_t i = 2; i < k.size(); ++i) {
    const double a = k[i - 1] - k[i - 2];
    const double b = k[i] - k[i - 1];
    r = std::max({r, a / b, b / a});
  }
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

namespace {

std::vector<double> mapped_T(const KnotWindow& w, Index j, double origin,
                             double scale) {
  const auto T = w.T(j);
  std::vector<double> u(T.size());
  std::transform(T.begin(), T.end(), u.begin(),
                 [&](double t) { return (t - origin) / scale; });
  return u;
}

void check_l(const KnotWindow& w, int l) {
  if (l < 0 || l > w.degree())
    throw ParameterError("symmetric function order " + std::to_string(l) +
                         " outside 0..m");
}

}  // namespace

double elem_sym(const KnotWindow& w, Index j, int l) {
  check_l(w, l);
  return elementary_symmetric<double>(w.T(j), l);
}

double ext_sym(const KnotWindow& w, Index j, int l) {
  if (l < 0) throw ParameterError("ext_sym: negative order");
  return complete_symmetric<double>(w.T(j), l);
}

double elem_sym_about(const KnotWindow& w, Index j, int l, double origin,
                      double scale) {
  check_l(w, l);
  const auto u = mapped_T(w, j, origin, scale);
  return elementary_symmetric<double>(u, l);
}

double ext_sym_about(const KnotWindow& w, Index j, int l, double origin,
                     double scale) {
  if (l < 0) throw ParameterError("ext_sym: negative order");
  const auto u = mapped_T(w, j, origin, scale);
  return complete_symmetric<double>(u, l);
}

double greville_power(const KnotWindow& w, Index j, int l, double origin,
                      double scale) {
  return elem_sym_about(w, j, l, origin, scale) / binomial(w.degree(), l);
}

double moment(const KnotWindow& w, Index j, int l, double origin,
              double scale) {
  const int m = w.degree();
  if (m < 2)
    throw UnsupportedDegreeError("moments of M-splines need m >= 2");
  return ext_sym_about(w, j, l, origin, scale) / binomial(m + l - 1, l);
}

double theta(const KnotWindow& w, Index j) {
  const auto T = w.T(j);
  double s = 0.0;
  for (double t : T) s += t;
  return s / static_cast<double>(T.size());
}

double omega(const KnotWindow& w, Index j) {
  const auto T = w.T(j);
  double s = 0.0;
  for (std::size_t r = 0; r < T.size(); ++r)
    for (std::size_t q = r + 1; q < T.size(); ++q) {
      const double d = T[r] - T[q];
      s += d * d;
    }
  return s;
}

double theta_bar2(const KnotWindow& w, Index j) {
  const int m = w.degree();
  if (m < 2) {
    (void)w.T(j);
    return 0.0;
  }
  return omega(w, j) / (static_cast<double>(m) * m * (m - 1));
}

Index GrevilleTable::row(Index j) const {
  if (!range.contains(j))
    throw WindowBoundsError("Greville index " + std::to_string(j) +
                            " outside table");
  return j - range.first;
}

double MomentTable::mu(Index j, int l) const {
  if (!range.contains(j))
    throw WindowBoundsError("moment index " + std::to_string(j) +
                            " outside table");
  if (l < 0 || l >= values.cols())
    throw ParameterError("moment order outside table");
  return values(j - range.first, l);
}

GrevilleTable greville(const KnotWindow& w) {
  const int m = w.degree();
  GrevilleTable g;
  g.range = w.greville_range();
  g.powers.resize(g.range.size(), m + 1);
  g.bar2.resize(g.range.size());
  for (Index j = g.range.first; j <= g.range.last; ++j) {
    const Index r = j - g.range.first;
    for (int l = 0; l <= m; ++l) g.powers(r, l) = greville_power(w, j, l);
    g.bar2(r) = theta_bar2(w, j);
  }
  return g;
}

MomentTable moments(const KnotWindow& w, int l_max) {
  if (w.degree() < 2)
    throw UnsupportedDegreeError("moments of M-splines need m >= 2");
  if (l_max < 0) throw ParameterError("moments: negative l_max");
  MomentTable t;
  t.range = w.greville_range();
  t.values.resize(t.range.size(), l_max + 1);
  for (Index j = t.range.first; j <= t.range.last; ++j)
    for (int l = 0; l <= l_max; ++l)
      t.values(j - t.range.first, l) = moment(w, j, l);
  return t;
}

std::vector<double> read_knots(std::istream& in, std::string_view source) {
  std::vector<double> knots;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line_no) +
                    ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    const char* first = line.data() + b;
    const char* last = line.data() + e + 1;
    if (*first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail("not a decimal number: '" +
                                               line.substr(b, e - b + 1) + "'");
    if (!std::isfinite(value)) fail("non-finite knot");
    if (!knots.empty() && !(knots.back() < value))
      fail("knot " + line.substr(b, e - b + 1) +
           " is not greater than the previous knot");
    knots.push_back(value);
  }
  return knots;
}

KnotWindow load_knot_file(const std::filesystem::path& path, int degree,
                          Index offset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open knot file " + path.string());
  return KnotWindow(read_knots(in, path.string()), degree, offset);
}

}  // namespace nbqi
