#include "nbqi/iqi.hpp"

#include <cmath>
#include <sstream>

namespace nbqi {

namespace {

void require_m2(const KnotWindow& w, const char* name) {
  if (w.degree() < 2)
    throw UnsupportedDegreeError(std::string(name) + " needs m >= 2");
}

IndexRange require_range(const KnotWindow& w, int reach, const std::string& name) {
  const IndexRange r = w.valid_range(reach);
  if (r.empty()) throw WindowBoundsError(name + ": window too small for any full stencil");
  return r;
}

QuasiInterpolant finish(QuasiInterpolant qi, const BuildOptions& opt) {
  if (opt.validate) validate_exactness(qi, opt.tolerance);
  return qi;
}

IntegralFunctional three_term(Index i, int p, const ThreePointWeights& a) {
  return IntegralFunctional{i, {{i - p, a.left}, {i, a.center}, {i + p, a.right}}, {}};
}

}  // namespace

QuasiInterpolant build_G1(const KnotWindow& w, const BuildOptions& opt) {
  require_m2(w, "G1");
  const IndexRange range = require_range(w, 0, "G1");
  std::vector<Functional> fs;
  for (Index i = range.first; i <= range.last; ++i)
    fs.push_back(IntegralFunctional{i, {{i, 1.0}}, {}});
  return finish(QuasiInterpolant("G1", w, Family::integral, 1, 0, range.first,
                                 std::move(fs)),
                opt);
}

ThreePointWeights g2_weights(const KnotWindow& w, Index i) {
  const int m = w.degree();
  const double om = omega(w, i);
  const double lo = w.t(i) - w.t(i - m);
  const double mid = w.t(i + 1) - w.t(i - m);
  const double hi = w.t(i + 1) - w.t(i + 1 - m);
  const double a = -om / ((m - 1) * lo * mid);
  const double c = -om / ((m - 1) * mid * hi);
  return {a, 1.0 - a - c, c};
}

QuasiInterpolant build_G2(const KnotWindow& w, const BuildOptions& opt) {
  require_m2(w, "G2");
  const IndexRange range = require_range(w, 1, "G2");
  std::vector<Functional> fs;
  for (Index i = range.first; i <= range.last; ++i)
    fs.push_back(three_term(i, 1, g2_weights(w, i)));
  return finish(QuasiInterpolant("G2", w, Family::integral, 2, 1, range.first,
                                 std::move(fs)),
                opt);
}

ThreePointWeights gp_star_weights(const KnotWindow& w, Index i, int p) {
  // Local coordinates about theta_i keep the second moments well scaled.
  const double origin = theta(w, i);
  const double scale = theta(w, i + p) - theta(w, i - p);
  const auto th = [&](Index k) { return (theta(w, k) - origin) / scale; };
  const auto mu2 = [&](Index k) { return moment(w, k, 2, origin, scale); };
  const double xi = mu2(i) - greville_power(w, i, 2, origin, scale);
  const double dth_left = th(i) - th(i - p);
  const double dth_right = th(i + p) - th(i);
  const double dmu_left = mu2(i) - mu2(i - p);
  const double dmu_right = mu2(i + p) - mu2(i);
  const double delta = dth_left * dmu_right - dth_right * dmu_left;
  if (!(std::abs(delta) >= 1e-13)) {
    std::ostringstream os;
    os << "Gp*: degenerate moment system at index " << i << " (p = " << p
       << ", scaled delta = " << delta << ")";
    throw DegenerateProblemError(os.str());
  }
  const double left = -xi * dth_right / delta;
  const double right = -xi * dth_left / delta;
  return {left, 1.0 - left - right, right};
}

QuasiInterpolant build_Gp_star(const KnotWindow& w, int p, const BuildOptions& opt) {
  require_m2(w, "Gp*");
  if (p < w.degree())
    throw ParameterError("Gp*: p = " + std::to_string(p) + " must be >= m = " +
                         std::to_string(w.degree()));
  const std::string name = "G" + std::to_string(p) + "*";
  const IndexRange range = require_range(w, p, name);
  std::vector<Functional> fs;
  for (Index i = range.first; i <= range.last; ++i)
    fs.push_back(three_term(i, p, gp_star_weights(w, i, p)));
  return finish(QuasiInterpolant(name, w, Family::integral, 2, p, range.first,
                                 std::move(fs)),
                opt);
}

QuasiInterpolant build_Gpq(const KnotWindow& w, int p, int q,
                           const std::map<Index, Eigen::VectorXd>& coeffs,
                           const BuildOptions& opt) {
  require_m2(w, "Gpq");
  if (p < 0) throw ParameterError("Gpq: p must be >= 0");
  if (q < 0 || q > w.degree()) throw ParameterError("Gpq: q must be in 0..m");
  if (coeffs.empty()) throw ParameterError("Gpq: no coefficients");
  const IndexRange valid = w.valid_range(p);
  std::vector<Functional> fs;
  Index expected = coeffs.begin()->first;
  for (const auto& [i, a] : coeffs) {
    if (i != expected) throw ParameterError("Gpq: indices must be consecutive");
    if (!valid.contains(i))
      throw WindowBoundsError("Gpq: stencil at index " + std::to_string(i) +
                              " leaves the window");
    if (a.size() != 2 * p + 1)
      throw ParameterError("Gpq: coefficient vector at index " +
                           std::to_string(i) + " must have 2p+1 entries");
    IntegralFunctional f{i, {}, {}};
    for (int s = -p; s <= p; ++s) f.terms.push_back({i + s, a(s + p)});
    fs.push_back(std::move(f));
    ++expected;
  }
  QuasiInterpolant qi("G" + std::to_string(p) + "," + std::to_string(q), w,
                      Family::integral, q, p, coeffs.begin()->first, std::move(fs));
  const double worst = exactness_defect(qi, q);
  if (!(worst <= 1e-8)) {
    std::ostringstream os;
    os.precision(3);
    os << "Gpq: coefficients violate the moment constraints (worst residual "
       << worst << ")";
    throw InconsistentCoefficientsError(os.str());
  }
  return finish(std::move(qi), opt);
}

}  // namespace nbqi
