#include "nbqi/dqi.hpp"

#include <cmath>
#include <sstream>

namespace nbqi {

ThreePointWeights three_point_weights(const KnotWindow& w, Index i, int p) {
  const double tb = theta_bar2(w, i);
  const double c = theta(w, i);
  const double dl = c - theta(w, i - p);
  const double dr = theta(w, i + p) - c;
  return {-tb / ((dl + dr) * dl), 1.0 + tb / (dr * dl), -tb / ((dl + dr) * dr)};
}

namespace {

QuasiInterpolant finish(QuasiInterpolant qi, const BuildOptions& opt) {
  if (opt.validate) validate_exactness(qi, opt.tolerance);
  return qi;
}

IndexRange require_range(const KnotWindow& w, int reach, const char* name) {
  const IndexRange r = w.valid_range(reach);
  if (r.empty())
    throw WindowBoundsError(std::string(name) +
                            ": window too small for any full stencil");
  return r;
}

QuasiInterpolant three_point_operator(const KnotWindow& w, int p, std::string name,
                                      const BuildOptions& opt) {
  const IndexRange range = require_range(w, p, name.c_str());
  std::vector<Functional> fs;
  for (Index i = range.first; i <= range.last; ++i) {
    const ThreePointWeights a = three_point_weights(w, i, p);
    fs.push_back(DiscreteFunctional{i,
                                    {{NodeKind::greville, i - p, a.left},
                                     {NodeKind::greville, i, a.center},
                                     {NodeKind::greville, i + p, a.right}}});
  }
  return finish(QuasiInterpolant(std::move(name), w, Family::discrete, 2, p,
                                 range.first, std::move(fs)),
                opt);
}

void require_m2(const KnotWindow& w, const char* name) {
  if (w.degree() < 2)
    throw UnsupportedDegreeError(std::string(name) + " needs m >= 2");
}

}  // namespace

QuasiInterpolant build_Q2_derivative(const KnotWindow& w, const BuildOptions& opt) {
  require_m2(w, "Q2");
  const IndexRange range = require_range(w, 0, "Q2");
  std::vector<Functional> fs;
  for (Index i = range.first; i <= range.last; ++i)
    fs.push_back(DiscreteFunctional{
        i,
        {{NodeKind::greville, i, 1.0},
         {NodeKind::second_derivative, i, -0.5 * theta_bar2(w, i)}}});
  return finish(QuasiInterpolant("Q2", w, Family::discrete, 2, 0, range.first,
                                 std::move(fs)),
                opt);
}

QuasiInterpolant build_Q2_star(const KnotWindow& w, const BuildOptions& opt) {
  require_m2(w, "Q2*");
  return three_point_operator(w, 1, "Q2*", opt);
}

QuasiInterpolant build_Qp_star(const KnotWindow& w, int p, const BuildOptions& opt) {
  require_m2(w, "Qp*");
  if (p < w.degree())
    throw ParameterError("Qp*: p = " + std::to_string(p) + " must be >= m = " +
                         std::to_string(w.degree()));
  return three_point_operator(w, p, "Q" + std::to_string(p) + "*", opt);
}

QuasiInterpolant build_Qpq(const KnotWindow& w, int p, int q,
                           const std::map<Index, Eigen::VectorXd>& coeffs,
                           const BuildOptions& opt) {
  if (p < 0) throw ParameterError("Qpq: p must be >= 0");
  if (q < 0 || q > w.degree()) throw ParameterError("Qpq: q must be in 0..m");
  if (coeffs.empty()) throw ParameterError("Qpq: no coefficients");
  const IndexRange valid = w.valid_range(p);
  std::vector<Functional> fs;
  Index expected = coeffs.begin()->first;
  for (const auto& [i, a] : coeffs) {
    if (i != expected) throw ParameterError("Qpq: indices must be consecutive");
    if (!valid.contains(i))
      throw WindowBoundsError("Qpq: stencil at index " + std::to_string(i) +
                              " leaves the window");
    if (a.size() != 2 * p + 1)
      throw ParameterError("Qpq: coefficient vector at index " +
                           std::to_string(i) + " must have 2p+1 entries");
    DiscreteFunctional f{i, {}};
    for (int s = -p; s <= p; ++s)
      f.terms.push_back({NodeKind::greville, i + s, a(s + p)});
    fs.push_back(std::move(f));
    ++expected;
  }
  QuasiInterpolant qi("Q" + std::to_string(p) + "," + std::to_string(q), w,
                      Family::discrete, q, p, coeffs.begin()->first, std::move(fs));
  const double worst = exactness_defect(qi, q);
  if (!(worst <= 1e-8)) {
    std::ostringstream os;
    os.precision(3);
    os << "Qpq: coefficients violate the exactness constraints (worst residual "
       << worst << ")";
    throw InconsistentCoefficientsError(os.str());
  }
  return finish(std::move(qi), opt);
}

ThreePointWeights cubic_knot_weights(const KnotWindow& w, Index j) {
  const double u = w.t(j - 1) - w.t(j - 2);
  const double v = w.t(j) - w.t(j - 1);
  return {-v * v / (3.0 * u * (u + v)), (u + v) * (u + v) / (3.0 * u * v),
          -u * u / (3.0 * v * (u + v))};
}

QuasiInterpolant build_Q3_cubic(const KnotWindow& w, const BuildOptions& opt) {
  if (w.degree() != 3) throw UnsupportedDegreeError("Q3 is defined for m = 3 only");
  const IndexRange range = require_range(w, 0, "Q3");
  std::vector<Functional> fs;
  for (Index j = range.first; j <= range.last; ++j) {
    const ThreePointWeights a = cubic_knot_weights(w, j);
    fs.push_back(DiscreteFunctional{j,
                                    {{NodeKind::knot, j - 2, a.left},
                                     {NodeKind::knot, j - 1, a.center},
                                     {NodeKind::knot, j, a.right}}});
  }
  return finish(QuasiInterpolant("Q3", w, Family::discrete, 3, 1, range.first,
                                 std::move(fs)),
                opt);
}

}  // namespace nbqi
