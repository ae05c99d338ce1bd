#include "nbqi/quasi_interpolant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

namespace nbqi {

const char* to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::greville: return "greville";
    case NodeKind::knot: return "knot";
    case NodeKind::second_derivative: return "second_derivative";
  }
  return "?";
}

double ThreePointWeights::l1() const noexcept {
  return std::abs(left) + std::abs(center) + std::abs(right);
}

QuasiInterpolant::QuasiInterpolant(std::string name, KnotWindow window,
                                   Family family, int exactness, int reach,
                                   Index first,
                                   std::vector<Functional> functionals)
    : name_(std::move(name)),
      window_(std::move(window)),
      family_(family),
      exactness_(exactness),
      reach_(reach),
      first_(first),
      functionals_(std::move(functionals)) {
  if (functionals_.empty())
    throw WindowBoundsError(name_ + ": window too small for any full stencil");
  for (std::size_t k = 0; k < functionals_.size(); ++k) {
    const Index expected = first_ + static_cast<Index>(k);
    const Index center = std::visit([](const auto& f) { return f.center; },
                                    functionals_[k]);
    if (center != expected)
      throw ParameterError(name_ + ": functional centers must be consecutive");
    const bool integral = std::holds_alternative<IntegralFunctional>(functionals_[k]);
    if (integral != (family_ == Family::integral))
      throw ParameterError(name_ + ": functional kind does not match family");
  }
  if (!window_.basis_range().contains(first_) ||
      !window_.basis_range().contains(indices().last))
    throw WindowBoundsError(name_ + ": functional indices outside basis range");
}

const Functional& QuasiInterpolant::functional(Index i) const {
  if (!indices().contains(i))
    throw WindowBoundsError(name_ + ": no functional at index " +
                            std::to_string(i));
  return functionals_[static_cast<std::size_t>(i - first_)];
}

std::vector<double> QuasiInterpolant::weights(Index i) const {
  std::vector<double> w;
  std::visit(
      [&](const auto& f) {
        for (const auto& t : f.terms) w.push_back(t.weight);
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, IntegralFunctional>)
          for (const auto& t : f.endpoint_terms) w.push_back(t.weight);
      },
      functional(i));
  return w;
}

bool QuasiInterpolant::uses_derivatives() const noexcept {
  for (const auto& f : functionals_)
    if (const auto* d = std::get_if<DiscreteFunctional>(&f))
      for (const auto& t : d->terms)
        if (t.kind == NodeKind::second_derivative) return true;
  return false;
}

namespace {

double node_abscissa(const KnotWindow& w, const DiscreteTerm& t) {
  return t.kind == NodeKind::knot ? w.t(t.node) : theta(w, t.node);
}

double ipow(double x, int r) {
  double y = 1.0;
  for (int k = 0; k < r; ++k) y *= x;
  return y;
}

}  // namespace

SplineExpansion apply(const QuasiInterpolant& qi, const RealFunction& f,
                      const std::optional<RealFunction>& second_derivative,
                      const ApplyOptions& options) {
  if (qi.uses_derivatives() && !second_derivative)
    throw MissingDerivativeError(qi.name() +
                                 " needs the second derivative of f");
  const KnotWindow& w = qi.window();
  Eigen::VectorXd c(qi.indices().size());
  Index k = 0;
  for (const Functional& fn : qi.functionals()) {
    double s = 0.0;
    if (const auto* d = std::get_if<DiscreteFunctional>(&fn)) {
      for (const auto& t : d->terms) {
        const double x = node_abscissa(w, t);
        s += t.weight * (t.kind == NodeKind::second_derivative
                             ? (*second_derivative)(x)
                             : f(x));
      }
    } else {
      const auto& g = std::get<IntegralFunctional>(fn);
      for (const auto& t : g.terms)
        s += t.weight * inner_product_M(w, t.m_spline, f, options.quadrature_nodes);
      for (const auto& t : g.endpoint_terms) s += t.weight * f(w.t(t.knot));
    }
    c(k++) = s;
  }
  return SplineExpansion(w, qi.indices().first, std::move(c));
}

SplineExpansion apply_integral(const QuasiInterpolant& qi, const RealFunction& f,
                               const ApplyOptions& options) {
  if (qi.family() != Family::integral)
    throw UnsupportedOperationError(qi.name() + " is not an integral QI");
  return apply(qi, f, std::nullopt, options);
}

double functional_on_monomial(const KnotWindow& w, const Functional& fn, int r,
                              double origin, double scale) {
  if (r < 0) throw ParameterError("negative monomial degree");
  double s = 0.0;
  if (const auto* d = std::get_if<DiscreteFunctional>(&fn)) {
    for (const auto& t : d->terms) {
      const double u = (node_abscissa(w, t) - origin) / scale;
      if (t.kind == NodeKind::second_derivative)
        s += r < 2 ? 0.0 : t.weight * r * (r - 1) * ipow(u, r - 2) / (scale * scale);
      else
        s += t.weight * ipow(u, r);
    }
  } else {
    const auto& g = std::get<IntegralFunctional>(fn);
    for (const auto& t : g.terms) s += t.weight * moment(w, t.m_spline, r, origin, scale);
    for (const auto& t : g.endpoint_terms)
      s += t.weight * ipow((w.t(t.knot) - origin) / scale, r);
  }
  return s;
}

SplineExpansion apply_monomial(const QuasiInterpolant& qi, int r, double origin,
                               double scale) {
  Eigen::VectorXd c(qi.indices().size());
  Index k = 0;
  for (const Functional& fn : qi.functionals())
    c(k++) = functional_on_monomial(qi.window(), fn, r, origin, scale);
  return SplineExpansion(qi.window(), qi.indices().first, std::move(c));
}

namespace {

// Magnitude of the individual contributions, used to make defects relative.
double contribution_scale(const KnotWindow& w, const Functional& fn, int r,
                          double origin, double scale) {
  double s = 0.0;
  if (const auto* d = std::get_if<DiscreteFunctional>(&fn)) {
    for (const auto& t : d->terms) {
      const double u = std::abs((node_abscissa(w, t) - origin) / scale);
      s += t.kind == NodeKind::second_derivative
               ? std::abs(t.weight) * r * r * ipow(u, std::max(r - 2, 0)) / (scale * scale)
               : std::abs(t.weight) * ipow(u, r);
    }
  } else {
    const auto& g = std::get<IntegralFunctional>(fn);
    const int m = w.degree();
    for (const auto& t : g.terms) {
      const double lo = std::abs((w.t(t.m_spline - m + 1) - origin) / scale);
      const double hi = std::abs((w.t(t.m_spline) - origin) / scale);
      s += std::abs(t.weight) * ipow(std::max(lo, hi), r);
    }
    for (const auto& t : g.endpoint_terms)
      s += std::abs(t.weight) * ipow(std::abs((w.t(t.knot) - origin) / scale), r);
  }
  return s;
}

}  // namespace

double exactness_defect(const QuasiInterpolant& qi, int degree) {
  const KnotWindow& w = qi.window();
  const int m = w.degree();
  if (degree > m)
    throw ParameterError("exactness above degree m is not representable");
  double worst = 0.0;
  for (const Functional& fn : qi.functionals()) {
    const Index i = std::visit([](const auto& f) { return f.center; }, fn);
    const double origin = theta(w, i);
    const double scale = w.t(i + 1) - w.t(i - m);
    for (int r = 0; r <= degree; ++r) {
      const double got = functional_on_monomial(w, fn, r, origin, scale);
      const double want = greville_power(w, i, r, origin, scale);
      const double mag = 1.0 + contribution_scale(w, fn, r, origin, scale);
      worst = std::max(worst, std::abs(got - want) / mag);
    }
  }
  return worst;
}

void validate_exactness(const QuasiInterpolant& qi, double tol) {
  const double d = exactness_defect(qi, qi.exactness());
  if (!(d <= tol)) {
    std::ostringstream os;
    os.precision(3);
    os << qi.name() << ": functionals are not exact on P" << qi.exactness()
       << " (worst relative residual " << d << ")";
    throw InconsistentCoefficientsError(os.str());
  }
}

}  // namespace nbqi
