#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nbqi/bspline.hpp"
#include "nbqi/knots.hpp"

namespace nbqi {

/// Where a discrete functional samples f.
enum class NodeKind {
  greville,           ///< f(theta_k)
  knot,               ///< f(t_k)
  second_derivative,  ///< f''(theta_k)
};

const char* to_string(NodeKind kind) noexcept;

struct DiscreteTerm {
  NodeKind kind = NodeKind::greville;
  Index node = 0;
  double weight = 0.0;
};

/// lambda_i(f) = sum of weight * f(node) (or f'' for derivative terms).
struct DiscreteFunctional {
  Index center = 0;
  std::vector<DiscreteTerm> terms;
};

struct IntegralTerm {
  Index m_spline = 0;
  double weight = 0.0;
};

/// Point value f(t_knot) attached to an integral functional.
struct EndpointTerm {
  Index knot = 0;
  double weight = 0.0;
};

/// lambda_i(f) = sum of weight * <M_j, f>.
struct IntegralFunctional {
  Index center = 0;
  std::vector<IntegralTerm> terms;
  std::vector<EndpointTerm> endpoint_terms;
};

using Functional = std::variant<DiscreteFunctional, IntegralFunctional>;

enum class Family { discrete, integral };

/// Qf = sum_i lambda_i(f) B_i over a contiguous range of indices, with a
/// declared polynomial exactness degree.
class QuasiInterpolant {
 public:
  QuasiInterpolant(std::string name, KnotWindow window, Family family,
                   int exactness, int reach, Index first,
                   std::vector<Functional> functionals);

  const std::string& name() const noexcept { return name_; }
  const KnotWindow& window() const noexcept { return window_; }
  Family family() const noexcept { return family_; }
  int exactness() const noexcept { return exactness_; }
  int reach() const noexcept { return reach_; }
  IndexRange indices() const noexcept {
    return {first_, first_ + static_cast<Index>(functionals_.size()) - 1};
  }
  const std::vector<Functional>& functionals() const noexcept {
    return functionals_;
  }
  const Functional& functional(Index i) const;

  /// Weights of functional i in term order.
  std::vector<double> weights(Index i) const;
  /// Whether any discrete functional uses a derivative node.
  bool uses_derivatives() const noexcept;

  /// Interval on which Qf is fully defined.
  Interval domain() const { return window_.eval_interval(indices()); }

 private:
  std::string name_;
  KnotWindow window_;
  Family family_;
  int exactness_;
  int reach_;
  Index first_;
  std::vector<Functional> functionals_;
};

struct ApplyOptions {
  /// Gauss nodes per knot interval for <M_j, f>; 0 = default.
  int quadrature_nodes = 0;
};

/// Coefficients lambda_i(f) for every index of the operator.
/// `second_derivative` is required for operators with derivative terms.
SplineExpansion apply(const QuasiInterpolant& qi, const RealFunction& f,
                      const std::optional<RealFunction>& second_derivative = std::nullopt,
                      const ApplyOptions& options = {});

/// Integral-family alias of apply.
SplineExpansion apply_integral(const QuasiInterpolant& qi, const RealFunction& f,
                               const ApplyOptions& options = {});

/// Q applied to u^r with u = (x - origin)/scale, using exact node values
/// and closed-form moments (no quadrature).
SplineExpansion apply_monomial(const QuasiInterpolant& qi, int r,
                               double origin = 0.0, double scale = 1.0);

/// lambda_i applied to u^r exactly (closed-form moments for integrals).
double functional_on_monomial(const KnotWindow& w, const Functional& f, int r,
                              double origin = 0.0, double scale = 1.0);

/// Largest relative defect |lambda_i(u^r) - theta_i^{(r)}(u)| over all
/// functionals and r <= degree, in local coordinates centred at theta_i.
/// Zero defect for all r <= q is equivalent to exactness on P_q.
double exactness_defect(const QuasiInterpolant& qi, int degree);

/// Throws InconsistentCoefficientsError unless exactness_defect <= tol.
void validate_exactness(const QuasiInterpolant& qi, double tol = 1e-9);

/// Weights of a three-term stencil (left, centre, right).
struct ThreePointWeights {
  double left = 0.0;
  double center = 0.0;
  double right = 0.0;

  double l1() const noexcept;
};

struct BuildOptions {
  bool validate = true;
  double tolerance = 1e-9;
};

}  // namespace nbqi
