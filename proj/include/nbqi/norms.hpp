#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nbqi/quasi_interpolant.hpp"

namespace nbqi {

/// Quasi-Lagrange form of a point-value operator: Qf = sum f(site) * phi_site.
struct FundamentalFunction {
  NodeKind kind = NodeKind::greville;
  Index node = 0;
  double abscissa = 0.0;
  SplineExpansion phi;  ///< zero-extended outside its coefficient range
};

/// One entry per data site, ordered by abscissa. Throws
/// UnsupportedOperationError for integral operators and derivative data.
std::vector<FundamentalFunction> fundamental_functions(const QuasiInterpolant& qi);

enum class ProfileKind {
  exact,               ///< sum of |fundamental functions| (point-value operators)
  nu1_upper_profile,   ///< sum_i ||a_i||_1 B_i(x), an upper bound (integral operators)
  integral_kernel,     ///< integral over t of |K(x, t)| (integral operators)
};

const char* to_string(ProfileKind kind) noexcept;

struct LebesgueOptions {
  int points_per_interval = 64;
  /// Integral operators only: evaluate the kernel integral instead of the
  /// nu1-weighted upper profile.
  bool integral_kernel = false;
};

struct LebesgueProfile {
  ProfileKind kind = ProfileKind::exact;
  std::vector<double> x;
  std::vector<double> values;
  double max = 0.0;
  double argmax = 0.0;

  /// Header "x,lambda", one row per sample, 17 significant digits.
  void write_csv(std::ostream& out) const;
};

/// Lebesgue function value at x (point-value operators).
double lebesgue_value(const QuasiInterpolant& qi, double x);
/// integral |sum_i B_i(x) lambda_i-kernel(t)| dt for integral operators.
double integral_lebesgue_value(const QuasiInterpolant& qi, double x);
/// sum_i ||a_i||_1 B_i(x).
double nu1_profile_value(const QuasiInterpolant& qi, double x);

/// Samples on every knot interval of qi.domain() (right-continuous, last
/// point by left limit).
LebesgueProfile lebesgue_sample(const QuasiInterpolant& qi,
                                const LebesgueOptions& options = {});

/// max_i ||a_i||_1.
double nu1_bound(const QuasiInterpolant& qi);

/// Closed-form bounds.
namespace bounds {
double q2_star(int m);         ///< floor((m+4)/2)
double qp_star(int m);         ///< (m+1)/(m-1)
double g2(int m);              ///< m+2 (odd m), m+3 (even m)
double gp_star_C(int m);       ///< m^2(m+2)/(m-1)^2 (even), (m+1)^2/(m-1) (odd)
double gp_star_c(int m);       ///< m^2/4 (even), (m^2-1)/4 (odd)
double gp_star(int m);         ///< 1 + C(m)/4
}  // namespace bounds

/// N(r) = ((1+r)^2 + 2r^2/(1+r)) / 3, the cubic-operator bound for mesh
/// ratio r >= 1.
double mesh_ratio_bound(double r);

/// Cubic window with unit steps except the single interval [t_2, t_3] of
/// length h: t_i = i (i <= 2), t_i = i - 1 + h (i >= 3), indices -4..9.
KnotWindow stretched_partition(double h);

/// Quantities on the stretched interval I = [t_2, t_3], midpoint s. The
/// named B-splines are the cubic ones centred at t_1 and t_2.
struct StretchedIntervalValues {
  double h = 0.0;
  double s = 0.0;
  double alpha1 = 0.0;  ///< centred-at-t_1 spline at t_2
  double alpha2 = 0.0;  ///< centred-at-t_2 spline at t_2
  double delta2 = 0.0;  ///< centred-at-t_2 spline at t_3
  double beta2 = 0.0;   ///< Bernstein coefficients 1 and 2 of that spline on I
  double gamma2 = 0.0;
  double B1_s = 0.0;
  double B2_s = 0.0;
  double lambda_s = 0.0;         ///< Lebesgue function of the cubic operator at s
  double lambda_max_on_I = 0.0;  ///< grid maximum on I
};

StretchedIntervalValues stretched_interval_values(double h, int points_per_interval = 64);

/// Reference closed forms; they agree with the measured values at h = 1
/// only.
namespace stretched_reference {
double alpha1(double h);
double alpha2(double h);
double delta2(double h);
double gamma2(double h);
}  // namespace stretched_reference

/// Closed forms that hold on stretched_partition(h) for every h > 0.
namespace stretched_exact {
double alpha1(double h);
double alpha2(double h);
double delta2(double h);
double gamma2(double h);
}  // namespace stretched_exact

}  // namespace nbqi
