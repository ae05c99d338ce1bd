#pragma once

#include <map>

#include "nbqi/quasi_interpolant.hpp"

namespace nbqi {

/// Closed-form weights on theta_{i-p}, theta_i, theta_{i+p} at index i with stride p (p = 1 gives
/// the divided-difference operator).
ThreePointWeights three_point_weights(const KnotWindow& w, Index i, int p);

/// lambda_j(f) = f(theta_j) - theta-bar_j/2 * f''(theta_j). Exact on P2.
QuasiInterpolant build_Q2_derivative(const KnotWindow& w,
                                     const BuildOptions& opt = {});

/// Consecutive three-point Greville stencil. Exact on P2.
QuasiInterpolant build_Q2_star(const KnotWindow& w, const BuildOptions& opt = {});

/// Three-point stencil on theta_{i-p}, theta_i, theta_{i+p}, p >= m.
QuasiInterpolant build_Qp_star(const KnotWindow& w, int p,
                               const BuildOptions& opt = {});

/// General (2p+1)-point Greville stencils; coeffs[i](s + p) = a_i(s).
/// Coefficients must satisfy sum_s a_i(s) theta_{i+s}^r = theta_i^{(r)},
/// r = 0..q, within 1e-8 (relative, local coordinates).
QuasiInterpolant build_Qpq(const KnotWindow& w, int p, int q,
                           const std::map<Index, Eigen::VectorXd>& coeffs,
                           const BuildOptions& opt = {});

/// Cubic (m = 3) knot-value stencil on t_{j-2}, t_{j-1}, t_j, the knot at
/// the centre of supp B_j and its neighbours. Exact on P3.
QuasiInterpolant build_Q3_cubic(const KnotWindow& w, const BuildOptions& opt = {});

/// Weights of the cubic knot stencil for B_j.
ThreePointWeights cubic_knot_weights(const KnotWindow& w, Index j);

}  // namespace nbqi
