#pragma once

#include <map>

#include "nbqi/quasi_interpolant.hpp"

namespace nbqi {

/// lambda_i(f) = <M_i, f>. Exact on P1.
QuasiInterpolant build_G1(const KnotWindow& w, const BuildOptions& opt = {});

/// Weights on <M_{i-1}, f>, <M_i, f>, <M_{i+1}, f> making G2 exact on P2.
ThreePointWeights g2_weights(const KnotWindow& w, Index i);

/// Three consecutive M-spline means. Exact on P2.
QuasiInterpolant build_G2(const KnotWindow& w, const BuildOptions& opt = {});

/// Weights on <M_{i-p}, f>, <M_i, f>, <M_{i+p}, f> from the moment
/// closed forms. Throws DegenerateProblemError when the 3x3 moment system
/// is numerically singular.
ThreePointWeights gp_star_weights(const KnotWindow& w, Index i, int p);

/// Three M-spline means at stride p >= m. Exact on P2.
QuasiInterpolant build_Gp_star(const KnotWindow& w, int p,
                               const BuildOptions& opt = {});

/// General (2p+1)-term M-spline stencils; coeffs[i](s + p) = a_i(s).
/// Validated against sum_s a_i(s) mu_{i+s}^{(r)} = theta_i^{(r)}, r <= q.
QuasiInterpolant build_Gpq(const KnotWindow& w, int p, int q,
                           const std::map<Index, Eigen::VectorXd>& coeffs,
                           const BuildOptions& opt = {});

}  // namespace nbqi
