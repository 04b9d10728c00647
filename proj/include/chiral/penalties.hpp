#pragma once

#include "chiral/frame.hpp"

namespace chiral {

// Regularizing functionals of the wire shape. All integrals use the
// composite Simpson rule `quad`; `length` is the target length L that
// also fixes the parameter domain. Gradients are with respect to the
// cardinal design directions [x knots, y knots, z knots, twist knots].

/// sum_j (1/(n-1) - (1/L) int_{t_j}^{t_{j+1}} |p'|)^2
double psi1(const SpineSpline& spine, const CurveQuadrature& quad, double length);
Eigen::VectorXd psi1_gradient(const SpineSpline& spine, const CurveQuadrature& quad, double length);

/// (1/L) int kappa^2 |p'|
double psi2(const SpineSpline& spine, const CurveQuadrature& quad, double length);
Eigen::VectorXd psi2_gradient(const SpineSpline& spine, const CurveQuadrature& quad, double length);

/// (1/L) int beta^2 |p'| with the twist rate carried by `frame`.
double psi3(const AdaptedFrame& frame, const SpineSpline& spine, const CurveQuadrature& quad,
            double length);
Eigen::VectorXd psi3_gradient(const AdaptedFrame& frame, const SpineSpline& spine,
                              const CurveQuadrature& quad, double length);

/// Arc length of each spline segment.
std::vector<double> segment_lengths(const SpineSpline& spine, const CurveQuadrature& quad);

}  // namespace chiral
