#pragma once

#include "chiral/spline.hpp"

#include <vector>

namespace chiral {

/// Sampled orthonormal frame (t, n, b) along a spine, t x n = b.
///
/// Besides the triads the frame carries its twist rate beta = n' . b
/// (per unit spline parameter) at every sample. Together with the
/// analytic tangent derivative of the spine this determines the full
/// frame derivative:
///   n' = beta b - (t' . n) t,    b' = -(t' . b) t - beta n,
/// which is what the frame update and the twist penalty rely on.
struct AdaptedFrame {
    std::vector<double> params;
    std::vector<Vec3> tangent;
    std::vector<Vec3> normal;
    std::vector<Vec3> binormal;
    std::vector<double> beta;
    bool twisted = false;

    std::size_t size() const { return params.size(); }

    /// [t | n | b] at sample i.
    Eigen::Matrix3d matrix(std::size_t i) const;

    /// Largest deviation from orthonormality / right-handedness.
    double orthonormality_defect() const;
};

struct RmfOptions {
    int oversampling = 4;
    double orthogonality_tol = 1e-8;
};

/// Rotation minimizing frame by the double reflection method, computed on
/// an oversampled copy of `samples` and restricted back. The stored twist
/// rate is the defining value 0.
AdaptedFrame build_rmf(const SpineSpline& spine, const std::vector<double>& samples,
                       const Vec3& reference_normal, const RmfOptions& options = {});

/// Rotates normal/binormal by theta(s) in the normal plane; beta += theta'.
AdaptedFrame apply_twist(const AdaptedFrame& frame, const TwistSpline& twist);

/// Frame of the perturbed curve p + h with twist increment phi: the
/// normal plane is carried along the minimal rotation taking t_p to
/// t_{p+h}. Throws GeometryError when 1 + t_p . t_{p+h} <= tol_flip.
AdaptedFrame update_frame(const AdaptedFrame& frame, const SpineSpline& spine,
                          const SpineSpline& displacement, const TwistSpline& phi,
                          double tol_flip = 1e-6);

/// kappa = |p' x p''| / |p'|^3.
double curvature(const SpineSpline& spine, double t);

/// Unit tangent and its parameter derivative from spline derivatives.
struct TangentJet {
    Vec3 t;
    Vec3 dt;
    double speed;
};
TangentJet tangent_jet(const Vec3& dp, const Vec3& ddp);

/// Twist rate carried by the frame (analytic).
std::vector<double> twist_rate(const AdaptedFrame& frame);

/// Twist rate recovered from the sampled normals by three-point differences.
std::vector<double> finite_difference_twist_rate(const AdaptedFrame& frame);

struct SimplicityReport {
    bool simple = true;
    double min_distance = 0.0;
};

/// Minimum distance between sampled points whose arc-length separation
/// exceeds 3 * threshold; simple iff that distance exceeds threshold.
SimplicityReport check_simplicity(const SpineSpline& spine, const std::vector<double>& samples,
                                  double threshold);

/// Throws GeometryError if |p'| vanishes at any sample.
void check_regularity(const SpineSpline& spine, const std::vector<double>& samples);

}  // namespace chiral
