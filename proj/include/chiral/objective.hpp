#pragma once

#include "chiral/chirality.hpp"
#include "chiral/penalties.hpp"

#include <functional>
#include <memory>

namespace chiral {

/// Flat design vector [x_1..x_n, y_1..y_n, z_1..z_n, theta_1..theta_n].
Eigen::VectorXd pack_design(const SpineSpline& spine, const TwistSpline& twist);
SpineSpline unpack_spine(const Eigen::VectorXd& x, const PartitionPtr& partition);
TwistSpline unpack_twist(const Eigen::VectorXd& x, const PartitionPtr& partition);

/// A design together with its adapted frame at the curve quadrature nodes.
/// Frames are never rebuilt from scratch after the initial construction;
/// moving to another design propagates the frame.
struct DesignState {
    SpineSpline spine;
    TwistSpline twist;
    AdaptedFrame frame;

    /// Rotation minimizing frame on `spine`, then twisted by `twist`.
    static DesignState create(const SpineSpline& spine, const TwistSpline& twist,
                              const Vec3& reference_normal, const CurveQuadrature& quad);

    Eigen::VectorXd vector() const { return pack_design(spine, twist); }
    std::size_t knots() const { return spine.size(); }

    /// State at design x reached from this one; throws GeometryError on a
    /// tangent flip or an irregular spine.
    DesignState moved_to(const Eigen::VectorXd& x, double tol_flip = 1e-6) const;
};

struct PenaltyValues {
    double psi1 = 0.0;
    double psi2 = 0.0;
    double psi3 = 0.0;
};

struct PenaltyWeights {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
};

/// Far-field operator of a design plus the adjoint contraction of its
/// derivative over all cardinal design directions.
class PreparedOperator {
public:
    virtual ~PreparedOperator() = default;
    virtual const FarFieldMatrix& matrix() const = 0;
    virtual Eigen::VectorXd contract(const Eigen::MatrixXcd& W) const = 0;
};

class ScatteringModel {
public:
    virtual ~ScatteringModel() = default;
    virtual std::shared_ptr<const PreparedOperator> prepare(const DesignState& state) const = 0;
};

/// Thin-wire asymptotic operator.
class WireModel : public ScatteringModel {
public:
    WireModel(FarFieldSetup setup, CurveQuadrature quad);

    std::shared_ptr<const PreparedOperator> prepare(const DesignState& state) const override;
    const FarFieldSetup& setup() const { return setup_; }

private:
    FarFieldSetup setup_;
    CurveQuadrature quad_;
    std::shared_ptr<const HerglotzBasis> basis_;
};

struct Evaluation {
    double phi = 0.0;
    ChiralityReport report;
    PenaltyValues penalties;
    std::shared_ptr<const PreparedOperator> op;
};

class Objective {
public:
    Objective(std::shared_ptr<const ScatteringModel> model, CurveQuadrature quad,
              PenaltyWeights weights, double length);

    const CurveQuadrature& quadrature() const { return quad_; }
    const PenaltyWeights& weights() const { return weights_; }
    double length() const { return length_; }

    /// Phi = -J_HS + alpha1 Psi1 + alpha2 Psi2 + alpha3 Psi3.
    Evaluation evaluate(const DesignState& state) const;

    /// Gradient over the 4n cardinal directions. Throws ChiralityDomainError
    /// outside the differentiability domain.
    Eigen::VectorXd gradient(const DesignState& state, const Evaluation& eval) const;

    /// Penalty-only gradient.
    Eigen::VectorXd penalty_gradient(const DesignState& state) const;

private:
    std::shared_ptr<const ScatteringModel> model_;
    CurveQuadrature quad_;
    PenaltyWeights weights_;
    double length_;
};

/// Relative threshold below which chi_HS counts as zero.
inline constexpr double kAchiralTolerance = 1e-10;

}  // namespace chiral
