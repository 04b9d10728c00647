#include "chiral/objective.hpp"

namespace chiral {

Eigen::VectorXd pack_design(const SpineSpline& spine, const TwistSpline& twist) {
    const Eigen::Index n = static_cast<Eigen::Index>(spine.size());
    Eigen::VectorXd x(4 * n);
    const Eigen::MatrixX3d k = spine.knot_points();
    for (int l = 0; l < 3; ++l) x.segment(l * n, n) = k.col(l);
    x.segment(3 * n, n) = twist.knot_values();
    return x;
}

SpineSpline unpack_spine(const Eigen::VectorXd& x, const PartitionPtr& partition) {
    const Eigen::Index n = static_cast<Eigen::Index>(partition->size());
    if (x.size() != 4 * n) throw std::invalid_argument("design vector length must be 4n");
    if (!x.allFinite()) throw GeometryError("non-finite design vector");
    Eigen::MatrixX3d k(n, 3);
    for (int l = 0; l < 3; ++l) k.col(l) = x.segment(l * n, n);
    return SpineSpline(partition, k);
}

TwistSpline unpack_twist(const Eigen::VectorXd& x, const PartitionPtr& partition) {
    const Eigen::Index n = static_cast<Eigen::Index>(partition->size());
    if (x.size() != 4 * n) throw std::invalid_argument("design vector length must be 4n");
    return TwistSpline(partition, x.segment(3 * n, n));
}

DesignState DesignState::create(const SpineSpline& spine, const TwistSpline& twist,
                                const Vec3& reference_normal, const CurveQuadrature& quad) {
    const AdaptedFrame rmf = build_rmf(spine, quad.nodes(), reference_normal);
    return {spine, twist, apply_twist(rmf, twist)};
}

DesignState DesignState::moved_to(const Eigen::VectorXd& x, double tol_flip) const {
    const PartitionPtr& part = spine.partition();
    SpineSpline next_spine = unpack_spine(x, part);
    TwistSpline next_twist = unpack_twist(x, part);
    check_regularity(next_spine, frame.params);
    const Eigen::VectorXd dx = x - vector();
    const SpineSpline h = unpack_spine(dx, part);
    const TwistSpline phi = unpack_twist(dx, part);
    AdaptedFrame next_frame = update_frame(frame, spine, h, phi, tol_flip);
    return {std::move(next_spine), std::move(next_twist), std::move(next_frame)};
}

namespace {

class WireOperatorAdapter : public PreparedOperator {
public:
    explicit WireOperatorAdapter(WireOperator op) : op_(std::move(op)), T_(op_.matrix()) {}
    const FarFieldMatrix& matrix() const override { return T_; }
    Eigen::VectorXd contract(const Eigen::MatrixXcd& W) const override { return op_.contract(W); }

private:
    WireOperator op_;
    FarFieldMatrix T_;
};

}  // namespace

WireModel::WireModel(FarFieldSetup setup, CurveQuadrature quad)
    : setup_(std::move(setup)), quad_(std::move(quad)),
      basis_(std::make_shared<HerglotzBasis>(BasisLayout(setup_.max_degree), setup_.k)) {}

std::shared_ptr<const PreparedOperator> WireModel::prepare(const DesignState& state) const {
    return std::make_shared<WireOperatorAdapter>(
        WireOperator(state.spine, state.frame, quad_, setup_, basis_));
}

Objective::Objective(std::shared_ptr<const ScatteringModel> model, CurveQuadrature quad,
                     PenaltyWeights weights, double length)
    : model_(std::move(model)), quad_(std::move(quad)), weights_(weights), length_(length) {
    if (!(weights_.alpha1 >= 0.0 && weights_.alpha2 >= 0.0 && weights_.alpha3 >= 0.0)) {
        throw std::invalid_argument("penalty weights must be nonnegative");
    }
    if (!(length_ > 0.0)) throw std::invalid_argument("target length must be positive");
}

Evaluation Objective::evaluate(const DesignState& state) const {
    Evaluation ev;
    ev.op = model_->prepare(state);
    ev.report = measure(ev.op->matrix());
    ev.penalties.psi1 = psi1(state.spine, quad_, length_);
    ev.penalties.psi2 = psi2(state.spine, quad_, length_);
    ev.penalties.psi3 = psi3(state.frame, state.spine, quad_, length_);
    ev.phi = -ev.report.jHS + weights_.alpha1 * ev.penalties.psi1 +
             weights_.alpha2 * ev.penalties.psi2 + weights_.alpha3 * ev.penalties.psi3;
    return ev;
}

Eigen::VectorXd Objective::penalty_gradient(const DesignState& state) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(4 * static_cast<Eigen::Index>(state.knots()));
    if (weights_.alpha1 > 0.0) g += weights_.alpha1 * psi1_gradient(state.spine, quad_, length_);
    if (weights_.alpha2 > 0.0) g += weights_.alpha2 * psi2_gradient(state.spine, quad_, length_);
    if (weights_.alpha3 > 0.0) {
        g += weights_.alpha3 * psi3_gradient(state.frame, state.spine, quad_, length_);
    }
    return g;
}

Eigen::VectorXd Objective::gradient(const DesignState& state, const Evaluation& eval) const {
    const Eigen::MatrixXcd& T = eval.op->matrix().entries();
    if (!(eval.report.chiHS > kAchiralTolerance * eval.report.hs_norm)) {
        throw ChiralityDomainError("design is numerically achiral; J_HS is not differentiable");
    }
    const Eigen::MatrixXcd W = jHS_weight(T);
    return penalty_gradient(state) - eval.op->contract(W);
}

}  // namespace chiral
