#include "chiral/penalties.hpp"

#include <cmath>

namespace chiral {

namespace {

void require_frame_on_nodes(const AdaptedFrame& frame, const CurveQuadrature& quad) {
    if (frame.size() != quad.size()) {
        throw GeometryError("frame is not sampled at the curve quadrature nodes");
    }
}

// Spread node sensitivities (value, first and second derivative of the
// spine perturbation) onto the cardinal spine directions.
Eigen::VectorXd spine_gradient(const CurveQuadrature& quad, const Eigen::MatrixX3d& d1,
                               const Eigen::MatrixX3d* d2 = nullptr) {
    const Eigen::Index n = quad.cardinal(0).cols();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(4 * n);
    for (int l = 0; l < 3; ++l) {
        g.segment(l * n, n) = quad.cardinal(1).transpose() * d1.col(l);
        if (d2) g.segment(l * n, n) += quad.cardinal(2).transpose() * d2->col(l);
    }
    return g;
}

}  // namespace

std::vector<double> segment_lengths(const SpineSpline& spine, const CurveQuadrature& quad) {
    const std::size_t segs = quad.partition()->segments();
    std::vector<double> out(segs, 0.0);
    for (std::size_t j = 0; j < segs; ++j) {
        const auto& w = quad.segment_weights(j);
        const std::size_t first = quad.segment_first(j);
        for (std::size_t k = 0; k < w.size(); ++k) {
            out[j] += w[k] * spine.eval(quad.nodes()[first + k]).dp.norm();
        }
    }
    return out;
}

double psi1(const SpineSpline& spine, const CurveQuadrature& quad, double length) {
    const auto ell = segment_lengths(spine, quad);
    const double target = 1.0 / static_cast<double>(spine.size() - 1);
    double sum = 0.0;
    for (double l : ell) sum += (target - l / length) * (target - l / length);
    return sum;
}

Eigen::VectorXd psi1_gradient(const SpineSpline& spine, const CurveQuadrature& quad, double length) {
    const auto ell = segment_lengths(spine, quad);
    const double target = 1.0 / static_cast<double>(spine.size() - 1);
    Eigen::MatrixX3d d1 = Eigen::MatrixX3d::Zero(quad.size(), 3);
    for (std::size_t j = 0; j < ell.size(); ++j) {
        const double f = -2.0 * (target - ell[j] / length) / length;
        const auto& w = quad.segment_weights(j);
        const std::size_t first = quad.segment_first(j);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const Vec3 dp = spine.eval(quad.nodes()[first + k]).dp;
            d1.row(first + k) += (f * w[k] / dp.norm()) * dp.transpose();
        }
    }
    return spine_gradient(quad, d1);
}

double psi2(const SpineSpline& spine, const CurveQuadrature& quad, double length) {
    double sum = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const SpinePoint sp = spine.eval(quad.nodes()[i]);
        const double s = sp.dp.norm();
        sum += quad.weights()[i] * sp.dp.cross(sp.ddp).squaredNorm() / std::pow(s, 5);
    }
    return sum / length;
}

Eigen::VectorXd psi2_gradient(const SpineSpline& spine, const CurveQuadrature& quad, double length) {
    Eigen::MatrixX3d d1(quad.size(), 3), d2(quad.size(), 3);
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const SpinePoint sp = spine.eval(quad.nodes()[i]);
        const Vec3& u = sp.dp;
        const Vec3& v = sp.ddp;
        const double s = u.norm();
        const double s5 = std::pow(s, 5);
        const double cross2 = u.cross(v).squaredNorm();
        const double w = quad.weights()[i] / length;
        const Vec3 gu = (2.0 * v.squaredNorm() * u - 2.0 * u.dot(v) * v) / s5 -
                        5.0 * cross2 / (s5 * s * s) * u;
        const Vec3 gv = (2.0 * u.squaredNorm() * v - 2.0 * u.dot(v) * u) / s5;
        d1.row(i) = w * gu.transpose();
        d2.row(i) = w * gv.transpose();
    }
    return spine_gradient(quad, d1, &d2);
}

double psi3(const AdaptedFrame& frame, const SpineSpline& spine, const CurveQuadrature& quad,
            double length) {
    require_frame_on_nodes(frame, quad);
    double sum = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const double s = spine.eval(quad.nodes()[i]).dp.norm();
        sum += quad.weights()[i] * frame.beta[i] * frame.beta[i] * s;
    }
    return sum / length;
}

Eigen::VectorXd psi3_gradient(const AdaptedFrame& frame, const SpineSpline& spine,
                              const CurveQuadrature& quad, double length) {
    require_frame_on_nodes(frame, quad);
    Eigen::MatrixX3d d1(quad.size(), 3);
    Eigen::VectorXd dphi(quad.size());
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const SpinePoint sp = spine.eval(quad.nodes()[i]);
        const TangentJet jet = tangent_jet(sp.dp, sp.ddp);
        const double beta = frame.beta[i];
        const Vec3& n = frame.normal[i];
        const Vec3& b = frame.binormal[i];
        const double w = quad.weights()[i] / length;
        // The twist rate responds to h' through the tilt of the normal plane.
        const Vec3 g = 2.0 * beta * (b * jet.dt.dot(n) - n * jet.dt.dot(b)) +
                       beta * beta * jet.t;
        d1.row(i) = w * g.transpose();
        dphi(i) = w * 2.0 * beta * jet.speed;
    }
    Eigen::VectorXd grad = spine_gradient(quad, d1);
    const Eigen::Index n = quad.cardinal(1).cols();
    grad.segment(3 * n, n) = quad.cardinal(1).transpose() * dphi;
    return grad;
}

}  // namespace chiral
