#include "chiral/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chiral {

KnotPartition::KnotPartition(std::vector<double> knots) : knots_(std::move(knots)) {
    const std::size_t n = knots_.size();
    if (n < 4) {
        throw GeometryError("not-a-knot spline needs at least 4 knots, got " + std::to_string(n));
    }
    if (knots_.front() != 0.0) {
        throw GeometryError("knot partition must start at 0");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(knots_[i] > knots_[i - 1])) {
            throw GeometryError("knot parameters must be strictly increasing");
        }
    }

    // Moment equations: C2 continuity at interior knots, C3 continuity at
    // t_2 and t_{n-1} in place of end conditions.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = knots_[i + 1] - knots_[i];

    for (std::size_t i = 1; i + 1 < n; ++i) {
        A(i, i - 1) = h[i - 1];
        A(i, i) = 2.0 * (h[i - 1] + h[i]);
        A(i, i + 1) = h[i];
        B(i, i - 1) = 6.0 / h[i - 1];
        B(i, i) = -6.0 / h[i - 1] - 6.0 / h[i];
        B(i, i + 1) = 6.0 / h[i];
    }
    // (M_2 - M_1)/h_1 = (M_3 - M_2)/h_2
    A(0, 0) = h[1];
    A(0, 1) = -(h[0] + h[1]);
    A(0, 2) = h[0];
    const std::size_t m = n - 1;
    A(m, m - 2) = h[m - 1];
    A(m, m - 1) = -(h[m - 2] + h[m - 1]);
    A(m, m) = h[m - 2];

    moment_map_ = A.fullPivLu().solve(B);
}

std::shared_ptr<const KnotPartition> KnotPartition::uniform(std::size_t n, double length) {
    if (!(length > 0.0)) throw GeometryError("partition length must be positive");
    std::vector<double> knots(n);
    for (std::size_t i = 0; i < n; ++i) {
        knots[i] = length * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    knots.back() = length;
    return std::make_shared<const KnotPartition>(std::move(knots));
}

std::size_t KnotPartition::segment_of(double t) const {
    if (!(t >= knots_.front() && t <= knots_.back())) {
        throw GeometryError("spline parameter " + std::to_string(t) + " outside [0, " +
                            std::to_string(knots_.back()) + "]");
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    if (j == 0) return 0;
    return std::min(j - 1, segments() - 1);
}

Eigen::MatrixXd KnotPartition::second_derivatives(const Eigen::MatrixXd& values) const {
    return moment_map_ * values;
}

Eigen::MatrixXd KnotPartition::cardinal_matrix(const std::vector<double>& points, int order) const {
    const std::size_t n = size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.size(), n);
    for (std::size_t r = 0; r < points.size(); ++r) {
        const double t = points[r];
        const std::size_t j = segment_of(t);
        const double h = knots_[j + 1] - knots_[j];
        const double u = knots_[j + 1] - t;
        const double v = t - knots_[j];
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        switch (order) {
            case 0:
                row = moment_map_.row(j) * (u * u * u / (6.0 * h) - h * u / 6.0) +
                      moment_map_.row(j + 1) * (v * v * v / (6.0 * h) - h * v / 6.0);
                row(j) += u / h;
                row(j + 1) += v / h;
                break;
            case 1:
                row = moment_map_.row(j) * (-u * u / (2.0 * h) + h / 6.0) +
                      moment_map_.row(j + 1) * (v * v / (2.0 * h) - h / 6.0);
                row(j) -= 1.0 / h;
                row(j + 1) += 1.0 / h;
                break;
            case 2:
                row = moment_map_.row(j) * (u / h) + moment_map_.row(j + 1) * (v / h);
                break;
            default:
                throw std::invalid_argument("cardinal_matrix: order must be 0, 1 or 2");
        }
        out.row(r) = row;
    }
    return out;
}

CubicSpline::CubicSpline(PartitionPtr partition, Eigen::MatrixXd values)
    : partition_(std::move(partition)), values_(std::move(values)) {
    if (!partition_) throw GeometryError("spline without partition");
    if (static_cast<std::size_t>(values_.rows()) != partition_->size()) {
        throw GeometryError("spline data size does not match knot count");
    }
    if (!values_.allFinite()) throw GeometryError("non-finite spline knot data");
    moments_ = partition_->second_derivatives(values_);
}

Eigen::Matrix<double, 3, Eigen::Dynamic> CubicSpline::evaluate(double t) const {
    const auto& k = partition_->knots();
    const std::size_t j = partition_->segment_of(t);
    const double h = k[j + 1] - k[j];
    const double u = k[j + 1] - t;
    const double v = t - k[j];
    const auto y0 = values_.row(j);
    const auto y1 = values_.row(j + 1);
    const auto m0 = moments_.row(j);
    const auto m1 = moments_.row(j + 1);

    Eigen::Matrix<double, 3, Eigen::Dynamic> out(3, values_.cols());
    out.row(0) = m0 * (u * u * u / (6.0 * h)) + m1 * (v * v * v / (6.0 * h)) +
                 (y0 / h - m0 * (h / 6.0)) * u + (y1 / h - m1 * (h / 6.0)) * v;
    out.row(1) = -m0 * (u * u / (2.0 * h)) + m1 * (v * v / (2.0 * h)) + (y1 - y0) / h -
                 (m1 - m0) * (h / 6.0);
    out.row(2) = m0 * (u / h) + m1 * (v / h);
    return out;
}

Eigen::RowVectorXd CubicSpline::third_derivative(std::size_t segment) const {
    const auto& k = partition_->knots();
    const double h = k[segment + 1] - k[segment];
    return (moments_.row(segment + 1) - moments_.row(segment)) / h;
}

SpineSpline::SpineSpline(PartitionPtr partition, Eigen::MatrixX3d knot_points)
    : spline_(std::move(partition), Eigen::MatrixXd(std::move(knot_points))) {}

SpinePoint SpineSpline::eval(double t) const {
    const auto e = spline_.evaluate(t);
    return {e.row(0).transpose(), e.row(1).transpose(), e.row(2).transpose()};
}

TwistSpline::TwistSpline(PartitionPtr partition, Eigen::VectorXd knot_values)
    : spline_(std::move(partition), Eigen::MatrixXd(std::move(knot_values))) {}

TwistSpline TwistSpline::zero(PartitionPtr partition) {
    const auto n = static_cast<Eigen::Index>(partition->size());
    return TwistSpline(std::move(partition), Eigen::VectorXd::Zero(n));
}

TwistPoint TwistSpline::eval(double t) const {
    const auto e = spline_.evaluate(t);
    return {e(0, 0), e(1, 0), e(2, 0)};
}

CurveQuadrature::CurveQuadrature(PartitionPtr partition, int points_per_segment)
    : partition_(std::move(partition)), points_per_segment_(points_per_segment) {
    if (points_per_segment < 3 || points_per_segment % 2 == 0) {
        throw std::invalid_argument("Simpson rule needs an odd number (>= 3) of points per segment");
    }
    const auto& k = partition_->knots();
    const std::size_t segs = partition_->segments();
    const int s = points_per_segment;
    nodes_.assign(segs * (s - 1) + 1, 0.0);
    weights_.assign(nodes_.size(), 0.0);
    segment_weights_.resize(segs);
    for (std::size_t j = 0; j < segs; ++j) {
        const double h = k[j + 1] - k[j];
        const double dx = h / (s - 1);
        auto& sw = segment_weights_[j];
        sw.resize(s);
        for (int i = 0; i < s; ++i) {
            const std::size_t idx = j * (s - 1) + i;
            nodes_[idx] = (i == s - 1) ? k[j + 1] : k[j] + i * dx;
            double c = (i == 0 || i == s - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            sw[i] = c * dx / 3.0;
            weights_[idx] += sw[i];
        }
    }
    for (int order = 0; order < 3; ++order) {
        cardinal_[order] = partition_->cardinal_matrix(nodes_, order);
    }
}

}  // namespace chiral
