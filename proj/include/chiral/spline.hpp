#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <vector>

namespace chiral {

using Vec3 = Eigen::Vector3d;

/// Raised when a geometric precondition fails (parameter out of range,
/// degenerate tangent, tangent flip during a frame update, ...).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed partition 0 = t_1 < ... < t_n = L together with the factorized
/// not-a-knot interpolation operator. Interpolation is linear in the knot
/// data, so the map "knot values -> knot second derivatives" is a fixed
/// n x n matrix that every spline on this partition shares.
class KnotPartition {
public:
    explicit KnotPartition(std::vector<double> knots);

    static std::shared_ptr<const KnotPartition> uniform(std::size_t n, double length);

    std::size_t size() const { return knots_.size(); }
    std::size_t segments() const { return knots_.size() - 1; }
    const std::vector<double>& knots() const { return knots_; }
    double length() const { return knots_.back(); }

    /// Segment index j with t in [t_j, t_{j+1}]; throws outside [0, L].
    std::size_t segment_of(double t) const;

    /// Second derivatives at the knots for the given knot values (n x d).
    Eigen::MatrixXd second_derivatives(const Eigen::MatrixXd& values) const;

    /// Rows: evaluation points; columns: cardinal splines. `order` selects
    /// value (0), first (1) or second (2) derivative.
    Eigen::MatrixXd cardinal_matrix(const std::vector<double>& points, int order) const;

private:
    std::vector<double> knots_;
    Eigen::MatrixXd moment_map_;  // n x n, values -> second derivatives
};

using PartitionPtr = std::shared_ptr<const KnotPartition>;

/// Piecewise cubic not-a-knot interpolant with d components per knot.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(PartitionPtr partition, Eigen::MatrixXd values);

    const PartitionPtr& partition() const { return partition_; }
    const Eigen::MatrixXd& values() const { return values_; }
    int dimension() const { return static_cast<int>(values_.cols()); }

    /// Value and first two derivatives at t (rows 0..2 of the result).
    Eigen::Matrix<double, 3, Eigen::Dynamic> evaluate(double t) const;

    /// Third derivative on segment j (constant per segment).
    Eigen::RowVectorXd third_derivative(std::size_t segment) const;

private:
    PartitionPtr partition_;
    Eigen::MatrixXd values_;
    Eigen::MatrixXd moments_;
};

struct SpinePoint {
    Vec3 p;
    Vec3 dp;
    Vec3 ddp;
};

struct TwistPoint {
    double theta;
    double dtheta;
    double ddtheta;
};

/// Spine curve p : [0, L] -> R^3 through n knots.
class SpineSpline {
public:
    SpineSpline() = default;
    SpineSpline(PartitionPtr partition, Eigen::MatrixX3d knot_points);

    const PartitionPtr& partition() const { return spline_.partition(); }
    Eigen::MatrixX3d knot_points() const { return spline_.values(); }
    std::size_t size() const { return spline_.values().rows(); }
    double parameter_length() const { return partition()->length(); }

    SpinePoint eval(double t) const;

private:
    CubicSpline spline_;
};

/// Twist function theta : [0, L] -> R on the same partition as the spine.
class TwistSpline {
public:
    TwistSpline() = default;
    TwistSpline(PartitionPtr partition, Eigen::VectorXd knot_values);

    static TwistSpline zero(PartitionPtr partition);

    const PartitionPtr& partition() const { return spline_.partition(); }
    Eigen::VectorXd knot_values() const { return spline_.values().col(0); }

    TwistPoint eval(double t) const;

private:
    CubicSpline spline_;
};

/// Composite Simpson rule with an odd number of equally spaced points on
/// every spline segment. Shared segment endpoints are merged.
class CurveQuadrature {
public:
    CurveQuadrature() = default;
    CurveQuadrature(PartitionPtr partition, int points_per_segment);

    const PartitionPtr& partition() const { return partition_; }
    int points_per_segment() const { return points_per_segment_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Node index range [first, last] of segment j (inclusive).
    std::size_t segment_first(std::size_t j) const { return j * (points_per_segment_ - 1); }
    std::size_t segment_last(std::size_t j) const { return (j + 1) * (points_per_segment_ - 1); }

    /// Simpson weights restricted to segment j, aligned with segment_first(j).
    const std::vector<double>& segment_weights(std::size_t j) const { return segment_weights_[j]; }

    /// Cardinal value/derivative matrices at the nodes (cached).
    const Eigen::MatrixXd& cardinal(int order) const { return cardinal_[order]; }

private:
    PartitionPtr partition_;
    int points_per_segment_ = 0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<std::vector<double>> segment_weights_;
    Eigen::MatrixXd cardinal_[3];
};

}  // namespace chiral
