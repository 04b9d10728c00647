#pragma once

#include "chiral/herglotz.hpp"
#include "chiral/objective.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testing {

using chiral::Vec3;

inline constexpr double kPi = std::numbers::pi;

/// Bilinear cross product (Eigen conjugates complex cross products).
inline chiral::CVec3 ccross(const chiral::CVec3& a, const chiral::CVec3& b) {
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec3 v(g(rng), g(rng), g(rng));
    return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Matrix3d A;
    for (int i = 0; i < 9; ++i) A.data()[i] = g(rng);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(A);
    Eigen::Matrix3d Q = qr.householderQ();
    if (Q.determinant() < 0) Q.col(0) *= -1.0;
    return Q;
}

/// Knot points sampled from an analytic curve c(t) on a uniform partition.
template <class Curve>
chiral::SpineSpline sample_spine(const chiral::PartitionPtr& part, Curve c) {
    Eigen::MatrixX3d pts(static_cast<Eigen::Index>(part->size()), 3);
    for (std::size_t j = 0; j < part->size(); ++j) {
        pts.row(static_cast<Eigen::Index>(j)) = c(part->knots()[j]).transpose();
    }
    return {part, pts};
}

/// Straight wire of length L along e3, centred at the origin.
inline chiral::SpineSpline straight(const chiral::PartitionPtr& part) {
    const double L = part->length();
    return sample_spine(part, [L](double t) { return Vec3(0.0, 0.0, t - 0.5 * L); });
}

/// Helix with radius r and pitch c per radian, parametrized by arc length.
inline chiral::SpineSpline helix(const chiral::PartitionPtr& part, double r, double c) {
    const double s = std::sqrt(r * r + c * c);
    const double L = part->length();
    return sample_spine(part, [=](double t) {
        const double u = t / s;
        return Vec3(r * std::cos(u), r * std::sin(u), c * u - 0.5 * c * L / s);
    });
}

/// Gently bent wire: a straight segment plus a seeded smooth random bend.
inline chiral::SpineSpline bent(const chiral::PartitionPtr& part, double amplitude,
                                std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double L = part->length();
    Eigen::MatrixX3d pts(static_cast<Eigen::Index>(part->size()), 3);
    const double ax = u(rng), ay = u(rng), bx = u(rng), by = u(rng), cz = u(rng);
    for (std::size_t j = 0; j < part->size(); ++j) {
        const double t = part->knots()[j] / L;
        pts.row(static_cast<Eigen::Index>(j)) << amplitude * L * (ax * std::sin(kPi * t) + bx * std::sin(2 * kPi * t)),
            amplitude * L * (ay * std::sin(kPi * t) + by * std::sin(3 * kPi * t)),
            L * (t - 0.5) + amplitude * L * cz * std::sin(2 * kPi * t);
    }
    return {part, pts};
}

inline chiral::TwistSpline random_twist_spline(const chiral::PartitionPtr& part, double amplitude,
                                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    Eigen::VectorXd v(static_cast<Eigen::Index>(part->size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
    return {part, v};
}

inline double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace testing
