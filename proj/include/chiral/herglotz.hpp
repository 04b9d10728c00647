#pragma once

#include <vector>

#include "chiral/harmonics.hpp"

#include <array>

namespace chiral {

/// j_0(x), ..., j_L(x) for x >= 0 (upward recurrence when x > L, Miller's
/// downward recurrence otherwise).
std::vector<double> spherical_bessel(int L, double x);

/// Fields of all basis densities at one point: E is 3 x Q, dE[i] = dE/dx_i.
struct HerglotzSample {
    Eigen::MatrixXcd E;
    std::array<Eigen::MatrixXcd, 3> dE;

    /// Jacobian J(j, i) = d E_j / d x_i of basis column q.
    Eigen::Matrix3cd jacobian(int q) const;
};

/// Herglotz wave functions E[A](x) = int_{S^2} A(d) exp(i k d.x) ds(d) for
/// every density of the circularly polarized basis.
///
/// Plane-wave expansion turns the sphere integral into a finite sum
///   E_j(x) = 4 pi sum_l i^l j_l(k|x|) sum_m Y_l^m(xhat) <A_j, Y_l^m>,
/// since the Cartesian components of a degree-n tangential harmonic are
/// band limited to degree n + 1 (n + 2 after multiplying with d_i for the
/// gradient). The projections <A_j, Y_l^m> are computed once with an
/// exact product quadrature.
class HerglotzBasis {
public:
    HerglotzBasis(const BasisLayout& layout, double k);

    const BasisLayout& layout() const { return layout_; }
    double wave_number() const { return k_; }

    HerglotzSample evaluate(const Vec3& x) const;

private:
    BasisLayout layout_;
    double k_;
    int value_degree_;
    int grad_degree_;
    Eigen::MatrixXcd value_coeffs_;  // (3Q) x (value_degree+1)^2
    Eigen::MatrixXcd grad_coeffs_;   // (9Q) x (grad_degree+1)^2

    Eigen::VectorXcd radial_series(const HarmonicsAt& h, double kr, int degree) const;
};

struct HerglotzField {
    CVec3 E;
    Eigen::Matrix3cd jacobian;
};

/// Single-density convenience wrapper.
HerglotzField herglotz_field(const BasisIndex& index, const Vec3& x, double k);

}  // namespace chiral
