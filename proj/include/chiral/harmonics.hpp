#pragma once

#include "chiral/spline.hpp"

#include <complex>
#include <vector>

namespace chiral {

using cplx = std::complex<double>;
using CVec3 = Eigen::Vector3cd;

enum class Helicity { Plus, Minus };

inline Helicity opposite(Helicity c) { return c == Helicity::Plus ? Helicity::Minus : Helicity::Plus; }
inline int sign(Helicity c) { return c == Helicity::Plus ? 1 : -1; }

struct BasisIndex {
    int n;
    int m;
    Helicity c;

    bool operator==(const BasisIndex&) const = default;
};

/// Linear layout of the truncated circularly polarized basis: every
/// positive-helicity function first, then the negative ones; inside each
/// block degree n = 1..N and order m = -n..n.
class BasisLayout {
public:
    explicit BasisLayout(int max_degree);

    int max_degree() const { return N_; }
    int size() const { return 2 * half_; }
    int half() const { return half_; }

    int index(const BasisIndex& idx) const;
    BasisIndex at(int q) const;

private:
    int N_;
    int half_;
};

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

/// Product rule: Gauss-Legendre in cos(theta) times trapezoid in phi.
/// Exact for spherical polynomials of degree <= min(2 polar - 1, azimuth - 1).
class SphereQuadrature {
public:
    SphereQuadrature(int polar, int azimuth);

    /// Smallest product rule exact up to `degree`.
    static SphereQuadrature for_degree(int degree);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    int exact_degree() const { return exact_degree_; }

private:
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    int exact_degree_;
};

/// Orthonormal scalar harmonics Y_l^m (Condon-Shortley phase) and their
/// surface gradients for all l <= L at one direction. Poles are handled
/// through p_l^m / sin(theta), which stays finite.
class HarmonicsAt {
public:
    HarmonicsAt(int max_degree, const Vec3& direction);

    int max_degree() const { return L_; }
    static int flat(int l, int m) { return l * l + l + m; }

    cplx Y(int l, int m) const { return y_[flat(l, m)]; }
    const CVec3& grad(int l, int m) const { return g_[flat(l, m)]; }
    const std::vector<cplx>& values() const { return y_; }

    const Vec3& e_theta() const { return e_theta_; }
    const Vec3& e_phi() const { return e_phi_; }

private:
    int L_;
    std::vector<cplx> y_;
    std::vector<CVec3> g_;
    Vec3 e_theta_, e_phi_;
};

enum class VshKind { U, V };

/// U_n^m = grad_S Y_n^m / sqrt(n(n+1)), V_n^m = xhat x U_n^m.
CVec3 vsh_eval(int n, int m, VshKind kind, const Vec3& direction);

/// A = (U + iV)/sqrt2 for Plus, B = (U - iV)/sqrt2 for Minus.
CVec3 circ_basis(const BasisIndex& idx, const Vec3& direction);

/// All Q basis functions at one direction as a 3 x Q matrix.
Eigen::MatrixXcd circ_basis_all(const BasisLayout& layout, const Vec3& direction);

}  // namespace chiral
