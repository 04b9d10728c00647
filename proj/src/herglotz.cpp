#include "chiral/herglotz.hpp"

#include <cmath>
#include <numbers>

namespace chiral {

Eigen::Matrix3cd HerglotzSample::jacobian(int q) const {
    Eigen::Matrix3cd J;
    for (int i = 0; i < 3; ++i) J.col(i) = dE[i].col(q);
    return J;
}

HerglotzBasis::HerglotzBasis(const BasisLayout& layout, double k)
    : layout_(layout), k_(k), value_degree_(layout.max_degree() + 1),
      grad_degree_(layout.max_degree() + 2) {
    if (!(k > 0.0)) throw std::invalid_argument("wave number must be positive");
    const int Q = layout_.size();
    const int nv = (value_degree_ + 1) * (value_degree_ + 1);
    const int ng = (grad_degree_ + 1) * (grad_degree_ + 1);
    value_coeffs_ = Eigen::MatrixXcd::Zero(3 * Q, nv);
    grad_coeffs_ = Eigen::MatrixXcd::Zero(9 * Q, ng);

    const SphereQuadrature quad = SphereQuadrature::for_degree(2 * grad_degree_ + 2);
    for (std::size_t s = 0; s < quad.size(); ++s) {
        const Vec3& d = quad.nodes()[s];
        const double w = quad.weights()[s];
        const Eigen::MatrixXcd basis = circ_basis_all(layout_, d);  // 3 x Q
        const HarmonicsAt h(grad_degree_, d);
        Eigen::RowVectorXcd yv(nv), yg(ng);
        for (int i = 0; i < ng; ++i) {
            const cplx y = std::conj(h.values()[i]) * w;
            yg(i) = y;
            if (i < nv) yv(i) = y;
        }
        for (int j = 0; j < 3; ++j) {
            for (int q = 0; q < Q; ++q) {
                const cplx b = basis(j, q);
                value_coeffs_.row(j * Q + q) += b * yv;
                for (int i = 0; i < 3; ++i) {
                    grad_coeffs_.row((3 * i + j) * Q + q) += (d(i) * b) * yg;
                }
            }
        }
    }
    // Drop quadrature round-off of coefficients that vanish analytically.
    auto prune = [](Eigen::MatrixXcd& c) {
        const double scale = c.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            if (std::abs(c.data()[i]) < 1e-13 * scale) c.data()[i] = 0.0;
        }
    };
    prune(value_coeffs_);
    prune(grad_coeffs_);
}

std::vector<double> spherical_bessel(int L, double x) {
    if (L < 0 || !(x >= 0.0)) throw std::invalid_argument("spherical Bessel needs L >= 0 and x >= 0");
    std::vector<double> j(L + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    if (x < 1e-4) {
        double lead = 1.0;  // x^l / (2l+1)!!
        for (int l = 0; l <= L; ++l) {
            j[l] = lead * (1.0 - x * x / (2.0 * (2 * l + 3)));
            lead *= x / (2.0 * l + 3.0);
        }
        return j;
    }
    const double j0 = std::sin(x) / x;
    const double j1 = (j0 - std::cos(x)) / x;
    if (x > L) {
        j[0] = j0;
        if (L > 0) j[1] = j1;
        for (int l = 1; l < L; ++l) j[l + 1] = (2.0 * l + 1.0) / x * j[l] - j[l - 1];
        return j;
    }
    const int start = L + 16 + static_cast<int>(std::ceil(std::sqrt(40.0 * (L + 1))));
    double next = 0.0, cur = 1e-300;
    for (int l = start; l > 0; --l) {
        const double prev = (2.0 * l + 1.0) / x * cur - next;
        next = cur;
        cur = prev;
        if (l - 1 <= L) j[l - 1] = cur;
        if (std::abs(cur) > 1e250) {
            for (double& v : j) v *= 1e-250;
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    // Normalize against whichever of j_0, j_1 is better conditioned.
    const double scale = (std::abs(j0) >= std::abs(j1) || L == 0) ? j0 / j[0] : j1 / j[1];
    for (double& v : j) v *= scale;
    return j;
}

Eigen::VectorXcd HerglotzBasis::radial_series(const HarmonicsAt& h, double kr, int degree) const {
    Eigen::VectorXcd v((degree + 1) * (degree + 1));
    const std::vector<double> jb = spherical_bessel(degree, kr);
    cplx il(1.0, 0.0);
    for (int l = 0; l <= degree; ++l) {
        const double jl = jb[l];
        const cplx f = 4.0 * std::numbers::pi * il * jl;
        for (int m = -l; m <= l; ++m) {
            const int i = HarmonicsAt::flat(l, m);
            v(i) = f * h.values()[i];
        }
        il *= cplx(0.0, 1.0);
    }
    return v;
}

HerglotzSample HerglotzBasis::evaluate(const Vec3& x) const {
    const int Q = layout_.size();
    const double r = x.norm();
    const Vec3 dir = r > 0.0 ? Vec3(x / r) : Vec3(0.0, 0.0, 1.0);
    const HarmonicsAt h(grad_degree_, dir);
    const double kr = k_ * r;

    const Eigen::VectorXcd sv = radial_series(h, kr, value_degree_);
    const Eigen::VectorXcd sg = radial_series(h, kr, grad_degree_);
    const Eigen::VectorXcd ev = value_coeffs_ * sv;
    const Eigen::VectorXcd eg = (grad_coeffs_ * sg) * cplx(0.0, k_);

    HerglotzSample out;
    out.E.resize(3, Q);
    for (int j = 0; j < 3; ++j) out.E.row(j) = ev.segment(j * Q, Q).transpose();
    for (int i = 0; i < 3; ++i) {
        out.dE[i].resize(3, Q);
        for (int j = 0; j < 3; ++j) out.dE[i].row(j) = eg.segment((3 * i + j) * Q, Q).transpose();
    }
    return out;
}

HerglotzField herglotz_field(const BasisIndex& index, const Vec3& x, double k) {
    const BasisLayout layout(index.n);
    const HerglotzBasis basis(layout, k);
    const HerglotzSample s = basis.evaluate(x);
    const int q = layout.index(index);
    return {s.E.col(q), s.jacobian(q)};
}

}  // namespace chiral
