#include "chiral/harmonics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chiral {

namespace {
constexpr double kPi = std::numbers::pi;
}

BasisLayout::BasisLayout(int max_degree) : N_(max_degree), half_(max_degree * (max_degree + 2)) {
    if (max_degree < 1) throw std::invalid_argument("basis degree must be >= 1");
}

int BasisLayout::index(const BasisIndex& idx) const {
    if (idx.n < 1 || idx.n > N_ || std::abs(idx.m) > idx.n) {
        throw std::out_of_range("invalid basis index (n=" + std::to_string(idx.n) +
                                ", m=" + std::to_string(idx.m) + ")");
    }
    const int within = idx.n * idx.n - 1 + idx.n + idx.m;
    return idx.c == Helicity::Plus ? within : half_ + within;
}

BasisIndex BasisLayout::at(int q) const {
    if (q < 0 || q >= size()) throw std::out_of_range("basis position out of range");
    const Helicity c = q < half_ ? Helicity::Plus : Helicity::Minus;
    const int within = q % half_;
    int n = static_cast<int>(std::sqrt(static_cast<double>(within + 1)));
    while ((n + 1) * (n + 1) - 1 <= within) ++n;
    while (n * n - 1 > within) --n;
    return {n, within - (n * n - 1) - n, c};
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
    if (count < 1) throw std::invalid_argument("gauss_legendre: count must be >= 1");
    nodes.assign(count, 0.0);
    weights.assign(count, 0.0);
    for (int i = 0; i < (count + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= count; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (count == 1) p0 = 1.0;
            dp = count * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= count; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (count == 1) p0 = 1.0;
        dp = count * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    if (count % 2 == 1) nodes[count / 2] = 0.0;
}

SphereQuadrature::SphereQuadrature(int polar, int azimuth) {
    if (polar < 1 || azimuth < 1) throw std::invalid_argument("sphere quadrature sizes must be >= 1");
    std::vector<double> x, w;
    gauss_legendre(polar, x, w);
    nodes_.reserve(static_cast<std::size_t>(polar) * azimuth);
    weights_.reserve(nodes_.capacity());
    for (int i = 0; i < polar; ++i) {
        const double st = std::sqrt(std::max(0.0, 1.0 - x[i] * x[i]));
        for (int j = 0; j < azimuth; ++j) {
            const double phi = 2.0 * kPi * j / azimuth;
            nodes_.emplace_back(st * std::cos(phi), st * std::sin(phi), x[i]);
            weights_.push_back(w[i] * 2.0 * kPi / azimuth);
        }
    }
    exact_degree_ = std::min(2 * polar - 1, azimuth - 1);
}

SphereQuadrature SphereQuadrature::for_degree(int degree) {
    const int polar = degree / 2 + 1;
    return SphereQuadrature(polar, degree + 1);
}

HarmonicsAt::HarmonicsAt(int max_degree, const Vec3& direction) : L_(max_degree) {
    if (max_degree < 0) throw std::invalid_argument("harmonic degree must be >= 0");
    const double r = direction.norm();
    if (!(r > 0.0)) throw std::invalid_argument("direction must be nonzero");
    const Vec3 d = direction / r;
    const double x = std::clamp(d.z(), -1.0, 1.0);
    const double rho = std::hypot(d.x(), d.y());
    const double st = rho;
    const double phi = rho > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
    const double cp = std::cos(phi), sp = std::sin(phi);
    e_theta_ = Vec3(x * cp, x * sp, -st);
    e_phi_ = Vec3(-sp, cp, 0.0);

    const int L = max_degree + 1;  // one extra degree for the m = 0 derivative
    // p(l, m) and q(l, m) = p(l, m) / sin(theta), m >= 0.
    std::vector<double> p((L + 1) * (L + 1), 0.0), q((L + 1) * (L + 1), 0.0);
    auto at = [L](int l, int m) { return l * (L + 1) + m; };
    p[at(0, 0)] = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 1; m <= L; ++m) {
        const double f = -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        q[at(m, m)] = f * p[at(m - 1, m - 1)];
        p[at(m, m)] = f * st * p[at(m - 1, m - 1)];
    }
    for (int m = 0; m <= L; ++m) {
        if (m + 1 <= L) {
            p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p[at(m, m)];
            q[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * q[at(m, m)];
        }
        for (int l = m + 2; l <= L; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            p[at(l, m)] = a * (x * p[at(l - 1, m)] - b * p[at(l - 2, m)]);
            q[at(l, m)] = a * (x * q[at(l - 1, m)] - b * q[at(l - 2, m)]);
        }
    }

    const int count = (max_degree + 1) * (max_degree + 1);
    y_.assign(count, 0.0);
    g_.assign(count, CVec3::Zero());
    for (int l = 0; l <= max_degree; ++l) {
        for (int m = 0; m <= l; ++m) {
            const cplx e = std::polar(1.0, m * phi);
            double dtheta;
            if (m == 0) {
                dtheta = l > 0 ? std::sqrt(l * (l + 1.0)) * st * q[at(l, 1)] : 0.0;
            } else {
                const double c = l > m ? std::sqrt((2.0 * l + 1.0) * (static_cast<double>(l) * l - m * m) /
                                                   (2.0 * l - 1.0))
                                       : 0.0;
                dtheta = l * x * q[at(l, m)] - c * q[at(l - 1, m)];
            }
            const cplx yv = p[at(l, m)] * e;
            const CVec3 gv = e_theta_.cast<cplx>() * (dtheta * e) +
                             e_phi_.cast<cplx>() * (cplx(0.0, m) * q[at(l, m)] * e);
            y_[flat(l, m)] = yv;
            g_[flat(l, m)] = gv;
            if (m > 0) {
                const double s = (m % 2 == 0) ? 1.0 : -1.0;
                y_[flat(l, -m)] = s * std::conj(yv);
                g_[flat(l, -m)] = s * gv.conjugate();
            }
        }
    }
}

CVec3 vsh_eval(int n, int m, VshKind kind, const Vec3& direction) {
    if (n < 1 || std::abs(m) > n) throw std::out_of_range("invalid vector harmonic index");
    const HarmonicsAt h(n, direction);
    const CVec3 u = h.grad(n, m) / std::sqrt(n * (n + 1.0));
    if (kind == VshKind::U) return u;
    // xhat x U with U tangential: U_theta e_phi - U_phi e_theta.
    const cplx ut = (h.e_theta().cast<cplx>().transpose() * u).value();
    const cplx up = (h.e_phi().cast<cplx>().transpose() * u).value();
    return h.e_phi().cast<cplx>() * ut - h.e_theta().cast<cplx>() * up;
}

namespace {

CVec3 circ_from(const HarmonicsAt& h, int n, int m, Helicity c) {
    const CVec3 u = h.grad(n, m) / std::sqrt(n * (n + 1.0));
    const cplx ut = (h.e_theta().cast<cplx>().transpose() * u).value();
    const cplx up = (h.e_phi().cast<cplx>().transpose() * u).value();
    const CVec3 v = h.e_phi().cast<cplx>() * ut - h.e_theta().cast<cplx>() * up;
    const cplx i(0.0, sign(c));
    return (u + i * v) / std::numbers::sqrt2;
}

}  // namespace

CVec3 circ_basis(const BasisIndex& idx, const Vec3& direction) {
    if (idx.n < 1 || std::abs(idx.m) > idx.n) throw std::out_of_range("invalid basis index");
    return circ_from(HarmonicsAt(idx.n, direction), idx.n, idx.m, idx.c);
}

Eigen::MatrixXcd circ_basis_all(const BasisLayout& layout, const Vec3& direction) {
    const HarmonicsAt h(layout.max_degree(), direction);
    Eigen::MatrixXcd out(3, layout.size());
    for (int q = 0; q < layout.size(); ++q) {
        const BasisIndex idx = layout.at(q);
        out.col(q) = circ_from(h, idx.n, idx.m, idx.c);
    }
    return out;
}

}  // namespace chiral
