#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chiral/herglotz.hpp"
#include "support.hpp"

using namespace chiral;
using testing::kPi;

TEST_CASE("basis layout is a bijection with contiguous helicity blocks") {
    const BasisLayout layout(4);
    CHECK(layout.size() == 2 * 4 * 6);
    for (int q = 0; q < layout.size(); ++q) {
        const BasisIndex idx = layout.at(q);
        CHECK(layout.index(idx) == q);
        CHECK(std::abs(idx.m) <= idx.n);
        CHECK((idx.c == Helicity::Plus) == (q < layout.half()));
    }
    CHECK_THROWS(layout.index({5, 0, Helicity::Plus}));
    CHECK_THROWS(layout.index({2, 3, Helicity::Minus}));
}

TEST_CASE("sphere quadrature weights and exactness") {
    for (int d : {3, 8, 15}) {
        const SphereQuadrature q = SphereQuadrature::for_degree(d);
        CHECK(q.exact_degree() >= d);
        double sum = 0.0;
        for (double w : q.weights()) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(sum == doctest::Approx(4 * kPi).epsilon(1e-13));
    }
    // Products of harmonics with l + l' <= degree integrate to the Kronecker delta.
    const int L = 6;
    const SphereQuadrature q = SphereQuadrature::for_degree(2 * L);
    const int n = (L + 1) * (L + 1);
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t s = 0; s < q.size(); ++s) {
        const HarmonicsAt h(L, q.nodes()[s]);
        Eigen::Map<const Eigen::VectorXcd> y(h.values().data(), n);
        gram += q.weights()[s] * y.conjugate() * y.transpose();
    }
    CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scalar harmonics match closed forms of low degree") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const Vec3 d = testing::random_unit(rng);
        const HarmonicsAt h(2, d);
        const double c0 = std::sqrt(3.0 / (4 * kPi)), c1 = std::sqrt(3.0 / (8 * kPi));
        CHECK(std::abs(h.Y(0, 0) - 1.0 / std::sqrt(4 * kPi)) < 1e-14);
        CHECK(std::abs(h.Y(1, 0) - c0 * d.z()) < 1e-14);
        CHECK(std::abs(h.Y(1, 1) + c1 * cplx(d.x(), d.y())) < 1e-14);
        CHECK(std::abs(h.Y(1, -1) - c1 * cplx(d.x(), -d.y())) < 1e-14);
        const double c22 = 0.25 * std::sqrt(15.0 / (2 * kPi));
        CHECK(std::abs(h.Y(2, 2) - c22 * cplx(d.x(), d.y()) * cplx(d.x(), d.y())) < 1e-14);
    }
}

TEST_CASE("degree one vector harmonics equal surface gradients of linear functions") {
    std::mt19937_64 rng(4);
    const double c0 = std::sqrt(3.0 / (4 * kPi)), c1 = std::sqrt(3.0 / (8 * kPi));
    const CVec3 coeff[3] = {CVec3(c1, cplx(0, -c1), 0), CVec3(0, 0, c0), CVec3(-c1, cplx(0, -c1), 0)};
    std::vector<Vec3> dirs = {Vec3::UnitZ(), -Vec3::UnitZ()};
    for (int i = 0; i < 20; ++i) dirs.push_back(testing::random_unit(rng));
    for (const Vec3& d : dirs) {
        const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - d * d.transpose();
        for (int m = -1; m <= 1; ++m) {
            const CVec3 expected = P.cast<cplx>() * coeff[m + 1] / std::sqrt(2.0);
            CHECK((vsh_eval(1, m, VshKind::U, d) - expected).norm() < 1e-13);
            const CVec3 v = testing::ccross(d.cast<cplx>(), expected);
            CHECK((vsh_eval(1, m, VshKind::V, d) - v).norm() < 1e-13);
        }
    }
}

TEST_CASE("vector harmonics are orthonormal and tangential") {
    const int N = 5;
    const BasisLayout layout(N);
    const int Q = layout.size();
    const SphereQuadrature quad = SphereQuadrature::for_degree(2 * N + 2);
    Eigen::MatrixXcd gu = Eigen::MatrixXcd::Zero(Q, Q);
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(Q, Q);
    double tangential = 0.0;
    for (std::size_t s = 0; s < quad.size(); ++s) {
        const Vec3& d = quad.nodes()[s];
        const Eigen::MatrixXcd B = circ_basis_all(layout, d);
        gram += quad.weights()[s] * B.adjoint() * B;
        tangential = std::max(tangential, (d.transpose().cast<cplx>() * B).cwiseAbs().maxCoeff());
        Eigen::MatrixXcd UV(3, Q);
        for (int q = 0; q < layout.half(); ++q) {
            const BasisIndex idx = layout.at(q);
            UV.col(q) = vsh_eval(idx.n, idx.m, VshKind::U, d);
            UV.col(q + layout.half()) = vsh_eval(idx.n, idx.m, VshKind::V, d);
        }
        gu += quad.weights()[s] * UV.adjoint() * UV;
    }
    CHECK(tangential < 1e-12);
    CHECK((gram - Eigen::MatrixXcd::Identity(Q, Q)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((gu - Eigen::MatrixXcd::Identity(Q, Q)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("circular basis functions are helicity eigenfunctions") {
    std::mt19937_64 rng(5);
    const BasisLayout layout(5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vec3 d = testing::random_unit(rng);
        for (int q = 0; q < layout.size(); ++q) {
            const BasisIndex idx = layout.at(q);
            const CVec3 a = circ_basis(idx, d);
            const CVec3 ca = cplx(0, 1) * testing::ccross(d.cast<cplx>(), a);
            worst = std::max(worst, (ca - double(sign(idx.c)) * a).norm());
        }
    }
    CHECK(worst < 1e-12);
}

namespace {

// Direct quadrature of the Herglotz integral over the sphere.
HerglotzField quadrature_field(const BasisIndex& idx, const Vec3& x, double k, int degree) {
    const SphereQuadrature quad = SphereQuadrature::for_degree(degree);
    HerglotzField f{CVec3::Zero(), Eigen::Matrix3cd::Zero()};
    for (std::size_t s = 0; s < quad.size(); ++s) {
        const Vec3& d = quad.nodes()[s];
        const cplx e = std::exp(cplx(0, k * d.dot(x))) * quad.weights()[s];
        const CVec3 a = circ_basis(idx, d) * e;
        f.E += a;
        f.jacobian += cplx(0, k) * a * d.transpose().cast<cplx>();
    }
    return f;
}

}  // namespace

TEST_CASE("closed-form Herglotz fields agree with direct sphere quadrature") {
    std::mt19937_64 rng(6);
    const double k = 2 * kPi;
    const int N = 4;
    const BasisLayout layout(N);
    const HerglotzBasis basis(layout, k);
    std::uniform_real_distribution<double> radius(0.0, 0.8);
    double worst = 0.0, worst_grad = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Vec3 x = radius(rng) * testing::random_unit(rng);
        const HerglotzSample s = basis.evaluate(x);
        for (int q = 0; q < layout.size(); q += 3) {
            const HerglotzField ref = quadrature_field(layout.at(q), x, k, 60);
            worst = std::max(worst, (s.E.col(q) - ref.E).norm() / ref.E.norm());
            worst_grad = std::max(worst_grad, (s.jacobian(q) - ref.jacobian).norm() / ref.jacobian.norm());
        }
    }
    CHECK(worst < 1e-8);
    CHECK(worst_grad < 1e-8);

    // Origin uses the limiting form of the radial series.
    const HerglotzSample s0 = basis.evaluate(Vec3::Zero());
    for (int q = 0; q < layout.size(); ++q) {
        const HerglotzField ref = quadrature_field(layout.at(q), Vec3::Zero(), k, 20);
        CHECK((s0.E.col(q) - ref.E).norm() < 1e-10);
        CHECK((s0.jacobian(q) - ref.jacobian).norm() < 1e-9);
    }
}

TEST_CASE("Herglotz fields: curl eigenrelation, bound and linearity") {
    std::mt19937_64 rng(7);
    const double k = 2 * kPi;
    const BasisLayout layout(5);
    const HerglotzBasis basis(layout, k);
    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
        const Vec3 x = 1.5 * testing::random_unit(rng) * std::uniform_real_distribution<double>(0, 1)(rng);
        const HerglotzSample s = basis.evaluate(x);
        for (int q = 0; q < layout.size(); ++q) {
            const Eigen::Matrix3cd J = s.jacobian(q);
            const CVec3 curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
            const double c = sign(layout.at(q).c);
            worst = std::max(worst, (curl / k - c * s.E.col(q)).norm());
            // Cauchy-Schwarz on the unit-norm density.
            CHECK(s.E.col(q).norm() <= std::sqrt(4 * kPi) + 1e-12);
            CHECK(std::abs(J.trace()) < 1e-8);
        }
        // Zero density: empty combination of columns.
        const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(layout.size());
        CHECK((s.E * zero).norm() == 0.0);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("Herglotz gradient matches finite differences and fields solve Helmholtz") {
    std::mt19937_64 rng(8);
    const double k = 2 * kPi;
    const BasisLayout layout(3);
    const HerglotzBasis basis(layout, k);
    const double h = 1e-5, h2 = 2e-3;
    double worst_grad = 0.0, worst_helm = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Vec3 x = 0.7 * testing::random_unit(rng);
        const HerglotzSample s = basis.evaluate(x);
        Eigen::MatrixXcd lap = -6.0 * s.E;
        for (int a = 0; a < 3; ++a) {
            const Vec3 e = Vec3::Unit(a);
            const HerglotzSample sp = basis.evaluate(x + h * e), sm = basis.evaluate(x - h * e);
            const Eigen::MatrixXcd fd = (sp.E - sm.E) / (2 * h);
            worst_grad = std::max(worst_grad, testing::rel_diff(fd, s.dE[a]));
            lap += basis.evaluate(x + h2 * e).E + basis.evaluate(x - h2 * e).E;
        }
        lap /= h2 * h2;
        // Divergence-free fields: curl curl E - k^2 E = -(lap E + k^2 E).
        worst_helm = std::max(worst_helm, (lap + k * k * s.E).norm() / (k * k * s.E.norm()));
    }
    CHECK(worst_grad < 1e-7);
    CHECK(worst_helm < 1e-5);
}

TEST_CASE("single-density wrapper agrees with the batched evaluation") {
    const double k = 3.0;
    const BasisLayout layout(2);
    const HerglotzBasis basis(layout, k);
    const Vec3 x(0.1, -0.2, 0.3);
    const HerglotzSample s = basis.evaluate(x);
    for (int q = 0; q < layout.size(); ++q) {
        const HerglotzField f = herglotz_field(layout.at(q), x, k);
        CHECK((f.E - s.E.col(q)).norm() < 1e-14);
        CHECK((f.jacobian - s.jacobian(q)).norm() < 1e-13);
    }
}

TEST_CASE("spherical Bessel functions") {
    // Closed forms of low order.
    for (double x : {1e-6, 1e-3, 0.3, 1.0, kPi / 2, std::nextafter(kPi / 2, 4.0), 2.5, 7.0, 20.0}) {
        const std::vector<double> j = spherical_bessel(7, x);
        const double s = std::sin(x), c = std::cos(x);
        const double j0 = s / x, j1 = s / (x * x) - c / x;
        const double j2 = (3 / (x * x) - 1) * s / x - 3 * c / (x * x);
        const double j3 = (15 / (x * x * x) - 6 / x) * s / x - (15 / (x * x) - 1) * c / x;
        CHECK(j[0] == doctest::Approx(j0).epsilon(1e-13));
        if (x > 1e-2) {
            CHECK(j[1] == doctest::Approx(j1).epsilon(1e-12));
            CHECK(j[2] == doctest::Approx(j2).epsilon(1e-10));
            CHECK(j[3] == doctest::Approx(j3).epsilon(1e-8));
        }
    }
    CHECK(spherical_bessel(3, 0.0) == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    // Power-series oracle for small arguments, all orders.
    for (double x : {1e-5, 0.05, 0.5, 2.0}) {
        const std::vector<double> j = spherical_bessel(12, x);
        double lead = 1.0;
        for (int l = 0; l <= 12; ++l) {
            double term = lead, sum = 0.0;
            for (int k = 0; k < 40; ++k) {
                sum += term;
                term *= -x * x / (2.0 * (k + 1) * (2.0 * l + 2 * k + 3));
            }
            CHECK(j[l] == doctest::Approx(sum).epsilon(1e-12));
            lead *= x / (2.0 * l + 3.0);
        }
    }
    // No isolated glitches along a fine grid.
    double worst = 0.0;
    std::vector<double> prev = spherical_bessel(8, 0.5);
    for (int i = 1; i <= 200000; ++i) {
        const double x = 0.5 + i * 5e-5;
        const std::vector<double> cur = spherical_bessel(8, x);
        for (int l = 0; l <= 8; ++l) worst = std::max(worst, std::abs(cur[l] - prev[l]));
        prev = cur;
    }
    CHECK(worst < 5e-5);
}
