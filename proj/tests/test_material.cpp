#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chiral/frame.hpp"
#include "chiral/material.hpp"
#include "support.hpp"

#include <cstdio>
#include <fstream>

using namespace chiral;
using testing::kPi;

TEST_CASE("tabulated permittivities") {
    const cplx ag400 = lookup_permittivity(Metal::Silver, 400);
    CHECK(ag400.real() == -26.94);
    CHECK(ag400.imag() == 0.32);
    const cplx au700 = lookup_permittivity(Metal::Gold, 700);
    CHECK(au700.real() == -1.69);
    CHECK(au700.imag() == 5.66);
    const cplx ag425 = lookup_permittivity(Metal::Silver, 425);
    CHECK(ag425.real() == doctest::Approx(0.5 * (-26.94 - 20.57)).epsilon(1e-14));
    CHECK(ag425.imag() == doctest::Approx(0.5 * (0.32 + 0.44)).epsilon(1e-14));
    CHECK(ag425.real() == doctest::Approx(-23.755).epsilon(1e-14));

    CHECK_THROWS_AS(lookup_permittivity(Metal::Silver, 299.9), MaterialError);
    CHECK_THROWS_AS(lookup_permittivity(Metal::Gold, 800.1), MaterialError);
    CHECK_THROWS_AS(parse_metal("copper"), MaterialError);
    CHECK(parse_metal("Au") == Metal::Gold);
    CHECK(parse_metal("silver") == Metal::Silver);

    CHECK_THROWS_AS(PermittivityTable(Metal::Gold, {{400, {-2, 1}}, {400, {-1, 1}}}), MaterialError);
    CHECK_THROWS_AS(PermittivityTable(Metal::Gold, {{400, {-2, 1}}, {450, {1, 1}}}), MaterialError);
    CHECK_THROWS_AS(PermittivityTable(Metal::Gold, {{400, {-2, 1}}, {450, {-1, 0}}}), MaterialError);
}

TEST_CASE("shipped data file matches the built-in table") {
    const auto tables = PermittivityTable::load_csv(std::string(CHIRAL_DATA_DIR) + "/permittivity.csv");
    for (Metal m : {Metal::Silver, Metal::Gold}) {
        const auto& a = tables.at(m).rows();
        const auto& b = PermittivityTable::builtin(m).rows();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].f_thz == b[i].f_thz);
            CHECK(a[i].eps == b[i].eps);
        }
    }
    const std::string bad = "bad_permittivity.csv";
    {
        std::ofstream out(bad);
        out << "metal,f_THz,re_eps,im_eps\nsilver,400,-26.94,0.32\nsilver,450,2.0,0.44\n";
    }
    CHECK_THROWS_AS(PermittivityTable::load_csv(bad), MaterialError);
    std::remove(bad.c_str());
}

TEST_CASE("wave numbers from the vacuum constants") {
    // Wavelengths quoted for the optimization frequencies, to 0.5 percent
    // (the printed constants give c = 3.007e8 m/s).
    CHECK(wavelength(400) == doctest::Approx(749e-9).epsilon(5e-3));
    CHECK(wavelength(500) == doctest::Approx(600e-9).epsilon(5e-3));
    CHECK(wavelength(600) == doctest::Approx(500e-9).epsilon(5e-3));
    CHECK(wavelength(700) == doctest::Approx(428e-9).epsilon(5e-3));
    CHECK(wave_number(500) * wavelength(500) == doctest::Approx(2 * kPi));
}

TEST_CASE("elliptical cross-section tensor") {
    const cplx eps(-16.05, 0.44);
    const EllipticalCrossSection circle(0.5, 0.5);
    const Eigen::Vector2cd mc = cross_section_tensor(circle, eps);
    CHECK(std::abs(mc(0) - 2.0 / (1.0 + eps)) < 1e-15);
    CHECK(std::abs(mc(1) - 2.0 / (1.0 + eps)) < 1e-15);

    const EllipticalCrossSection e(0.1, 0.7);
    const Eigen::Vector2cd m1 = cross_section_tensor(e, 1.0);
    CHECK(std::abs(m1(0) - 1.0) < 1e-15);
    CHECK(std::abs(m1(1) - 1.0) < 1e-15);

    // Silver at 400 THz with b/a = 26.94: the binormal entry is resonant.
    const EllipticalCrossSection r = EllipticalCrossSection::from_aspect(26.94);
    CHECK(r.b == 0.99);
    CHECK(r.aspect() == doctest::Approx(26.94).epsilon(1e-14));
    const cplx ag = lookup_permittivity(Metal::Silver, 400);
    const Eigen::Vector2cd mr = cross_section_tensor(r, ag);
    CHECK(std::abs(mr(1) - (r.a + r.b) / (r.b + ag * r.a)) < 1e-12);
    CHECK(std::abs(mr(1)) > 10.0);
    CHECK(std::abs(mr(0) - (r.a + r.b) / (r.a + ag * r.b)) < 1e-15);
    CHECK(std::abs(mr(0)) < 0.1);

    CHECK(e.area() == doctest::Approx(kPi * 0.07));
    CHECK_THROWS(EllipticalCrossSection(0.5, 0.4));
    CHECK_THROWS(EllipticalCrossSection(0.0, 0.4));
    CHECK_THROWS(EllipticalCrossSection(0.5, 1.0));
}

TEST_CASE("polarization tensor") {
    const Eigen::Vector2cd one(1.0, 1.0);
    CHECK((polarization_tensor(Eigen::Matrix3d::Identity(), one).tensor - Eigen::Matrix3cd::Identity()).norm() < 1e-15);

    std::mt19937_64 rng(21);
    const cplx eps(-9.78, 0.31);
    const Eigen::Vector2cd iso = cross_section_tensor(EllipticalCrossSection(0.4, 0.4), eps);
    for (int i = 0; i < 10; ++i) {
        const Eigen::Matrix3d V = testing::random_rotation(rng);
        const Vec3 t = V.col(0);
        const Eigen::Matrix3cd tt = (t * t.transpose()).cast<cplx>();
        const Eigen::Matrix3cd expected = tt + 2.0 / (1.0 + eps) * (Eigen::Matrix3cd::Identity() - tt);
        CHECK((polarization_tensor(V, iso).tensor - expected).norm() < 1e-14);
    }

    Eigen::Matrix3d skew = Eigen::Matrix3d::Identity();
    skew(0, 1) = 1e-6;
    CHECK_THROWS(polarization_tensor(skew, one));
}

TEST_CASE("polarization tensor eigenstructure for a random frame") {
    std::mt19937_64 rng(22);
    const cplx eps = lookup_permittivity(Metal::Silver, 500);
    const EllipticalCrossSection cs = EllipticalCrossSection::from_aspect(16.05);
    const Eigen::Vector2cd m = cross_section_tensor(cs, eps);
    for (int i = 0; i < 20; ++i) {
        const Eigen::Matrix3d V = testing::random_rotation(rng);
        const Eigen::Matrix3cd M = polarization_tensor(V, m).tensor;
        CHECK((M - M.transpose()).norm() < 1e-12);
        const Vec3 t = V.col(0);
        CHECK((M * t.cast<cplx>() - t.cast<cplx>()).norm() < 1e-12);

        // Independent dense eigensolver: one eigenvalue 1 with eigenvector along t.
        Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(M);
        int hits = 0;
        for (int j = 0; j < 3; ++j) {
            if (std::abs(es.eigenvalues()(j) - 1.0) < 1e-10) {
                const Eigen::Vector3cd v = es.eigenvectors().col(j).normalized();
                CHECK(std::abs(std::abs(v.dot(t.cast<cplx>())) - 1.0) < 1e-10);
                ++hits;
            }
        }
        CHECK(hits == 1);
        const Eigen::Matrix3d im = M.imag();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ims(0.5 * (im + im.transpose()));
        CHECK(ims.eigenvalues().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("polarization tensor derivative") {
    const Eigen::Vector2cd m = cross_section_tensor(EllipticalCrossSection(0.2, 0.8), cplx(-12.62, 0.42));
    std::mt19937_64 rng(23);
    const Eigen::Matrix3d V = testing::random_rotation(rng);
    CHECK(polarization_tensor_derivative(V, frame_derivative(V, 1.3, Vec3::Zero(), 0.0), m).norm() == 0.0);

    // Pure twist: the derivative is the commutator with the normal-plane rotation generator.
    const Eigen::Matrix3d dV = frame_derivative(V, 1.0, Vec3::Zero(), 0.7);
    const Eigen::Matrix3cd D = polarization_tensor_derivative(V, dV, m);
    CHECK((D - D.transpose()).norm() < 1e-14);
    Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
    G(2, 1) = 0.7;
    G(1, 2) = -0.7;
    const Eigen::Matrix3cd Ml = Eigen::Vector3cd(1.0, m(0), m(1)).asDiagonal();
    const Eigen::Matrix3cd expected = V.cast<cplx>() * (G.cast<cplx>() * Ml - Ml * G.cast<cplx>()) * V.transpose().cast<cplx>();
    CHECK((D - expected).norm() < 1e-13);

    // Random perturbation of a curved wire versus central differences of the
    // tensor along the propagated frame.
    auto part = KnotPartition::uniform(8, 1.5);
    const CurveQuadrature quad(part, 5);
    const SpineSpline s = testing::bent(part, 0.2, rng);
    const AdaptedFrame f = apply_twist(build_rmf(s, quad.nodes(), s.eval(0).dp.unitOrthogonal()),
                                       testing::random_twist_spline(part, 0.5, rng));
    std::normal_distribution<double> g;
    Eigen::MatrixX3d hk(8, 3);
    for (int i = 0; i < 24; ++i) hk.data()[i] = 0.1 * g(rng);
    const SpineSpline h(part, hk);
    const TwistSpline phi = testing::random_twist_spline(part, 0.3, rng);
    const double tau = 1e-5;
    const AdaptedFrame fp = update_frame(f, s, SpineSpline(part, tau * hk), TwistSpline(part, tau * phi.knot_values()));
    const AdaptedFrame fm = update_frame(f, s, SpineSpline(part, -tau * hk), TwistSpline(part, -tau * phi.knot_values()));
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = f.params[i];
        const SpinePoint sp = s.eval(t);
        const Eigen::Matrix3d dv = frame_derivative(f.matrix(i), sp.dp.norm(), h.eval(t).dp, phi.eval(t).theta);
        const Eigen::Matrix3cd an = polarization_tensor_derivative(f.matrix(i), dv, m);
        const Eigen::Matrix3cd fd = (polarization_tensor(fp.matrix(i), m).tensor -
                                     polarization_tensor(fm.matrix(i), m).tensor) / (2 * tau);
        worst = std::max(worst, (an - fd).norm() / fd.norm());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("plasmonic resonances") {
    CHECK(*plasmonic_resonance(EllipticalCrossSection::from_aspect(26.94), Metal::Silver) ==
          doctest::Approx(400.0).epsilon(1e-12));
    CHECK(*plasmonic_resonance(EllipticalCrossSection::from_aspect(2.54), Metal::Gold) ==
          doctest::Approx(600.0).epsilon(1e-12));
    const auto f = plasmonic_resonance(EllipticalCrossSection::from_aspect(12.5), Metal::Silver);
    REQUIRE(f);
    CHECK(*f > 550.0);
    CHECK(*f < 600.0);
    // Root of the interpolated table.
    const double exact = 550.0 + 50.0 * (12.62 - 12.5) / (12.62 - 9.78);
    CHECK(std::abs(*f - exact) <= 0.1);
    CHECK_FALSE(plasmonic_resonance(EllipticalCrossSection::from_aspect(1.2), Metal::Silver));
}

TEST_CASE("polarization tensor bounds over the table and aspect sweep") {
    std::mt19937_64 rng(24);
    const double aspects[] = {1.0, 2.0, 5.0, 12.5, 26.94};
    double worst_real = 1e300, worst_imag = -1e300;
    for (Metal metal : {Metal::Silver, Metal::Gold}) {
        for (const auto& row : PermittivityTable::builtin(metal).rows()) {
            const double gamma = bound_phase(row.eps);
            CHECK(bound_phase_admissible(row.eps, gamma));
            for (double aspect : aspects) {
                const Eigen::Vector2cd m = cross_section_tensor(EllipticalCrossSection::from_aspect(aspect), row.eps);
                const Eigen::Matrix3d V = testing::random_rotation(rng);
                const Eigen::Matrix3cd M = polarization_tensor(V, m).tensor;
                const Vec3 t = V.col(0);
                CHECK((M * t.cast<cplx>() - t.cast<cplx>()).norm() < 1e-10);
                for (int i = 0; i < 1000; ++i) {
                    const Vec3 xi = testing::random_unit(rng);
                    worst_real = std::min(worst_real, real_bound_ratio(M, row.eps, gamma, xi) - 1.0);
                    worst_imag = std::max(worst_imag, imaginary_bound_ratio(M, row.eps, xi) - 1.0);
                }
            }
        }
    }
    CHECK(worst_real >= -1e-10);
    CHECK(worst_imag <= 1e-10);
}
