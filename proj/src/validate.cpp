#include "chiral/validate.hpp"

#include "chiral/runs.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace chiral {

namespace {

struct Design {
    DesignState state;
    CurveQuadrature quad;
    FarFieldSetup setup;
    double length = 0.0;
};

Design design_of(const RunConfig& cfg) {
    Design d;
    if (!cfg.geometry.empty()) {
        const LoadedDesign ld = load_design(read_geometry(cfg.geometry), cfg);
        d.state = ld.state;
        d.quad = ld.quad;
        d.setup = scatterer_setup(ld.metal, ld.aspect, ld.f_opt_thz, ld.f_opt_thz, ld.rho);
        d.setup.max_degree = resolve_degree(cfg, d.setup.k, circumscribing_radius(ld.state.spine, ld.quad.nodes()));
        d.length = ld.length;
    } else {
        const Problem p = make_problem(cfg);
        d.state = p.initial;
        d.quad = p.quad;
        d.setup = p.model->setup();
        d.length = p.length;
    }
    if (cfg.validate_variant == "flipped-denominator") d.setup.variant = TensorVariant::FlippedDenominator;
    return d;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Matrix3d A;
    for (int i = 0; i < 9; ++i) A.data()[i] = g(rng);
    Eigen::Matrix3d Q = Eigen::HouseholderQR<Eigen::Matrix3d>(A).householderQ();
    if (Q.determinant() < 0) Q.col(0) *= -1.0;
    return Q;
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Vec3(g(rng), g(rng), g(rng)).normalized();
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(3) << v;
    return o.str();
}

SuiteResult chain_suite(const Design& d, int matrices, int geometries, std::uint64_t seed) {
    SuiteResult r{"chirality-chain", SuiteStatus::Pass, ""};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    double worst = -1e300;
    const auto check = [&](const ChiralityReport& c) {
        const double scale = std::max(c.hs_norm, 1e-300);
        worst = std::max({worst, -c.chiHS / scale, (c.chiHS - c.chi2) / scale, (c.chi2 - c.hs_norm) / scale,
                          c.j2 - 1.0, c.jHS - c.j2});
    };
    for (int m = 0; m < matrices; ++m) {
        const int half = 3 + m % 6;
        Eigen::MatrixXcd T(2 * half, 2 * half);
        for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = cplx(g(rng), g(rng));
        T.topLeftCorner(half, half) *= std::exp(g(rng));
        T.bottomRightCorner(half, half) *= std::exp(g(rng));
        check(measure(T));
    }
    const PartitionPtr& part = d.state.spine.partition();
    const double L = part->length();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int m = 0; m < geometries; ++m) {
        Eigen::MatrixX3d k(static_cast<Eigen::Index>(part->size()), 3);
        Eigen::VectorXd tw(static_cast<Eigen::Index>(part->size()));
        const double ax = u(rng), ay = u(rng), bz = u(rng);
        for (std::size_t j = 0; j < part->size(); ++j) {
            const double t = part->knots()[j] / L;
            k.row(static_cast<Eigen::Index>(j)) << 0.2 * L * ax * std::sin(3.14159 * t),
                0.2 * L * ay * std::sin(6.28318 * t), L * (t - 0.5) + 0.05 * L * bz * std::sin(6.28318 * t);
            tw(static_cast<Eigen::Index>(j)) = u(rng);
        }
        const SpineSpline spine(part, k);
        const Vec3 t0 = spine.eval(0.0).dp.normalized();
        const Vec3 ref = (Vec3::UnitX() - t0.x() * t0).normalized();
        const DesignState s = DesignState::create(spine, TwistSpline(part, tw), ref, d.quad);
        check(measure(assemble_T(s.spine, s.frame, d.quad, d.setup)));
    }
    r.detail = "worst violation " + fmt(worst) + " over " + std::to_string(matrices) + " matrices and " +
               std::to_string(geometries) + " wires";
    if (worst > 1e-10) r.status = SuiteStatus::Fail;
    return r;
}

SuiteResult gradient_suite(const Design& d, const RunConfig& cfg) {
    SuiteResult r{"gradient", SuiteStatus::Pass, ""};
    auto model = std::make_shared<WireModel>(d.setup, d.quad);
    const Objective obj(model, d.quad, PenaltyWeights{cfg.alpha1, cfg.alpha2, cfg.alpha3}, d.length);
    try {
        const Evaluation e = obj.evaluate(d.state);
        const Eigen::VectorXd grad = obj.gradient(d.state, e);
        const Eigen::VectorXd x = d.state.vector();
        Eigen::VectorXd fd(x.size());
        const double tau = 1e-6;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += tau;
            xm(j) -= tau;
            fd(j) = (obj.evaluate(d.state.moved_to(xp)).phi - obj.evaluate(d.state.moved_to(xm)).phi) / (2 * tau);
        }
        const double err = (grad - fd).cwiseAbs().maxCoeff() / std::max(fd.cwiseAbs().maxCoeff(), 1e-300);
        r.detail = "relative max error " + fmt(err) + " over " + std::to_string(x.size()) + " coordinates";
        if (!(err <= 1e-5)) r.status = SuiteStatus::Fail;
    } catch (const ChiralityDomainError& e) {
        r.status = SuiteStatus::Warn;
        r.detail = std::string("design outside the differentiability domain: ") + e.what();
    }
    return r;
}

SuiteResult symmetry_suite(const Design& d, std::uint64_t seed) {
    SuiteResult r{"symmetry", SuiteStatus::Pass, ""};
    const PartitionPtr& part = d.state.spine.partition();
    Eigen::MatrixX3d k(static_cast<Eigen::Index>(part->size()), 3);
    for (std::size_t j = 0; j < part->size(); ++j) {
        k.row(static_cast<Eigen::Index>(j)) << 0.0, 0.0, part->knots()[j] - 0.5 * part->length();
    }
    const DesignState straight =
        DesignState::create(SpineSpline(part, k), TwistSpline::zero(part), Vec3::UnitX(), d.quad);
    const ChiralityReport achiral = measure(assemble_T(straight.spine, straight.frame, d.quad, d.setup));

    const FarFieldMatrix T = assemble_T(d.state.spine, d.state.frame, d.quad, d.setup);
    const ChiralityReport base = measure(T);
    const double scale = std::max(base.hs_norm, 1e-300);

    Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
    S(2, 2) = -1.0;
    const auto [ms, mf] = transform_wire(d.state.spine, d.state.frame, S);
    const ChiralityReport mirror = measure(assemble_T(ms, mf, d.quad, d.setup));
    double mirror_err = 0.0;
    for (int b = 0; b < 4; ++b) {
        mirror_err = std::max(mirror_err, std::abs(mirror.block_norms[static_cast<std::size_t>(3 - b)] -
                                                   base.block_norms[static_cast<std::size_t>(b)]));
    }
    mirror_err /= scale;

    std::mt19937_64 rng(seed);
    const auto [rs, rf] = transform_wire(d.state.spine, d.state.frame, random_rotation(rng));
    const ChiralityReport rot = measure(assemble_T(rs, rf, d.quad, d.setup));
    double rot_err = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        rot_err = std::max(rot_err, (rot.singular_values[b] - base.singular_values[b]).cwiseAbs().maxCoeff());
    }
    rot_err /= scale;

    r.detail = "achiral J2 " + fmt(achiral.j2) + ", mirror " + fmt(mirror_err) + ", rotation " + fmt(rot_err);
    if (!(achiral.j2 <= 1e-8 && achiral.jHS <= 1e-8 && mirror_err <= 1e-8 && rot_err <= 1e-8)) {
        r.status = SuiteStatus::Fail;
    }
    return r;
}

SuiteResult rho_suite(const Design& d) {
    SuiteResult r{"rho-scaling", SuiteStatus::Pass, ""};
    FarFieldSetup twice = d.setup;
    twice.rho *= 2.0;
    const ChiralityReport a = measure(assemble_T(d.state.spine, d.state.frame, d.quad, d.setup));
    const ChiralityReport b = measure(assemble_T(d.state.spine, d.state.frame, d.quad, twice));
    const double dj = std::max(std::abs(a.j2 - b.j2), std::abs(a.jHS - b.jHS));
    const double dr = std::abs(b.hs_norm / a.hs_norm - 4.0);
    r.detail = "J change " + fmt(dj) + ", norm ratio error " + fmt(dr);
    if (!(dj <= 1e-12 && dr <= 1e-12)) r.status = SuiteStatus::Fail;
    return r;
}

SuiteResult truncation_suite(const Design& d) {
    SuiteResult r{"truncation", SuiteStatus::Pass, ""};
    const double R = circumscribing_radius(d.state.spine, d.quad.nodes());
    const double kR = d.setup.k * R;
    FarFieldSetup more = d.setup;
    more.max_degree += 2;
    const ChiralityReport a = measure(assemble_T(d.state.spine, d.state.frame, d.quad, d.setup));
    const ChiralityReport b = measure(assemble_T(d.state.spine, d.state.frame, d.quad, more));
    const double dj = std::abs(a.jHS - b.jHS);
    r.detail = "N = " + std::to_string(d.setup.max_degree) + ", kR = " + fmt(kR) + ", J_HS change at N+2 " + fmt(dj);
    if (d.setup.max_degree < kR || dj > 1e-3) r.status = SuiteStatus::Warn;
    return r;
}

}  // namespace

std::pair<SpineSpline, AdaptedFrame> transform_wire(const SpineSpline& spine, const AdaptedFrame& frame,
                                                    const Eigen::Matrix3d& A) {
    const double s = A.determinant() > 0 ? 1.0 : -1.0;
    const Eigen::MatrixX3d k = spine.knot_points() * A.transpose();
    AdaptedFrame f = frame;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.tangent[i] = A * frame.tangent[i];
        f.normal[i] = A * frame.normal[i];
        f.binormal[i] = s * (A * frame.binormal[i]);
        f.beta[i] = s * frame.beta[i];
    }
    return {SpineSpline(spine.partition(), k), f};
}

std::string status_name(SuiteStatus s) {
    switch (s) {
        case SuiteStatus::Pass: return "PASS";
        case SuiteStatus::Warn: return "WARN";
        case SuiteStatus::Fail: return "FAIL";
    }
    return "?";
}

bool ValidationReport::passed() const {
    return std::none_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.status == SuiteStatus::Fail; });
}

const SuiteResult& ValidationReport::find(const std::string& name) const {
    for (const auto& s : suites) {
        if (s.name == name) return s;
    }
    throw std::out_of_range("no suite named " + name);
}

SuiteResult bounds_suite(TensorVariant variant, int samples, std::uint64_t seed) {
    SuiteResult r{"bounds", SuiteStatus::Pass, ""};
    std::mt19937_64 rng(seed);
    const double aspects[] = {1.0, 2.0, 5.0, 7.14, 12.5, 26.94};
    double worst_real = 1e300, worst_imag = -1e300, worst_eig = 0.0;
    bool phase_ok = true;
    for (Metal metal : {Metal::Silver, Metal::Gold}) {
        for (const auto& row : PermittivityTable::builtin(metal).rows()) {
            const double gamma = bound_phase(row.eps);
            phase_ok = phase_ok && bound_phase_admissible(row.eps, gamma);
            for (double aspect : aspects) {
                const auto m = cross_section_tensor(EllipticalCrossSection::from_aspect(aspect), row.eps, variant);
                const Eigen::Matrix3d V = random_rotation(rng);
                const Eigen::Matrix3cd M = polarization_tensor(V, m).tensor;
                const Eigen::Vector3cd t = V.col(0).cast<cplx>();
                worst_eig = std::max(worst_eig, (M * t - t).norm());
                for (int i = 0; i < samples; ++i) {
                    const Vec3 xi = random_unit(rng);
                    worst_real = std::min(worst_real, real_bound_ratio(M, row.eps, gamma, xi) - 1.0);
                    worst_imag = std::max(worst_imag, imaginary_bound_ratio(M, row.eps, xi) - 1.0);
                }
            }
        }
    }
    r.detail = "real margin " + fmt(worst_real) + ", imaginary excess " + fmt(worst_imag) + ", tangent residual " +
               fmt(worst_eig);
    if (!phase_ok || worst_real < -1e-10 || worst_imag > 1e-10 || worst_eig > 1e-10) r.status = SuiteStatus::Fail;
    return r;
}

ValidationReport run_validate(const RunConfig& cfg) {
    const Design d = design_of(cfg);
    ValidationReport rep;
    rep.suites.push_back(bounds_suite(d.setup.variant, cfg.validate_samples, cfg.seed));
    rep.suites.push_back(chain_suite(d, 1000, 50, cfg.seed));
    rep.suites.push_back(gradient_suite(d, cfg));
    rep.suites.push_back(symmetry_suite(d, cfg.seed));
    rep.suites.push_back(rho_suite(d));
    rep.suites.push_back(truncation_suite(d));
    return rep;
}

void print_report(std::ostream& out, const ValidationReport& report) {
    for (const auto& s : report.suites) out << status_name(s.status) << ' ' << s.name << ": " << s.detail << '\n';
}

}  // namespace chiral
