#include "chiral/runs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>

namespace chiral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SpineSpline straight_spine(const PartitionPtr& part) {
    const double L = part->length();
    Eigen::MatrixX3d k(static_cast<Eigen::Index>(part->size()), 3);
    for (std::size_t i = 0; i < part->size(); ++i) {
        k.row(static_cast<Eigen::Index>(i)) << 0.0, 0.0, part->knots()[i] - 0.5 * L;
    }
    return {part, k};
}

SpineSpline helix_spine(const PartitionPtr& part, const HelixSample& h, double turns) {
    const double L = part->length();
    Eigen::MatrixX3d k(static_cast<Eigen::Index>(part->size()), 3);
    for (std::size_t i = 0; i < part->size(); ++i) {
        const double s = part->knots()[i] / L;
        const double a = kTwoPi * turns * s;
        k.row(static_cast<Eigen::Index>(i)) << h.radius * std::cos(a), h.radius * std::sin(a),
            h.height * (s - 0.5);
    }
    return {part, k};
}

}  // namespace

std::uint64_t derived_seed(std::uint64_t campaign_seed, std::uint64_t index) {
    return splitmix64(campaign_seed ^ splitmix64(index + 1));
}

FarFieldSetup scatterer_setup(Metal metal, double aspect, double f_thz, double f_opt_thz, double rho) {
    FarFieldSetup s;
    s.k = wave_number(f_thz) * wavelength(f_opt_thz);
    s.cross_section = EllipticalCrossSection::from_aspect(aspect);
    s.eps_r = lookup_permittivity(metal, f_thz);
    s.rho = rho;
    s.max_degree = 1;
    return s;
}

double rho_from_rule(const EllipticalCrossSection& cs, double k, double rule) {
    return rule / (k * std::sqrt(cs.a * cs.b));
}

Problem make_problem(const RunConfig& cfg, std::optional<std::uint64_t> seed) {
    validate(cfg);
    Problem p;
    p.cfg = cfg;
    p.seed = seed.value_or(cfg.seed);
    p.unit_m = wavelength(cfg.f_opt_thz);
    const double aspect = effective_aspect(cfg);
    FarFieldSetup setup = scatterer_setup(cfg.metal, aspect, cfg.f_opt_thz, cfg.f_opt_thz, 0.0);
    p.k = setup.k;
    p.eps_r = setup.eps_r;
    p.cross_section = setup.cross_section;
    p.rho = rho_from_rule(p.cross_section, p.k, cfg.rho_rule);
    setup.rho = p.rho;

    const std::size_t n = static_cast<std::size_t>(cfg.knots);
    std::mt19937_64 rng(p.seed);
    SpineSpline spine;
    Eigen::VectorXd twist = random_twist(n, cfg.initial_twist_amplitude, splitmix64(p.seed));
    switch (cfg.init) {
        case InitKind::Straight: {
            p.length = cfg.length_lambda;
            p.partition = KnotPartition::uniform(n, p.length);
            spine = straight_spine(p.partition);
            break;
        }
        case InitKind::Perturbed: {
            p.length = cfg.length_lambda;
            p.partition = KnotPartition::uniform(n, p.length);
            std::uniform_real_distribution<double> u(-cfg.perturbation_lambda, cfg.perturbation_lambda);
            Eigen::MatrixX3d k = straight_spine(p.partition).knot_points();
            for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] += u(rng);
            spine = SpineSpline(p.partition, k);
            break;
        }
        case InitKind::Helix: {
            std::uniform_real_distribution<double> uh(0.0, cfg.helix_height_max_lambda);
            std::uniform_real_distribution<double> ur(0.0, cfg.helix_radius_max_lambda);
            HelixSample h;
            h.height = uh(rng);
            h.radius = ur(rng);
            p.helix = h;
            const double arc = std::hypot(kTwoPi * cfg.helix_turns * h.radius, h.height);
            p.length = cfg.length_lambda > 0.0 ? cfg.length_lambda : arc;
            if (!(arc > 1e-6)) throw GeometryError("sampled helix is degenerate");
            p.partition = KnotPartition::uniform(n, p.length);
            spine = helix_spine(p.partition, h, cfg.helix_turns);
            break;
        }
    }
    p.quad = CurveQuadrature(p.partition, cfg.points_per_segment);
    const Vec3 t0 = spine.eval(0.0).dp.normalized();
    p.reference_normal = std::abs(t0.z()) > 0.9 ? Vec3(Vec3::UnitX() - t0.x() * t0).normalized()
                                                : t0.unitOrthogonal();
    p.initial = DesignState::create(spine, TwistSpline(p.partition, twist), p.reference_normal, p.quad);

    const double R = circumscribing_radius(spine, p.quad.nodes());
    p.degree = resolve_degree(cfg, p.k, R);
    setup.max_degree = p.degree;
    p.model = std::make_shared<WireModel>(setup, p.quad);
    p.objective = std::make_shared<Objective>(p.model, p.quad,
                                              PenaltyWeights{cfg.alpha1, cfg.alpha2, cfg.alpha3}, p.length);
    return p;
}

RunOutcome run_optimize(const Problem& problem) {
    OptimizerOptions opt;
    opt.mode = problem.cfg.mode;
    opt.seed = problem.seed;
    opt.bfgs.max_iter = problem.cfg.max_iter;
    opt.bfgs.rel_step_tol = problem.cfg.rel_step_tol;
    opt.initial_twist_amplitude = std::max(problem.cfg.initial_twist_amplitude, 1e-2);
    if (problem.cfg.checkpoint_every > 0) {
        opt.checkpoint_every = problem.cfg.checkpoint_every;
        opt.checkpoint_path = (std::filesystem::path(problem.cfg.output_dir) / "checkpoint.json").string();
    }
    RunOutcome out{optimize(problem.initial, *problem.objective, opt), problem, false};
    const double R = circumscribing_radius(out.result.state.spine, problem.quad.nodes());
    out.truncation_warning = problem.degree < std::ceil(problem.k * R);
    return out;
}

LoadedDesign load_design(const GeometryFile& g, const RunConfig& cfg) {
    LoadedDesign d;
    d.metal = g.metal ? parse_metal(*g.metal) : cfg.metal;
    d.f_opt_thz = g.f_opt_thz.value_or(cfg.f_opt_thz);
    d.unit_m = wavelength(d.f_opt_thz);
    if (g.aspect) {
        d.aspect = *g.aspect;
    } else {
        RunConfig c = cfg;
        c.metal = d.metal;
        c.f_opt_thz = d.f_opt_thz;
        d.aspect = effective_aspect(c);
    }
    GeometryFile s = g;
    const double inv = 1.0 / d.unit_m;
    for (double& t : s.knot_parameters) t *= inv;
    s.spine_knots *= inv;
    for (double& b : s.frame_twist_rates) b *= d.unit_m;
    s.length_m = g.length_m * inv;
    d.length = s.length_m;
    d.partition = std::make_shared<const KnotPartition>(s.knot_parameters);
    d.quad = CurveQuadrature(d.partition, s.points_per_segment);
    d.state = to_design_state(s, d.quad);
    if (g.rho_m) {
        d.rho = *g.rho_m * inv;
    } else {
        const auto cs = EllipticalCrossSection::from_aspect(d.aspect);
        d.rho = rho_from_rule(cs, kTwoPi, cfg.rho_rule);
    }
    return d;
}

GeometryFile geometry_of(const Problem& problem, const DesignState& state) {
    GeometryFile g = to_geometry_file(state, problem.length, problem.unit_m, problem.quad,
                                      problem.reference_normal);
    g.metal = metal_name(problem.cfg.metal);
    g.f_opt_thz = problem.cfg.f_opt_thz;
    g.aspect = problem.cross_section.aspect();
    g.rho_m = problem.rho * problem.unit_m;
    g.provenance = provenance(problem.cfg);
    g.provenance["seed"] = problem.seed;
    return g;
}

void write_iterations_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
    out << "iteration,phi,J2,JHS,hs_norm,psi1,psi2,psi3,step_length,backtracks\n";
    out << std::setprecision(17);
    for (const auto& r : history) {
        out << r.iteration << ',' << r.phi << ',' << r.j2 << ',' << r.jHS << ',' << r.hs_norm << ','
            << r.psi1 << ',' << r.psi2 << ',' << r.psi3 << ',' << r.step_length << ',' << r.backtracks
            << '\n';
    }
}

nlohmann::json report_json(const ChiralityReport& r) {
    nlohmann::json sv = nlohmann::json::object();
    const char* names[4] = {"pp", "pm", "mp", "mm"};
    nlohmann::json blocks = nlohmann::json::object();
    for (int i = 0; i < 4; ++i) {
        sv[names[i]] = std::vector<double>(r.singular_values[i].data(),
                                           r.singular_values[i].data() + r.singular_values[i].size());
        blocks[names[i]] = r.block_norms[i];
    }
    return {{"J2", r.j2},           {"JHS", r.jHS},         {"chi2", r.chi2},
            {"chiHS", r.chiHS},     {"hs_norm", r.hs_norm}, {"block_norms", blocks},
            {"singular_values", sv}};
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
}

void write_run_outputs(const std::string& dir, const RunOutcome& o) {
    ensure_directory(dir);
    const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
    write_geometry(path("geometry.json"), geometry_of(o.problem, o.result.state));

    std::ofstream csv(path("iterations.csv"));
    csv << "# provenance " << provenance(o.problem.cfg).dump() << '\n';
    write_iterations_csv(csv, o.result.history);

    nlohmann::json rep = report_json(o.result.evaluation.report);
    rep["phi"] = o.result.evaluation.phi;
    rep["psi"] = {o.result.evaluation.penalties.psi1, o.result.evaluation.penalties.psi2,
                  o.result.evaluation.penalties.psi3};
    rep["stop_reason"] = to_string(o.result.reason);
    rep["iterations"] = o.result.iterations;
    rep["initial_twist_added"] = o.result.initial_twist_added;
    rep["max_degree"] = o.problem.degree;
    rep["truncation_warning"] = o.truncation_warning;
    rep["length_lambda"] = o.problem.length;
    if (o.problem.helix) {
        rep["helix"] = {{"height_lambda", o.problem.helix->height}, {"radius_lambda", o.problem.helix->radius}};
    }
    if (!o.result.diagnostic.empty()) rep["diagnostic"] = o.result.diagnostic;
    rep["provenance"] = provenance(o.problem.cfg);
    rep["provenance"]["seed"] = o.problem.seed;
    std::ofstream(path("report.json")) << rep.dump(2) << '\n';
}

std::vector<ScanRow> run_scan(const LoadedDesign& d, const RunConfig& cfg) {
    const int count = static_cast<int>(std::llround((cfg.scan_max_thz - cfg.scan_min_thz) / cfg.scan_step_thz)) + 1;
    const double R = circumscribing_radius(d.state.spine, d.quad.nodes());
    std::vector<ScanRow> rows(static_cast<std::size_t>(count));
    std::vector<std::string> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        ScanRow& row = rows[static_cast<std::size_t>(i)];
        row.f_thz = cfg.scan_min_thz + i * cfg.scan_step_thz;
        try {
            FarFieldSetup s = scatterer_setup(d.metal, d.aspect, row.f_thz, d.f_opt_thz, d.rho);
            row.degree = cfg.max_degree > 0 ? cfg.max_degree : std::max(cfg.degree_floor, default_degree(s.k, R));
            s.max_degree = row.degree;
            const FarFieldMatrix T = assemble_T(d.state.spine, d.state.frame, d.quad, s);
            const ChiralityReport r = measure(T);
            row.j2 = r.j2;
            row.jHS = r.jHS;
            row.hs_norm = r.hs_norm;
            row.truncation_warning = T.truncation_warning;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::runtime_error("scan failed: " + e);
    }
    return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows, const nlohmann::json& prov) {
    out << "# provenance " << prov.dump() << '\n';
    out << "f_THz,J2,JHS,hs_norm\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.f_thz << ',' << r.j2 << ',' << r.jHS << ',' << r.hs_norm << '\n';
}

CampaignResult run_multistart(const RunConfig& cfg, const std::string& dir) {
    const int count = cfg.multistart_count;
    std::vector<CampaignEntry> entries(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
    for (int i = 0; i < count; ++i) {
        CampaignEntry& e = entries[static_cast<std::size_t>(i)];
        e.index = i;
        e.seed = derived_seed(cfg.seed, static_cast<std::uint64_t>(i));
        try {
            RunConfig rc = cfg;
            std::ostringstream name;
            name << "run_" << std::setw(3) << std::setfill('0') << i;
            if (!dir.empty()) rc.output_dir = (std::filesystem::path(dir) / name.str()).string();
            const Problem p = make_problem(rc, e.seed);
            const RunOutcome o = run_optimize(p);
            if (o.result.reason == StopReason::DomainFailure) {
                throw ChiralityDomainError("initial design outside the differentiability domain");
            }
            if (!dir.empty()) write_run_outputs(rc.output_dir, o);
            e.ok = true;
            e.j2 = o.result.evaluation.report.j2;
            e.jHS = o.result.evaluation.report.jHS;
            e.hs_norm = o.result.evaluation.report.hs_norm;
            e.iterations = o.result.iterations;
            e.reason = to_string(o.result.reason);
            if (p.helix) e.helix = *p.helix;
            e.length = p.length;
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
#pragma omp critical(campaign_log)
        {
            if (e.ok) {
                std::cerr << "run " << i << ": J2 " << e.j2 << " JHS " << e.jHS << " (" << e.reason << ")\n";
            } else {
                std::cerr << "run " << i << " failed: " << e.error << '\n';
            }
        }
    }
    CampaignResult res;
    for (const auto& e : entries) (e.ok ? res.ranked : res.failed).push_back(e);
    std::stable_sort(res.ranked.begin(), res.ranked.end(),
                     [](const CampaignEntry& a, const CampaignEntry& b) { return a.jHS > b.jHS; });
    if (res.ranked.empty()) throw std::runtime_error("every multistart run failed");
    return res;
}

}  // namespace chiral
