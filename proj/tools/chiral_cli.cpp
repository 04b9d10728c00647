#include "chiral/mesh.hpp"
#include "chiral/runs.hpp"
#include "chiral/validate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace chiral;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

struct Invocation {
    std::string config_file;
    std::vector<std::string> overrides;
};

RunConfig load_config(const std::string& command, const Invocation& inv) {
    KeyValues kv;
    if (!inv.config_file.empty()) kv = read_key_values(inv.config_file);
    for (const auto& o : inv.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
        KeyValues one = parse_key_values(o.substr(0, eq) + " = " + o.substr(eq + 1));
        for (auto& [k, v] : one) kv[k] = v;
    }
    RunConfig cfg = make_config(kv, command);
    if (!cfg.geometry.empty() && !std::filesystem::is_regular_file(cfg.geometry)) {
        throw ConfigError("geometry file '" + cfg.geometry + "' does not exist");
    }
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

int do_optimize(const RunConfig& cfg) {
    const Problem p = make_problem(cfg);
    std::cerr << "optimize: L = " << p.length << " lambda, N = " << p.degree << ", aspect "
              << p.cross_section.aspect() << ", eps " << p.eps_r << '\n';
    const RunOutcome o = run_optimize(p);
    write_run_outputs(cfg.output_dir, o);
    const auto& r = o.result.evaluation.report;
    std::cout << "J2 " << r.j2 << " JHS " << r.jHS << " hs_norm " << r.hs_norm << " iterations "
              << o.result.iterations << " stop " << to_string(o.result.reason) << '\n';
    if (o.truncation_warning) std::cerr << "warning: final design has N < kR; raise max_degree\n";
    return o.result.reason == StopReason::DomainFailure ? kNumericalFailure : kOk;
}

int do_scan(const RunConfig& cfg) {
    const LoadedDesign d = load_design(read_geometry(cfg.geometry), cfg);
    const auto rows = run_scan(d, cfg);
    ensure_directory(cfg.output_dir);
    std::ofstream out(out_path(cfg, "scan.csv"));
    write_scan_csv(out, rows, provenance(cfg));
    const auto peak = std::max_element(rows.begin(), rows.end(),
                                       [](const ScanRow& a, const ScanRow& b) { return a.hs_norm < b.hs_norm; });
    std::cout << "rows " << rows.size() << " peak hs_norm at " << peak->f_thz << " THz\n";
    if (auto res = plasmonic_resonance(d.aspect, PermittivityTable::builtin(d.metal))) {
        std::cout << "plasmonic resonance " << *res << " THz\n";
    }
    for (const auto& r : rows) {
        if (r.truncation_warning) std::cerr << "warning: truncation inadequate at " << r.f_thz << " THz\n";
    }
    return kOk;
}

int do_multistart(const RunConfig& cfg) {
    const CampaignResult c = run_multistart(cfg, cfg.output_dir);
    std::ofstream out(out_path(cfg, "ranking.csv"));
    out << "# provenance " << provenance(cfg).dump() << '\n';
    out << "rank,run,seed,J2,JHS,hs_norm,iterations,stop,length_lambda,helix_height_lambda,helix_radius_lambda\n";
    out << std::setprecision(17);
    int rank = 1;
    for (const auto& e : c.ranked) {
        out << rank++ << ',' << e.index << ',' << e.seed << ',' << e.j2 << ',' << e.jHS << ',' << e.hs_norm << ','
            << e.iterations << ',' << e.reason << ',' << e.length << ',' << e.helix.height << ',' << e.helix.radius
            << '\n';
    }
    for (const auto& e : c.failed) out << "# failed run " << e.index << " seed " << e.seed << ": " << e.error << '\n';
    const auto& best = c.ranked.front();
    std::cout << "best run " << best.index << " J2 " << best.j2 << " JHS " << best.jHS << " (" << c.ranked.size()
              << " ok, " << c.failed.size() << " failed)\n";
    return kOk;
}

int do_validate(const RunConfig& cfg) {
    const ValidationReport rep = run_validate(cfg);
    print_report(std::cout, rep);
    return rep.passed() ? kOk : kNumericalFailure;
}

int do_export(const RunConfig& cfg) {
    const GeometryFile g = read_geometry(cfg.geometry);
    const LoadedDesign d = load_design(g, cfg);
    const double rho = cfg.export_rho_m > 0.0 ? cfg.export_rho_m / d.unit_m : d.rho;
    MeshOptions opt;
    opt.ring = cfg.export_ring;
    opt.samples_per_segment = cfg.export_samples_per_segment;
    opt.caps = cfg.export_caps;
    const double k = wave_number(d.f_opt_thz) * d.unit_m;
    const TubeMesh mesh = tube_mesh(d.state, g.reference_normal, EllipticalCrossSection::from_aspect(d.aspect), rho,
                                    k, opt);
    for (const auto& w : mesh.warnings) std::cerr << "WARNING: " << w << '\n';
    ensure_directory(cfg.output_dir);
    std::ofstream out(out_path(cfg, "mesh.off"));
    write_off(out, mesh, d.unit_m, provenance(cfg));
    std::cout << "vertices " << mesh.vertices.size() << " faces " << mesh.faces.size() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chiral nanowire design"};
    app.require_subcommand(1);
    std::map<std::string, Invocation> inv;
    const std::pair<const char*, const char*> commands[] = {
        {"optimize", "optimize one design"},
        {"scan", "frequency scan of a fixed geometry"},
        {"multistart", "campaign of optimizations from random helices"},
        {"validate", "run the property suites"},
        {"export", "tube surface mesh of a geometry"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        Invocation& i = inv[name];
        sub->add_option("--config", i.config_file, "key = value file");
        sub->add_option("overrides", i.overrides, "key=value settings applied after the file");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(command, inv[command]);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    try {
        if (command == "optimize") return do_optimize(cfg);
        if (command == "scan") return do_scan(cfg);
        if (command == "multistart") return do_multistart(cfg);
        if (command == "validate") return do_validate(cfg);
        return do_export(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}
