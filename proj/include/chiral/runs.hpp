#pragma once

#include "chiral/config.hpp"
#include "chiral/geometry_io.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chiral {

/// Sampled helix of an initial design (lengths in wavelengths).
struct HelixSample {
    double height = 0.0;
    double radius = 0.0;
};

/// A configured optimization problem. Lengths are measured in wavelengths
/// at f_opt, so k = 2 pi.
struct Problem {
    RunConfig cfg;
    std::uint64_t seed = 0;
    double unit_m = 0.0;
    double k = 0.0;
    cplx eps_r;
    EllipticalCrossSection cross_section{0.5, 0.5};
    double rho = 0.0;
    double length = 0.0;
    int degree = 0;
    PartitionPtr partition;
    CurveQuadrature quad;
    Vec3 reference_normal = Vec3::UnitX();
    DesignState initial;
    std::optional<HelixSample> helix;
    std::shared_ptr<const WireModel> model;
    std::shared_ptr<const Objective> objective;
};

/// Scatterer parameters at frequency f for a wire of thickness rho
/// (wavelengths at f_opt); the degree is left at 1 for the caller to set.
FarFieldSetup scatterer_setup(Metal metal, double aspect, double f_thz, double f_opt_thz, double rho);

/// Thickness with k rho sqrt(ab) = rule.
double rho_from_rule(const EllipticalCrossSection& cs, double k, double rule);

/// Builds the initial design and objective from the config; `seed`
/// overrides cfg.seed for the random parts of the initial design.
Problem make_problem(const RunConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

/// Seed of run `index` in a campaign.
std::uint64_t derived_seed(std::uint64_t campaign_seed, std::uint64_t index);

struct RunOutcome {
    OptimizeResult result;
    Problem problem;
    bool truncation_warning = false;  // final design needs N >= kR
};

RunOutcome run_optimize(const Problem& problem);

/// Design state in wavelengths loaded from a geometry file.
struct LoadedDesign {
    PartitionPtr partition;
    CurveQuadrature quad;
    DesignState state;
    double length = 0.0;
    double unit_m = 0.0;
    Metal metal = Metal::Silver;
    double f_opt_thz = 0.0;
    double aspect = 0.0;
    double rho = 0.0;  // wavelengths
};

/// Missing material context in the file is taken from `cfg`.
LoadedDesign load_design(const GeometryFile& g, const RunConfig& cfg);

GeometryFile geometry_of(const Problem& problem, const DesignState& state);

void write_iterations_csv(std::ostream& out, const std::vector<IterationRecord>& history);
nlohmann::json report_json(const ChiralityReport& r);

/// geometry.json, iterations.csv and report.json in `dir`.
void write_run_outputs(const std::string& dir, const RunOutcome& outcome);

struct ScanRow {
    double f_thz = 0.0;
    double j2 = 0.0;
    double jHS = 0.0;
    double hs_norm = 0.0;
    int degree = 0;
    bool truncation_warning = false;
};

/// Fixed geometry, permittivity and wave number re-evaluated per frequency.
std::vector<ScanRow> run_scan(const LoadedDesign& design, const RunConfig& cfg);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows, const nlohmann::json& prov);

struct CampaignEntry {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double j2 = 0.0;
    double jHS = 0.0;
    double hs_norm = 0.0;
    int iterations = 0;
    std::string reason;
    HelixSample helix;
    double length = 0.0;
};

struct CampaignResult {
    std::vector<CampaignEntry> ranked;  // successful runs, J_HS descending
    std::vector<CampaignEntry> failed;
};

/// Independent runs from derived seeds; each run's files go to
/// `dir/run_XXX` when dir is nonempty. Throws if every run fails.
CampaignResult run_multistart(const RunConfig& cfg, const std::string& dir);

/// Creates the directory (and parents).
void ensure_directory(const std::string& dir);

}  // namespace chiral
