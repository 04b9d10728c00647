#pragma once

#include "chiral/design_optimizer.hpp"
#include "chiral/material.hpp"

#include <cstdint>
#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chiral {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class InitKind { Straight, Perturbed, Helix };

InitKind parse_init(const std::string& tag);
std::string init_name(InitKind kind);

/// Everything a CLI run needs. Lengths ending in `_lambda` are multiples of
/// the wavelength at f_opt.
struct RunConfig {
    std::string command = "optimize";
    std::string preset;

    Metal metal = Metal::Silver;
    double f_opt_thz = 500.0;
    std::optional<double> aspect;  // unset: plasmonic resonance at f_opt
    double length_lambda = 0.5;    // 0 with init = helix: arc length of the sampled helix
    int knots = 10;
    int points_per_segment = 11;
    int max_degree = 0;  // 0: ceil(kR) + 1, at least degree_floor
    int degree_floor = 2;
    double rho_rule = 0.05;  // k_opt rho sqrt(ab)

    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 5e-5;

    std::uint64_t seed = 1;
    DesignMode mode = DesignMode::TwistOnly;
    InitKind init = InitKind::Straight;
    double initial_twist_amplitude = 0.1;
    double perturbation_lambda = 0.01;

    int max_iter = 500;
    double rel_step_tol = 1e-4;
    int checkpoint_every = 0;

    double scan_min_thz = 300.0;
    double scan_max_thz = 800.0;
    double scan_step_thz = 5.0;

    int multistart_count = 20;
    double helix_turns = 4.0;
    double helix_height_max_lambda = 2.0 / 3.0;
    double helix_radius_max_lambda = 0.5;
    int workers = 1;

    std::string output_dir = "out";
    std::string geometry;  // input geometry for scan and export

    int export_ring = 32;
    int export_samples_per_segment = 10;
    bool export_caps = false;
    double export_rho_m = 0.0;  // 0: take the thickness from the geometry file

    std::string validate_variant = "standard";
    int validate_samples = 200;
};

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; `#` starts a comment. Throws ConfigError on
/// malformed lines or duplicate keys.
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::string& path);

/// Applies a preset (if `preset` is among the keys) and then every key.
/// Unknown keys and malformed values throw ConfigError.
RunConfig make_config(const KeyValues& kv, const std::string& command = "optimize");

/// Throws ConfigError when an invariant is violated.
void validate(const RunConfig& cfg);

/// Flat key-value form that make_config reads back to the same config.
KeyValues to_key_values(const RunConfig& cfg);
std::string format_key_values(const KeyValues& kv);

/// Known preset names.
std::vector<std::string> preset_names();

/// Aspect ratio in effect: explicit value or -Re eps_r(f_opt).
double effective_aspect(const RunConfig& cfg);

/// Truncation degree for a circumscribing radius (in wavelengths at f).
int resolve_degree(const RunConfig& cfg, double k, double radius);

/// Provenance block: full config, seed, version.
nlohmann::json provenance(const RunConfig& cfg);

std::string code_version();

}  // namespace chiral
