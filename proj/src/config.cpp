#include "chiral/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#ifndef CHIRAL_VERSION
#define CHIRAL_VERSION "unknown"
#endif

namespace chiral {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos == v.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos == v.size()) return i;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
    const long long i = to_integer(key, v);
    if (i < -1000000000LL || i > 1000000000LL) throw ConfigError("key '" + key + "': out of range");
    return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::string fmt(double d) {
    std::ostringstream os;
    os << std::setprecision(17) << d;
    return os.str();
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field num(T RunConfig::*m) {
    return {[m](RunConfig& c, const std::string& key, const std::string& v) {
                if constexpr (std::is_same_v<T, double>) {
                    c.*m = to_double(key, v);
                } else {
                    c.*m = to_int(key, v);
                }
            },
            [m](const RunConfig& c) {
                if constexpr (std::is_same_v<T, double>) {
                    return fmt(c.*m);
                } else {
                    return std::to_string(c.*m);
                }
            }};
}

Field str(std::string RunConfig::*m) {
    return {[m](RunConfig& c, const std::string&, const std::string& v) { c.*m = v; },
            [m](const RunConfig& c) { return c.*m; }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = {
        {"metal", {[](RunConfig& c, const std::string&, const std::string& v) {
                       try {
                           c.metal = parse_metal(v);
                       } catch (const std::exception&) {
                           throw ConfigError("unknown metal '" + v + "' (expected silver or gold)");
                       }
                   },
                   [](const RunConfig& c) { return metal_name(c.metal); }}},
        {"f_opt_thz", num(&RunConfig::f_opt_thz)},
        {"aspect", {[](RunConfig& c, const std::string&, const std::string& v) {
                        if (v == "resonance") {
                            c.aspect.reset();
                        } else {
                            c.aspect = to_double("aspect", v);
                        }
                    },
                    [](const RunConfig& c) { return c.aspect ? fmt(*c.aspect) : std::string("resonance"); }}},
        {"length_lambda", num(&RunConfig::length_lambda)},
        {"knots", num(&RunConfig::knots)},
        {"points_per_segment", num(&RunConfig::points_per_segment)},
        {"max_degree", num(&RunConfig::max_degree)},
        {"degree_floor", num(&RunConfig::degree_floor)},
        {"rho_rule", num(&RunConfig::rho_rule)},
        {"alpha1", num(&RunConfig::alpha1)},
        {"alpha2", num(&RunConfig::alpha2)},
        {"alpha3", num(&RunConfig::alpha3)},
        {"seed", {[](RunConfig& c, const std::string&, const std::string& v) {
                      try {
                          std::size_t pos = 0;
                          c.seed = std::stoull(v, &pos);
                          if (pos == v.size() && v.front() != '-') return;
                      } catch (const std::exception&) {
                      }
                      throw ConfigError("key 'seed': expected a nonnegative integer, got '" + v + "'");
                  },
                  [](const RunConfig& c) { return std::to_string(c.seed); }}},
        {"mode", {[](RunConfig& c, const std::string&, const std::string& v) {
                      try {
                          c.mode = parse_mode(v);
                      } catch (const std::exception&) {
                          throw ConfigError("unknown mode '" + v + "'");
                      }
                  },
                  [](const RunConfig& c) { return mode_name(c.mode); }}},
        {"init", {[](RunConfig& c, const std::string&, const std::string& v) { c.init = parse_init(v); },
                  [](const RunConfig& c) { return init_name(c.init); }}},
        {"initial_twist_amplitude", num(&RunConfig::initial_twist_amplitude)},
        {"perturbation_lambda", num(&RunConfig::perturbation_lambda)},
        {"max_iter", num(&RunConfig::max_iter)},
        {"rel_step_tol", num(&RunConfig::rel_step_tol)},
        {"checkpoint_every", num(&RunConfig::checkpoint_every)},
        {"scan_min_thz", num(&RunConfig::scan_min_thz)},
        {"scan_max_thz", num(&RunConfig::scan_max_thz)},
        {"scan_step_thz", num(&RunConfig::scan_step_thz)},
        {"multistart_count", num(&RunConfig::multistart_count)},
        {"helix_turns", num(&RunConfig::helix_turns)},
        {"helix_height_max_lambda", num(&RunConfig::helix_height_max_lambda)},
        {"helix_radius_max_lambda", num(&RunConfig::helix_radius_max_lambda)},
        {"workers", num(&RunConfig::workers)},
        {"output_dir", str(&RunConfig::output_dir)},
        {"geometry", str(&RunConfig::geometry)},
        {"export_ring", num(&RunConfig::export_ring)},
        {"export_samples_per_segment", num(&RunConfig::export_samples_per_segment)},
        {"export_caps", {[](RunConfig& c, const std::string&, const std::string& v) { c.export_caps = to_bool("export_caps", v); },
                         [](const RunConfig& c) { return std::string(c.export_caps ? "true" : "false"); }}},
        {"export_rho_m", num(&RunConfig::export_rho_m)},
        {"validate_variant", str(&RunConfig::validate_variant)},
        {"validate_samples", num(&RunConfig::validate_samples)},
    };
    return f;
}

// Twisted straight wires tie N to the length: L = lambda/4, lambda/2, lambda, 2 lambda -> N = 2, 4, 6, 8.
std::optional<int> twisted_straight_degree(double length_lambda) {
    const std::pair<double, int> table[] = {{0.25, 2}, {0.5, 4}, {1.0, 6}, {2.0, 8}};
    for (const auto& [l, n] : table) {
        if (std::abs(length_lambda - l) < 1e-12) return n;
    }
    return std::nullopt;
}

void apply_preset(RunConfig& c, const std::string& name) {
    if (name.empty()) return;
    if (name == "twisted-straight") {
        c.mode = DesignMode::TwistOnly;
        c.alpha1 = c.alpha2 = 0.0;
        c.alpha3 = 5e-5;
        c.knots = 10;
        c.points_per_segment = 11;
        c.init = InitKind::Straight;
        c.length_lambda = 0.5;
        c.initial_twist_amplitude = 0.1;
    } else if (name == "bent-spine") {
        c.mode = DesignMode::SpineOnly;
        c.alpha1 = 5.0;
        c.alpha2 = 8e-3;
        c.alpha3 = 0.0;
        c.knots = 20;
        c.points_per_segment = 11;
        c.max_degree = 5;
        c.init = InitKind::Perturbed;
        c.length_lambda = 1.5;
        c.initial_twist_amplitude = 0.0;
    } else if (name == "helix-multistart") {
        c.mode = DesignMode::Full;
        c.alpha1 = 5.0;
        c.alpha2 = 8e-3;
        c.alpha3 = 1e-6;
        c.knots = 40;
        c.points_per_segment = 21;
        c.max_degree = 5;
        c.init = InitKind::Helix;
        c.length_lambda = 0.0;
        c.initial_twist_amplitude = 0.1;
        c.aspect = 7.14;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    c.preset = name;
}

}  // namespace

InitKind parse_init(const std::string& tag) {
    if (tag == "straight") return InitKind::Straight;
    if (tag == "perturbed") return InitKind::Perturbed;
    if (tag == "helix") return InitKind::Helix;
    throw ConfigError("unknown init '" + tag + "' (expected straight, perturbed or helix)");
}

std::string init_name(InitKind kind) {
    switch (kind) {
        case InitKind::Straight: return "straight";
        case InitKind::Perturbed: return "perturbed";
        case InitKind::Helix: return "helix";
    }
    return "straight";
}

std::vector<std::string> preset_names() { return {"twisted-straight", "bent-spine", "helix-multistart"}; }

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(number) + ": empty key or value");
        }
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

RunConfig make_config(const KeyValues& kv, const std::string& command) {
    RunConfig c;
    c.command = command;
    if (auto it = kv.find("preset"); it != kv.end()) apply_preset(c, it->second);
    for (const auto& [key, value] : kv) {
        if (key == "preset" || key == "command") continue;
        const auto it = fields().find(key);
        if (it == fields().end()) throw ConfigError("unknown key '" + key + "'");
        it->second.set(c, key, value);
    }
    if (c.preset == "twisted-straight" && !kv.count("max_degree")) {
        if (auto n = twisted_straight_degree(c.length_lambda)) c.max_degree = *n;
    }
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    const std::vector<std::string> commands = {"optimize", "scan", "multistart", "validate", "export"};
    require(std::find(commands.begin(), commands.end(), c.command) != commands.end(),
            "unknown command '" + c.command + "'");
    require(c.f_opt_thz > 0.0, "f_opt_thz must be positive");
    const auto& table = PermittivityTable::builtin(c.metal);
    require(c.f_opt_thz >= table.f_min() && c.f_opt_thz <= table.f_max(),
            "f_opt_thz outside the permittivity table [" + fmt(table.f_min()) + ", " + fmt(table.f_max()) + "]");
    if (c.aspect) require(*c.aspect >= 1.0, "aspect (b/a) must be at least 1");
    require(effective_aspect(c) >= 1.0, "resonance aspect -Re eps(f_opt) is below 1; set aspect explicitly");
    require(c.length_lambda > 0.0 || (c.length_lambda == 0.0 && c.init == InitKind::Helix),
            "length_lambda must be positive (0 only with init = helix)");
    require(c.knots >= 4, "knots must be at least 4");
    require(c.points_per_segment >= 3 && c.points_per_segment % 2 == 1,
            "points_per_segment must be odd and at least 3");
    require(c.max_degree >= 0, "max_degree must be nonnegative (0 = automatic)");
    require(c.degree_floor >= 1, "degree_floor must be at least 1");
    require(c.rho_rule > 0.0, "rho_rule must be positive");
    require(c.alpha1 >= 0.0 && c.alpha2 >= 0.0 && c.alpha3 >= 0.0, "penalty weights must be nonnegative");
    require(c.initial_twist_amplitude >= 0.0, "initial_twist_amplitude must be nonnegative");
    require(c.perturbation_lambda >= 0.0, "perturbation_lambda must be nonnegative");
    require(c.max_iter >= 0, "max_iter must be nonnegative");
    require(c.rel_step_tol >= 0.0, "rel_step_tol must be nonnegative");
    require(c.checkpoint_every >= 0, "checkpoint_every must be nonnegative");
    require(c.scan_min_thz >= 300.0 && c.scan_max_thz <= 800.0 && c.scan_min_thz <= c.scan_max_thz,
            "scan range must lie within [300, 800] THz");
    require(c.scan_step_thz > 0.0, "scan_step_thz must be positive");
    const double steps = (c.scan_max_thz - c.scan_min_thz) / c.scan_step_thz;
    require(std::abs(steps - std::round(steps)) < 1e-9, "scan_step_thz must divide the scan range");
    require(c.multistart_count >= 1, "multistart_count must be at least 1");
    require(c.helix_turns > 0.0, "helix_turns must be positive");
    require(c.helix_height_max_lambda > 0.0 && c.helix_radius_max_lambda > 0.0,
            "helix sampling bounds must be positive");
    require(c.workers >= 1, "workers must be at least 1");
    require(!c.output_dir.empty(), "output_dir must not be empty");
    require(c.export_ring >= 3, "export_ring must be at least 3");
    require(c.export_samples_per_segment >= 1, "export_samples_per_segment must be at least 1");
    require(c.export_rho_m >= 0.0, "export_rho_m must be nonnegative");
    require(c.validate_variant == "standard" || c.validate_variant == "flipped-denominator",
            "validate_variant must be standard or flipped-denominator");
    require(c.validate_samples >= 1, "validate_samples must be at least 1");
    if (c.command == "scan" || c.command == "export") {
        require(!c.geometry.empty(), c.command + " needs a geometry file (key 'geometry')");
    }
}

KeyValues to_key_values(const RunConfig& c) {
    KeyValues kv;
    for (const auto& [key, f] : fields()) kv[key] = f.get(c);
    if (!c.preset.empty()) kv["preset"] = c.preset;
    return kv;
}

std::string format_key_values(const KeyValues& kv) {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    return os.str();
}

double effective_aspect(const RunConfig& cfg) {
    if (cfg.aspect) return *cfg.aspect;
    return -lookup_permittivity(cfg.metal, cfg.f_opt_thz).real();
}

int resolve_degree(const RunConfig& cfg, double k, double radius) {
    if (cfg.max_degree > 0) return cfg.max_degree;
    return std::max(cfg.degree_floor, default_degree(k, radius));
}

std::string code_version() { return CHIRAL_VERSION; }

nlohmann::json provenance(const RunConfig& cfg) {
    nlohmann::json config;
    for (const auto& [k, v] : to_key_values(cfg)) config[k] = v;
    return {{"command", cfg.command},
            {"config", config},
            {"seed", cfg.seed},
            {"code_version", code_version()}};
}

}  // namespace chiral
