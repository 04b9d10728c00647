#pragma once

#include "chiral/config.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace chiral {

enum class SuiteStatus { Pass, Warn, Fail };

std::string status_name(SuiteStatus s);

struct SuiteResult {
    std::string name;
    SuiteStatus status = SuiteStatus::Pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<SuiteResult> suites;
    bool passed() const;  // no suite failed
    const SuiteResult& find(const std::string& name) const;
};

/// Image of the wire under x -> A x for orthogonal A. The frame stays
/// right-handed, so reflections flip the binormal and the twist rate.
std::pair<SpineSpline, AdaptedFrame> transform_wire(const SpineSpline& spine, const AdaptedFrame& frame,
                                                    const Eigen::Matrix3d& A);

/// Permittivity bounds on the polarization tensor over both built-in
/// tables and an aspect sweep, with `samples` random directions each.
SuiteResult bounds_suite(TensorVariant variant, int samples, std::uint64_t seed);

/// Property batteries on the design named by the config (the geometry
/// file if set, else the initial design of `optimize`).
ValidationReport run_validate(const RunConfig& cfg);

void print_report(std::ostream& out, const ValidationReport& report);

}  // namespace chiral
