#pragma once

#include "chiral/bfgs.hpp"
#include "chiral/objective.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chiral {

enum class DesignMode { Full, TwistOnly, SpineOnly };

DesignMode parse_mode(const std::string& tag);
std::string mode_name(DesignMode mode);

struct IterationRecord {
    int iteration = 0;
    double phi = 0.0;
    double j2 = 0.0;
    double jHS = 0.0;
    double hs_norm = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
    double psi3 = 0.0;
    double step_length = 0.0;
    int backtracks = 0;
};

struct OptimizerOptions {
    BfgsOptions bfgs;
    DesignMode mode = DesignMode::Full;
    std::uint64_t seed = 1;
    double initial_twist_amplitude = 0.1;
    double domain_jitter = 1e-3;
    double tol_flip = 1e-6;
    int checkpoint_every = 10;
    std::string checkpoint_path;  // empty: no checkpoints
    std::function<void(const IterationRecord&)> on_iteration;
};

struct OptimizeResult {
    DesignState state;
    Evaluation evaluation;
    std::vector<IterationRecord> history;
    StopReason reason = StopReason::MaxIterations;
    int iterations = 0;
    bool initial_twist_added = false;
    Eigen::MatrixXd hessian;
    std::string diagnostic;
};

/// Mask with ones on the design coordinates the mode lets move.
Eigen::VectorXd design_mask(DesignMode mode, std::size_t knots);

/// Seeded i.i.d. uniform twist knots in [-amplitude, amplitude].
Eigen::VectorXd random_twist(std::size_t knots, double amplitude, std::uint64_t seed);

/// Cautious BFGS on Phi starting from `initial`. If the initial design is
/// (numerically) achiral a seeded random twist is added first. Frames are
/// propagated from iterate to iterate.
OptimizeResult optimize(const DesignState& initial, const Objective& objective,
                        const OptimizerOptions& options);

struct Checkpoint {
    Eigen::VectorXd x;
    Eigen::MatrixXd hessian;
    Eigen::VectorXd gradient;
    double value = 0.0;
    int iteration = 0;
    std::uint64_t seed = 0;
    AdaptedFrame frame;
};

void write_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::string& path);

/// Continues an interrupted run from a checkpoint.
OptimizeResult resume(const Checkpoint& cp, const PartitionPtr& partition,
                      const Objective& objective, const OptimizerOptions& options);

}  // namespace chiral
