#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace chiral {

struct BfgsOptions {
    double cautious_eps = 1e-5;
    double armijo_sigma = 1e-4;
    double backtrack_delta = 0.9;
    double rel_step_tol = 1e-4;
    int max_iter = 500;
    int max_backtracks = 60;
    int definiteness_check_every = 10;
};

enum class StopReason { RelativeStep, MaxIterations, Stagnation, Stationary, DomainFailure };

std::string to_string(StopReason reason);

/// Minimization problem seen by the line search. `trial` evaluates the
/// objective at x (nullopt if x is inadmissible, e.g. a frame flip);
/// `accept` commits the most recent admissible trial and returns the
/// gradient there.
class BfgsProblem {
public:
    virtual ~BfgsProblem() = default;
    virtual std::optional<double> trial(const Eigen::VectorXd& x) = 0;
    virtual Eigen::VectorXd accept(const Eigen::VectorXd& x) = 0;
};

struct BfgsState {
    Eigen::VectorXd x;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // approximation H, H d = -g
    double value = 0.0;
    int iteration = 0;

    static BfgsState start(Eigen::VectorXd x0, double value, Eigen::VectorXd gradient);
};

struct StepReport {
    bool accepted = false;
    double step_length = 0.0;
    int backtracks = 0;
    bool hessian_updated = false;
    double relative_step = 0.0;
    int rejected_trials = 0;  // inadmissible geometry counted among backtracks
};

/// One cautious BFGS iteration with Armijo backtracking. On acceptance the
/// state is advanced and H updated when y.s / |s|^2 > eps |g_old|.
StepReport bfgs_step(BfgsState& state, BfgsProblem& problem, const BfgsOptions& options);

/// Smallest eigenvalue of the symmetric part of H.
double min_eigenvalue(const Eigen::MatrixXd& H);

}  // namespace chiral
