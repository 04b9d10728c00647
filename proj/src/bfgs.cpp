#include "chiral/bfgs.hpp"

#include <cmath>

namespace chiral {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::RelativeStep: return "relative_step";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::Stagnation: return "stagnation";
        case StopReason::Stationary: return "stationary";
        case StopReason::DomainFailure: return "domain_failure";
    }
    return "unknown";
}

BfgsState BfgsState::start(Eigen::VectorXd x0, double value, Eigen::VectorXd gradient) {
    BfgsState s;
    const Eigen::Index n = x0.size();
    s.x = std::move(x0);
    s.value = value;
    s.gradient = std::move(gradient);
    s.hessian = Eigen::MatrixXd::Identity(n, n);
    return s;
}

double min_eigenvalue(const Eigen::MatrixXd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

StepReport bfgs_step(BfgsState& state, BfgsProblem& problem, const BfgsOptions& options) {
    StepReport report;
    const Eigen::Index n = state.x.size();

    Eigen::LLT<Eigen::MatrixXd> llt(state.hessian);
    if (llt.info() != Eigen::Success) {
        state.hessian = Eigen::MatrixXd::Identity(n, n);
        llt.compute(state.hessian);
    }
    const Eigen::VectorXd d = llt.solve(-state.gradient);
    const double slope = state.gradient.dot(d);

    double lambda = 1.0;
    std::optional<double> accepted_value;
    for (int j = 0; j <= options.max_backtracks; ++j) {
        const Eigen::VectorXd xt = state.x + lambda * d;
        const std::optional<double> ft = problem.trial(xt);
        if (!ft) {
            ++report.rejected_trials;
        } else if (*ft <= state.value + options.armijo_sigma * lambda * slope) {
            accepted_value = ft;
            report.backtracks = j;
            break;
        }
        lambda *= options.backtrack_delta;
    }
    if (!accepted_value) {
        report.backtracks = options.max_backtracks;
        return report;
    }

    const Eigen::VectorXd x_new = state.x + lambda * d;
    const Eigen::VectorXd g_new = problem.accept(x_new);
    const Eigen::VectorXd s = x_new - state.x;
    const Eigen::VectorXd y = g_new - state.gradient;

    const double ys = y.dot(s);
    const double ss = s.squaredNorm();
    if (ss > 0.0 && ys / ss > options.cautious_eps * state.gradient.norm()) {
        const Eigen::VectorXd Hs = state.hessian * s;
        state.hessian += -(Hs * Hs.transpose()) / s.dot(Hs) + (y * y.transpose()) / ys;
        state.hessian = 0.5 * (state.hessian + state.hessian.transpose());
        report.hessian_updated = true;
    }

    const double xn = state.x.norm();
    report.relative_step = xn > 0.0 ? s.norm() / xn : s.norm();
    report.accepted = true;
    report.step_length = lambda;
    state.x = x_new;
    state.gradient = g_new;
    state.value = *accepted_value;
    ++state.iteration;
    return report;
}

}  // namespace chiral
