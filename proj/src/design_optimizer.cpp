#include "chiral/design_optimizer.hpp"

#include "chiral/geometry_io.hpp"

#include <fstream>
#include <random>

namespace chiral {

DesignMode parse_mode(const std::string& tag) {
    if (tag == "full") return DesignMode::Full;
    if (tag == "twist-only" || tag == "twist_only") return DesignMode::TwistOnly;
    if (tag == "spine-only" || tag == "spine_only") return DesignMode::SpineOnly;
    throw std::invalid_argument("unknown design mode '" + tag + "'");
}

std::string mode_name(DesignMode mode) {
    switch (mode) {
        case DesignMode::Full: return "full";
        case DesignMode::TwistOnly: return "twist-only";
        case DesignMode::SpineOnly: return "spine-only";
    }
    return "full";
}

Eigen::VectorXd design_mask(DesignMode mode, std::size_t knots) {
    const Eigen::Index n = static_cast<Eigen::Index>(knots);
    Eigen::VectorXd m = Eigen::VectorXd::Ones(4 * n);
    if (mode == DesignMode::TwistOnly) m.head(3 * n).setZero();
    if (mode == DesignMode::SpineOnly) m.tail(n).setZero();
    return m;
}

Eigen::VectorXd random_twist(std::size_t knots, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    Eigen::VectorXd v(static_cast<Eigen::Index>(knots));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = dist(rng);
    return v;
}

namespace {

bool is_chiral(const Evaluation& ev) {
    return ev.report.chiHS > kAchiralTolerance * ev.report.hs_norm;
}

class DesignProblem : public BfgsProblem {
public:
    DesignProblem(const Objective& objective, DesignState base, Evaluation eval,
                  Eigen::VectorXd mask, double tol_flip)
        : objective_(objective), base_(std::move(base)), eval_(std::move(eval)),
          mask_(std::move(mask)), tol_flip_(tol_flip) {}

    std::optional<double> trial(const Eigen::VectorXd& x) override {
        try {
            DesignState s = base_.moved_to(x, tol_flip_);
            Evaluation ev = objective_.evaluate(s);
            if (!std::isfinite(ev.phi)) return std::nullopt;
            const double phi = ev.phi;
            pending_ = std::make_pair(std::move(s), std::move(ev));
            pending_x_ = x;
            return phi;
        } catch (const GeometryError&) {
            return std::nullopt;
        }
    }

    Eigen::VectorXd accept(const Eigen::VectorXd& x) override {
        if (!pending_ || pending_x_ != x) {
            // Not the most recent trial; evaluate it again.
            if (!trial(x)) throw GeometryError("accepted design is not admissible");
        }
        base_ = std::move(pending_->first);
        eval_ = std::move(pending_->second);
        pending_.reset();
        return gradient();
    }

    Eigen::VectorXd gradient() const {
        return objective_.gradient(base_, eval_).cwiseProduct(mask_);
    }

    /// Moves the base state by dx (twist jitter); returns false if inadmissible.
    bool perturb(const Eigen::VectorXd& dx) {
        if (!trial(base_.vector() + dx)) return false;
        base_ = std::move(pending_->first);
        eval_ = std::move(pending_->second);
        pending_.reset();
        return true;
    }

    const DesignState& base() const { return base_; }
    const Evaluation& evaluation() const { return eval_; }

private:
    const Objective& objective_;
    DesignState base_;
    Evaluation eval_;
    Eigen::VectorXd mask_;
    double tol_flip_;
    std::optional<std::pair<DesignState, Evaluation>> pending_;
    Eigen::VectorXd pending_x_;
};

IterationRecord record_of(int iteration, const Evaluation& ev, const StepReport* step) {
    IterationRecord r;
    r.iteration = iteration;
    r.phi = ev.phi;
    r.j2 = ev.report.j2;
    r.jHS = ev.report.jHS;
    r.hs_norm = ev.report.hs_norm;
    r.psi1 = ev.penalties.psi1;
    r.psi2 = ev.penalties.psi2;
    r.psi3 = ev.penalties.psi3;
    if (step) {
        r.step_length = step->step_length;
        r.backtracks = step->backtracks;
    }
    return r;
}

Eigen::VectorXd twist_jitter(std::size_t knots, double amplitude, std::uint64_t seed) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(4 * static_cast<Eigen::Index>(knots));
    dx.tail(static_cast<Eigen::Index>(knots)) = random_twist(knots, amplitude, seed);
    return dx;
}

// Gradient at the problem's base; on a domain failure jitter the twist once.
std::optional<Eigen::VectorXd> gradient_with_retry(DesignProblem& problem,
                                                   const OptimizerOptions& options,
                                                   std::uint64_t salt, std::string& diagnostic) {
    try {
        return problem.gradient();
    } catch (const ChiralityDomainError& e) {
        const auto jitter = twist_jitter(problem.base().knots(), options.domain_jitter,
                                         options.seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
        if (problem.perturb(jitter)) {
            try {
                return problem.gradient();
            } catch (const ChiralityDomainError& e2) {
                diagnostic = e2.what();
                return std::nullopt;
            }
        }
        diagnostic = e.what();
        return std::nullopt;
    }
}

void save_checkpoint(const OptimizerOptions& options, const BfgsState& st,
                     const DesignProblem& problem) {
    if (options.checkpoint_path.empty()) return;
    Checkpoint cp;
    cp.x = st.x;
    cp.hessian = st.hessian;
    cp.gradient = st.gradient;
    cp.value = st.value;
    cp.iteration = st.iteration;
    cp.seed = options.seed;
    cp.frame = problem.base().frame;
    write_checkpoint(options.checkpoint_path, cp);
}

OptimizeResult run_loop(DesignProblem& problem, BfgsState st, OptimizeResult result,
                        const OptimizerOptions& options) {
    const BfgsOptions& bo = options.bfgs;
    if (result.history.empty()) {
        result.history.push_back(record_of(st.iteration, problem.evaluation(), nullptr));
        if (options.on_iteration) options.on_iteration(result.history.back());
    }
    if (st.gradient.norm() == 0.0) {
        result.reason = StopReason::Stationary;
    } else {
        result.reason = StopReason::MaxIterations;
        while (st.iteration < bo.max_iter) {
            StepReport rep;
            try {
                rep = bfgs_step(st, problem, bo);
            } catch (const ChiralityDomainError&) {
                // The step was taken but the new point is outside the domain.
                auto g = gradient_with_retry(problem, options, static_cast<std::uint64_t>(st.iteration),
                                             result.diagnostic);
                if (!g) {
                    result.reason = StopReason::DomainFailure;
                    break;
                }
                st.x = problem.base().vector();
                st.value = problem.evaluation().phi;
                st.gradient = *g;
                ++st.iteration;
                rep.accepted = true;
                rep.relative_step = 1.0;
            }
            if (!rep.accepted) {
                result.reason = StopReason::Stagnation;
                break;
            }
            result.history.push_back(record_of(st.iteration, problem.evaluation(), &rep));
            if (options.on_iteration) options.on_iteration(result.history.back());
            if (options.checkpoint_every > 0 && st.iteration % options.checkpoint_every == 0) {
                save_checkpoint(options, st, problem);
            }
            if (bo.definiteness_check_every > 0 && st.iteration % bo.definiteness_check_every == 0 &&
                !(min_eigenvalue(st.hessian) > 0.0)) {
                result.diagnostic = "Hessian approximation lost definiteness; reset to identity";
                st.hessian.setIdentity();
            }
            if (rep.relative_step < bo.rel_step_tol) {
                result.reason = StopReason::RelativeStep;
                break;
            }
            if (st.gradient.norm() == 0.0) {
                result.reason = StopReason::Stationary;
                break;
            }
        }
    }
    result.state = problem.base();
    result.evaluation = problem.evaluation();
    result.iterations = st.iteration;
    result.hessian = st.hessian;
    return result;
}

}  // namespace

OptimizeResult optimize(const DesignState& initial, const Objective& objective,
                        const OptimizerOptions& options) {
    const std::size_t n = initial.knots();
    Eigen::VectorXd mask = design_mask(options.mode, n);
    OptimizeResult result;

    Evaluation ev = objective.evaluate(initial);
    DesignState start = initial;
    if (!is_chiral(ev)) {
        const Eigen::VectorXd x = initial.vector() +
                                  twist_jitter(n, options.initial_twist_amplitude, options.seed);
        start = initial.moved_to(x, options.tol_flip);
        ev = objective.evaluate(start);
        result.initial_twist_added = true;
    }

    DesignProblem problem(objective, start, ev, mask, options.tol_flip);
    auto g = gradient_with_retry(problem, options, 0xfffffffULL, result.diagnostic);
    if (!g) {
        result.reason = StopReason::DomainFailure;
        result.state = problem.base();
        result.evaluation = problem.evaluation();
        result.history.push_back(record_of(0, problem.evaluation(), nullptr));
        return result;
    }
    BfgsState st = BfgsState::start(problem.base().vector(), problem.evaluation().phi, *g);
    return run_loop(problem, std::move(st), std::move(result), options);
}

void write_checkpoint(const std::string& path, const Checkpoint& cp) {
    nlohmann::json j;
    j["x"] = std::vector<double>(cp.x.data(), cp.x.data() + cp.x.size());
    j["gradient"] = std::vector<double>(cp.gradient.data(), cp.gradient.data() + cp.gradient.size());
    std::vector<double> h(static_cast<std::size_t>(cp.hessian.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        h.data(), cp.hessian.rows(), cp.hessian.cols()) = cp.hessian;
    j["hessian"] = h;
    j["dimension"] = cp.x.size();
    j["value"] = cp.value;
    j["iteration"] = cp.iteration;
    j["seed"] = cp.seed;
    j["frame"] = frame_to_json(cp.frame);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
        out << j.dump() << '\n';
    }
    std::rename(tmp.c_str(), path.c_str());
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path);
    nlohmann::json j;
    in >> j;
    Checkpoint cp;
    const auto x = j.at("x").get<std::vector<double>>();
    const auto g = j.at("gradient").get<std::vector<double>>();
    const auto h = j.at("hessian").get<std::vector<double>>();
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    if (static_cast<Eigen::Index>(h.size()) != n * n || static_cast<Eigen::Index>(g.size()) != n) {
        throw std::runtime_error("inconsistent checkpoint " + path);
    }
    cp.x = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    cp.gradient = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
    cp.hessian = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        h.data(), n, n);
    cp.value = j.at("value").get<double>();
    cp.iteration = j.at("iteration").get<int>();
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.frame = frame_from_json(j.at("frame"));
    return cp;
}

OptimizeResult resume(const Checkpoint& cp, const PartitionPtr& partition,
                      const Objective& objective, const OptimizerOptions& options) {
    DesignState state{unpack_spine(cp.x, partition), unpack_twist(cp.x, partition), cp.frame};
    Evaluation ev = objective.evaluate(state);
    const std::size_t n = partition->size();
    DesignProblem problem(objective, std::move(state), std::move(ev), design_mask(options.mode, n),
                          options.tol_flip);
    BfgsState st;
    st.x = cp.x;
    st.gradient = cp.gradient;
    st.hessian = cp.hessian;
    st.value = cp.value;
    st.iteration = cp.iteration;
    return run_loop(problem, std::move(st), OptimizeResult{}, options);
}

}  // namespace chiral
