#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chiral/design_optimizer.hpp"
#include "support.hpp"

#include <filesystem>
#include <functional>

using namespace chiral;
using testing::kPi;

namespace {

class FunctionProblem : public BfgsProblem {
public:
    using Fn = std::function<double(const Eigen::VectorXd&)>;
    using Grad = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    FunctionProblem(Fn f, Grad g, std::function<bool(const Eigen::VectorXd&)> ok = {})
        : f_(std::move(f)), g_(std::move(g)), ok_(std::move(ok)) {}

    std::optional<double> trial(const Eigen::VectorXd& x) override {
        ++trials;
        if (ok_ && !ok_(x)) return std::nullopt;
        return f_(x);
    }
    Eigen::VectorXd accept(const Eigen::VectorXd& x) override { return g_(x); }

    int trials = 0;

private:
    Fn f_;
    Grad g_;
    std::function<bool(const Eigen::VectorXd&)> ok_;
};

struct RunStats {
    BfgsState state;
    int updates = 0;
    int skipped = 0;
    bool monotone = true;
};

RunStats run(FunctionProblem& p, Eigen::VectorXd x0, const BfgsOptions& opt, double xtol) {
    RunStats r{BfgsState::start(x0, *p.trial(x0), p.accept(x0))};
    while (r.state.iteration < opt.max_iter) {
        const double before = r.state.value;
        const StepReport rep = bfgs_step(r.state, p, opt);
        if (!rep.accepted) break;
        r.monotone = r.monotone && r.state.value <= before;
        (rep.hessian_updated ? r.updates : r.skipped)++;
        if (rep.relative_step < xtol) break;
    }
    return r;
}

FarFieldSetup silver_setup(double f_thz, int N) {
    FarFieldSetup s;
    s.k = 2 * kPi;
    s.cross_section = EllipticalCrossSection::from_aspect(-lookup_permittivity(Metal::Silver, f_thz).real());
    s.rho = 0.05 / (s.k * std::sqrt(s.cross_section.a * s.cross_section.b));
    s.eps_r = lookup_permittivity(Metal::Silver, f_thz);
    s.max_degree = N;
    return s;
}

struct SmallDesign {
    PartitionPtr part;
    CurveQuadrature quad;
    std::shared_ptr<Objective> objective;
    DesignState start;
};

SmallDesign small_design(bool twisted) {
    auto part = KnotPartition::uniform(6, 0.5);
    CurveQuadrature quad(part, 11);
    auto model = std::make_shared<WireModel>(silver_setup(500, 3), quad);
    auto obj = std::make_shared<Objective>(model, quad, PenaltyWeights{1.0, 1e-3, 1e-4}, 0.5);
    std::mt19937_64 rng(71);
    const SpineSpline s = twisted ? testing::bent(part, 0.1, rng) : testing::straight(part);
    const TwistSpline t = twisted ? testing::random_twist_spline(part, 0.5, rng) : TwistSpline::zero(part);
    const Vec3 ref = s.eval(0).dp.unitOrthogonal();
    return {part, quad, obj, DesignState::create(s, t, ref, quad)};
}

}  // namespace

TEST_CASE("quadratic is minimized and the update recovers the Hessian") {
    std::mt19937_64 rng(72);
    const int n = 6;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
    FunctionProblem p([&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x) - b.dot(x); },
                      [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(A * x - b); });
    BfgsOptions opt;
    opt.max_iter = 200;
    const RunStats r = run(p, Eigen::VectorXd::Zero(n), opt, 1e-12);
    const Eigen::VectorXd xstar = A.ldlt().solve(b);
    CHECK((r.state.x - xstar).norm() < 1e-8 * xstar.norm());
    CHECK(r.monotone);
    CHECK(r.updates > 0);
    CHECK(min_eigenvalue(r.state.hessian) > 0.0);
}

TEST_CASE("Rosenbrock valley") {
    FunctionProblem p(
        [](const Eigen::VectorXd& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); },
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd g(2);
            g(0) = -400 * x(0) * (x(1) - x(0) * x(0)) - 2 * (1 - x(0));
            g(1) = 200 * (x(1) - x(0) * x(0));
            return g;
        });
    BfgsOptions opt;
    opt.max_iter = 3000;
    // The first quasi-Newton step overshoots by far more than 0.9^60.
    opt.max_backtracks = 400;
    const RunStats r = run(p, Eigen::Vector2d(-1.2, 1.0), opt, 1e-14);
    CHECK((r.state.x - Eigen::Vector2d(1, 1)).norm() < 1e-5);
    CHECK(r.monotone);
}

TEST_CASE("cautious rule skips updates with negative curvature") {
    // f = -x^2 + x^4 near the origin: the first accepted step sees y.s < 0.
    FunctionProblem p([](const Eigen::VectorXd& x) { return -x(0) * x(0) + std::pow(x(0), 4); },
                      [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, -2 * x(0) + 4 * std::pow(x(0), 3)); });
    BfgsState st = BfgsState::start(Eigen::VectorXd::Constant(1, 0.1), *p.trial(Eigen::VectorXd::Constant(1, 0.1)),
                                    p.accept(Eigen::VectorXd::Constant(1, 0.1)));
    const StepReport rep = bfgs_step(st, p, BfgsOptions{});
    CHECK(rep.accepted);
    CHECK_FALSE(rep.hessian_updated);
    CHECK(st.hessian(0, 0) == 1.0);

    BfgsOptions loose;
    loose.max_iter = 100;
    const RunStats r = run(p, Eigen::VectorXd::Constant(1, 0.1), loose, 1e-12);
    CHECK(std::abs(r.state.x(0)) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(r.skipped >= 1);
}

TEST_CASE("inadmissible trials count as backtracks") {
    // The unconstrained step from 0 lands at 2; anything beyond 0.5 is rejected.
    FunctionProblem p([](const Eigen::VectorXd& x) { return std::pow(x(0) - 2, 2) / 2; },
                      [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) - 2); },
                      [](const Eigen::VectorXd& x) { return x(0) <= 0.5; });
    BfgsState st = BfgsState::start(Eigen::VectorXd::Zero(1), 2.0, Eigen::VectorXd::Constant(1, -2.0));
    const StepReport rep = bfgs_step(st, p, BfgsOptions{});
    CHECK(rep.accepted);
    CHECK(rep.rejected_trials > 0);
    CHECK(rep.backtracks == rep.rejected_trials);
    CHECK(st.x(0) <= 0.5);
    CHECK(rep.step_length == doctest::Approx(std::pow(0.9, rep.backtracks)));

    FunctionProblem never([](const Eigen::VectorXd&) { return 0.0; },
                          [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); },
                          [](const Eigen::VectorXd&) { return false; });
    BfgsState s2 = BfgsState::start(Eigen::VectorXd::Zero(1), 0.0, Eigen::VectorXd::Ones(1));
    const StepReport none = bfgs_step(s2, never, BfgsOptions{});
    CHECK_FALSE(none.accepted);
    CHECK(never.trials == BfgsOptions{}.max_backtracks + 1);
    CHECK(s2.iteration == 0);
}

TEST_CASE("mode parsing, masks and random twists") {
    CHECK(parse_mode("full") == DesignMode::Full);
    CHECK(parse_mode("twist-only") == DesignMode::TwistOnly);
    CHECK(parse_mode("spine_only") == DesignMode::SpineOnly);
    CHECK_THROWS(parse_mode("both"));
    CHECK(parse_mode(mode_name(DesignMode::TwistOnly)) == DesignMode::TwistOnly);
    const Eigen::VectorXd m = design_mask(DesignMode::TwistOnly, 4);
    CHECK(m.head(12).norm() == 0.0);
    CHECK(m.tail(4).sum() == 4.0);
    CHECK(design_mask(DesignMode::SpineOnly, 4).sum() == 12.0);
    CHECK(design_mask(DesignMode::Full, 4).sum() == 16.0);
    const Eigen::VectorXd a = random_twist(9, 0.3, 5), b = random_twist(9, 0.3, 5), c = random_twist(9, 0.3, 6);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.cwiseAbs().maxCoeff() <= 0.3);
}

TEST_CASE("design optimizer: achiral start, descent and determinism") {
    const SmallDesign d = small_design(false);
    OptimizerOptions opt;
    opt.bfgs.max_iter = 6;
    opt.seed = 11;
    int callbacks = 0;
    opt.on_iteration = [&](const IterationRecord&) { ++callbacks; };
    const OptimizeResult r = optimize(d.start, *d.objective, opt);
    CHECK(r.initial_twist_added);
    REQUIRE(r.history.size() >= 2);
    CHECK(callbacks == static_cast<int>(r.history.size()));
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].phi <= r.history[i - 1].phi);
    CHECK(r.history.back().jHS > r.history.front().jHS);
    CHECK(r.evaluation.phi == r.history.back().phi);

    const OptimizeResult again = optimize(d.start, *d.objective, opt);
    CHECK(again.state.vector() == r.state.vector());
    CHECK(again.history.back().phi == r.history.back().phi);
}

TEST_CASE("design optimizer: restricted modes keep frozen coordinates") {
    const SmallDesign d = small_design(true);
    const Eigen::VectorXd x0 = d.start.vector();
    OptimizerOptions opt;
    opt.bfgs.max_iter = 3;
    opt.mode = DesignMode::TwistOnly;
    const OptimizeResult tw = optimize(d.start, *d.objective, opt);
    CHECK(tw.state.vector().head(18) == x0.head(18));
    CHECK(tw.state.vector().tail(6) != x0.tail(6));
    CHECK(tw.history.back().phi < tw.history.front().phi);

    opt.mode = DesignMode::SpineOnly;
    const OptimizeResult sp = optimize(d.start, *d.objective, opt);
    CHECK(sp.state.vector().tail(6) == x0.tail(6));
    CHECK(sp.state.vector().head(18) != x0.head(18));
}

TEST_CASE("checkpoint round trip and resumption") {
    const SmallDesign d = small_design(true);
    const auto dir = std::filesystem::temp_directory_path() / "chiral_test_optimizer";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "cp.json").string();

    OptimizerOptions opt;
    opt.bfgs.max_iter = 8;
    opt.bfgs.rel_step_tol = 0.0;
    const OptimizeResult full = optimize(d.start, *d.objective, opt);
    REQUIRE(full.iterations == 8);

    OptimizerOptions part = opt;
    part.bfgs.max_iter = 4;
    part.checkpoint_every = 2;
    part.checkpoint_path = path;
    const OptimizeResult first = optimize(d.start, *d.objective, part);
    REQUIRE(first.iterations == 4);
    const Checkpoint cp = read_checkpoint(path);
    CHECK(cp.iteration == 4);
    CHECK(cp.x == first.state.vector());
    CHECK(cp.frame.normal.size() == d.quad.size());

    const std::string copy = (dir / "copy.json").string();
    write_checkpoint(copy, cp);
    const Checkpoint cp2 = read_checkpoint(copy);
    CHECK(cp2.x == cp.x);
    CHECK(cp2.hessian == cp.hessian);
    CHECK(cp2.frame.normal[3] == cp.frame.normal[3]);

    const OptimizeResult resumed = resume(cp, d.part, *d.objective, opt);
    CHECK(resumed.iterations == 8);
    CHECK((resumed.state.vector() - full.state.vector()).norm() <= 1e-10 * full.state.vector().norm());
    CHECK(resumed.evaluation.phi == doctest::Approx(full.evaluation.phi).epsilon(1e-12));

    CHECK_THROWS(read_checkpoint((dir / "missing.json").string()));
    std::filesystem::remove_all(dir);
}
