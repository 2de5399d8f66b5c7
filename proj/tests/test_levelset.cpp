#include "pertproj/imrt.hpp"
#include "pertproj/levelset.hpp"

#include "theory.hpp"

#include <doctest.h>

#include <random>

using namespace pertproj;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

OptimizationProblem distance_problem(const Vector& c, const Vector& a1, double b1, const Vector& a2, double b2) {
    ConvexConstraint f(c.size(), [c](const Vector& x) { return Evaluation{(x - c).squaredNorm(), 2 * (x - c)}; }, "f");
    return OptimizationProblem(f, {ConvexConstraint::affine(a1, b1, "g1"), ConvexConstraint::affine(a2, b2, "g2")});
}

SolverConfig level_config() {
    SolverConfig cfg;
    cfg.lambda = constant_relaxation(1.9);
    cfg.max_iterations = 50000;
    cfg.tolerance = 1e-9;
    cfg.record_iterates = false;
    return cfg;
}

}  // namespace

TEST_CASE("level CFP layout") {
    const OptimizationProblem p = distance_problem(vec({0, 0}), vec({1, 0}), 1, vec({0, 1}), 1);
    CHECK(build_level_cfp(p, std::nullopt).size() == 2);
    const FeasibilityProblem fp = build_level_cfp(p, 100.0);
    REQUIRE(fp.size() == 3);
    CHECK(fp[0].label() == "f - t");
    CHECK(eval_constraint(fp[0], vec({3, 4})).value == doctest::Approx(25.0 - 100.0));
    CHECK(fp[1].label() == "g1");
    CHECK(fp[2].label() == "g2");
}

TEST_CASE("level updates") {
    CHECK(next_level(10.0, LevelRule::additive(0.5), 1) == doctest::Approx(9.5));
    CHECK(next_level(10.0, LevelRule::multiplicative(0.01), 1) == doctest::Approx(9.9));
    CHECK(next_level(0.0, LevelRule::multiplicative(0.01), 1) == doctest::Approx(-0.01));
    const LevelRule seq{LevelRule::Kind::additive, {1.0, 0.5}};
    CHECK(seq.eps_at(1) == 1.0);
    CHECK(seq.eps_at(2) == 0.5);
    CHECK(seq.eps_at(9) == 0.5);
    CHECK_THROWS_AS(LevelRule::additive(0.0).validate(), ConfigError);
    CHECK_THROWS_AS((LevelRule{LevelRule::Kind::additive, {}}).validate(), ConfigError);
}

TEST_CASE("one-dimensional minimum") {
    // minimize x s.t. x >= 1
    ConvexConstraint f(1, [](const Vector& x) { return Evaluation{x[0], Vector::Ones(1)}; }, "f");
    const OptimizationProblem p(f, {ConvexConstraint::affine(vec({-1}), -1.0)});
    const LevelSetResult r = run_level_set(p, vec({5}), level_config(), LevelRule::additive(0.1));
    CHECK(r.f_star <= 1.0 + 0.1);
    CHECK(r.f_star >= 1.0 - 1e-8);
    CHECK(r.f_star == eval_constraint(p.objective, r.x_star).value);
}

TEST_CASE("no feasible start") {
    ConvexConstraint f(1, [](const Vector& x) { return Evaluation{x[0], Vector::Ones(1)}; }, "f");
    const OptimizationProblem p(f, {ConvexConstraint::affine(vec({1}), -1.0), ConvexConstraint::affine(vec({-1}), -1.0)});
    SolverConfig cfg = level_config();
    cfg.max_iterations = 200;
    CHECK_THROWS_AS(run_level_set(p, vec({0}), cfg, LevelRule::additive(0.1)), NoFeasibleStartError);
}

TEST_CASE("epsilon optimality against the KKT oracle") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 15; ++trial) {
        const Vector c = 3 * Vector::NullaryExpr(2, [&] { return g(rng); });
        const Vector a1 = theory::random_unit(rng, 2);
        const Vector a2 = theory::random_unit(rng, 2);
        // unit normals keep the level CFPs well conditioned; c violates both
        // so the optimum sits on the boundary
        const double b1 = a1.dot(c) - 1.0 - std::abs(g(rng));
        const double b2 = a2.dot(c) - 1.0 - std::abs(g(rng));
        const OptimizationProblem p = distance_problem(c, a1, b1, a2, b2);
        const double f_opt = (theory::kkt_projection(c, a1, b1, a2, b2) - c).squaredNorm();
        const double eps = 0.05;
        LevelSetOptions opts;
        opts.max_levels = 100000;
        const LevelSetResult r = run_level_set(p, Vector::Zero(2), level_config(), LevelRule::additive(eps), opts);
        CAPTURE(trial);
        CHECK(r.terminated_by == LevelTermination::infeasible_cfp);
        CHECK(r.f_star <= f_opt + eps);
        CHECK(r.f_star >= f_opt - 1e-6 * (1 + f_opt));
    }
}

TEST_CASE("level records") {
    const OptimizationProblem p = distance_problem(vec({3, 3}), vec({1, 0}), 1, vec({0, 1}), 1);
    LevelSetOptions opts;
    opts.max_levels = 5;
    const LevelSetResult r = run_level_set(p, Vector::Zero(2), level_config(), LevelRule::additive(0.1), opts);
    CHECK(r.levels.size() <= 5);
    CHECK(r.terminated_by == LevelTermination::level_budget);
    CHECK_FALSE(r.levels.front().t.has_value());
    double prev_f = std::numeric_limits<double>::infinity();
    std::optional<double> prev_t;
    for (std::size_t s = 0; s < r.solved_levels; ++s) {
        const auto& lvl = r.levels[s];
        const double f = eval_constraint(p.objective, lvl.result.x_final).value;
        CHECK(f < prev_f);
        if (lvl.t) {
            CHECK(*lvl.t < prev_f);
            if (prev_t) CHECK(*lvl.t < *prev_t);
            prev_t = lvl.t;
        }
        prev_f = f;
    }
}

TEST_CASE("warm start begins at the previous solution") {
    const OptimizationProblem p = distance_problem(vec({3, 3}), vec({1, 0}), 1, vec({0, 1}), 1);
    SolverConfig cfg = level_config();
    cfg.record_iterates = true;
    LevelSetOptions opts;
    opts.max_levels = 4;
    const LevelSetResult r = run_level_set(p, Vector::Zero(2), cfg, LevelRule::additive(0.1), opts);
    for (std::size_t s = 1; s < r.levels.size(); ++s) {
        CHECK(r.levels[s].result.trace.front().x == r.levels[s - 1].result.x_final);
    }
    opts.cold_start = true;
    const LevelSetResult cold = run_level_set(p, Vector::Zero(2), cfg, LevelRule::additive(0.1), opts);
    for (const auto& lvl : cold.levels) CHECK(lvl.result.trace.front().x == Vector::Zero(2));
}

TEST_CASE("total iteration cap") {
    const OptimizationProblem p = distance_problem(vec({3, 3}), vec({1, 0}), 1, vec({0, 1}), 1);
    LevelSetOptions opts;
    opts.total_iteration_cap = 30;
    const LevelSetResult r = run_level_set(p, Vector::Zero(2), level_config(), LevelRule::additive(0.01), opts);
    CHECK(r.total_iterations() <= 30);
    CHECK(r.terminated_by == LevelTermination::cap);
}
