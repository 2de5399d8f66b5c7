#include "pertproj/levelset.hpp"

#include <algorithm>
#include <cmath>

namespace pertproj {

double LevelRule::eps_at(std::size_t s) const {
    if (eps.empty()) throw ConfigError("level rule has no eps values");
    const std::size_t i = s == 0 ? 0 : std::min(s - 1, eps.size() - 1);
    return eps[i];
}

void LevelRule::validate() const {
    if (eps.empty()) throw ConfigError("level rule has no eps values");
    for (double e : eps) {
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("level eps must be positive");
        if (kind == Kind::multiplicative && e >= 1.0) {
            throw ConfigError("multiplicative level eps must be below 1");
        }
    }
}

const char* to_string(LevelTermination t) {
    switch (t) {
        case LevelTermination::infeasible_cfp: return "infeasible_cfp";
        case LevelTermination::level_budget: return "level_budget";
        case LevelTermination::cap: return "cap";
    }
    return "?";
}

FeasibilityProblem build_level_cfp(const OptimizationProblem& problem, std::optional<double> t) {
    std::vector<ConvexConstraint> cs;
    cs.reserve(problem.constraints.size() + 1);
    if (t) {
        const double bound = *t;
        const ConvexConstraint f = problem.objective;
        cs.emplace_back(
            problem.dimension(),
            [f, bound](const Vector& x) {
                Evaluation e = f(x);
                e.value -= bound;
                return e;
            },
            "f - t");
    }
    for (const auto& g : problem.constraints) cs.push_back(g);
    if (cs.empty()) throw ConfigError("first level has no constraints");
    return FeasibilityProblem(std::move(cs), problem.nonnegative);
}

double next_level(double f, const LevelRule& rule, std::size_t s) {
    if (!std::isfinite(f)) throw NumericalError("objective value is not finite");
    const double eps = rule.eps_at(s);
    if (rule.kind == LevelRule::Kind::multiplicative && f > 0.0) return f * (1.0 - eps);
    return f - eps;
}

std::uint64_t LevelSetResult::total_iterations() const {
    std::uint64_t n = 0;
    for (const auto& l : levels) n += l.result.iterations;
    return n;
}

LevelSetResult run_level_set(const OptimizationProblem& problem, const Vector& x0,
                             const SolverConfig& cfg, const LevelRule& rule,
                             const LevelSetOptions& opts) {
    rule.validate();
    if (opts.max_levels < 1) throw ConfigError("max_levels must be at least 1");
    require_dimension(x0, problem.dimension(), "run_level_set start point");

    LevelSetResult out;
    std::uint64_t used = 0;

    // Runs one level, truncating its budget to what the total cap leaves.
    auto run_level = [&](std::optional<double> t, const Vector& start, bool& truncated) {
        SolverConfig level_cfg = cfg;
        truncated = false;
        if (opts.total_iteration_cap) {
            const std::uint64_t left = *opts.total_iteration_cap - used;
            if (left < level_cfg.max_iterations) {
                level_cfg.max_iterations = std::max<std::uint64_t>(left, 1);
                truncated = true;
            }
        }
        FeasibilityResult r = solve_cfp(build_level_cfp(problem, t), start, level_cfg);
        used += r.iterations;
        out.levels.push_back(LevelRecord{t, r});
        return r;
    };

    bool truncated = false;
    FeasibilityResult first = run_level(std::nullopt, x0, truncated);
    if (first.status != SolveStatus::solved) {
        throw NoFeasibleStartError(std::string("constraints alone not solved: ") +
                                   to_string(first.status));
    }
    out.x_star = first.x_final;
    out.f_star = eval_constraint(problem.objective, out.x_star).value;
    out.solved_levels = 1;

    for (std::size_t s = 1;; ++s) {
        if (out.levels.size() >= opts.max_levels) {
            out.terminated_by = LevelTermination::level_budget;
            break;
        }
        if (opts.total_iteration_cap && used >= *opts.total_iteration_cap) {
            out.terminated_by = LevelTermination::cap;
            break;
        }
        const double t = next_level(out.f_star, rule, s);
        const Vector& start = opts.cold_start ? x0 : out.x_star;
        FeasibilityResult r = run_level(t, start, truncated);
        if (r.status != SolveStatus::solved) {
            out.terminated_by = truncated && r.status == SolveStatus::iteration_cap_reached
                                    ? LevelTermination::cap
                                    : LevelTermination::infeasible_cfp;
            break;
        }
        const double f = eval_constraint(problem.objective, r.x_final).value;
        // Within the feasibility tolerance a solved level may fail to improve f;
        // the scheme has then run out of resolution.
        if (!(f < out.f_star)) {
            out.terminated_by = LevelTermination::infeasible_cfp;
            break;
        }
        out.x_star = r.x_final;
        out.f_star = f;
        ++out.solved_levels;
    }
    return out;
}

}  // namespace pertproj
