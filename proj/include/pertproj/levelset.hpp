#pragma once

#include "pertproj/core.hpp"
#include "pertproj/solver.hpp"

#include <optional>
#include <vector>

namespace pertproj {

struct LevelRule {
    enum class Kind { additive, multiplicative };
    Kind kind = Kind::additive;
    /// eps_s for s = 1, 2, ...; the last entry repeats.
    std::vector<double> eps{0.01};

    static LevelRule additive(double eps) { return LevelRule{Kind::additive, {eps}}; }
    static LevelRule multiplicative(double eps) { return LevelRule{Kind::multiplicative, {eps}}; }

    [[nodiscard]] double eps_at(std::size_t s) const;
    void validate() const;
};

/// [f - t, g_1, ..., g_m]; without t (the first level) the objective bound is left out.
FeasibilityProblem build_level_cfp(const OptimizationProblem& problem, std::optional<double> t);

/// t_{s+1} from f(x*_s). A multiplicative rule falls back to additive for f <= 0.
double next_level(double f_at_solution, const LevelRule& rule, std::size_t s);

struct LevelRecord {
    std::optional<double> t;  // unset on the first level
    FeasibilityResult result;
};

enum class LevelTermination { infeasible_cfp, level_budget, cap };

const char* to_string(LevelTermination t);

struct LevelSetOptions {
    std::size_t max_levels = 200;
    /// Start every level from x0 instead of the previous solution.
    bool cold_start = false;
    /// Stop once this many CFP iterations have been spent in total.
    std::optional<std::uint64_t> total_iteration_cap;
};

struct LevelSetResult {
    Vector x_star;
    double f_star = 0.0;
    std::vector<LevelRecord> levels;
    LevelTermination terminated_by = LevelTermination::infeasible_cfp;

    std::size_t solved_levels = 0;
    [[nodiscard]] std::uint64_t total_iterations() const;
};

LevelSetResult run_level_set(const OptimizationProblem& problem, const Vector& x0,
                             const SolverConfig& cfg, const LevelRule& rule,
                             const LevelSetOptions& opts = {});

}  // namespace pertproj
