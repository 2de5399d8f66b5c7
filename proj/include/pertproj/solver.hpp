#pragma once

#include "pertproj/core.hpp"
#include "pertproj/perturbations.hpp"
#include "pertproj/projections.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pertproj {

enum class Method { cyclic, simultaneous };
enum class StopRule { residual_sup, violation_sup };

const char* to_string(Method method);
const char* to_string(StopRule rule);

struct SolverConfig {
    Method method = Method::simultaneous;
    /// Cyclic only. Unset means cyclic order over all constraints.
    std::optional<ControlSequence> control;
    Weights weights = Weights::violated();
    Relaxation lambda = constant_relaxation(1.9);
    PerturbationConfig perturbation;
    std::uint64_t max_iterations = 1000;
    StopRule stop_rule = StopRule::violation_sup;
    double tolerance = 1e-6;
    /// Keep x^k and p(x^k) in the trace. Scalars are always kept.
    bool record_iterates = true;
    /// Cyclic only: move past satisfied constraints instead of taking zero steps.
    bool cp_skip_satisfied = true;

    void validate() const;
};

struct IterationRecord {
    std::uint64_t k = 0;
    double stop_measure = 0.0;
    double inner_product = 0.0;  // <p_prev/|p_prev|, p/|p|>, NaN when undefined
    bool perturbed = false;
    PerturbationKind kind = PerturbationKind::none;
    Vector x;  // empty unless record_iterates
    Vector p;  // step computed at x; empty on the last record or unless record_iterates
};

enum class SolveStatus { solved, iteration_cap_reached, infeasible_constraint, stalled };

const char* to_string(SolveStatus status);

struct FeasibilityResult {
    SolveStatus status = SolveStatus::iteration_cap_reached;
    Vector x_final;
    std::uint64_t iterations = 0;
    std::uint64_t perturbations = 0;
    std::vector<IterationRecord> trace;  // iterations + 1 records, x^0 included
};

/// residual_sup: max_i |phi_i(x)|, affine constraints only. violation_sup: max_i max(0, phi_i(x)).
double stop_measure(const FeasibilityProblem& fp, const Vector& x, StopRule rule);
/// The same measure from evaluations of every constraint at one point.
double stop_measure(const std::vector<Evaluation>& evals, StopRule rule);

FeasibilityResult solve_cfp(const FeasibilityProblem& fp, const Vector& x0, const SolverConfig& cfg);

}  // namespace pertproj
