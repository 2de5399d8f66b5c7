#pragma once

#include "pertproj/core.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pertproj {

/// Order in which the cyclic method visits constraints.
///
/// Indices are 1-based to match the usual notation i(nu) = (nu mod n) + 1.
class ControlSequence {
public:
    enum class Kind { cyclic, explicit_list };

    static ControlSequence cyclic(std::size_t n);
    /// A periodic list of 1-based indices, each in 1..n.
    static ControlSequence explicit_list(std::vector<std::size_t> indices, std::size_t n);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] std::size_t count() const { return n_; }
    [[nodiscard]] std::size_t period() const;
    /// 1-based constraint index used at control position nu.
    [[nodiscard]] std::size_t index(std::uint64_t nu) const;

private:
    ControlSequence(Kind kind, std::size_t n, std::vector<std::size_t> list)
        : kind_(kind), n_(n), list_(std::move(list)) {}

    Kind kind_;
    std::size_t n_;
    std::vector<std::size_t> list_;
};

/// Weights of the simultaneous method.
///
/// `violated` is state-dependent: w_i(x) = 1/|V(x)| on the currently violated
/// constraints V(x) and 0 elsewhere, which still satisfies sum w_i = 1.
class Weights {
public:
    enum class Mode { uniform, fixed, violated };

    static Weights uniform() { return Weights(Mode::uniform, {}); }
    static Weights violated() { return Weights(Mode::violated, {}); }
    /// Explicit weights; each must be positive and they must sum to 1 (within 1e-12).
    static Weights fixed(std::vector<double> w);

    [[nodiscard]] Mode mode() const { return mode_; }
    [[nodiscard]] const std::vector<double>& values() const { return w_; }

    /// Weights at a point whose constraint values are `phi`.
    [[nodiscard]] std::vector<double> resolve(const std::vector<double>& phi) const;

private:
    Weights(Mode mode, std::vector<double> w) : mode_(mode), w_(std::move(w)) {}
    Mode mode_;
    std::vector<double> w_;
};

/// Relaxation parameter as a function of the iterate.
using Relaxation = std::function<double(const Vector&)>;

Relaxation constant_relaxation(double lambda);

/// -max(0, phi(x)) / ||xi||^2 * xi, from an already computed evaluation.
Vector projection_term(const Evaluation& e, const std::string& label = {});
Vector projection_term(const ConvexConstraint& c, const Vector& x);

/// Step of the cyclic method at control position k.
Vector cyclic_step(const FeasibilityProblem& fp, const Vector& x, std::uint64_t k,
                   const ControlSequence& ctrl);

struct CyclicVisit {
    Vector step;
    std::size_t constraint = 0;  // 0-based index of the constraint projected onto
    std::uint64_t next_position = 0;
    bool found = false;  // false when no constraint in a full period is violated
};

/// Advance the control sequence from position `nu` to the first violated
/// constraint and return its projection term. Satisfied constraints are
/// passed over without producing an iteration.
CyclicVisit cyclic_step_next_violated(const FeasibilityProblem& fp, const Vector& x,
                                      std::uint64_t nu, const ControlSequence& ctrl);
/// Same, from evaluations of every constraint at the current point.
CyclicVisit cyclic_step_next_violated(const FeasibilityProblem& fp, const std::vector<Evaluation>& evals,
                                      std::uint64_t nu, const ControlSequence& ctrl);

struct SimultaneousTerms {
    std::vector<Vector> terms;    // per-constraint projection terms
    std::vector<double> weights;  // weights used at x
    Vector step;                  // sum_i w_i * terms[i], left to right
};

SimultaneousTerms simultaneous_terms(const FeasibilityProblem& fp, const Vector& x,
                                     const Weights& w);
SimultaneousTerms simultaneous_terms(const FeasibilityProblem& fp, const std::vector<Evaluation>& evals,
                                     const Weights& w);

/// eval_constraint for every constraint, in order.
std::vector<Evaluation> evaluate_all(const FeasibilityProblem& fp, const Vector& x);

Vector simultaneous_step(const FeasibilityProblem& fp, const Vector& x, const Weights& w);

/// x + lambda * p, with negative coordinates clamped to 0 when `nonnegative`.
Vector apply_operator(const Vector& x, const Vector& p, double lambda, bool nonnegative = false);

void clamp_nonnegative(Vector& x);

}  // namespace pertproj
