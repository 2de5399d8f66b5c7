#pragma once

#include "pertproj/core.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace pertproj {

enum class PerturbationKind { none, heavy_ball, surrogate };
enum class PerturbationScheme { outer, inner };

const char* to_string(PerturbationKind kind);
const char* to_string(PerturbationScheme scheme);

struct PerturbationConfig {
    PerturbationKind kind = PerturbationKind::none;
    PerturbationScheme scheme = PerturbationScheme::outer;
    double eps_min = 1e-6;
    double eps_max = 6e-2;
    double lambda_hb = 8.0;
    /// beta_k = 1 for k <= k_cap. Unset means "the solver's iteration cap".
    std::optional<std::uint64_t> k_cap;
    /// Replaces ||p||^2/||d||^2 as the surrogate step length when set.
    std::optional<double> sc_step;

    void validate() const;
};

/// Memory carried between iterations to evaluate the trigger.
struct StepHistory {
    std::optional<Vector> p_prev;
    bool c_prev = false;
    double last_inner_product = std::numeric_limits<double>::quiet_NaN();
};

/// <p_prev/|p_prev|, p_cur/|p_cur|>. Throws DegenerateStepError on a zero input.
double normalized_inner_product(const Vector& p_prev, const Vector& p_cur);

/// True iff the normalized inner product lies in [-1 + eps_min, -1 + eps_max].
bool condition_c(const Vector& p_prev, const Vector& p_cur, double eps_min, double eps_max);
bool condition_c(double inner_product, double eps_min, double eps_max);

inline bool condition_tilde_c(bool c_prev, bool c_cur) { return !c_prev && c_cur; }

/// p_prev/|p_prev| + p_cur/|p_cur|.
Vector heavy_ball_direction(const Vector& p_prev, const Vector& p_cur);

struct SurrogateDirection {
    Vector direction;    // P_H(x + p_cur) - x
    double step_length;  // ||p_cur||^2 / ||direction||^2
};

/// Projection of x + p_cur onto H = {y : <y - x, p_prev> >= 0}, relative to x.
/// The result does not depend on x, so x is not an argument.
SurrogateDirection surrogate_direction(const Vector& p_prev, const Vector& p_cur);

inline double beta_schedule(std::uint64_t k, std::uint64_t k_cap) { return k <= k_cap ? 1.0 : 0.0; }

/// Perturbation added after the operator: step * direction - lambda * p_cur.
Vector outer_perturbation_vector(const PerturbationConfig& cfg, const Vector& p_prev,
                                 const Vector& p_cur, double lambda, bool trigger);

/// Perturbation added before the operator: step * direction.
Vector inner_perturbation_vector(const PerturbationConfig& cfg, const Vector& p_prev,
                                 const Vector& p_cur, bool trigger);

}  // namespace pertproj
