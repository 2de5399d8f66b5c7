#include "pertproj/perturbations.hpp"

#include <cmath>

namespace pertproj {

const char* to_string(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::none: return "none";
        case PerturbationKind::heavy_ball: return "heavy_ball";
        case PerturbationKind::surrogate: return "surrogate";
    }
    return "?";
}

const char* to_string(PerturbationScheme scheme) {
    return scheme == PerturbationScheme::outer ? "outer" : "inner";
}

void PerturbationConfig::validate() const {
    if (!(eps_min > 0.0 && eps_min < eps_max && eps_max < 1.0)) {
        throw ConfigError("perturbation window needs 0 < eps_min < eps_max < 1");
    }
    if (!std::isfinite(lambda_hb) || lambda_hb < 0.0) {
        throw ConfigError("lambda_hb must be finite and nonnegative");
    }
    if (sc_step && !(std::isfinite(*sc_step) && *sc_step > 0.0)) {
        throw ConfigError("sc_step must be positive");
    }
}

double normalized_inner_product(const Vector& p_prev, const Vector& p_cur) {
    if (p_prev.size() != p_cur.size()) throw DimensionError("step vectors differ in size");
    const double a = p_prev.norm();
    const double b = p_cur.norm();
    if (a == 0.0 || b == 0.0) throw DegenerateStepError("zero step vector in trigger evaluation");
    return p_prev.dot(p_cur) / (a * b);
}

bool condition_c(double ip, double eps_min, double eps_max) {
    return ip >= -1.0 + eps_min && ip <= -1.0 + eps_max;
}

bool condition_c(const Vector& p_prev, const Vector& p_cur, double eps_min, double eps_max) {
    return condition_c(normalized_inner_product(p_prev, p_cur), eps_min, eps_max);
}

Vector heavy_ball_direction(const Vector& p_prev, const Vector& p_cur) {
    if (p_prev.size() != p_cur.size()) throw DimensionError("step vectors differ in size");
    const double a = p_prev.norm();
    const double b = p_cur.norm();
    if (a == 0.0 || b == 0.0) throw DegenerateStepError("zero step vector in heavy-ball direction");
    return p_prev / a + p_cur / b;
}

SurrogateDirection surrogate_direction(const Vector& p_prev, const Vector& p_cur) {
    if (p_prev.size() != p_cur.size()) throw DimensionError("step vectors differ in size");
    const double nprev2 = p_prev.squaredNorm();
    const double ncur2 = p_cur.squaredNorm();
    if (nprev2 == 0.0 || ncur2 == 0.0) {
        throw DegenerateStepError("zero step vector in surrogate direction");
    }
    const double s = p_prev.dot(p_cur);
    Vector d = s < 0.0 ? Vector(p_cur - (s / nprev2) * p_prev) : p_cur;
    const double nd2 = d.squaredNorm();
    // Anti-parallel inputs cancel up to rounding; treat a relative residue as zero.
    if (nd2 <= 1e-28 * ncur2) throw DegenerateSurrogateError("surrogate direction vanishes");
    return SurrogateDirection{std::move(d), ncur2 / nd2};
}

namespace {

Vector perturbation_move(const PerturbationConfig& cfg, const Vector& p_prev, const Vector& p_cur) {
    switch (cfg.kind) {
        case PerturbationKind::heavy_ball:
            return cfg.lambda_hb * heavy_ball_direction(p_prev, p_cur);
        case PerturbationKind::surrogate: {
            SurrogateDirection sd = surrogate_direction(p_prev, p_cur);
            return cfg.sc_step.value_or(sd.step_length) * sd.direction;
        }
        case PerturbationKind::none:
            break;
    }
    return Vector::Zero(p_cur.size());
}

}  // namespace

Vector outer_perturbation_vector(const PerturbationConfig& cfg, const Vector& p_prev,
                                 const Vector& p_cur, double lambda, bool trigger) {
    if (!trigger || cfg.kind == PerturbationKind::none) return Vector::Zero(p_cur.size());
    return perturbation_move(cfg, p_prev, p_cur) - lambda * p_cur;
}

Vector inner_perturbation_vector(const PerturbationConfig& cfg, const Vector& p_prev,
                                 const Vector& p_cur, bool trigger) {
    if (!trigger || cfg.kind == PerturbationKind::none) return Vector::Zero(p_cur.size());
    return perturbation_move(cfg, p_prev, p_cur);
}

}  // namespace pertproj
