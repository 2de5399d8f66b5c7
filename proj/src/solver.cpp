#include "pertproj/solver.hpp"

#include <cmath>
#include <limits>

namespace pertproj {

const char* to_string(Method method) {
    return method == Method::cyclic ? "cyclic" : "simultaneous";
}

const char* to_string(StopRule rule) {
    return rule == StopRule::residual_sup ? "residual_sup" : "violation_sup";
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::solved: return "solved";
        case SolveStatus::iteration_cap_reached: return "iteration_cap_reached";
        case SolveStatus::infeasible_constraint: return "infeasible_constraint";
        case SolveStatus::stalled: return "stalled";
    }
    return "?";
}

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!lambda) throw ConfigError("relaxation function is empty");
    perturbation.validate();
}

double stop_measure(const FeasibilityProblem& fp, const Vector& x, StopRule rule) {
    if (rule == StopRule::violation_sup) return violation_sup_norm(fp, x);
    if (!fp.all_affine()) throw ConfigError("residual stop rule needs affine constraints");
    return stop_measure(evaluate_all(fp, x), rule);
}

double stop_measure(const std::vector<Evaluation>& evals, StopRule rule) {
    double worst = 0.0;
    for (const auto& e : evals) {
        worst = std::max(worst, rule == StopRule::residual_sup ? std::abs(e.value) : e.value);
    }
    return worst;
}

namespace {

// Produces p(x) and owns the control position of the cyclic method, which
// advances once per evaluated step (twice on an inner-perturbed iteration).
class StepSource {
public:
    StepSource(const FeasibilityProblem& fp, const SolverConfig& cfg)
        : fp_(fp),
          cfg_(cfg),
          ctrl_(cfg.control.value_or(ControlSequence::cyclic(fp.size()))) {
        if (cfg.method == Method::cyclic && ctrl_.count() != fp.size()) {
            throw ConfigError("control sequence size differs from problem");
        }
    }

    Vector next(const std::vector<Evaluation>& evals) {
        if (cfg_.method == Method::simultaneous) {
            return simultaneous_terms(fp_, evals, cfg_.weights).step;
        }
        if (cfg_.cp_skip_satisfied) {
            CyclicVisit visit = cyclic_step_next_violated(fp_, evals, nu_, ctrl_);
            nu_ = visit.next_position;
            return std::move(visit.step);
        }
        const std::size_t i = ctrl_.index(nu_++) - 1;
        return projection_term(evals[i], fp_[i].label());
    }

    [[nodiscard]] std::size_t zero_steps_before_stall() const {
        if (cfg_.method == Method::cyclic && !cfg_.cp_skip_satisfied) return ctrl_.period();
        return 1;
    }

private:
    const FeasibilityProblem& fp_;
    const SolverConfig& cfg_;
    ControlSequence ctrl_;
    std::uint64_t nu_ = 0;
};

bool is_zero(const Vector& v) { return v.squaredNorm() == 0.0; }

}  // namespace

FeasibilityResult solve_cfp(const FeasibilityProblem& fp, const Vector& x0, const SolverConfig& cfg) {
    cfg.validate();
    require_dimension(x0, fp.dimension(), "solve_cfp start point");
    require_finite(x0, "solve_cfp start point");
    if (cfg.stop_rule == StopRule::residual_sup && !fp.all_affine()) {
        throw ConfigError("residual stop rule needs affine constraints");
    }

    const PerturbationConfig& pc = cfg.perturbation;
    const std::uint64_t k_cap = pc.k_cap.value_or(cfg.max_iterations);
    const bool nonneg = fp.nonnegative();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    StepSource source(fp, cfg);
    StepHistory hist;
    FeasibilityResult out;
    Vector x = x0;
    std::uint64_t k = 0;
    std::size_t zero_run = 0;

    auto push = [&](double measure, double ip, bool perturbed, const Vector* p) {
        IterationRecord r;
        r.k = k;
        r.stop_measure = measure;
        r.inner_product = ip;
        r.perturbed = perturbed;
        r.kind = perturbed ? pc.kind : PerturbationKind::none;
        if (cfg.record_iterates) {
            r.x = x;
            if (p) r.p = *p;
        }
        out.trace.push_back(std::move(r));
    };

    while (true) {
        const std::vector<Evaluation> evals = evaluate_all(fp, x);
        const double measure = stop_measure(evals, cfg.stop_rule);
        if (measure <= cfg.tolerance) {
            out.status = SolveStatus::solved;
            push(measure, nan, false, nullptr);
            break;
        }
        if (k >= cfg.max_iterations) {
            out.status = SolveStatus::iteration_cap_reached;
            push(measure, nan, false, nullptr);
            break;
        }

        Vector p;
        try {
            p = source.next(evals);
        } catch (const InfeasibleConstraintError&) {
            out.status = SolveStatus::infeasible_constraint;
            push(measure, nan, false, nullptr);
            break;
        }

        if (is_zero(p)) {
            push(measure, nan, false, &p);
            hist = StepHistory{};
            if (++zero_run >= source.zero_steps_before_stall()) {
                out.status = SolveStatus::stalled;
                break;
            }
            ++k;
            continue;
        }
        zero_run = 0;

        double ip = nan;
        bool c = false;
        if (hist.p_prev) {
            ip = normalized_inner_product(*hist.p_prev, p);
            c = condition_c(ip, pc.eps_min, pc.eps_max);
        }
        hist.last_inner_product = ip;
        // In the inner scheme c(z^{k-1}) = true always led to a perturbation, so
        // gating on c_prev only matters right after the intermediate point z + v.
        const bool trigger = condition_tilde_c(hist.c_prev, c);
        const double beta = beta_schedule(k, k_cap);
        const double lam = cfg.lambda(x);

        bool perturbed = false;
        Vector next;
        if (trigger && beta > 0.0 && pc.kind != PerturbationKind::none) {
            try {
                if (pc.scheme == PerturbationScheme::outer) {
                    const Vector v = outer_perturbation_vector(pc, *hist.p_prev, p, lam, true);
                    next = apply_operator(x, p, lam, false) + beta * v;
                    if (nonneg) clamp_nonnegative(next);
                    hist.p_prev = p;
                    hist.c_prev = c;
                } else {
                    const Vector v = inner_perturbation_vector(pc, *hist.p_prev, p, true);
                    Vector y = x + beta * v;
                    if (nonneg) clamp_nonnegative(y);
                    Vector p_y = source.next(evaluate_all(fp, y));
                    if (is_zero(p_y)) {
                        next = y;
                        hist.p_prev = p;
                        hist.c_prev = c;
                    } else {
                        const bool c_y = condition_c(p, p_y, pc.eps_min, pc.eps_max);
                        next = apply_operator(y, p_y, cfg.lambda(y), nonneg);
                        hist.p_prev = std::move(p_y);
                        hist.c_prev = c_y;
                    }
                }
                perturbed = true;
            } catch (const DegenerateSurrogateError&) {
                perturbed = false;
            } catch (const InfeasibleConstraintError&) {
                out.status = SolveStatus::infeasible_constraint;
                push(measure, ip, false, &p);
                break;
            }
        }
        if (!perturbed) {
            next = apply_operator(x, p, lam, nonneg);
            hist.p_prev = p;
            hist.c_prev = c;
        } else {
            ++out.perturbations;
        }

        push(measure, ip, perturbed, &p);
        require_finite(next, "iterate");
        x = std::move(next);
        ++k;
    }

    out.iterations = k;
    out.x_final = x;
    return out;
}

}  // namespace pertproj
