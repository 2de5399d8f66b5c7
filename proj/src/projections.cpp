#include "pertproj/projections.hpp"

#include <cmath>
#include <sstream>

namespace pertproj {

ControlSequence ControlSequence::cyclic(std::size_t n) {
    if (n == 0) throw ConfigError("control sequence over zero constraints");
    return ControlSequence(Kind::cyclic, n, {});
}

ControlSequence ControlSequence::explicit_list(std::vector<std::size_t> indices, std::size_t n) {
    if (indices.empty()) throw ConfigError("explicit control sequence is empty");
    for (std::size_t i : indices) {
        if (i < 1 || i > n) {
            std::ostringstream msg;
            msg << "control index " << i << " outside 1.." << n;
            throw ConfigError(msg.str());
        }
    }
    return ControlSequence(Kind::explicit_list, n, std::move(indices));
}

std::size_t ControlSequence::period() const {
    return kind_ == Kind::cyclic ? n_ : list_.size();
}

std::size_t ControlSequence::index(std::uint64_t nu) const {
    if (kind_ == Kind::cyclic) return static_cast<std::size_t>(nu % n_) + 1;
    return list_[static_cast<std::size_t>(nu % list_.size())];
}

Weights Weights::fixed(std::vector<double> w) {
    if (w.empty()) throw ConfigError("weights are empty");
    double sum = 0.0;
    for (double wi : w) {
        if (!(wi > 0.0) || !std::isfinite(wi)) throw ConfigError("weights must be positive");
        sum += wi;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
    return Weights(Mode::fixed, std::move(w));
}

std::vector<double> Weights::resolve(const std::vector<double>& phi) const {
    const std::size_t m = phi.size();
    switch (mode_) {
        case Mode::uniform:
            return std::vector<double>(m, 1.0 / static_cast<double>(m));
        case Mode::fixed:
            if (w_.size() != m) throw ConfigError("weight count does not match constraint count");
            return w_;
        case Mode::violated: {
            std::size_t active = 0;
            for (double v : phi) active += v > 0.0 ? 1 : 0;
            std::vector<double> w(m, 0.0);
            if (active == 0) return w;
            const double share = 1.0 / static_cast<double>(active);
            for (std::size_t i = 0; i < m; ++i) {
                if (phi[i] > 0.0) w[i] = share;
            }
            return w;
        }
    }
    return {};
}

Relaxation constant_relaxation(double lambda) {
    return [lambda](const Vector&) { return lambda; };
}

Vector projection_term(const Evaluation& e, const std::string& label) {
    const Eigen::Index n = e.subgradient.size();
    if (!(e.value > 0.0)) return Vector::Zero(n);
    const double norm2 = e.subgradient.squaredNorm();
    if (norm2 == 0.0) {
        throw InfeasibleConstraintError("constraint '" + label +
                                        "' is violated with a zero subgradient");
    }
    return (-e.value / norm2) * e.subgradient;
}

Vector projection_term(const ConvexConstraint& c, const Vector& x) {
    return projection_term(eval_constraint(c, x), c.label());
}

Vector cyclic_step(const FeasibilityProblem& fp, const Vector& x, std::uint64_t k,
                   const ControlSequence& ctrl) {
    if (ctrl.count() != fp.size()) throw ConfigError("control sequence size differs from problem");
    return projection_term(fp[ctrl.index(k) - 1], x);
}

CyclicVisit cyclic_step_next_violated(const FeasibilityProblem& fp, const Vector& x,
                                      std::uint64_t nu, const ControlSequence& ctrl) {
    if (ctrl.count() != fp.size()) throw ConfigError("control sequence size differs from problem");
    const std::size_t period = ctrl.period();
    for (std::size_t tries = 0; tries < period; ++tries, ++nu) {
        const std::size_t i = ctrl.index(nu) - 1;
        const Evaluation e = eval_constraint(fp[i], x);
        if (e.value > 0.0) {
            return CyclicVisit{projection_term(e, fp[i].label()), i, nu + 1, true};
        }
    }
    return CyclicVisit{Vector::Zero(fp.dimension()), 0, nu, false};
}

CyclicVisit cyclic_step_next_violated(const FeasibilityProblem& fp, const std::vector<Evaluation>& evals,
                                      std::uint64_t nu, const ControlSequence& ctrl) {
    if (ctrl.count() != fp.size() || evals.size() != fp.size()) {
        throw ConfigError("control sequence size differs from problem");
    }
    const std::size_t period = ctrl.period();
    for (std::size_t tries = 0; tries < period; ++tries, ++nu) {
        const std::size_t i = ctrl.index(nu) - 1;
        if (evals[i].value > 0.0) {
            return CyclicVisit{projection_term(evals[i], fp[i].label()), i, nu + 1, true};
        }
    }
    return CyclicVisit{Vector::Zero(fp.dimension()), 0, nu, false};
}

std::vector<Evaluation> evaluate_all(const FeasibilityProblem& fp, const Vector& x) {
    std::vector<Evaluation> evals;
    evals.reserve(fp.size());
    for (const auto& c : fp.constraints()) evals.push_back(eval_constraint(c, x));
    return evals;
}

SimultaneousTerms simultaneous_terms(const FeasibilityProblem& fp, const std::vector<Evaluation>& evals,
                                     const Weights& w) {
    const std::size_t m = fp.size();
    if (evals.size() != m) throw DimensionError("evaluation count differs from constraint count");
    std::vector<double> phi(m);
    for (std::size_t i = 0; i < m; ++i) phi[i] = evals[i].value;
    SimultaneousTerms out;
    out.weights = w.resolve(phi);
    out.step = Vector::Zero(fp.dimension());
    out.terms.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.terms.push_back(projection_term(evals[i], fp[i].label()));
        if (out.weights[i] != 0.0) out.step += out.weights[i] * out.terms.back();
    }
    return out;
}

SimultaneousTerms simultaneous_terms(const FeasibilityProblem& fp, const Vector& x,
                                     const Weights& w) {
    return simultaneous_terms(fp, evaluate_all(fp, x), w);
}

Vector simultaneous_step(const FeasibilityProblem& fp, const Vector& x, const Weights& w) {
    return simultaneous_terms(fp, x, w).step;
}

void clamp_nonnegative(Vector& x) { x = x.cwiseMax(0.0); }

Vector apply_operator(const Vector& x, const Vector& p, double lambda, bool nonnegative) {
    if (!(lambda > 0.0 && lambda < 2.0)) {
        std::ostringstream msg;
        msg << "relaxation " << lambda << " outside (0, 2)";
        throw ConfigError(msg.str());
    }
    if (x.size() != p.size()) throw DimensionError("apply_operator: step and iterate differ in size");
    Vector next = x + lambda * p;
    if (nonnegative) clamp_nonnegative(next);
    return next;
}

}  // namespace pertproj
