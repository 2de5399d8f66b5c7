#include "pertproj/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pertproj {

void require_dimension(const Vector& x, Eigen::Index n, const char* what) {
    if (x.size() != n) {
        std::ostringstream msg;
        msg << what << ": expected dimension " << n << ", got " << x.size();
        throw DimensionError(msg.str());
    }
}

void require_finite(const Vector& x, const char* what) {
    if (!x.allFinite()) {
        throw NumericalError(std::string(what) + ": non-finite coordinate");
    }
}

ConvexConstraint::ConvexConstraint(Eigen::Index dimension, Evaluator evaluator, std::string label)
    : dimension_(dimension),
      evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      label_(std::move(label)) {
    if (dimension_ <= 0) throw DimensionError("constraint dimension must be positive");
    if (!*evaluator_) throw ConfigError("constraint evaluator is empty");
}

ConvexConstraint ConvexConstraint::affine(Vector a, double b, std::string label) {
    require_finite(a, "affine normal");
    if (!std::isfinite(b)) throw NumericalError("affine offset is not finite");
    const Eigen::Index n = a.size();
    ConvexConstraint c(
        n,
        [a, b](const Vector& x) { return Evaluation{a.dot(x) - b, a}; },
        std::move(label));
    c.affine_ = AffineData{std::move(a), b};
    return c;
}

Evaluation eval_constraint(const ConvexConstraint& c, const Vector& x) {
    require_dimension(x, c.dimension(), "eval_constraint");
    Evaluation e = c(x);
    if (!std::isfinite(e.value)) {
        throw NumericalError("constraint '" + c.label() + "' returned a non-finite value");
    }
    require_dimension(e.subgradient, c.dimension(), "subgradient");
    require_finite(e.subgradient, "subgradient");
    return e;
}

FeasibilityProblem::FeasibilityProblem(std::vector<ConvexConstraint> constraints, bool nonnegative)
    : constraints_(std::move(constraints)), nonnegative_(nonnegative) {
    if (constraints_.empty()) throw ConfigError("feasibility problem needs at least one constraint");
    dimension_ = constraints_.front().dimension();
    for (const auto& c : constraints_) {
        if (c.dimension() != dimension_) {
            throw DimensionError("constraints of a feasibility problem must share a dimension");
        }
    }
}

bool FeasibilityProblem::all_affine() const {
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [](const ConvexConstraint& c) { return c.is_affine(); });
}

OptimizationProblem::OptimizationProblem(ConvexConstraint f, std::vector<ConvexConstraint> g,
                                         bool nonneg)
    : objective(std::move(f)), constraints(std::move(g)), nonnegative(nonneg) {
    for (const auto& c : constraints) {
        if (c.dimension() != objective.dimension()) {
            throw DimensionError("objective and constraints must share a dimension");
        }
    }
}

double violation_sup_norm(const FeasibilityProblem& fp, const Vector& x) {
    double worst = 0.0;
    for (const auto& c : fp.constraints()) {
        worst = std::max(worst, eval_constraint(c, x).value);
    }
    return worst;
}

}  // namespace pertproj
