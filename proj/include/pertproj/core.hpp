#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pertproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when a violated constraint has a zero subgradient, i.e. its
/// minimum is positive and the set it describes is empty.
class InfeasibleConstraintError : public Error {
public:
    using Error::Error;
};

class DegenerateStepError : public Error {
public:
    using Error::Error;
};

class DegenerateSurrogateError : public Error {
public:
    using Error::Error;
};

class NoFeasibleStartError : public Error {
public:
    using Error::Error;
};

/// Value and one subgradient of a convex function at a point.
struct Evaluation {
    double value = 0.0;
    Vector subgradient;
};

/// Affine data a·x - b, kept alongside the evaluator so the residual stop
/// rule can tell affine constraints apart from general ones.
struct AffineData {
    Vector a;
    double b = 0.0;
};

/// A convex function phi with the set {x : phi(x) <= 0}.
///
/// The evaluator is shared and immutable, so copies are cheap and
/// evaluation is reentrant.
class ConvexConstraint {
public:
    using Evaluator = std::function<Evaluation(const Vector&)>;

    ConvexConstraint(Eigen::Index dimension, Evaluator evaluator, std::string label);

    /// phi(x) = <a, x> - b with exact value and gradient.
    static ConvexConstraint affine(Vector a, double b, std::string label = {});

    [[nodiscard]] Eigen::Index dimension() const { return dimension_; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] bool is_affine() const { return affine_.has_value(); }
    [[nodiscard]] const std::optional<AffineData>& affine_data() const { return affine_; }

    /// Raw evaluator call, no validation. Prefer eval_constraint().
    [[nodiscard]] Evaluation operator()(const Vector& x) const { return (*evaluator_)(x); }

private:
    Eigen::Index dimension_;
    std::shared_ptr<const Evaluator> evaluator_;
    std::string label_;
    std::optional<AffineData> affine_;
};

/// Checked evaluation: dimension of x and of the subgradient, finiteness of both outputs.
Evaluation eval_constraint(const ConvexConstraint& c, const Vector& x);

/// The convex feasibility problem: find x with phi_i(x) <= 0 for all i.
///
/// When `nonnegative` is set, operator applications clamp negative
/// coordinates to zero (the x >= 0 side condition of dose optimization).
class FeasibilityProblem {
public:
    FeasibilityProblem(std::vector<ConvexConstraint> constraints, bool nonnegative = false);

    [[nodiscard]] Eigen::Index dimension() const { return dimension_; }
    [[nodiscard]] std::size_t size() const { return constraints_.size(); }
    [[nodiscard]] const ConvexConstraint& operator[](std::size_t i) const { return constraints_[i]; }
    [[nodiscard]] const std::vector<ConvexConstraint>& constraints() const { return constraints_; }
    [[nodiscard]] bool nonnegative() const { return nonnegative_; }
    [[nodiscard]] bool all_affine() const;

private:
    std::vector<ConvexConstraint> constraints_;
    Eigen::Index dimension_ = 0;
    bool nonnegative_ = false;
};

/// minimize f(x) s.t. g_j(x) <= 0 (and x >= 0 when flagged).
struct OptimizationProblem {
    ConvexConstraint objective;
    std::vector<ConvexConstraint> constraints;
    bool nonnegative = false;

    OptimizationProblem(ConvexConstraint f, std::vector<ConvexConstraint> g, bool nonneg = false);
    [[nodiscard]] Eigen::Index dimension() const { return objective.dimension(); }
};

/// max_i max(0, phi_i(x)); zero exactly on the intersection.
double violation_sup_norm(const FeasibilityProblem& fp, const Vector& x);

void require_dimension(const Vector& x, Eigen::Index n, const char* what);
void require_finite(const Vector& x, const char* what);

}  // namespace pertproj
