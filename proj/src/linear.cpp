#include "pertproj/linear.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pertproj {

LinearSystem build_linear_problem(double alpha_deg, double beta_deg, double delta_x3) {
    if (!(alpha_deg > 0.0 && alpha_deg < 90.0) || !(beta_deg > 0.0 && beta_deg < 90.0)) {
        throw ConfigError("cone angles must lie in (0, 90) degrees");
    }
    if (!(delta_x3 > 0.0) || !std::isfinite(delta_x3)) throw ConfigError("delta_x3 must be positive");
    const double deg = std::numbers::pi / 180.0;
    const double alpha = alpha_deg * deg;
    const double t = std::tan(beta_deg * deg) * delta_x3;
    const double d1 = t / std::sin(alpha);
    const double d2 = t / std::cos(alpha);
    const double d3 = delta_x3;

    LinearSystem sys;
    sys.A.resize(4, 3);
    sys.A << -1 / d1, -1 / d2, -1 / d3,
              1 / d1, -1 / d2, -1 / d3,
              1 / d1,  1 / d2, -1 / d3,
             -1 / d1,  1 / d2, -1 / d3;
    sys.b = Vector::Constant(4, -1.0);
    return sys;
}

LinearSystem extend_linear_problem(const LinearSystem& sys) {
    if (sys.A.rows() != 4 || sys.b.size() != 4) throw ConfigError("extension expects a 4-row system");
    static constexpr int order[8] = {0, 2, 0, 2, 1, 3, 1, 3};
    LinearSystem out;
    out.A.resize(8, sys.A.cols());
    out.b.resize(8);
    for (int r = 0; r < 8; ++r) {
        out.A.row(r) = sys.A.row(order[r]);
        out.b(r) = sys.b(order[r]);
    }
    return out;
}

FeasibilityProblem to_feasibility_problem(const LinearSystem& sys, bool nonnegative) {
    if (sys.A.rows() != sys.b.size()) throw DimensionError("row count differs from length of b");
    std::vector<ConvexConstraint> cs;
    cs.reserve(static_cast<std::size_t>(sys.A.rows()));
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i) {
        cs.push_back(ConvexConstraint::affine(sys.A.row(i).transpose(), sys.b(i),
                                              "row " + std::to_string(i + 1)));
    }
    return FeasibilityProblem(std::move(cs), nonnegative);
}

}  // namespace pertproj
