#pragma once

#include "pertproj/core.hpp"

namespace pertproj {

/// A x <= b.
struct LinearSystem {
    Matrix A;
    Vector b;
};

/// The 4x3 cone system with apex (0, 0, delta_x3):
/// rows (+-1/delta_x1, +-1/delta_x2, -1/delta_x3), b = -1, where
/// delta_x1 = tan(beta) delta_x3 / sin(alpha) and delta_x2 = tan(beta) delta_x3 / cos(alpha).
LinearSystem build_linear_problem(double alpha_deg, double beta_deg, double delta_x3);

/// Rows reordered and duplicated as (a1, a3, a1, a3, a2, a4, a2, a4).
LinearSystem extend_linear_problem(const LinearSystem& sys);

FeasibilityProblem to_feasibility_problem(const LinearSystem& sys, bool nonnegative = false);

}  // namespace pertproj
