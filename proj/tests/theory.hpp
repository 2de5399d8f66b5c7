#pragma once

// Numerical stand-ins for the convergence-speed statements. Used by the unit
// tests and by the acceptance binary.

#include "pertproj/perturbations.hpp"
#include "pertproj/projections.hpp"
#include "pertproj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace theory {

using pertproj::Vector;

/// Metric projection of a step v onto {u : <u, p_prev> >= 0}.
inline Vector project_onto_surrogate(const Vector& v, const Vector& p_prev) {
    const double s = v.dot(p_prev);
    if (s >= 0.0) return v;
    return v - (s / p_prev.squaredNorm()) * p_prev;
}

/// sum w_i |s_i|^2 / |sum w_i d_i|^2 with d_i the surrogate projections of s_i.
inline double delta_factor(const std::vector<Vector>& s, const std::vector<double>& w, const Vector& p_prev) {
    double num = 0.0;
    Vector d = Vector::Zero(p_prev.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        num += w[i] * s[i].squaredNorm();
        d += w[i] * project_onto_surrogate(s[i], p_prev);
    }
    return num / d.squaredNorm();
}

inline Vector random_unit(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = g(rng);
    return u / u.norm();
}

/// A random triggered simultaneous step: m halfspaces all violated at x with
/// normals clustered around -p_prev, resampled until the trigger window holds.
struct TriggeredStep {
    Vector x;
    Vector p_prev;
    std::vector<Vector> terms;
    std::vector<double> weights;
    Vector p;
};

inline TriggeredStep random_triggered_step(std::mt19937_64& rng, double eps_min, double eps_max) {
    std::uniform_int_distribution<int> dim(2, 6);
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> spread(0.0, 0.3);
    std::uniform_real_distribution<double> viol(0.1, 2.0);
    while (true) {
        const Eigen::Index n = dim(rng);
        const int m = count(rng);
        TriggeredStep t;
        t.x = random_unit(rng, n) * 3.0;
        t.p_prev = random_unit(rng, n) * viol(rng);
        const Vector u = t.p_prev / t.p_prev.norm();
        std::vector<pertproj::ConvexConstraint> cs;
        for (int i = 0; i < m; ++i) {
            // a close to u, so the projection term -phi/|a|^2 a points against p_prev
            Vector a = u + spread(rng) * random_unit(rng, n);
            const double b = a.dot(t.x) - viol(rng);
            cs.push_back(pertproj::ConvexConstraint::affine(a, b));
        }
        const pertproj::FeasibilityProblem fp(cs);
        const pertproj::SimultaneousTerms st =
            pertproj::simultaneous_terms(fp, t.x, pertproj::Weights::violated());
        if (st.step.squaredNorm() == 0.0) continue;
        if (!pertproj::condition_c(t.p_prev, st.step, eps_min, eps_max)) continue;
        t.terms = st.terms;
        t.weights = st.weights;
        t.p = st.step;
        return t;
    }
}

/// Two halfspaces bounding the wedge |y2| <= y1 tan(phi/2), rotated by `rot`
/// and shifted by `apex`.
struct Wedge {
    double phi = 0.0;
    double rot = 0.0;
    Vector apex;

    [[nodiscard]] Vector to_world(const Vector& local) const {
        Eigen::Matrix2d r;
        r << std::cos(rot), -std::sin(rot), std::sin(rot), std::cos(rot);
        return r * local + apex;
    }

    [[nodiscard]] pertproj::FeasibilityProblem problem() const {
        const double s = std::sin(phi / 2), c = std::cos(phi / 2);
        Eigen::Matrix2d r;
        r << std::cos(rot), -std::sin(rot), std::sin(rot), std::cos(rot);
        std::vector<pertproj::ConvexConstraint> cs;
        for (double sign : {1.0, -1.0}) {
            const Vector a = r * Eigen::Vector2d(-s, sign * c);
            cs.push_back(pertproj::ConvexConstraint::affine(a, a.dot(apex)));
        }
        return pertproj::FeasibilityProblem(cs);
    }
};

inline Wedge random_wedge(std::mt19937_64& rng, double phi_lo, double phi_hi) {
    std::uniform_real_distribution<double> phi(phi_lo, phi_hi);
    std::uniform_real_distribution<double> rot(0.0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> off(-5.0, 5.0);
    Wedge w;
    w.phi = phi(rng);
    w.rot = rot(rng);
    w.apex = Eigen::Vector2d(off(rng), off(rng));
    return w;
}

/// One iterate of an unperturbed SP zigzag in a wedge, with everything the
/// surrogate and heavy-ball bounds need.
struct ZigzagStep {
    Vector x;
    Vector p_prev;
    Vector p;
    std::vector<Vector> terms;
    std::vector<double> weights;
    double alpha = 0.0;  // pi - acos(<p_bar, p_prev_bar>)
};

/// <p_prev, s_i> <= 0 for every term.
inline bool alternating_hypothesis(const ZigzagStep& z) {
    for (const Vector& s : z.terms) {
        if (z.p_prev.dot(s) > 0.0) return false;
    }
    return true;
}

/// z on the far side of the surrogate hyperplane through x. With relaxation
/// above 1 this halfspace cuts into the feasible set, and the surrogate and
/// heavy-ball bounds only hold for z inside it.
inline bool in_surrogate_halfspace(const ZigzagStep& s, const Vector& z) { return s.p_prev.dot(z - s.x) >= 0.0; }

inline std::vector<ZigzagStep> zigzag_steps(const Wedge& w, const Vector& local_start, std::uint64_t iterations) {
    const pertproj::FeasibilityProblem fp = w.problem();
    pertproj::SolverConfig cfg;
    cfg.method = pertproj::Method::simultaneous;
    cfg.weights = pertproj::Weights::violated();
    cfg.lambda = pertproj::constant_relaxation(1.9);
    cfg.max_iterations = iterations;
    cfg.tolerance = 1e-12;
    const pertproj::FeasibilityResult r = pertproj::solve_cfp(fp, w.to_world(local_start), cfg);
    std::vector<ZigzagStep> out;
    for (std::size_t k = 1; k + 1 < r.trace.size(); ++k) {
        const auto& prev = r.trace[k - 1];
        const auto& cur = r.trace[k];
        if (prev.p.size() == 0 || cur.p.size() == 0) continue;
        if (prev.p.squaredNorm() == 0.0 || cur.p.squaredNorm() == 0.0) continue;
        ZigzagStep z;
        z.x = cur.x;
        z.p_prev = prev.p;
        z.p = cur.p;
        const pertproj::SimultaneousTerms st = pertproj::simultaneous_terms(fp, cur.x, cfg.weights);
        z.terms = st.terms;
        z.weights = st.weights;
        z.alpha = std::numbers::pi - std::acos(std::clamp(pertproj::normalized_inner_product(z.p_prev, z.p), -1.0, 1.0));
        out.push_back(std::move(z));
    }
    return out;
}

inline double weighted_term_energy(const ZigzagStep& z) {
    double e = 0.0;
    for (std::size_t i = 0; i < z.terms.size(); ++i) e += z.weights[i] * z.terms[i].squaredNorm();
    return e;
}

/// Bracket of the heavy-ball bound; negative means the optimal heavy-ball step
/// beats the plain step.
inline double hb_bracket(double alpha, double p_norm, double sc_to_z) {
    const double s2 = std::sin(alpha / 2);
    const double c = std::cos(alpha);
    return p_norm / std::sin(alpha) * (s2 * s2 - c * c) + 2 * sc_to_z * s2;
}

/// Largest a in (0, pi/3] with the bracket negative on (0, a), found by a fine scan.
inline double alpha_tilde(double p_norm, double sc_to_z) {
    const double top = std::numbers::pi / 3;
    const int n = 20000;
    for (int i = 1; i <= n; ++i) {
        const double a = top * i / n;
        if (hb_bracket(a, p_norm, sc_to_z) >= 0.0) return top * (i - 1) / n;
    }
    return top;
}

/// x + 0.5 lambda_opt (p_bar + p_prev_bar) with lambda_opt = cos(a/2) |x - A| sqrt(2/eps).
inline Vector optimal_heavy_ball_point(const ZigzagStep& z, const Vector& tip) {
    const double ip = pertproj::normalized_inner_product(z.p_prev, z.p);
    const double eps = 1.0 + ip;
    const double lam = std::cos(z.alpha / 2) * (z.x - tip).norm() * std::sqrt(2.0 / eps);
    return z.x + 0.5 * lam * pertproj::heavy_ball_direction(z.p_prev, z.p);
}

/// Minimizer of |x - c|^2 over {a_1 x <= b_1, a_2 x <= b_2} by active-set enumeration.
inline Vector kkt_projection(const Vector& c, const Vector& a1, double b1, const Vector& a2, double b2) {
    auto feasible = [&](const Vector& x) { return a1.dot(x) <= b1 + 1e-12 && a2.dot(x) <= b2 + 1e-12; };
    if (feasible(c)) return c;
    Vector best;
    double best_f = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vector& x, bool duals_ok) {
        if (!duals_ok || !feasible(x)) return;
        const double f = (x - c).squaredNorm();
        if (f < best_f) {
            best_f = f;
            best = x;
        }
    };
    for (int i = 0; i < 2; ++i) {
        const Vector& a = i == 0 ? a1 : a2;
        const double b = i == 0 ? b1 : b2;
        const double mu = (a.dot(c) - b) / a.squaredNorm();
        consider(c - mu * a, mu >= 0.0);
    }
    // Both active: x = c - mu1 a1 - mu2 a2.
    Eigen::Matrix2d g;
    g << a1.dot(a1), a1.dot(a2), a2.dot(a1), a2.dot(a2);
    const Eigen::Vector2d rhs(a1.dot(c) - b1, a2.dot(c) - b2);
    if (std::abs(g.determinant()) > 1e-14) {
        const Eigen::Vector2d mu = g.inverse() * rhs;
        consider(c - mu[0] * a1 - mu[1] * a2, mu[0] >= 0.0 && mu[1] >= 0.0);
    }
    return best;
}

}  // namespace theory
