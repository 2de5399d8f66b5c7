#include "pertproj/perturbations.hpp"

#include "theory.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pertproj;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

bool close(const Vector& a, const Vector& b, double tol = 1e-12) {
    return a.size() == b.size() && (a - b).norm() <= tol * (1.0 + b.norm());
}

// p_cur at normalized inner product `ip` with p_prev, random length.
Vector at_inner_product(std::mt19937_64& rng, const Vector& p_prev, double ip) {
    const Vector u = p_prev / p_prev.norm();
    Vector w = theory::random_unit(rng, p_prev.size());
    w -= w.dot(u) * u;
    w /= w.norm();
    std::uniform_real_distribution<double> len(0.01, 10.0);
    return len(rng) * (ip * u + std::sqrt(1 - ip * ip) * w);
}

}  // namespace

TEST_CASE("trigger condition") {
    CHECK(condition_c(vec({1, 0}), vec({-1, 0.01}), 1e-6, 6e-2));
    CHECK_FALSE(condition_c(vec({1, 0}), vec({1, 0}), 1e-6, 6e-2));
    CHECK_FALSE(condition_c(vec({1, 0}), vec({-1, 0}), 1e-6, 6e-2));
    CHECK_THROWS_AS(condition_c(vec({0, 0}), vec({1, 0}), 1e-6, 6e-2), DegenerateStepError);
    CHECK(condition_tilde_c(false, true));
    CHECK_FALSE(condition_tilde_c(true, true));
    CHECK_FALSE(condition_tilde_c(false, false));
    CHECK_FALSE(condition_tilde_c(true, false));
}

TEST_CASE("heavy ball direction") {
    CHECK(close(heavy_ball_direction(vec({1, 0}), vec({-1, 0})), vec({0, 0})));
    CHECK(close(heavy_ball_direction(vec({2, 0}), vec({0, 3})), vec({1, 1})));
    const Vector d = heavy_ball_direction(vec({1, 0}), vec({-1, 0.01}));
    CHECK(d[0] == doctest::Approx(4.9998e-5).epsilon(1e-4));
    CHECK(d[1] == doctest::Approx(9.99950e-3).epsilon(1e-5));
    CHECK_THROWS_AS(heavy_ball_direction(vec({0, 0}), vec({1, 0})), DegenerateStepError);
}

TEST_CASE("surrogate direction") {
    const SurrogateDirection a = surrogate_direction(vec({0, -2}), vec({1, 1}));
    CHECK(close(a.direction, vec({1, 0})));
    CHECK(a.step_length == doctest::Approx(2.0));
    // 1 / sin^2(45 deg)
    CHECK(a.step_length == doctest::Approx(1.0 / std::pow(std::sin(std::numbers::pi / 4), 2)));

    const SurrogateDirection b = surrogate_direction(vec({0, 1}), vec({1, 0}));
    CHECK(close(b.direction, vec({1, 0})));
    CHECK(b.step_length == doctest::Approx(1.0));

    CHECK_THROWS_AS(surrogate_direction(vec({0, 1}), vec({0, -1})), DegenerateSurrogateError);
    CHECK_THROWS_AS(surrogate_direction(vec({0, 0}), vec({0, -1})), DegenerateStepError);
}

TEST_CASE("beta schedule") {
    CHECK(beta_schedule(0, 1000) == 1.0);
    CHECK(beta_schedule(1000, 1000) == 1.0);
    CHECK(beta_schedule(1001, 1000) == 0.0);
}

TEST_CASE("perturbation vectors") {
    PerturbationConfig hb;
    hb.kind = PerturbationKind::heavy_ball;
    hb.lambda_hb = 8.0;
    PerturbationConfig sc;
    sc.kind = PerturbationKind::surrogate;

    CHECK(outer_perturbation_vector(hb, vec({1, 0}), vec({-1, 0.01}), 1.9, false) == Vector::Zero(2));
    CHECK(inner_perturbation_vector(hb, vec({1, 0}), vec({-1, 0.01}), false) == Vector::Zero(2));

    // 8 d_hb - 1.9 p_cur with d_hb ~ (0, 0.01)
    const Vector o = outer_perturbation_vector(hb, vec({1, 0}), vec({-1, 0.01}), 1.9, true);
    CHECK(o[0] == doctest::Approx(1.9).epsilon(1e-3));
    CHECK(o[1] == doctest::Approx(0.061).epsilon(1e-3));
    const Vector oracle = 8.0 * heavy_ball_direction(vec({1, 0}), vec({-1, 0.01})) - 1.9 * vec({-1, 0.01});
    CHECK(close(o, oracle));

    const Vector i = inner_perturbation_vector(hb, vec({1, 0}), vec({-1, 0.01}), true);
    CHECK(i[0] == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(i[1] == doctest::Approx(0.08).epsilon(1e-3));

    CHECK(close(outer_perturbation_vector(sc, vec({0, -2}), vec({1, 1}), 1.9, true), vec({0.1, -1.9})));
    CHECK(close(inner_perturbation_vector(sc, vec({0, -2}), vec({1, 1}), true), vec({2, 0})));

    PerturbationConfig fixed = sc;
    fixed.sc_step = 1.0;
    CHECK(close(inner_perturbation_vector(fixed, vec({0, -2}), vec({1, 1}), true), vec({1, 0})));
}

TEST_CASE("perturbation config validation") {
    PerturbationConfig c;
    c.eps_min = 0.1;
    c.eps_max = 0.05;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PerturbationConfig{};
    c.eps_max = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PerturbationConfig{};
    c.lambda_hb = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PerturbationConfig{};
    c.sc_step = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(PerturbationConfig{}.validate());
}

TEST_CASE("triggered pairs: boundedness, orthogonality, triangle tip") {
    std::mt19937_64 rng(23);
    const double emin = 1e-6, emax = 6e-2;
    std::uniform_real_distribution<double> ipd(-1 + emin, -1 + emax);
    std::uniform_int_distribution<int> dim(2, 8);
    for (int trial = 0; trial < 2000; ++trial) {
        const Vector p_prev = theory::random_unit(rng, dim(rng)) * 3.0;
        const Vector p = at_inner_product(rng, p_prev, ipd(rng));
        REQUIRE(condition_c(p_prev, p, emin, emax));

        CHECK(heavy_ball_direction(p_prev, p).norm() <= std::sqrt(2 * emax) * (1 + 1e-12));

        const SurrogateDirection sd = surrogate_direction(p_prev, p);
        const Vector move = sd.step_length * sd.direction;
        CHECK(std::abs(sd.direction.dot(p_prev)) <= 1e-10 * sd.direction.norm() * p_prev.norm());
        CHECK(move.norm() <= p.norm() / std::sqrt(2 * emin - emin * emin) * (1 + 1e-12));
        const double alpha = std::acos(-normalized_inner_product(p_prev, p));
        CHECK(std::abs(move.norm() * std::sin(alpha) - p.norm()) <= 1e-10 * p.norm());
    }
}

TEST_CASE("delta factor is at least one") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 300; ++trial) {
        const theory::TriggeredStep t = theory::random_triggered_step(rng, 1e-6, 6e-2);
        CHECK(theory::delta_factor(t.terms, t.weights, t.p_prev) >= 1.0 - 1e-12);
    }
}

TEST_CASE("surrogate projection of the combined step equals the combined projections") {
    // Under <p_prev, s_i> <= 0 for all i, sum w_i P_H(s_i) = P_H(p).
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const theory::TriggeredStep t = theory::random_triggered_step(rng, 1e-6, 6e-2);
        bool hypothesis = true;
        for (const Vector& s : t.terms) hypothesis = hypothesis && t.p_prev.dot(s) <= 0.0;
        if (!hypothesis) continue;
        Vector combined = Vector::Zero(t.p.size());
        for (std::size_t i = 0; i < t.terms.size(); ++i) {
            combined += t.weights[i] * theory::project_onto_surrogate(t.terms[i], t.p_prev);
        }
        CHECK(close(combined, surrogate_direction(t.p_prev, t.p).direction, 1e-10));
    }
}

TEST_CASE("surrogate step bound on wedge zigzags") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const theory::Wedge w = theory::random_wedge(rng, 0.05, 0.8);
        const Vector start = Eigen::Vector2d(1.0, 5.0 + 3 * std::abs(u(rng)));
        const double zr = 50.0 + 20 * std::abs(u(rng));
        const Vector z = w.to_world(Eigen::Vector2d(zr, 0.9 * u(rng) * zr * std::tan(w.phi / 2)));
        for (const theory::ZigzagStep& s : theory::zigzag_steps(w, start, 40)) {
            if (!theory::alternating_hypothesis(s) || s.alpha <= 0.0 || !theory::in_surrogate_halfspace(s, z)) continue;
            const SurrogateDirection sd = surrogate_direction(s.p_prev, s.p);
            const Vector x_sc = s.x + sd.step_length * sd.direction;
            const double before = (s.x - z).squaredNorm();
            const double bound = before - theory::weighted_term_energy(s) / std::pow(std::sin(s.alpha), 2);
            CHECK((x_sc - z).squaredNorm() <= bound + 1e-9 * before);
            ++checked;
        }
    }
    CHECK(checked > 400);
}
