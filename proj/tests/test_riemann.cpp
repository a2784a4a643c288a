#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pipeflow/numerics.hpp"
#include "pipeflow/riemann.hpp"

using namespace pipeflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle pieces, written against the defining relations only.

double oracle_invariant(const PressureLaw& law, double a, double b) {
    return num::adaptive_simpson(
        [&](double r) { return std::sqrt(law.dp_drho(r)) / r; }, a, b, 1e-13);
}

// Rankine-Hugoniot residual of a proposed discontinuity (ul, ur, s).
double rh_residual(const PressureLaw& law, const State& ul, const State& ur,
                   double s) {
    double r1 = s * (ur.rho - ul.rho) - (ur.q - ul.q);
    double r2 = s * (ur.q - ul.q) -
                (dynamic_pressure(law, ur) - dynamic_pressure(law, ul));
    return std::max(std::abs(r1), std::abs(r2));
}

// Brute-force nested bisection for the kink traces: outer scan/bisection in
// the left-trace density, inner bisection matching the momentum on the
// backward 2-curve. Uses only quadrature invariants and the RH q-relation.
struct OracleTraces {
    double rho_minus, rho_plus, q;
};

double oracle_v1(const PressureLaw& law, const State& ul, double rho) {
    double v0 = ul.velocity();
    if (rho <= ul.rho) return v0 - oracle_invariant(law, ul.rho, rho);
    double dp = pressure(law, rho) - pressure(law, ul.rho);
    return v0 - std::sqrt(dp * (rho - ul.rho) / (rho * ul.rho));
}

double oracle_v2(const PressureLaw& law, const State& ur, double rho) {
    double v0 = ur.velocity();
    if (rho <= ur.rho) return v0 + oracle_invariant(law, ur.rho, rho);
    double dp = pressure(law, rho) - pressure(law, ur.rho);
    return v0 + std::sqrt(dp * (rho - ur.rho) / (rho * ur.rho));
}

OracleTraces oracle_kink_traces(const PressureLaw& law, const State& ul,
                                const State& ur, double coef) {
    auto rho_plus_of_q = [&](double q) {
        auto f = [&](double rho) { return rho * oracle_v2(law, ur, rho) - q; };
        double lo = 1e-6, hi = 1e4;
        for (int it = 0; it < 300; ++it) {
            double mid = std::sqrt(lo * hi);
            if (f(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto residual = [&](double rm) {
        double q = rm * oracle_v1(law, ul, rm);
        double rp = rho_plus_of_q(q);
        State um{rm, q}, up{rp, q};
        return (dynamic_pressure(law, up) - dynamic_pressure(law, um)) - coef * q;
    };
    // Scan for a sign change around the data, then bisect.
    double lo = 0.2 * std::min(ul.rho, ur.rho), hi = 5.0 * std::max(ul.rho, ur.rho);
    double prev_x = lo, prev_f = residual(lo);
    double blo = 0, bhi = 0;
    bool found = false;
    for (int i = 1; i <= 400; ++i) {
        double x = lo * std::pow(hi / lo, (double)i / 400);
        double fx = residual(x);
        if (prev_f * fx <= 0.0) {
            blo = prev_x;
            bhi = x;
            found = true;
            break;
        }
        prev_x = x;
        prev_f = fx;
    }
    REQUIRE(found);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (blo + bhi);
        if (residual(blo) * residual(mid) <= 0.0)
            bhi = mid;
        else
            blo = mid;
    }
    double rm = 0.5 * (blo + bhi);
    double q = rm * oracle_v1(law, ul, rm);
    return {rm, rho_plus_of_q(q), q};
}

} // namespace

TEST_CASE("lax curve identity at the base density") {
    auto law = PressureLaw::gamma_law(2.0);
    State u0{1.3, 0.4};
    for (auto fam : {WaveFamily::one, WaveFamily::two}) {
        State u = lax_curve(law, fam, u0, u0.rho);
        CHECK(u.rho == doctest::Approx(u0.rho));
        CHECK(u.q == doctest::Approx(u0.q).epsilon(1e-14));
    }
    CHECK_THROWS_AS(lax_curve(law, WaveFamily::one, u0, -1.0), DomainError);
}

TEST_CASE("gamma = 2 rarefaction branch closed form") {
    auto law = PressureLaw::gamma_law(2.0);
    State u0{1.0, 0.0};
    State u = lax_curve(law, WaveFamily::one, u0, 0.25);
    CHECK(u.velocity() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(u.q == doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-13));
    // Quadrature oracle for the invariant integral.
    double v_oracle = -oracle_invariant(law, 1.0, 0.25);
    CHECK(u.velocity() == doctest::Approx(v_oracle).epsilon(1e-12));
}

TEST_CASE("1-shock branch satisfies Rankine-Hugoniot") {
    auto law = PressureLaw::gamma_law(2.0);
    State u0{1.0, 0.0};
    State u = lax_curve(law, WaveFamily::one, u0, 2.0);
    CHECK(u.velocity() ==
          doctest::Approx(-std::sqrt((pressure(law, 2.0) - 1.0) * 1.0 / 2.0))
              .epsilon(1e-13));
    double s = (u.q - u0.q) / (u.rho - u0.rho);
    CHECK(rh_residual(law, u0, u, s) <= 1e-12);
}

TEST_CASE("classical Riemann problem") {
    auto law = PressureLaw::gamma_law(2.0);
    SUBCASE("equal data give an empty pattern") {
        State u{1.2, 0.3};
        auto p = solve_classical(law, u, u);
        CHECK(p.waves.empty());
    }
    SUBCASE("symmetric expansion") {
        double a = 0.1;
        auto p = solve_classical(law, {1.0, -a}, {1.0, a});
        REQUIRE(p.waves.size() == 2);
        State um = p.waves[0].right;
        CHECK(std::abs(um.q) <= 1e-13);
        CHECK(um.rho < 1.0);
        CHECK(p.waves[0].kind == WaveKind::rarefaction);
        CHECK(p.waves[1].kind == WaveKind::rarefaction);
        // middle density from the invariant relation, via the oracle
        auto f = [&](double rho) { return oracle_v1(law, {1.0, -a}, rho); };
        double lo = 0.5, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        CHECK(um.rho == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    }
    SUBCASE("head-on double shock") {
        auto p = solve_classical(law, {1.0, 1.0}, {1.0, -1.0});
        REQUIRE(p.waves.size() == 2);
        State um = p.waves[0].right;
        CHECK(std::abs(um.q) <= 1e-12);
        CHECK(um.rho > 1.0);
        for (const Wave& w : p.waves) {
            CHECK(w.kind == WaveKind::shock);
            CHECK(rh_residual(law, w.left, w.right, w.speed_lo) <= 1e-11);
        }
    }
}

TEST_CASE("kink solver") {
    auto law = PressureLaw::gamma_law(2.0);
    SourceCoefficients coeffs;
    coeffs.f = ScalarField::constant(1.0);
    coeffs.kappa = ResponseFunction::identity();

    SUBCASE("theta = 0 reduces to the classical solution") {
        State ul{1.0, 0.2}, ur{1.05, 0.1};
        auto pk = solve_kink(law, ul, ur, 0.0, 1.0, coeffs);
        auto pc = solve_classical(law, ul, ur);
        REQUIRE(pk.zero_wave() != nullptr);
        CHECK(pk.zero_wave()->strength() <= 1e-12);
        std::size_t j = 0;
        for (const Wave& w : pk.waves) {
            if (w.kind == WaveKind::zero_wave) continue;
            REQUIRE(j < pc.waves.size());
            CHECK(norm1(w.left - pc.waves[j].left) <= 1e-12);
            CHECK(norm1(w.right - pc.waves[j].right) <= 1e-12);
            ++j;
        }
        CHECK(j == pc.waves.size());
    }
    SUBCASE("stationary kink pair resolves to a pure zero-wave") {
        double theta = kPi / 2, q = 0.1, rho_l = 1.0;
        double coef = coeffs.kappa(kink_jump_magnitude(theta));
        // left trace (rho_l, q); right density from the oracle jump relation
        auto traces = oracle_kink_traces(law, {rho_l, q}, {rho_l, q}, coef);
        (void)traces;
        // Build the exact pair directly: P(rp, q) = P(rho_l, q) + coef q.
        double target = dynamic_pressure(law, {rho_l, q}) + coef * q;
        auto f = [&](double rho) {
            return dynamic_pressure(law, {rho, q}) - target;
        };
        double lo = 0.5, hi = 4.0;
        for (int it = 0; it < 300; ++it) {
            double mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        double rho_r = 0.5 * (lo + hi);
        auto p = solve_kink(law, {rho_l, q}, {rho_r, q}, theta, 1.0, coeffs);
        REQUIRE(p.zero_wave() != nullptr);
        CHECK(p.waves.size() == 1); // zero-wave only
        CHECK(norm1(p.zero_wave()->left - State{rho_l, q}) <= 1e-9);
        CHECK(norm1(p.zero_wave()->right - State{rho_r, q}) <= 1e-9);
    }
    SUBCASE("equal data across a right-angle kink: traces match the oracle") {
        State u{1.0, 0.1};
        double theta = kPi / 2;
        auto p = solve_kink(law, u, u, theta, 1.0, coeffs);
        REQUIRE(p.zero_wave() != nullptr);
        JunctionRule rule{coeffs.kappa(kink_jump_magnitude(theta)), 0.0};
        auto r = junction_residuals(law, p, rule);
        CHECK(r.q_jump <= 1e-10);
        CHECK(r.p_jump <= 1e-10);
        auto oracle =
            oracle_kink_traces(law, u, u, rule.q_coef);
        CHECK(p.zero_wave()->left.rho == doctest::Approx(oracle.rho_minus).epsilon(1e-8));
        CHECK(p.zero_wave()->right.rho == doctest::Approx(oracle.rho_plus).epsilon(1e-8));
        CHECK(p.zero_wave()->left.q == doctest::Approx(oracle.q).epsilon(1e-7));
    }
}

TEST_CASE("junction residual invariants on randomized subsonic data") {
    auto law = PressureLaw::gamma_law(1.4);
    SourceCoefficients coeffs;
    coeffs.f = ScalarField::constant(1.0);
    coeffs.kappa = ResponseFunction::identity();
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> drho(-0.05, 0.05), dq(-0.05, 0.05),
        dth(-2.0, 2.0), df(0.0, 1.5);
    for (int i = 0; i < 60; ++i) {
        State ul{1.0 + drho(rng), 0.1 + dq(rng)};
        State ur{1.0 + drho(rng), 0.1 + dq(rng)};
        double theta = dth(rng), fv = df(rng);
        auto p = solve_kink(law, ul, ur, theta, fv, coeffs);
        JunctionRule rule{fv * coeffs.kappa(kink_jump_magnitude(theta)), 0.0};
        auto r = junction_residuals(law, p, rule);
        double qs = std::max(1.0, std::abs(p.zero_wave()->right.q));
        double Ps = std::max(1.0, dynamic_pressure(law, p.zero_wave()->right));
        CHECK(r.q_jump <= 1e-10 * qs);
        CHECK(r.p_jump <= 1e-10 * Ps);
        for (const Wave& w : p.waves) {
            CHECK(is_subsonic(law, w.left));
            CHECK(is_subsonic(law, w.right));
        }
    }
}

TEST_CASE("entropy admissibility across shocks") {
    auto law = PressureLaw::gamma_law(1.4);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> da(-0.4, 0.4);
    for (int i = 0; i < 50; ++i) {
        State ul{std::exp(da(rng)), da(rng)};
        State ur{std::exp(da(rng)), da(rng)};
        auto p = solve_classical(law, ul, ur);
        for (const Wave& w : p.waves) {
            if (w.kind != WaveKind::shock) continue;
            double s = w.speed_lo;
            double prod = s * (entropy(law, w.right) - entropy(law, w.left)) -
                          (entropy_flux(law, w.right) - entropy_flux(law, w.left));
            CHECK(prod >= -1e-10);
        }
    }
}

TEST_CASE("sampling a pattern") {
    auto law = PressureLaw::gamma_law(2.0);
    SUBCASE("rays outside all waves return the data") {
        auto p = solve_classical(law, {1.0, 1.0}, {1.0, -1.0});
        State l = sample(law, p, -10.0);
        State r = sample(law, p, 10.0);
        CHECK(norm1(l - State{1.0, 1.0}) == doctest::Approx(0.0));
        CHECK(norm1(r - State{1.0, -1.0}) == doctest::Approx(0.0));
    }
    SUBCASE("xi = 0 on a kink pattern returns the right trace") {
        SourceCoefficients coeffs;
        coeffs.f = ScalarField::constant(1.0);
        coeffs.kappa = ResponseFunction::identity();
        State u{1.0, 0.1};
        auto p = solve_kink(law, u, u, kPi / 2, 1.0, coeffs);
        State at0 = sample(law, p, 0.0);
        CHECK(norm1(at0 - p.zero_wave()->right) == doctest::Approx(0.0));
    }
    SUBCASE("rarefaction interiors satisfy the characteristic equation") {
        auto p = solve_classical(law, {1.0, 0.0}, {0.4, 0.0});
        REQUIRE(p.waves.size() == 2);
        const Wave& w = p.waves[0];
        REQUIRE(w.kind == WaveKind::rarefaction);
        for (double frac : {0.25, 0.5, 0.75}) {
            double xi = w.speed_lo + frac * (w.speed_hi - w.speed_lo);
            State u = sample(law, p, xi);
            CHECK(std::abs(u.velocity() - law.sound_speed(u.rho) - xi) <= 1e-10);
        }
    }
    SUBCASE("piecewise continuity away from shocks") {
        auto p = solve_classical(law, {1.0, 0.4}, {1.3, -0.2});
        double last = -1e9;
        State prev = sample(law, p, -5.0);
        for (double xi = -5.0; xi <= 5.0; xi += 0.01) {
            State cur = sample(law, p, xi);
            bool near_shock = false;
            for (const Wave& w : p.waves)
                if (w.kind == WaveKind::shock &&
                    std::abs(xi - w.speed_lo) <= 0.011)
                    near_shock = true;
            if (!near_shock && last > -1e8)
                CHECK(norm1(cur - prev) <= 0.1);
            prev = cur;
            last = xi;
        }
    }
}

TEST_CASE("solver map is Lipschitz under data perturbations") {
    auto law = PressureLaw::gamma_law(1.4);
    State ul{1.0, 0.2}, ur{1.1, -0.1};
    auto p0 = solve_classical(law, ul, ur);
    double eps = 1e-6;
    auto p1 = solve_classical(law, {ul.rho + eps, ul.q - eps},
                              {ur.rho - eps, ur.q + eps});
    REQUIRE(p0.waves.size() == p1.waves.size());
    for (std::size_t i = 0; i < p0.waves.size(); ++i) {
        CHECK(norm1(p1.waves[i].right - p0.waves[i].right) <= 100 * eps);
        CHECK(std::abs(p1.waves[i].speed_lo - p0.waves[i].speed_lo) <= 100 * eps);
    }
}

TEST_CASE("near-vacuum expansion is a solver-range error") {
    auto law = PressureLaw::gamma_law(1.4);
    CHECK_THROWS_AS(solve_classical(law, {1e-6, -3.0}, {1e-6, 3.0}),
                    SolverDomainError);
}
