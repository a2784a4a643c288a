#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pipeflow/numerics.hpp"
#include "pipeflow/pressure_law.hpp"

using namespace pipeflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Quadrature oracle for the hydrostatic law: p(a) = g Int_0^a (h(a)-h(s)) ds
// straight from the defining integral, independent of the closed form.
double preissmann_pressure_oracle(double r, double d, double g, double a) {
    double h_a = preissmann_height(r, d, a);
    return g * num::adaptive_simpson(
                   [&](double s) { return h_a - preissmann_height(r, d, s); },
                   0.0, a, 1e-13);
}

// Quadrature oracle for the internal energy integral.
double internal_energy_oracle(const PressureLaw& law, double rho) {
    return num::adaptive_simpson(
        [&](double r) { return law.pressure(r) / (r * r); }, law.rho_ref(), rho,
        1e-13);
}

} // namespace

TEST_CASE("gamma-law pressure") {
    auto law = PressureLaw::gamma_law(2.0);
    CHECK(pressure(law, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    auto law14 = PressureLaw::gamma_law(1.4);
    CHECK_THROWS_AS(pressure(law14, 0.0), DomainError);
    CHECK_THROWS_AS(pressure(law14, -1.0), DomainError);
}

TEST_CASE("preissmann pressure matches the quadrature oracle") {
    auto law = PressureLaw::preissmann(1.0, 0.1, 9.81);
    SUBCASE("first-branch boundary") {
        double a = 0.5 * kPi;
        double expect = preissmann_pressure_oracle(1.0, 0.1, 9.81, a);
        CHECK(pressure(law, a) == doctest::Approx(expect).epsilon(1e-10));
    }
    SUBCASE("log grid across all three branches") {
        double a2 = kPi - 0.01 / (2.0 * kPi);
        for (double a : {0.05, 0.3, 0.5 * kPi, 2.0, a2, 3.5, 6.0, 20.0, 100.0}) {
            double expect = preissmann_pressure_oracle(1.0, 0.1, 9.81, a);
            CHECK(pressure(law, a) ==
                  doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("sound speed") {
    auto law2 = PressureLaw::gamma_law(2.0);
    CHECK(sound_speed(law2, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    auto law1 = PressureLaw::gamma_law(1.0);
    CHECK(sound_speed(law1, 5.0) == doctest::Approx(1.0).epsilon(1e-14));

    // Finite-difference oracle for the hydrostatic law.
    auto lp = PressureLaw::preissmann(1.0, 0.1, 9.81);
    double a = 1.0, h = 1e-5;
    double fd = std::sqrt((pressure(lp, a + h) - pressure(lp, a - h)) / (2 * h));
    CHECK(std::abs(fd - sound_speed(lp, a)) <= 1e-6);
}

TEST_CASE("dynamic pressure") {
    auto law = PressureLaw::gamma_law(2.0);
    CHECK(dynamic_pressure(law, {1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(dynamic_pressure(law, {2.0, 2.0}) == doctest::Approx(6.0));

    auto lp = PressureLaw::preissmann(1.0, 0.1, 9.81);
    double expect = 0.09 + preissmann_pressure_oracle(1.0, 0.1, 9.81, 1.0);
    CHECK(dynamic_pressure(lp, {1.0, 0.3}) ==
          doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("entropy and entropy flux") {
    SUBCASE("reference state has zero entropy") {
        auto law = PressureLaw::gamma_law(1.4, 2.5);
        CHECK(entropy(law, {2.5, 0.0}) == doctest::Approx(0.0));
        CHECK(entropy_flux(law, {2.5, 0.0}) == doctest::Approx(0.0));
    }
    SUBCASE("gamma = 2 closed form") {
        auto law = PressureLaw::gamma_law(2.0);
        CHECK(entropy(law, {2.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("isothermal closed form against quadrature") {
        auto law = PressureLaw::gamma_law(1.0);
        double e = std::exp(1.0);
        State u{e, e};
        double expect_E = 0.5 * e + e * 1.0;
        CHECK(entropy(law, u) == doctest::Approx(expect_E).epsilon(1e-12));
        double E_quad = 0.5 * u.q * u.q / u.rho + u.rho * internal_energy_oracle(law, u.rho);
        double F_quad = u.velocity() * (E_quad + pressure(law, u.rho));
        CHECK(entropy(law, u) == doctest::Approx(E_quad).epsilon(1e-10));
        CHECK(entropy_flux(law, u) == doctest::Approx(F_quad).epsilon(1e-10));
    }
    SUBCASE("preissmann entropy against quadrature") {
        auto law = PressureLaw::preissmann(1.0, 0.1, 9.81);
        State u{2.0, 0.4};
        double E_quad =
            0.5 * u.q * u.q / u.rho + u.rho * internal_energy_oracle(law, u.rho);
        CHECK(entropy(law, u) == doctest::Approx(E_quad).epsilon(1e-10));
    }
}

TEST_CASE("subsonic region") {
    auto law2 = PressureLaw::gamma_law(2.0);
    CHECK(is_subsonic(law2, {1.0, 0.0}));
    CHECK_FALSE(is_subsonic(law2, {2.0, 4.0})); // |v| = c, boundary excluded
    auto law14 = PressureLaw::gamma_law(1.4);
    CHECK(is_subsonic(law14, {1.0, 1.1})); // sqrt(1.4) > 1.1
    CHECK(subsonic_margin(law14, {1.0, 1.1}) ==
          doctest::Approx(std::sqrt(1.4) - 1.1).epsilon(1e-14));
}

TEST_CASE("preissmann height branches") {
    double r = 1.0, d = 0.1;
    CHECK(preissmann_height(r, d, 0.5 * kPi * r * r) ==
          doctest::Approx(r).epsilon(1e-14));
    double a2 = kPi * r * r - d * d / (2.0 * kPi);
    CHECK(preissmann_height(r, d, a2) ==
          doctest::Approx(2.0 * r - d / kPi).epsilon(1e-13));
    CHECK(preissmann_height(1.0, 0.05, 0.5) ==
          doctest::Approx(std::sqrt(1.0 / kPi)).epsilon(1e-14));
}

TEST_CASE("height continuity at both branch points") {
    for (double r : {0.5, 1.0, 2.0}) {
        for (double d : {0.02, 0.1, 0.3 * r}) {
            double a1 = 0.5 * kPi * r * r;
            double a2 = kPi * r * r - d * d / (2.0 * kPi);
            for (double a : {a1, a2}) {
                double lo = preissmann_height(r, d, a * (1.0 - 1e-13));
                double hi = preissmann_height(r, d, a * (1.0 + 1e-13));
                CHECK(std::abs(hi - lo) <= 1e-12 * std::max(1.0, a));
            }
        }
    }
}

TEST_CASE("convexity sampling on a log grid") {
    auto check_law = [](const PressureLaw& law, double lo, double hi) {
        int n = 160;
        for (int i = 0; i <= n; ++i) {
            double rho = lo * std::pow(hi / lo, (double)i / n);
            double h = 1e-6 * rho;
            double p0 = pressure(law, rho - h), p1 = pressure(law, rho),
                   p2 = pressure(law, rho + h);
            double d1 = (p2 - p0) / (2 * h);
            double d2 = (p2 - 2 * p1 + p0) / (h * h);
            CHECK(d1 >= -1e-12);
            CHECK(d2 >= -1e-10 * std::max(1.0, std::abs(d2)));
            CHECK(law.dp_drho(rho) == doctest::Approx(d1).epsilon(1e-5));
        }
    };
    check_law(PressureLaw::gamma_law(1.4), 1e-2, 1e2);
    check_law(PressureLaw::gamma_law(1.0), 1e-2, 1e2);
    check_law(PressureLaw::preissmann(1.0, 0.1, 9.81), 1e-2, 1e2);
}

TEST_CASE("entropy compatibility identities") {
    auto laws = {PressureLaw::gamma_law(2.0), PressureLaw::gamma_law(1.4),
                 PressureLaw::preissmann(1.0, 0.1, 9.81)};
    for (const auto& law : laws) {
        for (double rho : {0.5, 1.0, 2.3}) {
            for (double q : {-0.4, 0.0, 0.7}) {
                State u{rho, q};
                // F = v (E + p) pointwise
                CHECK(entropy_flux(law, u) ==
                      doctest::Approx(u.velocity() *
                                      (entropy(law, u) + pressure(law, rho)))
                          .epsilon(1e-13));
                // dE/dq = v by central differences
                double h = 1e-6 * std::max(1.0, std::abs(q));
                double dEdq = (entropy(law, {rho, q + h}) -
                               entropy(law, {rho, q - h})) /
                              (2 * h);
                CHECK(std::abs(dEdq - u.velocity()) <= 1e-8);
            }
        }
    }
}

TEST_CASE("dynamic pressure is monotone in rho inside the subsonic region") {
    auto laws = {PressureLaw::gamma_law(2.0), PressureLaw::gamma_law(1.4),
                 PressureLaw::preissmann(1.0, 0.1, 9.81)};
    for (const auto& law : laws) {
        for (double rho : {0.6, 1.0, 2.0, 5.0}) {
            for (double q : {-0.3, 0.2, 0.5}) {
                State u{rho, q};
                if (!is_subsonic(law, u)) continue;
                double h = 1e-6 * rho;
                double dP = (dynamic_pressure(law, {rho + h, q}) -
                             dynamic_pressure(law, {rho - h, q})) /
                            (2 * h);
                CHECK(dP > 0.0);
            }
        }
    }
}

TEST_CASE("degenerate and invalid law construction") {
    CHECK_THROWS_AS(PressureLaw::gamma_law(0.9), ConfigError);
    CHECK_THROWS_AS(PressureLaw::preissmann(1.0, 1.5, 9.81), ConfigError);
    CHECK_THROWS_AS(PressureLaw::preissmann(1.0, 0.1, 0.0), ConfigError);
    auto law = PressureLaw::gamma_law(1.4);
    CHECK_THROWS_AS(pressure(law, 1e12), DomainError); // outside admissible range
}
