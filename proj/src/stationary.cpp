#include "pipeflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pipeflow/numerics.hpp"

namespace pipeflow {

double StationaryProfile::rho_at(double x) const {
    if (pieces.empty()) {
        // Piecewise-constant profile (at most one kink, no smooth pieces).
        if (breakpoints.empty() || x < breakpoints.front()) return rho_left_ambient;
        return rho_right_ambient;
    }
    if (x <= pieces.front().front_x()) return rho_left_ambient;
    if (x >= pieces.back().back_x()) return rho_right_ambient;
    // Left-continuous at interior kinks.
    for (const auto& piece : pieces) {
        if (x <= piece.back_x()) return piece.value_at(x);
    }
    return rho_right_ambient;
}

State StationaryProfile::state_at(double x) const { return {rho_at(x), q}; }

double stationary_point_jump(const PressureLaw& law, double rho_left, double q,
                             const JunctionRule& rule) {
    State ul{rho_left, q};
    require_valid(ul, "stationary_point_jump");
    if (!is_subsonic(law, ul))
        throw SolverDomainError("stationary_point_jump: left trace not subsonic");
    const double P_left = dynamic_pressure(law, ul);
    // Subsonic branch: P(., q) strictly increases in rho above the sonic
    // density, and the rho_coef term keeps monotonicity for the weights used
    // here (|rho_coef| << p').
    auto f = [&](double rho) {
        State u{rho, q};
        return dynamic_pressure(law, u) - rule.rho_coef * rho -
               (P_left + rule.q_coef * q);
    };
    double lo = std::max(law.sonic_density(q) * (1.0 + 1e-12), law.rho_min());
    double hi = law.rho_max();
    double flo = f(lo), fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw SolverDomainError(
            "stationary_point_jump: no subsonic density matches the required "
            "dynamic pressure");
    double rho = num::bisect(f, lo, hi, {.x_tol = 1e-15});
    // Newton polish with the analytic derivative.
    for (int it = 0; it < 8; ++it) {
        State u{rho, q};
        double g = dynamic_pressure(law, u) - rule.rho_coef * rho -
                   (P_left + rule.q_coef * q);
        double dg = law.dp_drho(rho) - q * q / (rho * rho) - rule.rho_coef;
        if (dg <= 0.0) break;
        double next = rho - g / dg;
        if (next <= lo || next >= hi) break;
        rho = next;
        if (std::abs(g) <= 1e-14 * std::max(1.0, std::abs(P_left))) break;
    }
    State out{rho, q};
    if (!is_subsonic(law, out))
        throw SolverDomainError("stationary_point_jump: right trace not subsonic");
    return rho;
}

double jump_across_kink(const PressureLaw& law, double rho_left, double q,
                        double theta, double f_val,
                        const SourceCoefficients& coeffs) {
    if (f_val < 0.0) throw DomainError("jump_across_kink: f must be >= 0");
    JunctionRule rule;
    rule.q_coef = f_val * coeffs.kappa(kink_jump_magnitude(theta));
    return stationary_point_jump(law, rho_left, q, rule);
}

num::OdeSolution integrate_smooth(const PressureLaw& law,
                                  const PipeGeometry& geom,
                                  const SourceCoefficients& coeffs, double q,
                                  double rho_start, double x_start, double x_end,
                                  double margin_floor) {
    State u0{rho_start, q};
    require_valid(u0, "integrate_smooth");
    if (!(subsonic_margin(law, u0) > margin_floor))
        throw SolverDomainError("integrate_smooth: start state too close to sonic");

    auto rhs = [&](double x, double rho) {
        double kap = coeffs.kappa(geom.curvature(x));
        double src = -coeffs.f(x) * kap * q -
                     rho * coeffs.gravity * std::sin(geom.inclination(x));
        double dP = law.dp_drho(rho) - q * q / (rho * rho);
        return src / dP;
    };
    auto guard = [&](double, double rho) {
        State u{rho, q};
        if (!(rho > law.rho_min()) || !(rho < law.rho_max()))
            throw SolverDomainError("integrate_smooth: density left the admissible range");
        if (subsonic_margin(law, u) < margin_floor)
            throw SolverDomainError("integrate_smooth: sonic approach");
    };
    return num::integrate_ode(rhs, x_start, x_end, rho_start, 1e-10, 1e-12, guard);
}

StationaryProfile build_stationary(const PressureLaw& law,
                                   const PipeGeometry& geom,
                                   const SourceCoefficients& coeffs, double q,
                                   double rho_at_left_infinity) {
    StationaryProfile prof;
    prof.q = q;
    prof.rho_left_ambient = rho_at_left_infinity;
    prof.rho_right_ambient = rho_at_left_infinity;

    std::vector<double> bp = geom.breakpoints();
    prof.breakpoints = bp;
    if (bp.empty()) return prof; // straight pipe: globally constant

    auto kink_at = [&](double x) -> const Kink* {
        for (const Kink& k : geom.kinks())
            if (std::abs(k.position - x) <= 1e-9) return &k;
        return nullptr;
    };
    auto apply_kink = [&](double rho, const Kink& k) {
        try {
            return jump_across_kink(law, rho, q, k.angle, coeffs.f(k.position),
                                    coeffs);
        } catch (const SolverDomainError& e) {
            throw SolverDomainError(std::string(e.what()) + " (at kink x = " +
                                    std::to_string(k.position) + ")");
        }
    };

    double rho = rho_at_left_infinity;
    if (const Kink* k = kink_at(bp.front())) rho = apply_kink(rho, *k);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double a = bp[i], b = bp[i + 1];
        try {
            prof.pieces.push_back(integrate_smooth(law, geom, coeffs, q, rho, a, b));
        } catch (const SolverDomainError& e) {
            throw SolverDomainError(std::string(e.what()) + " (while integrating [" +
                                    std::to_string(a) + ", " + std::to_string(b) +
                                    "])");
        }
        rho = prof.pieces.back().back_y();
        if (const Kink* k = kink_at(b)) rho = apply_kink(rho, *k);
    }
    prof.rho_right_ambient = rho;
    return prof;
}

void write_profile_csv(std::ostream& os, const PressureLaw& law,
                       const StationaryProfile& profile, int samples_per_piece) {
    os << "x,rho,q,P\n";
    char buf[160];
    auto row = [&](double x, double rho) {
        State u{rho, profile.q};
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", x, rho,
                      profile.q, dynamic_pressure(law, u));
        os << buf;
    };
    if (profile.pieces.empty()) {
        row(0.0, profile.rho_left_ambient);
        return;
    }
    double x0 = profile.pieces.front().front_x();
    double x1 = profile.pieces.back().back_x();
    double margin = 0.25 * std::max(1.0, x1 - x0);
    row(x0 - margin, profile.rho_left_ambient);
    for (const auto& piece : profile.pieces) {
        for (int i = 0; i <= samples_per_piece; ++i) {
            double x = piece.front_x() +
                       (piece.back_x() - piece.front_x()) * i / samples_per_piece;
            row(x, piece.value_at(x));
        }
    }
    row(x1 + margin, profile.rho_right_ambient);
}

} // namespace pipeflow
