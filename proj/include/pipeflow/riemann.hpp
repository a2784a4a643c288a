#pragma once

#include <vector>

#include "pipeflow/geometry.hpp"
#include "pipeflow/pressure_law.hpp"
#include "pipeflow/state.hpp"

namespace pipeflow {

enum class WaveFamily { one, two, stationary };
enum class WaveKind { shock, rarefaction, zero_wave };

/// One wave of a resolved Riemann solution. Shocks and zero-waves have
/// speed_lo == speed_hi; rarefactions span [speed_lo, speed_hi] with the
/// edges equal to the characteristic speeds v -/+ c of the bracketing states.
struct Wave {
    WaveFamily family = WaveFamily::one;
    WaveKind kind = WaveKind::shock;
    State left, right;
    double speed_lo = 0.0, speed_hi = 0.0;

    double strength() const { return norm1(right - left); }
};

struct WavePattern {
    State left_datum, right_datum;
    std::vector<Wave> waves; // ordered by speed

    const Wave* zero_wave() const;
};

/// Signed coupling rule at a stationary discontinuity:
///   [q] = 0,   [P] = q_coef * q_plus + rho_coef * rho_plus,
/// with [.] = right trace - left trace.
struct JunctionRule {
    double q_coef = 0.0;
    double rho_coef = 0.0;
    bool trivial() const { return q_coef == 0.0 && rho_coef == 0.0; }
};

/// State reached from u0 along an admissible wave curve, parametrized by the
/// density of the target state. Family one: u0 is the left state and the
/// curve gives admissible right states (rarefaction for s <= rho0, 1-shock
/// with rho increasing for s >= rho0). Family two: u0 is the right state and
/// the curve gives admissible left states.
State lax_curve(const PressureLaw& law, WaveFamily family, const State& u0,
                double s);

/// Right state of a 2-wave with left state u0 and density s (the forward
/// orientation of the family-two curve; used by the simplified solver).
State lax_curve_forward2(const PressureLaw& law, const State& u0, double s);

/// Exact solution of the classical Riemann problem for the p-system:
/// a 1-wave and a 2-wave around the middle state, found by a bracketed
/// Newton iteration in the middle density. Equal data yield an empty
/// pattern. Throws SolverDomainError if no intersection exists in the
/// admissible range (near vacuum).
WavePattern solve_classical(const PressureLaw& law, const State& u_l,
                            const State& u_r);

/// Riemann problem with a stationary discontinuity at x = 0 whose traces
/// satisfy the coupling rule: a 1-wave in x < 0, a zero-wave at x = 0 and a
/// 2-wave in x > 0, all states subsonic. Solved by a damped Newton iteration
/// on the two trace densities with a nested-bisection fallback. Throws
/// SolverDomainError when no subsonic trace pair exists (data too far from a
/// stationary solution).
WavePattern solve_junction(const PressureLaw& law, const State& u_l,
                           const State& u_r, const JunctionRule& rule);

/// Kink Riemann problem: traces obey q- = q+ and
/// P- = P+ - f * kappa(2|sin(theta/2)|) * q+.
WavePattern solve_kink(const PressureLaw& law, const State& u_l,
                       const State& u_r, double theta, double f_at_kink,
                       const SourceCoefficients& coeffs);

/// State on the ray x/t = xi of a self-similar pattern. Rays equal to a
/// shock or zero-wave speed return the right state (half-open convention);
/// rarefaction interiors are found by inverting the characteristic speed
/// along the curve.
State sample(const PressureLaw& law, const WavePattern& pattern, double xi);

/// Residuals of the coupling conditions of a junction pattern:
/// |[q]| and |[P] - (q_coef q+ + rho_coef rho+)|, unscaled.
struct JunctionResiduals {
    double q_jump = 0.0;
    double p_jump = 0.0;
};
JunctionResiduals junction_residuals(const PressureLaw& law,
                                     const WavePattern& pattern,
                                     const JunctionRule& rule);

} // namespace pipeflow
