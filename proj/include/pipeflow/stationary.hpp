#pragma once

#include <iosfwd>
#include <vector>

#include "pipeflow/geometry.hpp"
#include "pipeflow/pressure_law.hpp"
#include "pipeflow/riemann.hpp"

namespace pipeflow {

/// Stationary solution of the curved-pipe balance law: q constant, rho
/// piecewise smooth, solving d/dx P(rho(x), q) = -f kappa(||Gamma''||) q
/// - rho g sin(alpha) along smooth arcs and the kink jump relation
/// P(rho+, q) = P(rho-, q) + f kappa(2|sin(theta/2)|) q at each kink.
/// Constant outside the geometry's support. Immutable once built.
struct StationaryProfile {
    double q = 0.0;
    double rho_left_ambient = 1.0;
    double rho_right_ambient = 1.0;
    std::vector<double> breakpoints; // kinks + segment boundaries
    std::vector<num::OdeSolution> pieces; // dense output per smooth piece

    double rho_at(double x) const;
    State state_at(double x) const;
};

/// Density right of a kink given the left density: monotone inversion of
/// P(rho, q) = P(rho_left, q) + f_val * kappa(2|sin(theta/2)|) * q on the
/// subsonic branch. Throws SolverDomainError if the required level leaves
/// the subsonic range of P.
double jump_across_kink(const PressureLaw& law, double rho_left, double q,
                        double theta, double f_val,
                        const SourceCoefficients& coeffs);

/// Right trace of a general stationary point source: [q] = 0 and
/// [P] = rule.q_coef * q + rule.rho_coef * rho_plus.
double stationary_point_jump(const PressureLaw& law, double rho_left, double q,
                             const JunctionRule& rule);

/// Integrates rho'(x) = (-f kappa q - rho g sin(alpha)) / (p'(rho) - q^2/rho^2)
/// over [x_start, x_end] (one smooth piece; either direction). Aborts with
/// SolverDomainError when the subsonic margin falls below margin_floor.
num::OdeSolution integrate_smooth(const PressureLaw& law,
                                  const PipeGeometry& geom,
                                  const SourceCoefficients& coeffs, double q,
                                  double rho_start, double x_start, double x_end,
                                  double margin_floor = 1e-6);

/// Marches left to right across the whole pipe: ODE on each smooth piece,
/// jump at each kink; constant outside the support.
StationaryProfile build_stationary(const PressureLaw& law,
                                   const PipeGeometry& geom,
                                   const SourceCoefficients& coeffs, double q,
                                   double rho_at_left_infinity);

/// CSV export (columns x, rho, q, P).
void write_profile_csv(std::ostream& os, const PressureLaw& law,
                       const StationaryProfile& profile, int samples_per_piece = 64);

} // namespace pipeflow
