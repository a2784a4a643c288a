#pragma once

#include <string>

#include "pipeflow/state.hpp"

namespace pipeflow {

enum class LawKind { gamma_law, preissmann };

/// Convex barotropic pressure law p(rho) with derivatives, the internal
/// energy integral for the entropy pair, and the Riemann-invariant integral
/// used by the wave curves.
///
/// Two laws are provided:
///  - gamma_law:  p(rho) = rho^gamma, gamma >= 1;
///  - preissmann: the hydrostatic law of a circular pipe of radius r with a
///    slot of width d on top, p(a) = g * Int_0^a (h(a) - h(s)) ds, where a
///    plays the role of density (wet cross-section area). The pressure and
///    its derivatives use the exact piecewise antiderivative of h; adaptive
///    quadrature of the defining integral is kept only as a test oracle.
///
/// All operations check the declared admissible density range and throw
/// DomainError outside it; values are never clamped silently. p' > 0 is
/// required on the admissible range (strict, a documented strengthening of
/// the usual p' >= 0).
class PressureLaw {
public:
    static PressureLaw gamma_law(double gamma, double rho_ref = 1.0);
    static PressureLaw preissmann(double radius, double slot_width,
                                  double gravity, double rho_ref = 1.0);

    LawKind kind() const { return kind_; }
    double rho_ref() const { return rho_ref_; }
    double rho_min() const { return rho_min_; }
    double rho_max() const { return rho_max_; }
    double gamma_exponent() const { return gamma_; }
    double pipe_radius() const { return radius_; }
    double slot_width() const { return slot_; }
    double slot_gravity() const { return g_; }

    double pressure(double rho) const;
    double dp_drho(double rho) const;
    double d2p_drho2(double rho) const;
    double sound_speed(double rho) const;

    /// Int_{rho_ref}^{rho} p(r)/r^2 dr  (specific internal energy).
    double internal_energy(double rho) const;

    /// Int_{a}^{b} c(r)/r dr along the admissible range.
    double riemann_invariant_integral(double rho_a, double rho_b) const;

    /// Largest density at which rho*c(rho) == |q| (sonic boundary for the
    /// momentum level q); densities above it are subsonic. Returns rho_min
    /// for q == 0.
    double sonic_density(double q) const;

    std::string describe() const;

private:
    PressureLaw() = default;
    void check_rho(double rho) const;

    LawKind kind_ = LawKind::gamma_law;
    double rho_ref_ = 1.0;
    double rho_min_ = 1e-8;
    double rho_max_ = 1e8;
    // gamma_law
    double gamma_ = 2.0;
    // preissmann
    double radius_ = 1.0;
    double slot_ = 0.1;
    double g_ = 9.81;
    double a1_ = 0.0, a2_ = 0.0; // branch points of h
    double H1_ = 0.0, H2_ = 0.0; // cumulative Int h at the branch points
};

/// Height of water in a circular cross-section of radius r with a Preissmann
/// slot of width d, as a function of the wet area a (three branches,
/// continuous across both branch points).
double preissmann_height(double r, double d, double a);

double pressure(const PressureLaw& law, double rho);
double sound_speed(const PressureLaw& law, double rho);

/// P(rho, q) = q^2/rho + p(rho), the momentum flux.
double dynamic_pressure(const PressureLaw& law, const State& u);

/// E(rho, q) = q^2/(2 rho) + rho * Int_{rho_ref}^{rho} p(r)/r^2 dr.
double entropy(const PressureLaw& law, const State& u);

/// F(rho, q) = v (E + p).
double entropy_flux(const PressureLaw& law, const State& u);

/// sqrt(p'(rho)) - |q/rho|; positive inside the subsonic region.
double subsonic_margin(const PressureLaw& law, const State& u);

/// |q/rho| < sqrt(p'(rho)), strict.
bool is_subsonic(const PressureLaw& law, const State& u);

} // namespace pipeflow
