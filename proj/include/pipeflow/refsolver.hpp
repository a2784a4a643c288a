#pragma once

#include <functional>
#include <vector>

#include "pipeflow/fronttrack.hpp"
#include "pipeflow/geometry.hpp"
#include "pipeflow/pressure_law.hpp"

namespace pipeflow {

/// First-order finite-volume reference solver: local Lax-Friedrichs
/// (Rusanov) fluxes, explicit time stepping at a fixed CFL number, Strang
/// splitting for the distributed source (hyperbolic half step, source step,
/// hyperbolic half step), and kink sources as momentum-flux corrections
/// f kappa(2|sin(theta/2)|) q at the kink interfaces. Accuracy is secondary;
/// the solver exists to cross-validate front tracking.
struct FVParams {
    int cells = 400;
    double x_min = -2.0, x_max = 2.0;
    double cfl = 0.45; // in (0, 1)
    double t_end = 1.0;
    std::vector<double> snapshot_times;

    void validate() const;
};

/// Runs the scheme from the pointwise initial datum (cell values sampled at
/// centers). Kinks must be aligned with cell interfaces. Returns snapshots
/// at the requested times plus the final time. Throws InstabilityError on
/// negative densities.
std::vector<PiecewiseState> fv_run(const PressureLaw& law,
                                   const PipeGeometry& geom,
                                   const SourceCoefficients& coeffs,
                                   const std::function<State(double)>& u0,
                                   const FVParams& params);

} // namespace pipeflow
