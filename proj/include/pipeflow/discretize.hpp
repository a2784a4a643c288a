#pragma once

#include <vector>

#include "pipeflow/geometry.hpp"
#include "pipeflow/riemann.hpp"
#include "pipeflow/stationary.hpp"

namespace pipeflow {

enum class SourceKind { smooth_sample, kink };

/// One active point of the dyadic point-source approximation. Coefficients
/// are stored as in the defining sums: q_coefficient is the f*kappa weight
/// (2^-n f kappa(||Gamma''||) for samples, f kappa(2|sin(theta/2)|) for
/// kinks, n-independent); gravity_coefficient is the signed 2^-n g sin(alpha)
/// weight (right limit of alpha at kinks).
struct SourcePoint {
    double x = 0.0;
    SourceKind kind = SourceKind::smooth_sample;
    double q_coefficient = 0.0;
    double gravity_coefficient = 0.0;
    double theta = 0.0; // kink angle, 0 for samples

    /// Signed trace-coupling rule. Smooth samples follow the distributed
    /// model: [P] = -(w_q q+ + w_g rho+). Kinks follow the junction
    /// condition: [P] = +f kappa(2|sin(theta/2)|) q+ - w_g rho+.
    JunctionRule rule() const {
        JunctionRule r;
        r.q_coef = (kind == SourceKind::kink) ? q_coefficient : -q_coefficient;
        r.rho_coef = -gravity_coefficient;
        return r;
    }
};

/// Dyadic grid of point sources at level n: sampled smooth sources at
/// x = j 2^-n (j not a kink index), exact kink sources at the kink
/// positions. Points with both coefficients below 1e-14 are dropped.
struct DeltaSourceGrid {
    int level = 0;
    double spacing = 1.0; // 2^-n
    std::vector<SourcePoint> points; // sorted by x

    double total_weight() const;
};

/// Builds the level-n grid. Every kink must sit at a dyadic abscissa
/// j 2^-n with |j| <= 2^(2n) (ConfigError otherwise, naming the kink), and
/// the geometry's support must fit inside [-2^n, 2^n].
DeltaSourceGrid build_grid(const PipeGeometry& geom,
                           const SourceCoefficients& coeffs, int n);

/// Right trace of the stationary jump at a grid point given the left trace.
State stationary_jump_at_point(const PressureLaw& law, const SourcePoint& point,
                               const State& u_left);

} // namespace pipeflow
