#include "pipeflow/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pipeflow {

namespace {
constexpr double kDropTol = 1e-14;
}

double DeltaSourceGrid::total_weight() const {
    double w = 0.0;
    for (const SourcePoint& p : points)
        w += std::abs(p.q_coefficient) + std::abs(p.gravity_coefficient);
    return w;
}

DeltaSourceGrid build_grid(const PipeGeometry& geom,
                           const SourceCoefficients& coeffs, int n) {
    if (n < 0 || n > 24) throw ConfigError("build_grid: level must be in [0, 24]");
    DeltaSourceGrid grid;
    grid.level = n;
    grid.spacing = std::ldexp(1.0, -n); // 2^-n

    const double extent = std::ldexp(1.0, n); // index range covers [-2^n, 2^n]
    if (geom.support_radius() > extent + 1e-12) {
        std::ostringstream os;
        os << "build_grid: geometry support radius " << geom.support_radius()
           << " exceeds the level-" << n << " dyadic range [-" << extent << ", "
           << extent << "]";
        throw ConfigError(os.str());
    }

    // Kink indices (must be dyadic at this level).
    std::vector<long long> kink_indices;
    for (const Kink& k : geom.kinks()) {
        double jd = k.position / grid.spacing;
        long long j = std::llround(jd);
        if (std::abs(jd - (double)j) > 1e-9) {
            std::ostringstream os;
            os << "build_grid: kink at x = " << k.position
               << " is not a dyadic abscissa at level " << n;
            throw ConfigError(os.str());
        }
        kink_indices.push_back(j);
    }

    const double R = geom.support_radius();
    long long j_lo = (long long)std::floor(-R / grid.spacing) - 1;
    long long j_hi = (long long)std::ceil(R / grid.spacing) + 1;
    long long j_cap = (long long)std::llround(std::ldexp(1.0, 2 * n));
    j_lo = std::max(j_lo, -j_cap);
    j_hi = std::min(j_hi, j_cap);

    std::size_t next_kink = 0;
    for (long long j = j_lo; j <= j_hi; ++j) {
        double x = (double)j * grid.spacing;
        bool is_kink = false;
        const Kink* kink = nullptr;
        for (std::size_t i = 0; i < kink_indices.size(); ++i) {
            if (kink_indices[i] == j) {
                is_kink = true;
                kink = &geom.kinks()[i];
                break;
            }
        }
        SourcePoint p;
        p.x = x;
        if (is_kink) {
            p.kind = SourceKind::kink;
            p.theta = kink->angle;
            p.q_coefficient = coeffs.f(x) * coeffs.kappa(kink_jump_magnitude(kink->angle));
            // Gravity is sampled at every index; alpha takes its right limit
            // at kinks.
            double alpha_r = std::asin(
                std::clamp(geom.tangent_right(x)[2], -1.0, 1.0));
            p.gravity_coefficient =
                grid.spacing * coeffs.gravity * std::sin(alpha_r);
            ++next_kink;
        } else {
            p.kind = SourceKind::smooth_sample;
            p.q_coefficient =
                grid.spacing * coeffs.f(x) * coeffs.kappa(geom.curvature(x));
            p.gravity_coefficient =
                grid.spacing * coeffs.gravity * std::sin(geom.inclination(x));
        }
        if (std::abs(p.q_coefficient) < kDropTol &&
            std::abs(p.gravity_coefficient) < kDropTol)
            continue;
        grid.points.push_back(p);
    }
    (void)next_kink;
    return grid;
}

State stationary_jump_at_point(const PressureLaw& law, const SourcePoint& point,
                               const State& u_left) {
    require_valid(u_left, "stationary_jump_at_point");
    double rho = stationary_point_jump(law, u_left.rho, u_left.q, point.rule());
    return {rho, u_left.q};
}

} // namespace pipeflow
