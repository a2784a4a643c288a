#include "pipeflow/refsolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pipeflow {

namespace {

struct Flux {
    double mass;
    double momentum;
};

Flux physical_flux(const PressureLaw& law, const State& u) {
    return {u.q, u.q * u.q / u.rho + law.pressure(u.rho)};
}

Flux rusanov(const PressureLaw& law, const State& ul, const State& ur) {
    Flux fl = physical_flux(law, ul);
    Flux fr = physical_flux(law, ur);
    double sl = std::abs(ul.velocity()) + law.sound_speed(ul.rho);
    double sr = std::abs(ur.velocity()) + law.sound_speed(ur.rho);
    double smax = std::max(sl, sr);
    return {0.5 * (fl.mass + fr.mass) - 0.5 * smax * (ur.rho - ul.rho),
            0.5 * (fl.momentum + fr.momentum) - 0.5 * smax * (ur.q - ul.q)};
}

} // namespace

void FVParams::validate() const {
    if (cells < 4) throw ConfigError("fv: need at least four cells");
    if (!(x_min < x_max)) throw ConfigError("fv: empty domain");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("fv: CFL must be in (0, 1)");
    if (!(t_end >= 0.0)) throw ConfigError("fv: t_end must be >= 0");
}

std::vector<PiecewiseState> fv_run(const PressureLaw& law,
                                   const PipeGeometry& geom,
                                   const SourceCoefficients& coeffs,
                                   const std::function<State(double)>& u0,
                                   const FVParams& params) {
    params.validate();
    const int n = params.cells;
    const double dx = (params.x_max - params.x_min) / n;

    // Kink interfaces and their momentum-flux corrections.
    std::vector<double> kink_coef(static_cast<std::size_t>(n) + 1, 0.0);
    for (const Kink& k : geom.kinks()) {
        double fi = (k.position - params.x_min) / dx;
        long long i = std::llround(fi);
        if (std::abs(fi - (double)i) > 1e-9 || i < 0 || i > n) {
            std::ostringstream os;
            os << "fv: kink at x = " << k.position
               << " is not aligned with a cell interface";
            throw ConfigError(os.str());
        }
        kink_coef[(std::size_t)i] =
            coeffs.f(k.position) * coeffs.kappa(kink_jump_magnitude(k.angle));
    }

    std::vector<State> u((std::size_t)n);
    std::vector<double> centers((std::size_t)n);
    for (int i = 0; i < n; ++i) {
        centers[(std::size_t)i] = params.x_min + (i + 0.5) * dx;
        u[(std::size_t)i] = u0(centers[(std::size_t)i]);
        require_valid(u[(std::size_t)i], "fv_run");
    }

    // Cell source coefficients (friction response and gravity), sampled at
    // the centers; kinks act only through the interface corrections.
    std::vector<double> fr((std::size_t)n), gv((std::size_t)n);
    for (int i = 0; i < n; ++i) {
        double x = centers[(std::size_t)i];
        fr[(std::size_t)i] = coeffs.f(x) * coeffs.kappa(geom.curvature(x));
        gv[(std::size_t)i] = coeffs.gravity * std::sin(geom.inclination(x));
    }

    auto snapshot = [&](double t) {
        PiecewiseState s;
        s.time = t;
        for (int i = 0; i <= n; ++i) s.edges.push_back(params.x_min + i * dx);
        s.values.push_back(u.front()); // constant extrapolation outside
        for (int i = 0; i < n; ++i) s.values.push_back(u[(std::size_t)i]);
        s.values.push_back(u.back());
        return s;
    };

    std::vector<double> snaps = params.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t snap_i = 0;

    std::vector<PiecewiseState> out;
    double t = 0.0;

    auto hyperbolic_step = [&](double dt) {
        std::vector<Flux> F((std::size_t)n + 1);
        for (int i = 1; i < n; ++i)
            F[(std::size_t)i] = rusanov(law, u[(std::size_t)i - 1], u[(std::size_t)i]);
        // Outflow boundaries.
        F[0] = physical_flux(law, u.front());
        F[(std::size_t)n] = physical_flux(law, u.back());
        for (int i = 0; i < n; ++i) {
            double fin_mass = F[(std::size_t)i].mass;
            double fin_mom = F[(std::size_t)i].momentum;
            // The cell right of a kink interface sees the corrected momentum
            // flux: [P] = + f kappa(2|sin(theta/2)|) q across the interface,
            // with q taken as the interface mass flux.
            if (kink_coef[(std::size_t)i] != 0.0)
                fin_mom += kink_coef[(std::size_t)i] * F[(std::size_t)i].mass;
            double fout_mass = F[(std::size_t)i + 1].mass;
            double fout_mom = F[(std::size_t)i + 1].momentum;
            u[(std::size_t)i].rho -= dt / dx * (fout_mass - fin_mass);
            u[(std::size_t)i].q -= dt / dx * (fout_mom - fin_mom);
            if (!(u[(std::size_t)i].rho > 0.0))
                throw InstabilityError("fv: negative density");
        }
    };
    auto source_step = [&](double dt) {
        for (int i = 0; i < n; ++i) {
            // Exact exponential decay for the friction part, explicit gravity.
            double k = fr[(std::size_t)i];
            if (k != 0.0) u[(std::size_t)i].q *= std::exp(-k * dt);
            u[(std::size_t)i].q -= dt * gv[(std::size_t)i] * u[(std::size_t)i].rho;
        }
    };

    long long steps = 0;
    while (t < params.t_end) {
        double smax = 1e-12;
        for (const State& c : u)
            smax = std::max(smax, std::abs(c.velocity()) + law.sound_speed(c.rho));
        double dt = params.cfl * dx / smax;
        dt = std::min(dt, params.t_end - t);
        while (snap_i < snaps.size() && snaps[snap_i] <= t) {
            out.push_back(snapshot(t));
            ++snap_i;
        }
        if (snap_i < snaps.size()) dt = std::min(dt, snaps[snap_i] - t);
        if (dt <= 0.0) {
            ++snap_i;
            continue;
        }
        hyperbolic_step(0.5 * dt);
        source_step(dt);
        hyperbolic_step(0.5 * dt);
        t += dt;
        if (++steps > 100000000ll)
            throw InstabilityError("fv: step-count cap exceeded");
    }
    while (snap_i < snaps.size() && snaps[snap_i] <= t + 1e-12) {
        out.push_back(snapshot(snaps[snap_i]));
        ++snap_i;
    }
    out.push_back(snapshot(t));
    return out;
}

} // namespace pipeflow
