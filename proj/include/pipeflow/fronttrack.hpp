#pragma once

#include <utility>
#include <vector>

#include "pipeflow/discretize.hpp"
#include "pipeflow/riemann.hpp"

namespace pipeflow {

enum class FrontKind { shock, rarefaction, zero_wave, non_physical };

/// A moving discontinuity of the piecewise-constant approximation.
/// Positions are stored lazily: position(t) = x_ref + speed * (t - t_ref).
/// Zero-waves are pinned at their source point and never move.
struct Front {
    long long id = 0;
    double x_ref = 0.0;
    double t_ref = 0.0;
    double speed = 0.0;
    FrontKind kind = FrontKind::shock;
    WaveFamily family = WaveFamily::one;
    State ul, ur;
    int generation = 0;
    int source_index = -1; // grid point index for zero-waves

    double position(double t) const { return x_ref + speed * (t - t_ref); }
    double strength() const { return norm1(ur - ul); }
    bool physical() const { return kind != FrontKind::non_physical; }
};

struct SolverParams {
    double eps_rarefaction = 1e-3;  // max characteristic ramp per fan piece
    double eps_nonphysical = 1e-7;  // simplified-solver threshold
    double delta_domain = 1.0;      // TV budget for the initial moving waves
    double tv_guard_factor = 8.0;   // runtime TV cap, relative to the budget
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    double sample_dx = 0.0;         // smooth-datum sampling step (0 = grid spacing)
    double time_guard = 1e-13;      // events closer than this are merged
    std::size_t max_fronts = 200000;
    std::size_t max_events = 2000000;
    bool record_history = false;    // keep per-event front lists (weak residuals)

    void validate() const;
};

/// Piecewise-constant snapshot: values[i] on (edges[i-1], edges[i]).
struct PiecewiseState {
    double time = 0.0;
    std::vector<double> edges;
    std::vector<State> values; // values.size() == edges.size() + 1

    State at(double x) const;
    double total_variation() const;
};

/// Exact L1 distance between two piecewise-constant snapshots (component-sum
/// norm, interval sweep, no quadrature error). The ambient states must
/// agree; otherwise the distance is infinite and a DomainError is thrown.
double l1_distance(const PiecewiseState& a, const PiecewiseState& b);

/// L1 distance restricted to the window [x_lo, x_hi].
double l1_distance(const PiecewiseState& a, const PiecewiseState& b,
                   double x_lo, double x_hi);

/// Signed integral of (rho_a - rho_b) dx over the common support.
double signed_mass_difference(const PiecewiseState& a, const PiecewiseState& b);

struct FTState {
    double time = 0.0;
    State left_ambient;
    std::vector<Front> fronts; // sorted by position
    double lambda_np = 0.0;    // non-physical front speed, fixed per run
    double initial_moving_tv = 0.0;
    long long next_id = 0;

    State right_ambient() const {
        return fronts.empty() ? left_ambient : fronts.back().ur;
    }
    double tv() const;
    PiecewiseState snapshot() const;
};

/// Piecewise description of the initial datum.
struct BumpSpec {
    double amplitude_rho = 0.0;
    double amplitude_q = 0.0;
    double center = 0.0;
    double width = 1.0; // half-width of the C2 bump (1-s^2)^3
};

struct InitialDatum {
    enum class Type { riemann, piecewise, stationary_perturbation };
    Type type = Type::riemann;
    // riemann
    State left, right;
    double x0 = 0.0;
    // piecewise
    std::vector<double> breakpoints;
    std::vector<State> states;
    // stationary_perturbation: discrete stationary chain seeded on the left,
    // plus smooth bumps sampled on the dyadic lattice
    double q = 0.0;
    double rho_left = 1.0;
    std::vector<BumpSpec> bumps;

    static InitialDatum riemann_datum(State l, State r, double x = 0.0);
    static InitialDatum piecewise_datum(std::vector<double> breaks,
                                        std::vector<State> vals);
    static InitialDatum stationary_datum(double q, double rho_left,
                                         std::vector<BumpSpec> bumps = {});
};

struct EventRecord {
    double t = 0.0;
    double x = 0.0;
    char type = 'C'; // C classical, J junction, S simplified, N np-transmit
    int n_in = 0, n_out = 0;
    double strength_in = 0.0, strength_out = 0.0;
};

struct Trajectory {
    std::vector<PiecewiseState> snapshots;
    std::vector<EventRecord> events;
    std::vector<std::pair<double, std::vector<Front>>> history;
    std::vector<std::pair<double, double>> tv_series; // (t, TV) at events
    double tv_initial = 0.0, tv_max = 0.0, tv_final = 0.0;
    double max_zero_wave_q_jump = 0.0;      // measured |[q]| over zero-waves
    double max_junction_residual = 0.0;     // measured |[P] - rule|
    long long total_events = 0;
    FTState final_state;

    const PiecewiseState& snapshot_at(double t) const;
};

/// Samples the datum to piecewise-constant (breakpoints at the grid points
/// and at the datum's own jumps), resolves every initial discontinuity with
/// the junction solver at source points and the classical solver elsewhere,
/// and splits rarefactions into fans with ramp <= eps_rarefaction. Throws
/// SolverDomainError if the moving-wave TV exceeds params.delta_domain.
FTState initialize(const PressureLaw& law, const DeltaSourceGrid& grid,
                   const InitialDatum& u0, const SolverParams& params);

/// Earliest pairwise collision among adjacent fronts: (time, indices of the
/// colliding cluster), or (+inf, {}) if none.
std::pair<double, std::vector<std::size_t>> next_event(const FTState& state);

/// Resolves the next event in place and returns its record. No-op (record
/// with n_in = 0) when no event remains.
EventRecord resolve(FTState& state, const PressureLaw& law,
                    const DeltaSourceGrid& grid, const SolverParams& params);

/// Event-driven evolution to params.t_end with snapshots at the requested
/// times; deterministic (ties broken by time, then leftmost position, then
/// creation order).
Trajectory run(FTState state, const PressureLaw& law,
               const DeltaSourceGrid& grid, const SolverParams& params);

/// Compactly supported C2 test function B((t-tc)/tw) B((x-xc)/xw) with
/// B(s) = (1-s^2)^3.
struct TestFunctionSpec {
    double t_center = 0.5, t_halfwidth = 0.4;
    double x_center = 0.0, x_halfwidth = 1.0;
};

struct WeakResiduals {
    double mass = 0.0;
    double momentum = 0.0;
    double entropy_production = 0.0; // >= 0 up to tolerance for entropy solutions
};

/// Weak-form residuals of a recorded trajectory against the dyadic system
/// the engine solves (point sources at the grid points), evaluated exactly
/// along the front polygons with Gauss quadrature in time. Requires
/// record_history and a test function supported inside (0, t_end).
WeakResiduals weak_solution_residual(const Trajectory& traj,
                                     const PressureLaw& law,
                                     const DeltaSourceGrid& grid,
                                     const TestFunctionSpec& phi);

} // namespace pipeflow
