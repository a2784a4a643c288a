#include "pipeflow/fronttrack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace pipeflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lam1(const PressureLaw& law, const State& u) {
    return u.velocity() - law.sound_speed(u.rho);
}

double lam2(const PressureLaw& law, const State& u) {
    return u.velocity() + law.sound_speed(u.rho);
}

double char_speed_bound(const PressureLaw& law, const State& u) {
    return std::abs(u.velocity()) + law.sound_speed(u.rho);
}

std::string describe_state(const State& u) {
    std::ostringstream os;
    os << "(rho=" << u.rho << ", q=" << u.q << ")";
    return os.str();
}

// --- pattern -> fronts -------------------------------------------------------

void append_shock_front(std::vector<Front>& out, const Wave& w, int gen) {
    Front f;
    f.kind = FrontKind::shock;
    f.family = w.family;
    f.ul = w.left;
    f.ur = w.right;
    f.speed = w.speed_lo;
    f.generation = gen;
    out.push_back(f);
}

// Fan pieces travel at their outer-edge characteristic (family one: left
// edge, family two: right edge), keeping the per-piece entropy production
// nonnegative near the reference state.
void append_rarefaction_fronts(const PressureLaw& law, double eps_rar,
                               std::vector<Front>& out, const Wave& w, int gen) {
    double span = w.speed_hi - w.speed_lo;
    int k = std::max(1, (int)std::ceil(span / eps_rar));
    std::vector<State> nodes((std::size_t)k + 1);
    nodes.front() = w.left;
    nodes.back() = w.right;
    const State& anchor = (w.family == WaveFamily::one) ? w.left : w.right;
    for (int i = 1; i < k; ++i) {
        double rho = w.left.rho + (w.right.rho - w.left.rho) * i / k;
        nodes[(std::size_t)i] = lax_curve(law, w.family, anchor, rho);
    }
    for (int i = 0; i < k; ++i) {
        Front f;
        f.kind = FrontKind::rarefaction;
        f.family = w.family;
        f.ul = nodes[(std::size_t)i];
        f.ur = nodes[(std::size_t)i + 1];
        f.speed = (w.family == WaveFamily::one) ? lam1(law, f.ul)
                                                : lam2(law, f.ur);
        f.generation = gen;
        out.push_back(f);
    }
}

void append_pattern_fronts(const PressureLaw& law, double eps_rar,
                           const WavePattern& p, int zero_source_index, int gen,
                           std::vector<Front>& out) {
    for (const Wave& w : p.waves) {
        switch (w.kind) {
        case WaveKind::shock:
            append_shock_front(out, w, gen);
            break;
        case WaveKind::rarefaction:
            append_rarefaction_fronts(law, eps_rar, out, w, gen);
            break;
        case WaveKind::zero_wave: {
            Front f;
            f.kind = FrontKind::zero_wave;
            f.family = WaveFamily::stationary;
            f.ul = w.left;
            f.ur = w.right;
            f.speed = 0.0;
            f.generation = 0;
            f.source_index = zero_source_index;
            out.push_back(f);
            break;
        }
        }
    }
}

// Rebuilt physical front from a new left state with the density increment
// preserved (simplified-solver transmission).
Front rebuild_front(const PressureLaw& law, WaveFamily family, const State& ul,
                    double sigma, int gen) {
    double rho = ul.rho + sigma;
    if (!(rho > law.rho_min()) || !(rho < law.rho_max()))
        throw SolverDomainError("rebuild_front: density left the admissible range");
    State ur = (family == WaveFamily::one)
                   ? lax_curve(law, WaveFamily::one, ul, rho)
                   : lax_curve_forward2(law, ul, rho);
    Front f;
    f.family = family;
    f.ul = ul;
    f.ur = ur;
    f.generation = gen;
    bool shock = (family == WaveFamily::one) ? (sigma > 0.0) : (sigma < 0.0);
    if (shock && std::abs(ur.rho - ul.rho) > 0.0) {
        f.kind = FrontKind::shock;
        f.speed = (ur.q - ul.q) / (ur.rho - ul.rho);
    } else {
        f.kind = FrontKind::rarefaction;
        f.speed = (family == WaveFamily::one) ? lam1(law, ul) : lam2(law, ur);
    }
    return f;
}

Front make_zero_front(const State& ul, const State& ur, int source_index) {
    Front f;
    f.kind = FrontKind::zero_wave;
    f.family = WaveFamily::stationary;
    f.ul = ul;
    f.ur = ur;
    f.speed = 0.0;
    f.source_index = source_index;
    return f;
}

Front make_np_front(const State& ul, const State& ur, double lambda_np, int gen) {
    Front f;
    f.kind = FrontKind::non_physical;
    f.family = WaveFamily::stationary;
    f.ul = ul;
    f.ur = ur;
    f.speed = lambda_np;
    f.generation = gen;
    return f;
}

bool negligible(const State& a, const State& b) {
    return norm1(b - a) <= 1e-16 * std::max({1.0, std::abs(a.rho), std::abs(a.q)});
}

struct ClusterOutcome {
    std::vector<Front> out;
    char type = 'C';
};

ClusterOutcome resolve_exact(const PressureLaw& law, const DeltaSourceGrid& grid,
                             const SolverParams& params,
                             const std::vector<Front>& in, int zero_idx,
                             double t, double x) {
    ClusterOutcome oc;
    const State& ul = in.front().ul;
    const State& ur = in.back().ur;
    int gen = 0;
    for (const Front& f : in) gen = std::max(gen, f.generation);
    ++gen;
    try {
        if (zero_idx >= 0) {
            const SourcePoint& pt =
                grid.points[(std::size_t)in[(std::size_t)zero_idx].source_index];
            WavePattern p = solve_junction(law, ul, ur, pt.rule());
            append_pattern_fronts(law, params.eps_rarefaction, p,
                                  in[(std::size_t)zero_idx].source_index, gen,
                                  oc.out);
            oc.type = 'J';
        } else {
            WavePattern p = solve_classical(law, ul, ur);
            append_pattern_fronts(law, params.eps_rarefaction, p, -1, gen, oc.out);
            oc.type = 'C';
        }
    } catch (const Error& e) {
        std::ostringstream os;
        os << e.what() << " [interaction at t=" << t << ", x=" << x
           << ", u_l=" << describe_state(ul) << ", u_r=" << describe_state(ur)
           << "]";
        throw SolverDomainError(os.str());
    }
    return oc;
}

ClusterOutcome resolve_cluster(const PressureLaw& law,
                               const DeltaSourceGrid& grid,
                               const SolverParams& params, double lambda_np,
                               const std::vector<Front>& in, double t, double x) {
    int zero_idx = -1;
    int np_count = 0;
    double moving_strength = 0.0;
    std::vector<int> movers;
    for (int i = 0; i < (int)in.size(); ++i) {
        if (in[(std::size_t)i].kind == FrontKind::zero_wave) {
            zero_idx = i;
        } else {
            movers.push_back(i);
            moving_strength += in[(std::size_t)i].strength();
            if (!in[(std::size_t)i].physical()) ++np_count;
        }
    }
    const State ul = in.front().ul;
    const State ur = in.back().ur;
    int gen = 0;
    for (const Front& f : in) gen = std::max(gen, f.generation);
    ++gen;

    if (zero_idx >= 0) {
        const SourcePoint& pt =
            grid.points[(std::size_t)in[(std::size_t)zero_idx].source_index];
        const int src = in[(std::size_t)zero_idx].source_index;
        // Non-physical pass-through: re-solve the pinned jump from the new
        // left trace; the non-physical front carries the mismatch onward.
        if (movers.size() == 1 && np_count == 1) {
            try {
                State mid = stationary_jump_at_point(law, pt, ul);
                ClusterOutcome oc;
                oc.type = 'N';
                oc.out.push_back(make_zero_front(ul, mid, src));
                if (!negligible(mid, ur))
                    oc.out.push_back(make_np_front(mid, ur, lambda_np, gen));
                return oc;
            } catch (const Error&) {
                return resolve_exact(law, grid, params, in, zero_idx, t, x);
            }
        }
        // Simplified transmission of one weak physical front.
        if (movers.size() == 1 && np_count == 0 &&
            moving_strength < params.eps_nonphysical) {
            const Front& m = in[(std::size_t)movers[0]];
            try {
                if (movers[0] < zero_idx && m.family == WaveFamily::two) {
                    State mid = stationary_jump_at_point(law, pt, ul);
                    double sigma = m.ur.rho - m.ul.rho;
                    Front tf = rebuild_front(law, WaveFamily::two, mid, sigma, gen);
                    ClusterOutcome oc;
                    oc.type = 'S';
                    oc.out.push_back(make_zero_front(ul, mid, src));
                    oc.out.push_back(tf);
                    if (!negligible(tf.ur, ur))
                        oc.out.push_back(make_np_front(tf.ur, ur, lambda_np, gen));
                    return oc;
                }
                if (movers[0] > zero_idx && m.family == WaveFamily::one) {
                    double sigma = m.ur.rho - m.ul.rho;
                    Front tf = rebuild_front(law, WaveFamily::one, ul, sigma, gen);
                    State mid = stationary_jump_at_point(law, pt, tf.ur);
                    ClusterOutcome oc;
                    oc.type = 'S';
                    oc.out.push_back(tf);
                    oc.out.push_back(make_zero_front(tf.ur, mid, src));
                    if (!negligible(mid, ur))
                        oc.out.push_back(make_np_front(mid, ur, lambda_np, gen));
                    return oc;
                }
            } catch (const Error&) {
                // fall through to the exact junction solver
            }
        }
        return resolve_exact(law, grid, params, in, zero_idx, t, x);
    }

    // Non-physical front overtaking a physical front: pass through.
    if (np_count > 0) {
        if (in.size() == 2 && !in[0].physical() && in[1].physical()) {
            try {
                double sigma = in[1].ur.rho - in[1].ul.rho;
                Front tf = rebuild_front(law, in[1].family, ul, sigma, gen);
                ClusterOutcome oc;
                oc.type = 'N';
                oc.out.push_back(tf);
                if (!negligible(tf.ur, ur))
                    oc.out.push_back(make_np_front(tf.ur, ur, lambda_np, gen));
                return oc;
            } catch (const Error&) {
                return resolve_exact(law, grid, params, in, -1, t, x);
            }
        }
        return resolve_exact(law, grid, params, in, -1, t, x);
    }

    // Weak physical interaction away from sources: simplified solver.
    if (in.size() == 2 && moving_strength < params.eps_nonphysical) {
        const Front& a = in[0];
        const Front& b = in[1];
        try {
            ClusterOutcome oc;
            oc.type = 'S';
            if (a.family == b.family) {
                double sigma = (a.ur.rho - a.ul.rho) + (b.ur.rho - b.ul.rho);
                State mid = ul;
                if (std::abs(sigma) > 1e-16 * std::max(1.0, std::abs(ul.rho))) {
                    Front tf = rebuild_front(law, a.family, ul, sigma, gen);
                    mid = tf.ur;
                    oc.out.push_back(tf);
                }
                if (!negligible(mid, ur))
                    oc.out.push_back(make_np_front(mid, ur, lambda_np, gen));
                return oc;
            }
            if (a.family == WaveFamily::two && b.family == WaveFamily::one) {
                double s1 = b.ur.rho - b.ul.rho;
                double s2 = a.ur.rho - a.ul.rho;
                Front f1 = rebuild_front(law, WaveFamily::one, ul, s1, gen);
                Front f2 = rebuild_front(law, WaveFamily::two, f1.ur, s2, gen);
                oc.out.push_back(f1);
                oc.out.push_back(f2);
                if (!negligible(f2.ur, ur))
                    oc.out.push_back(make_np_front(f2.ur, ur, lambda_np, gen));
                return oc;
            }
        } catch (const Error&) {
            // fall through
        }
    }
    return resolve_exact(law, grid, params, in, -1, t, x);
}

double collision_time(const Front& a, const Front& b, double now) {
    if (!(a.speed > b.speed)) return kInf;
    double num = (b.x_ref - b.speed * b.t_ref) - (a.x_ref - a.speed * a.t_ref);
    double t = num / (a.speed - b.speed);
    return std::max(t, now);
}

} // namespace

// --- SolverParams / PiecewiseState --------------------------------------------

void SolverParams::validate() const {
    if (!(eps_rarefaction > 0.0) || !(eps_nonphysical > 0.0) ||
        !(delta_domain > 0.0) || !(tv_guard_factor > 0.0))
        throw ConfigError("solver params: tolerances must be positive");
    if (!(eps_nonphysical < eps_rarefaction))
        throw ConfigError(
            "solver params: eps_nonphysical must be below eps_rarefaction");
    if (!(t_end >= 0.0)) throw ConfigError("solver params: t_end must be >= 0");
    for (double ts : snapshot_times)
        if (ts < 0.0 || ts > t_end)
            throw ConfigError("solver params: snapshot times must lie in [0, t_end]");
}

State PiecewiseState::at(double x) const {
    std::size_t i =
        (std::size_t)(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
    return values[i];
}

double PiecewiseState::total_variation() const {
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        tv += norm1(values[i + 1] - values[i]);
    return tv;
}

namespace {

void check_comparable(const PiecewiseState& a, const PiecewiseState& b) {
    const double tol = 1e-12;
    if (norm1(a.values.front() - b.values.front()) > tol ||
        norm1(a.values.back() - b.values.back()) > tol)
        throw DomainError(
            "l1_distance: ambient states differ, distance is not finite");
}

double sweep_l1(const PiecewiseState& a, const PiecewiseState& b, double lo,
                double hi, bool signed_rho_only) {
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double e : a.edges)
        if (e > lo && e < hi) cuts.push_back(e);
    for (double e : b.edges)
        if (e > lo && e < hi) cuts.push_back(e);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double len = cuts[i + 1] - cuts[i];
        if (len <= 0.0) continue;
        double xm = 0.5 * (cuts[i] + cuts[i + 1]);
        State ua = a.at(xm), ub = b.at(xm);
        if (signed_rho_only)
            acc += (ua.rho - ub.rho) * len;
        else
            acc += norm1(ua - ub) * len;
    }
    return acc;
}

std::pair<double, double> common_window(const PiecewiseState& a,
                                        const PiecewiseState& b) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto* s : {&a, &b}) {
        if (s->edges.empty()) continue;
        if (!any) {
            lo = s->edges.front();
            hi = s->edges.back();
            any = true;
        } else {
            lo = std::min(lo, s->edges.front());
            hi = std::max(hi, s->edges.back());
        }
    }
    if (!any) return {0.0, 0.0};
    double margin = 0.01 * std::max(1.0, hi - lo);
    return {lo - margin, hi + margin};
}

} // namespace

double l1_distance(const PiecewiseState& a, const PiecewiseState& b) {
    check_comparable(a, b);
    auto [lo, hi] = common_window(a, b);
    if (lo == hi) return 0.0;
    return sweep_l1(a, b, lo, hi, false);
}

double l1_distance(const PiecewiseState& a, const PiecewiseState& b, double x_lo,
                   double x_hi) {
    return sweep_l1(a, b, x_lo, x_hi, false);
}

double signed_mass_difference(const PiecewiseState& a, const PiecewiseState& b) {
    auto [lo, hi] = common_window(a, b);
    if (lo == hi) return 0.0;
    return sweep_l1(a, b, lo, hi, true);
}

// --- FTState -------------------------------------------------------------------

double FTState::tv() const {
    double total = 0.0;
    for (const Front& f : fronts) total += f.strength();
    return total;
}

PiecewiseState FTState::snapshot() const {
    PiecewiseState s;
    s.time = time;
    s.values.push_back(left_ambient);
    for (const Front& f : fronts) {
        s.edges.push_back(f.position(time));
        s.values.push_back(f.ur);
    }
    return s;
}

InitialDatum InitialDatum::riemann_datum(State l, State r, double x) {
    InitialDatum d;
    d.type = Type::riemann;
    d.left = l;
    d.right = r;
    d.x0 = x;
    return d;
}

InitialDatum InitialDatum::piecewise_datum(std::vector<double> breaks,
                                           std::vector<State> vals) {
    if (vals.size() != breaks.size() + 1)
        throw ConfigError("piecewise datum: need one more state than breakpoints");
    InitialDatum d;
    d.type = Type::piecewise;
    d.breakpoints = std::move(breaks);
    d.states = std::move(vals);
    return d;
}

InitialDatum InitialDatum::stationary_datum(double q, double rho_left,
                                            std::vector<BumpSpec> bumps) {
    InitialDatum d;
    d.type = Type::stationary_perturbation;
    d.q = q;
    d.rho_left = rho_left;
    d.bumps = std::move(bumps);
    return d;
}

// --- initialize ------------------------------------------------------------------

namespace {

State bump_value(const std::vector<BumpSpec>& bumps, double x) {
    State d{0.0, 0.0};
    for (const BumpSpec& b : bumps) {
        double s = (x - b.center) / b.width;
        if (s <= -1.0 || s >= 1.0) continue;
        double w = 1.0 - s * s;
        double shape = w * w * w;
        d.rho += b.amplitude_rho * shape;
        d.q += b.amplitude_q * shape;
    }
    return d;
}

} // namespace

FTState initialize(const PressureLaw& law, const DeltaSourceGrid& grid,
                   const InitialDatum& u0, const SolverParams& params) {
    params.validate();

    std::vector<double> source_xs;
    for (const SourcePoint& p : grid.points) source_xs.push_back(p.x);

    // Breakpoints: the source points, the datum's own jumps, and a dyadic
    // sampling lattice over smooth bumps.
    std::vector<double> breaks = source_xs;
    double dx = params.sample_dx > 0.0 ? params.sample_dx : grid.spacing;
    switch (u0.type) {
    case InitialDatum::Type::riemann:
        breaks.push_back(u0.x0);
        break;
    case InitialDatum::Type::piecewise:
        for (double b : u0.breakpoints) breaks.push_back(b);
        break;
    case InitialDatum::Type::stationary_perturbation:
        for (const BumpSpec& b : u0.bumps) {
            if (!(b.width > 0.0))
                throw ConfigError("initialize: bump width must be > 0");
            long long j0 = (long long)std::floor((b.center - b.width) / dx);
            long long j1 = (long long)std::ceil((b.center + b.width) / dx);
            for (long long j = j0; j <= j1; ++j) breaks.push_back((double)j * dx);
        }
        break;
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) {
                                 return std::abs(a - b) <= 1e-12;
                             }),
                 breaks.end());

    std::size_t n = breaks.size();
    std::vector<State> values(n + 1);
    std::vector<int> source_of_break(n, -1);
    {
        std::size_t si = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (si < source_xs.size() && source_xs[si] < breaks[i] - 1e-12) ++si;
            if (si < source_xs.size() && std::abs(source_xs[si] - breaks[i]) <= 1e-12)
                source_of_break[i] = (int)si;
        }
    }

    switch (u0.type) {
    case InitialDatum::Type::riemann: {
        for (std::size_t i = 0; i <= n; ++i) {
            double xm = (i == 0)   ? breaks.front() - 1.0
                        : (i == n) ? breaks.back() + 1.0
                                   : 0.5 * (breaks[i - 1] + breaks[i]);
            values[i] = (xm < u0.x0) ? u0.left : u0.right;
        }
        break;
    }
    case InitialDatum::Type::piecewise: {
        auto lookup = [&](double x) {
            std::size_t i = (std::size_t)(std::upper_bound(u0.breakpoints.begin(),
                                                           u0.breakpoints.end(), x) -
                                          u0.breakpoints.begin());
            return u0.states[i];
        };
        for (std::size_t i = 0; i <= n; ++i) {
            double xm = (i == 0)   ? breaks.front() - 1.0
                        : (i == n) ? breaks.back() + 1.0
                                   : 0.5 * (breaks[i - 1] + breaks[i]);
            values[i] = lookup(xm);
        }
        break;
    }
    case InitialDatum::Type::stationary_perturbation: {
        // Discrete stationary chain: exact jumps at the source points, which
        // the evolution then fixes exactly.
        State chain{u0.rho_left, u0.q};
        double x_first = n ? breaks.front() - 1.0 : 0.0;
        values[0] = chain + bump_value(u0.bumps, x_first);
        for (std::size_t i = 0; i < n; ++i) {
            if (source_of_break[i] >= 0)
                chain = stationary_jump_at_point(
                    law, grid.points[(std::size_t)source_of_break[i]], chain);
            double xm = (i + 1 < n) ? 0.5 * (breaks[i] + breaks[i + 1])
                                    : breaks[i] + 1.0;
            values[i + 1] = chain + bump_value(u0.bumps, xm);
        }
        break;
    }
    }

    for (const State& u : values) {
        require_valid(u, "initialize");
        if (!is_subsonic(law, u))
            throw SolverDomainError(
                "initialize: initial datum leaves the subsonic region");
    }

    FTState st;
    st.left_ambient = values.front();
    double lam_max = 0.0;
    for (const State& u : values)
        lam_max = std::max(lam_max, char_speed_bound(law, u));
    st.lambda_np = 2.0 * lam_max;

    long long id = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const State& ul = values[i];
        const State& ur = values[i + 1];
        std::vector<Front> emitted;
        if (source_of_break[i] >= 0) {
            const SourcePoint& pt = grid.points[(std::size_t)source_of_break[i]];
            JunctionRule rule = pt.rule();
            double scale = std::max({1.0, std::abs(ul.rho), std::abs(ul.q)});
            double Pl = dynamic_pressure(law, ul), Pr = dynamic_pressure(law, ur);
            double res_q = std::abs(ur.q - ul.q);
            double res_p =
                std::abs((Pr - Pl) - (rule.q_coef * ur.q + rule.rho_coef * ur.rho));
            if (res_q <= 1e-12 * scale &&
                res_p <= 1e-12 * std::max(1.0, std::abs(Pl))) {
                emitted.push_back(make_zero_front(ul, ur, source_of_break[i]));
            } else {
                WavePattern p = solve_junction(law, ul, ur, rule);
                append_pattern_fronts(law, params.eps_rarefaction, p,
                                      source_of_break[i], 0, emitted);
            }
        } else if (norm1(ur - ul) > 0.0) {
            WavePattern p = solve_classical(law, ul, ur);
            append_pattern_fronts(law, params.eps_rarefaction, p, -1, 0, emitted);
        }
        for (Front& f : emitted) {
            f.id = id++;
            f.x_ref = (f.kind == FrontKind::zero_wave)
                          ? grid.points[(std::size_t)f.source_index].x
                          : breaks[i];
            f.t_ref = 0.0;
            st.fronts.push_back(f);
        }
    }
    st.next_id = id;

    double moving_tv = 0.0;
    for (const Front& f : st.fronts)
        if (f.kind != FrontKind::zero_wave) moving_tv += f.strength();
    st.initial_moving_tv = moving_tv;
    if (moving_tv > params.delta_domain) {
        std::ostringstream os;
        os << "initialize: moving-wave total variation " << moving_tv
           << " exceeds the domain budget " << params.delta_domain;
        throw SolverDomainError(os.str());
    }
    return st;
}

// --- single-step API -----------------------------------------------------------

std::pair<double, std::vector<std::size_t>> next_event(const FTState& state) {
    double best_t = kInf;
    double best_x = kInf;
    std::size_t best_i = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < state.fronts.size(); ++i) {
        double t = collision_time(state.fronts[i], state.fronts[i + 1], state.time);
        if (t == kInf) continue;
        double x = state.fronts[i].position(t);
        if (!found || t < best_t - 1e-15 ||
            (std::abs(t - best_t) <= 1e-15 && x < best_x)) {
            best_t = t;
            best_x = x;
            best_i = i;
            found = true;
        }
    }
    if (!found) return {kInf, {}};

    std::vector<std::size_t> cluster{best_i, best_i + 1};
    const double guard = 1e-13;
    while (cluster.front() > 0) {
        std::size_t p = cluster.front() - 1;
        double t = collision_time(state.fronts[p], state.fronts[cluster.front()],
                                  state.time);
        if (t <= best_t + guard)
            cluster.insert(cluster.begin(), p);
        else
            break;
    }
    while (cluster.back() + 1 < state.fronts.size()) {
        std::size_t q = cluster.back() + 1;
        double t = collision_time(state.fronts[cluster.back()], state.fronts[q],
                                  state.time);
        if (t <= best_t + guard)
            cluster.push_back(q);
        else
            break;
    }
    return {best_t, cluster};
}

EventRecord resolve(FTState& state, const PressureLaw& law,
                    const DeltaSourceGrid& grid, const SolverParams& params) {
    auto [t, cluster] = next_event(state);
    EventRecord rec;
    if (cluster.empty()) return rec;

    std::vector<Front> in;
    for (std::size_t i : cluster) in.push_back(state.fronts[i]);
    double x = in.front().position(t);
    for (const Front& f : in)
        if (f.kind == FrontKind::zero_wave) x = f.x_ref;

    ClusterOutcome oc = resolve_cluster(law, grid, params, state.lambda_np, in, t, x);

    rec.t = t;
    rec.x = x;
    rec.type = oc.type;
    rec.n_in = (int)in.size();
    rec.n_out = (int)oc.out.size();
    for (const Front& f : in) rec.strength_in += f.strength();
    for (const Front& f : oc.out) rec.strength_out += f.strength();

    for (Front& f : oc.out) {
        f.id = state.next_id++;
        f.x_ref = (f.kind == FrontKind::zero_wave)
                      ? grid.points[(std::size_t)f.source_index].x
                      : x;
        f.t_ref = t;
    }
    state.fronts.erase(state.fronts.begin() + (long)cluster.front(),
                       state.fronts.begin() + (long)cluster.back() + 1);
    state.fronts.insert(state.fronts.begin() + (long)cluster.front(),
                        oc.out.begin(), oc.out.end());
    state.time = t;
    return rec;
}

// --- run -------------------------------------------------------------------------

namespace {

struct HeapEntry {
    double t;
    double x;
    long long seq;
    long long lid, rid;
};

struct HeapCmp {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.t != b.t) return a.t > b.t;
        if (a.x != b.x) return a.x > b.x;
        return a.seq > b.seq;
    }
};

} // namespace

const PiecewiseState& Trajectory::snapshot_at(double t) const {
    for (const PiecewiseState& s : snapshots)
        if (std::abs(s.time - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
    throw DomainError("Trajectory: no snapshot recorded at the requested time");
}

Trajectory run(FTState state, const PressureLaw& law,
               const DeltaSourceGrid& grid, const SolverParams& params) {
    params.validate();

    Trajectory traj;
    traj.tv_initial = state.tv();
    traj.tv_max = traj.tv_initial;
    double tv = traj.tv_initial;
    const double tv_budget =
        params.tv_guard_factor *
        std::max({params.delta_domain, traj.tv_initial, 1e-6});

    std::list<Front> L(state.fronts.begin(), state.fronts.end());
    std::unordered_map<long long, std::list<Front>::iterator> where;
    for (auto it = L.begin(); it != L.end(); ++it) where[it->id] = it;

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCmp> heap;
    long long seq = 0;
    double now = state.time;

    auto measure_zero_residuals = [&](const Front& f) {
        if (f.kind != FrontKind::zero_wave) return;
        const SourcePoint& pt = grid.points[(std::size_t)f.source_index];
        JunctionRule rule = pt.rule();
        traj.max_zero_wave_q_jump =
            std::max(traj.max_zero_wave_q_jump, std::abs(f.ur.q - f.ul.q));
        double Pl = dynamic_pressure(law, f.ul), Pr = dynamic_pressure(law, f.ur);
        traj.max_junction_residual =
            std::max(traj.max_junction_residual,
                     std::abs((Pr - Pl) -
                              (rule.q_coef * f.ur.q + rule.rho_coef * f.ur.rho)));
    };
    for (const Front& f : L) measure_zero_residuals(f);

    auto push_pair = [&](std::list<Front>::iterator a) {
        if (a == L.end()) return;
        auto b = std::next(a);
        if (b == L.end()) return;
        double t = collision_time(*a, *b, now);
        if (t == kInf || t > params.t_end + params.time_guard) return;
        heap.push({t, a->position(t), seq++, a->id, b->id});
    };
    for (auto it = L.begin(); it != L.end(); ++it) push_pair(it);

    std::vector<double> snap_times = params.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t snap_i = 0;
    auto snapshot_now = [&](double t) {
        PiecewiseState s;
        s.time = t;
        s.values.push_back(state.left_ambient);
        for (const Front& f : L) {
            s.edges.push_back(f.position(t));
            s.values.push_back(f.ur);
        }
        traj.snapshots.push_back(std::move(s));
    };
    auto take_snapshots_before = [&](double t) {
        while (snap_i < snap_times.size() && snap_times[snap_i] < t) {
            if (snap_times[snap_i] >= state.time - 1e-15)
                snapshot_now(snap_times[snap_i]);
            ++snap_i;
        }
    };

    if (params.record_history)
        traj.history.push_back({now, std::vector<Front>(L.begin(), L.end())});
    traj.tv_series.push_back({now, tv});

    while (!heap.empty()) {
        HeapEntry e = heap.top();
        heap.pop();
        if (e.t > params.t_end + params.time_guard) break;
        auto ia = where.find(e.lid);
        auto ib = where.find(e.rid);
        if (ia == where.end() || ib == where.end()) continue; // stale
        auto a = ia->second, b = ib->second;
        if (std::next(a) != b) continue; // stale adjacency

        take_snapshots_before(e.t);
        now = e.t;

        // Extend the cluster while neighbours reach the same point now.
        auto lo = a;
        while (lo != L.begin()) {
            auto p = std::prev(lo);
            if (collision_time(*p, *lo, state.time) <= e.t + params.time_guard)
                lo = p;
            else
                break;
        }
        auto hi = b;
        while (std::next(hi) != L.end()) {
            auto q = std::next(hi);
            if (collision_time(*hi, *q, state.time) <= e.t + params.time_guard)
                hi = q;
            else
                break;
        }

        std::vector<Front> in;
        for (auto it = lo;; ++it) {
            in.push_back(*it);
            if (it == hi) break;
        }
        double x = in.front().position(e.t);
        for (const Front& f : in)
            if (f.kind == FrontKind::zero_wave) x = f.x_ref;

        ClusterOutcome oc =
            resolve_cluster(law, grid, params, state.lambda_np, in, e.t, x);

        EventRecord rec;
        rec.t = e.t;
        rec.x = x;
        rec.type = oc.type;
        rec.n_in = (int)in.size();
        rec.n_out = (int)oc.out.size();
        for (const Front& f : in) {
            rec.strength_in += f.strength();
            tv -= f.strength();
        }
        for (const Front& f : oc.out) {
            rec.strength_out += f.strength();
            tv += f.strength();
        }
        traj.events.push_back(rec);

        auto insert_pos = std::next(hi);
        for (auto it = lo; it != insert_pos;) {
            where.erase(it->id);
            it = L.erase(it);
        }
        std::list<Front>::iterator first_new = insert_pos;
        bool first_set = false;
        for (Front f : oc.out) {
            f.id = state.next_id++;
            f.x_ref = (f.kind == FrontKind::zero_wave)
                          ? grid.points[(std::size_t)f.source_index].x
                          : x;
            f.t_ref = e.t;
            auto it = L.insert(insert_pos, f);
            where[it->id] = it;
            if (!first_set) {
                first_new = it;
                first_set = true;
            }
            measure_zero_residuals(f);
            if (f.physical() && f.kind != FrontKind::zero_wave &&
                std::abs(f.speed) >= state.lambda_np)
                throw InstabilityError(
                    "run: wave speed reached the non-physical speed bound");
        }
        if (first_set) {
            if (first_new != L.begin()) push_pair(std::prev(first_new));
            for (auto it = first_new; it != insert_pos; ++it) push_pair(it);
        } else if (insert_pos != L.begin()) {
            push_pair(std::prev(insert_pos));
        }

        state.time = e.t;
        traj.tv_max = std::max(traj.tv_max, tv);
        traj.tv_series.push_back({e.t, tv});
        if (params.record_history)
            traj.history.push_back({e.t, std::vector<Front>(L.begin(), L.end())});
        ++traj.total_events;
        if (L.size() > params.max_fronts)
            throw InstabilityError("run: front-count cap exceeded");
        if ((std::size_t)traj.total_events > params.max_events)
            throw InstabilityError("run: event-count cap exceeded");
        if (tv > tv_budget)
            throw InstabilityError("run: total variation exceeded the guard budget");
    }

    take_snapshots_before(params.t_end);
    while (snap_i < snap_times.size() && snap_times[snap_i] <= params.t_end) {
        snapshot_now(snap_times[snap_i]);
        ++snap_i;
    }

    state.fronts.assign(L.begin(), L.end());
    for (Front& f : state.fronts) {
        f.x_ref = f.position(params.t_end);
        f.t_ref = params.t_end;
    }
    state.time = params.t_end;
    std::stable_sort(state.fronts.begin(), state.fronts.end(),
                     [](const Front& a, const Front& b) { return a.x_ref < b.x_ref; });
    traj.tv_final = tv;
    traj.final_state = std::move(state);
    return traj;
}

// --- weak-form residuals -----------------------------------------------------

namespace {

double bump3(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    double w = 1.0 - s * s;
    return w * w * w;
}

} // namespace

WeakResiduals weak_solution_residual(const Trajectory& traj,
                                     const PressureLaw& law,
                                     const DeltaSourceGrid& grid,
                                     const TestFunctionSpec& phi) {
    if (traj.history.empty())
        throw DomainError(
            "weak_solution_residual: trajectory was run without record_history");
    const double t_end = traj.final_state.time;
    if (phi.t_center - phi.t_halfwidth < 0.0 ||
        phi.t_center + phi.t_halfwidth > t_end)
        throw DomainError(
            "weak_solution_residual: test-function support exceeds the computed "
            "time range");

    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.23692688505618908, 0.47862867049936647,
                                 0.5688888888888889, 0.47862867049936647,
                                 0.23692688505618908};

    auto phi_at = [&](double t, double x) {
        return bump3((t - phi.t_center) / phi.t_halfwidth) *
               bump3((x - phi.x_center) / phi.x_halfwidth);
    };

    WeakResiduals res;
    const double t_lo = phi.t_center - phi.t_halfwidth;
    const double t_hi = phi.t_center + phi.t_halfwidth;

    for (std::size_t k = 0; k < traj.history.size(); ++k) {
        double ta = traj.history[k].first;
        double tb =
            (k + 1 < traj.history.size()) ? traj.history[k + 1].first : t_end;
        ta = std::max(ta, t_lo);
        tb = std::min(tb, t_hi);
        if (tb <= ta) continue;

        for (const Front& f : traj.history[k].second) {
            double xa = f.position(ta), xb = f.position(tb);
            if (std::max(xa, xb) < phi.x_center - phi.x_halfwidth ||
                std::min(xa, xb) > phi.x_center + phi.x_halfwidth)
                continue;

            int pieces =
                std::max(1, (int)std::ceil((tb - ta) / (phi.t_halfwidth / 16.0)));
            double integral = 0.0;
            for (int p = 0; p < pieces; ++p) {
                double a = ta + (tb - ta) * p / pieces;
                double b = ta + (tb - ta) * (p + 1) / pieces;
                double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (int g = 0; g < 5; ++g) {
                    double t = mid + half * gx[g];
                    integral += gw[g] * half * phi_at(t, f.position(t));
                }
            }
            if (integral == 0.0) continue;

            double drho = f.ur.rho - f.ul.rho;
            double dq = f.ur.q - f.ul.q;
            double dP = dynamic_pressure(law, f.ur) - dynamic_pressure(law, f.ul);
            double dE = entropy(law, f.ur) - entropy(law, f.ul);
            double dF = entropy_flux(law, f.ur) - entropy_flux(law, f.ul);
            double s = f.speed;

            res.mass += (s * drho - dq) * integral;
            if (f.kind == FrontKind::zero_wave) {
                const SourcePoint& pt = grid.points[(std::size_t)f.source_index];
                JunctionRule rule = pt.rule();
                double S = rule.q_coef * f.ur.q + rule.rho_coef * f.ur.rho;
                res.momentum += (S - dP) * integral;
                // Upwind trace in the entropy work term: q is continuous
                // across the zero-wave, only the density side differs.
                const State& up = (f.ur.q > 0.0) ? f.ul : f.ur;
                res.entropy_production += (-dF + up.velocity() * S) * integral;
            } else {
                res.momentum += (s * dq - dP) * integral;
                res.entropy_production += (s * dE - dF) * integral;
            }
        }
    }
    return res;
}

} // namespace pipeflow
