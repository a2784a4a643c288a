#include "pipeflow/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pipeflow/numerics.hpp"

namespace pipeflow {

namespace {

struct CurvePoint {
    double v;  // velocity of the curve state
    double dv; // dv/drho along the curve
};

// Forward family-one curve through u0 (u0 = left state).
CurvePoint eval_forward1(const PressureLaw& law, const State& u0, double rho) {
    const double v0 = u0.velocity();
    if (rho <= u0.rho) {
        double w = law.riemann_invariant_integral(u0.rho, rho);
        return {v0 - w, -law.sound_speed(rho) / rho};
    }
    double dp = law.pressure(rho) - law.pressure(u0.rho);
    double dr = rho - u0.rho;
    double h = dp * dr / (rho * u0.rho);
    double s = std::sqrt(std::max(h, 0.0));
    if (s == 0.0) return {v0, -law.sound_speed(rho) / rho};
    double dh = (law.dp_drho(rho) * dr + dp) / (rho * u0.rho) -
                dp * dr / (rho * rho * u0.rho);
    return {v0 - s, -dh / (2.0 * s)};
}

// Backward family-two curve through u0 (u0 = right state).
CurvePoint eval_backward2(const PressureLaw& law, const State& u0, double rho) {
    const double v0 = u0.velocity();
    if (rho <= u0.rho) {
        double w = law.riemann_invariant_integral(u0.rho, rho);
        return {v0 + w, law.sound_speed(rho) / rho};
    }
    double dp = law.pressure(rho) - law.pressure(u0.rho);
    double dr = rho - u0.rho;
    double h = dp * dr / (rho * u0.rho);
    double s = std::sqrt(std::max(h, 0.0));
    if (s == 0.0) return {v0, law.sound_speed(rho) / rho};
    double dh = (law.dp_drho(rho) * dr + dp) / (rho * u0.rho) -
                dp * dr / (rho * rho * u0.rho);
    return {v0 + s, dh / (2.0 * s)};
}

double lambda1(const PressureLaw& law, const State& u) {
    return u.velocity() - law.sound_speed(u.rho);
}

double lambda2(const PressureLaw& law, const State& u) {
    return u.velocity() + law.sound_speed(u.rho);
}

double state_scale(const State& a, const State& b) {
    return std::max({1.0, std::abs(a.rho), std::abs(a.q), std::abs(b.rho),
                     std::abs(b.q)});
}

// Strength below which a moving wave is folded away during canonicalization.
double fold_tol(const State& a, const State& b) {
    return 1e-13 * state_scale(a, b);
}

void append_wave_1(const PressureLaw& law, std::vector<Wave>& out,
                   const State& ul, const State& um) {
    if (norm1(um - ul) <= fold_tol(ul, um)) return;
    Wave w;
    w.family = WaveFamily::one;
    w.left = ul;
    w.right = um;
    if (um.rho < ul.rho) {
        w.kind = WaveKind::rarefaction;
        w.speed_lo = lambda1(law, ul);
        w.speed_hi = lambda1(law, um);
    } else {
        w.kind = WaveKind::shock;
        double s = (um.q - ul.q) / (um.rho - ul.rho);
        w.speed_lo = w.speed_hi = s;
    }
    out.push_back(w);
}

void append_wave_2(const PressureLaw& law, std::vector<Wave>& out,
                   const State& um, const State& ur) {
    if (norm1(ur - um) <= fold_tol(um, ur)) return;
    Wave w;
    w.family = WaveFamily::two;
    w.left = um;
    w.right = ur;
    if (um.rho < ur.rho) {
        w.kind = WaveKind::rarefaction;
        w.speed_lo = lambda2(law, um);
        w.speed_hi = lambda2(law, ur);
    } else {
        w.kind = WaveKind::shock;
        double s = (ur.q - um.q) / (ur.rho - um.rho);
        w.speed_lo = w.speed_hi = s;
    }
    out.push_back(w);
}

// Middle density of the classical Riemann problem.
double classical_middle_density(const PressureLaw& law, const State& ul,
                                const State& ur) {
    auto residual = [&](double rho) {
        CurvePoint c1 = eval_forward1(law, ul, rho);
        CurvePoint c2 = eval_backward2(law, ur, rho);
        return std::pair<double, double>{c1.v - c2.v, c1.dv - c2.dv};
    };
    double lo = law.rho_min(), hi = law.rho_max();
    if (residual(lo).first < 0.0)
        throw SolverDomainError(
            "solve_classical: data expand toward vacuum, no middle state in the "
            "admissible range");
    if (residual(hi).first > 0.0)
        throw SolverDomainError(
            "solve_classical: no intersection below the admissible density cap");
    double x0 = std::clamp(0.5 * (ul.rho + ur.rho), lo, hi);
    return num::newton_bisect(residual, lo, hi, x0,
                              {.x_tol = 1e-15, .f_tol = 1e-14, .max_iter = 200});
}

struct JunctionTraces {
    State minus, plus;
};

double junction_rhs(const JunctionRule& rule, double q_plus, double rho_plus) {
    return rule.q_coef * q_plus + rule.rho_coef * rho_plus;
}

// Nested-bisection solve of the junction trace system; robust fallback for
// the damped Newton path.
JunctionTraces junction_by_bisection(const PressureLaw& law, const State& ul,
                                     const State& ur, const JunctionRule& rule) {
    auto plus_density_for_q = [&](double q_target) {
        // q along the backward 2-curve is strictly increasing in rho on the
        // subsonic branch.
        double lo = std::max(law.sonic_density(q_target) * (1.0 + 1e-12),
                             law.rho_min());
        double hi = law.rho_max();
        auto qfun = [&](double rho) {
            return rho * eval_backward2(law, ur, rho).v - q_target;
        };
        if (qfun(lo) > 0.0 || qfun(hi) < 0.0)
            throw SolverDomainError(
                "solve_junction: no subsonic right trace matches the momentum");
        return num::bisect(qfun, lo, hi, {.x_tol = 1e-15});
    };
    auto residual = [&](double rho_minus) {
        CurvePoint c1 = eval_forward1(law, ul, rho_minus);
        double q = rho_minus * c1.v;
        double rho_plus = plus_density_for_q(q);
        State um{rho_minus, q}, up{rho_plus, q};
        return dynamic_pressure(law, up) - dynamic_pressure(law, um) -
               junction_rhs(rule, q, rho_plus);
    };

    // Bracket around the classical middle state.
    double center;
    try {
        center = classical_middle_density(law, ul, ur);
    } catch (const SolverDomainError&) {
        center = 0.5 * (ul.rho + ur.rho);
    }
    double lo = center, hi = center, flo = 0.0, fhi = 0.0;
    bool found = false;
    for (double span = 0.02; span <= 32.0; span *= 2.0) {
        lo = std::max(center * (1.0 - span * 0.5), law.rho_min());
        hi = std::min(center * (1.0 + span * 0.5), law.rho_max());
        try {
            flo = residual(lo);
            fhi = residual(hi);
        } catch (const SolverDomainError&) {
            continue;
        }
        if (flo == 0.0) return {{lo, lo * eval_forward1(law, ul, lo).v},
                                {plus_density_for_q(lo * eval_forward1(law, ul, lo).v),
                                 lo * eval_forward1(law, ul, lo).v}};
        if (flo * fhi < 0.0) {
            found = true;
            break;
        }
    }
    if (!found)
        throw SolverDomainError(
            "solve_junction: failed to bracket subsonic traces (data outside the "
            "stationary neighborhood)");
    double rho_minus = num::bisect(residual, lo, hi, {.x_tol = 1e-15});
    double q = rho_minus * eval_forward1(law, ul, rho_minus).v;
    double rho_plus = plus_density_for_q(q);
    return {{rho_minus, q}, {rho_plus, q}};
}

JunctionTraces junction_by_newton(const PressureLaw& law, const State& ul,
                                  const State& ur, const JunctionRule& rule) {
    double rho_m;
    try {
        rho_m = classical_middle_density(law, ul, ur);
    } catch (const SolverDomainError&) {
        rho_m = 0.5 * (ul.rho + ur.rho);
    }
    double rm = rho_m, rp = rho_m;

    auto eval_res = [&](double rminus, double rplus, double F[2]) {
        CurvePoint c1 = eval_forward1(law, ul, rminus);
        CurvePoint c2 = eval_backward2(law, ur, rplus);
        double qm = rminus * c1.v, qp = rplus * c2.v;
        double Pm = qm * qm / rminus + law.pressure(rminus);
        double Pp = qp * qp / rplus + law.pressure(rplus);
        F[0] = qm - qp;
        F[1] = (Pp - Pm) - junction_rhs(rule, qp, rplus);
        return std::max(std::abs(F[0]), std::abs(F[1]));
    };

    double F[2];
    double fn = eval_res(rm, rp, F);
    const double tol = 1e-12 * state_scale(ul, ur) *
                       std::max(1.0, law.pressure(std::max(ul.rho, ur.rho)));
    bool converged = fn <= tol;
    for (int it = 0; it < 200 && !converged; ++it) {
        CurvePoint c1 = eval_forward1(law, ul, rm);
        CurvePoint c2 = eval_backward2(law, ur, rp);
        double vm = c1.v, vp = c2.v;
        double dqm = vm + rm * c1.dv;
        double dqp = vp + rp * c2.dv;
        double dPm = law.dp_drho(rm) + 2.0 * vm * dqm - vm * vm;
        double dPp = law.dp_drho(rp) + 2.0 * vp * dqp - vp * vp;
        // J * delta = -F with unknowns (rho-, rho+).
        double J00 = dqm, J01 = -dqp;
        double J10 = -dPm, J11 = dPp - rule.q_coef * dqp - rule.rho_coef;
        double det = J00 * J11 - J01 * J10;
        if (det == 0.0 || !std::isfinite(det)) break;
        double dm = (-F[0] * J11 + F[1] * J01) / det;
        double dp = (-J00 * F[1] + J10 * F[0]) / det;

        bool accepted = false;
        for (double step = 1.0; step >= 1.0 / 1024.0; step *= 0.5) {
            double nrm = rm + step * dm, nrp = rp + step * dp;
            if (nrm <= law.rho_min() || nrm >= law.rho_max() ||
                nrp <= law.rho_min() || nrp >= law.rho_max())
                continue;
            double G[2];
            double gn;
            try {
                gn = eval_res(nrm, nrp, G);
            } catch (const DomainError&) {
                continue;
            }
            if (gn < fn) {
                rm = nrm;
                rp = nrp;
                fn = gn;
                F[0] = G[0];
                F[1] = G[1];
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (fn <= tol) converged = true;
    }
    if (!converged)
        throw SolverDomainError("solve_junction: Newton stalled");
    double q = rm * eval_forward1(law, ul, rm).v;
    return {{rm, q}, {rp, rp * eval_backward2(law, ur, rp).v}};
}

void require_subsonic_pattern(const PressureLaw& law, const JunctionTraces& t,
                              const State& ul, const State& ur) {
    const double tol = 1e-12;
    for (const State* u : {&t.minus, &t.plus}) {
        if (!(subsonic_margin(law, *u) > 0.0))
            throw SolverDomainError(
                "solve_junction: trace left the subsonic region");
        (void)u;
    }
    // Subsonic pattern structure: the 1-wave stays in x<0, the 2-wave in x>0.
    if (t.minus.rho < ul.rho) {
        if (lambda1(law, t.minus) > tol)
            throw SolverDomainError("solve_junction: 1-wave crosses x = 0");
    } else if (t.minus.rho > ul.rho) {
        double s = (t.minus.q - ul.q) / (t.minus.rho - ul.rho);
        if (s > tol)
            throw SolverDomainError("solve_junction: 1-shock crosses x = 0");
    }
    if (t.plus.rho < ur.rho) {
        if (lambda2(law, t.plus) < -tol)
            throw SolverDomainError("solve_junction: 2-wave crosses x = 0");
    } else if (t.plus.rho > ur.rho) {
        double s = (ur.q - t.plus.q) / (ur.rho - t.plus.rho);
        if (s < -tol)
            throw SolverDomainError("solve_junction: 2-shock crosses x = 0");
    }
}

} // namespace

const Wave* WavePattern::zero_wave() const {
    for (const Wave& w : waves)
        if (w.kind == WaveKind::zero_wave) return &w;
    return nullptr;
}

State lax_curve(const PressureLaw& law, WaveFamily family, const State& u0,
                double s) {
    require_valid(u0, "lax_curve");
    if (!(s > 0.0)) throw DomainError("lax_curve: target density must be > 0");
    if (family == WaveFamily::stationary)
        throw DomainError("lax_curve: no curve for the stationary family");
    if (family == WaveFamily::one) {
        CurvePoint c = eval_forward1(law, u0, s);
        return {s, s * c.v};
    }
    CurvePoint c = eval_backward2(law, u0, s);
    return {s, s * c.v};
}

State lax_curve_forward2(const PressureLaw& law, const State& u0, double s) {
    require_valid(u0, "lax_curve_forward2");
    if (!(s > 0.0)) throw DomainError("lax_curve_forward2: density must be > 0");
    const double v0 = u0.velocity();
    double v;
    if (s >= u0.rho) {
        v = v0 + law.riemann_invariant_integral(u0.rho, s);
    } else {
        double dp = law.pressure(u0.rho) - law.pressure(s);
        double dr = u0.rho - s;
        v = v0 - std::sqrt(std::max(dp * dr / (s * u0.rho), 0.0));
    }
    return {s, s * v};
}

WavePattern solve_classical(const PressureLaw& law, const State& u_l,
                            const State& u_r) {
    require_valid(u_l, "solve_classical");
    require_valid(u_r, "solve_classical");
    WavePattern p;
    p.left_datum = u_l;
    p.right_datum = u_r;
    if (u_l.rho == u_r.rho && u_l.q == u_r.q) return p;
    double rho_m = classical_middle_density(law, u_l, u_r);
    double vm = eval_forward1(law, u_l, rho_m).v;
    State um{rho_m, rho_m * vm};
    append_wave_1(law, p.waves, u_l, um);
    append_wave_2(law, p.waves, um, u_r);
    return p;
}

WavePattern solve_junction(const PressureLaw& law, const State& u_l,
                           const State& u_r, const JunctionRule& rule) {
    require_valid(u_l, "solve_junction");
    require_valid(u_r, "solve_junction");

    WavePattern p;
    p.left_datum = u_l;
    p.right_datum = u_r;

    JunctionTraces traces;
    if (rule.trivial()) {
        // kappa(0) = 0 or f = 0: the junction is invisible; reuse the
        // classical pattern exactly and pin a zero-strength zero-wave.
        WavePattern c = solve_classical(law, u_l, u_r);
        State um = u_l;
        if (!c.waves.empty())
            um = (c.waves.front().family == WaveFamily::one) ? c.waves.front().right
                                                             : c.waves.front().left;
        traces = {um, um};
    } else {
        try {
            traces = junction_by_newton(law, u_l, u_r, rule);
        } catch (const SolverDomainError&) {
            traces = junction_by_bisection(law, u_l, u_r, rule);
        }
    }

    // Fold vanishing moving waves into the zero-wave so that stationary data
    // resolve to a single pinned discontinuity.
    if (norm1(traces.minus - u_l) <= fold_tol(u_l, traces.minus))
        traces.minus = u_l;
    if (norm1(traces.plus - u_r) <= fold_tol(u_r, traces.plus))
        traces.plus = u_r;

    require_subsonic_pattern(law, traces, u_l, u_r);

    append_wave_1(law, p.waves, u_l, traces.minus);
    Wave zw;
    zw.family = WaveFamily::stationary;
    zw.kind = WaveKind::zero_wave;
    zw.left = traces.minus;
    zw.right = traces.plus;
    zw.speed_lo = zw.speed_hi = 0.0;
    p.waves.push_back(zw);
    append_wave_2(law, p.waves, traces.plus, u_r);
    return p;
}

WavePattern solve_kink(const PressureLaw& law, const State& u_l,
                       const State& u_r, double theta, double f_at_kink,
                       const SourceCoefficients& coeffs) {
    if (f_at_kink < 0.0) throw DomainError("solve_kink: f must be >= 0");
    JunctionRule rule;
    rule.q_coef = f_at_kink * coeffs.kappa(kink_jump_magnitude(theta));
    rule.rho_coef = 0.0;
    return solve_junction(law, u_l, u_r, rule);
}

State sample(const PressureLaw& law, const WavePattern& pattern, double xi) {
    State u = pattern.left_datum;
    for (const Wave& w : pattern.waves) {
        if (xi < w.speed_lo) return u;
        if (w.kind == WaveKind::rarefaction && xi < w.speed_hi) {
            // Invert the characteristic speed along the curve.
            bool fam1 = (w.family == WaveFamily::one);
            double rlo = std::min(w.left.rho, w.right.rho);
            double rhi = std::max(w.left.rho, w.right.rho);
            const State anchor = fam1 ? w.left : w.right;
            auto lam = [&](double rho) {
                CurvePoint c = fam1 ? eval_forward1(law, anchor, rho)
                                    : eval_backward2(law, anchor, rho);
                double cs = law.sound_speed(rho);
                return fam1 ? (c.v - cs) : (c.v + cs);
            };
            auto f = [&](double rho) { return lam(rho) - xi; };
            double rho = num::bisect(f, rlo, rhi, {.x_tol = 1e-15});
            CurvePoint c = fam1 ? eval_forward1(law, anchor, rho)
                                : eval_backward2(law, anchor, rho);
            return {rho, rho * c.v};
        }
        u = w.right;
    }
    return pattern.right_datum;
}

JunctionResiduals junction_residuals(const PressureLaw& law,
                                     const WavePattern& pattern,
                                     const JunctionRule& rule) {
    const Wave* zw = pattern.zero_wave();
    if (!zw) throw DomainError("junction_residuals: pattern has no zero-wave");
    JunctionResiduals r;
    r.q_jump = std::abs(zw->right.q - zw->left.q);
    double Pm = dynamic_pressure(law, zw->left);
    double Pp = dynamic_pressure(law, zw->right);
    r.p_jump = std::abs((Pp - Pm) - junction_rhs(rule, zw->right.q, zw->right.rho));
    return r;
}

} // namespace pipeflow
