#include "pipeflow/pressure_law.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pipeflow/numerics.hpp"

namespace pipeflow {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kGammaOneBand = 1e-14; // relative band selecting gamma == 1
} // namespace

double preissmann_height(double r, double d, double a) {
    if (!(r > 0.0) || !(d > 0.0) || d >= r)
        throw DomainError("preissmann_height: need 0 < d < r");
    if (a < 0.0) throw DomainError("preissmann_height: negative area");
    const double a1 = 0.5 * kPi * r * r;
    const double a2 = kPi * r * r - d * d / (2.0 * kPi);
    if (a <= a1) return std::sqrt(2.0 * a / kPi);
    if (a <= a2) return 2.0 * r - std::sqrt(2.0 * r * r - 2.0 * a / kPi);
    return a / d - d / (2.0 * kPi) + 2.0 * r - kPi * r * r / d;
}

PressureLaw PressureLaw::gamma_law(double gamma, double rho_ref) {
    if (!(gamma >= 1.0) || !std::isfinite(gamma))
        throw ConfigError("gamma_law: gamma must satisfy gamma >= 1");
    if (!(rho_ref > 0.0)) throw ConfigError("gamma_law: rho_ref must be > 0");
    PressureLaw law;
    law.kind_ = LawKind::gamma_law;
    law.gamma_ = gamma;
    law.rho_ref_ = rho_ref;
    return law;
}

PressureLaw PressureLaw::preissmann(double radius, double slot_width,
                                    double gravity, double rho_ref) {
    if (!(radius > 0.0)) throw ConfigError("preissmann: radius must be > 0");
    if (!(slot_width > 0.0) || slot_width >= radius)
        throw ConfigError("preissmann: slot width must satisfy 0 < d < r");
    if (!(gravity > 0.0)) throw ConfigError("preissmann: gravity must be > 0");
    if (!(rho_ref > 0.0)) throw ConfigError("preissmann: rho_ref must be > 0");
    PressureLaw law;
    law.kind_ = LawKind::preissmann;
    law.radius_ = radius;
    law.slot_ = slot_width;
    law.g_ = gravity;
    law.rho_ref_ = rho_ref;
    law.a1_ = 0.5 * kPi * radius * radius;
    law.a2_ = kPi * radius * radius - slot_width * slot_width / (2.0 * kPi);
    // Cumulative integrals of h at the branch points (closed forms).
    law.H1_ = std::sqrt(2.0 / kPi) * (2.0 / 3.0) * std::pow(law.a1_, 1.5);
    const double r = radius;
    law.H2_ = law.H1_ + 2.0 * r * (law.a2_ - law.a1_) -
              (kPi / 3.0) *
                  (r * r * r -
                   std::pow(2.0 * r * r - 2.0 * law.a2_ / kPi, 1.5));
    return law;
}

void PressureLaw::check_rho(double rho) const {
    if (!std::isfinite(rho) || rho <= 0.0)
        throw DomainError("pressure law: density must be finite and > 0");
    if (rho < rho_min_ || rho > rho_max_)
        throw DomainError("pressure law: density outside admissible range");
}

double PressureLaw::pressure(double rho) const {
    check_rho(rho);
    if (kind_ == LawKind::gamma_law) return std::pow(rho, gamma_);
    // p(a) = g (a h(a) - H(a)) with H the piecewise antiderivative of h.
    const double a = rho;
    const double h = preissmann_height(radius_, slot_, a);
    double H;
    if (a <= a1_) {
        H = std::sqrt(2.0 / kPi) * (2.0 / 3.0) * std::pow(a, 1.5);
    } else if (a <= a2_) {
        const double r = radius_;
        H = H1_ + 2.0 * r * (a - a1_) -
            (kPi / 3.0) *
                (r * r * r - std::pow(2.0 * r * r - 2.0 * a / kPi, 1.5));
    } else {
        const double r = radius_;
        H = H2_ + (a * a - a2_ * a2_) / (2.0 * slot_) +
            (2.0 * r - slot_ / (2.0 * kPi) - kPi * r * r / slot_) * (a - a2_);
    }
    return g_ * (a * h - H);
}

double PressureLaw::dp_drho(double rho) const {
    check_rho(rho);
    if (kind_ == LawKind::gamma_law) return gamma_ * std::pow(rho, gamma_ - 1.0);
    // p'(a) = g a h'(a).
    const double a = rho;
    double hp;
    if (a <= a1_) {
        hp = 1.0 / std::sqrt(2.0 * kPi * a);
    } else if (a <= a2_) {
        hp = 1.0 / (kPi * std::sqrt(2.0 * radius_ * radius_ - 2.0 * a / kPi));
    } else {
        hp = 1.0 / slot_;
    }
    return g_ * a * hp;
}

double PressureLaw::d2p_drho2(double rho) const {
    check_rho(rho);
    if (kind_ == LawKind::gamma_law)
        return gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0);
    const double a = rho;
    double hp, hpp;
    if (a <= a1_) {
        hp = 1.0 / std::sqrt(2.0 * kPi * a);
        hpp = -0.5 / (std::sqrt(2.0 * kPi) * std::pow(a, 1.5));
    } else if (a <= a2_) {
        const double w = 2.0 * radius_ * radius_ - 2.0 * a / kPi;
        hp = 1.0 / (kPi * std::sqrt(w));
        hpp = 1.0 / (kPi * kPi * std::pow(w, 1.5));
    } else {
        hp = 1.0 / slot_;
        hpp = 0.0;
    }
    return g_ * (hp + a * hpp);
}

double PressureLaw::sound_speed(double rho) const {
    const double dp = dp_drho(rho);
    if (!(dp > 0.0))
        throw DomainError("pressure law: degenerate law, p'(rho) <= 0");
    return std::sqrt(dp);
}

double PressureLaw::internal_energy(double rho) const {
    check_rho(rho);
    if (kind_ == LawKind::gamma_law) {
        if (std::abs(gamma_ - 1.0) <= kGammaOneBand)
            return std::log(rho / rho_ref_);
        return (std::pow(rho, gamma_ - 1.0) - std::pow(rho_ref_, gamma_ - 1.0)) /
               (gamma_ - 1.0);
    }
    // Quadrature with splits at the h-branch points (p is C2, not C3 there).
    auto integrand = [this](double r) { return pressure(r) / (r * r); };
    double lo = std::min(rho_ref_, rho), hi = std::max(rho_ref_, rho);
    double acc = 0.0, prev = lo;
    for (double b : {a1_, a2_}) {
        if (b > prev && b < hi) {
            acc += num::adaptive_simpson(integrand, prev, b, 1e-13);
            prev = b;
        }
    }
    acc += num::adaptive_simpson(integrand, prev, hi, 1e-13);
    return (rho >= rho_ref_) ? acc : -acc;
}

double PressureLaw::riemann_invariant_integral(double rho_a,
                                               double rho_b) const {
    check_rho(rho_a);
    check_rho(rho_b);
    if (kind_ == LawKind::gamma_law) {
        if (std::abs(gamma_ - 1.0) <= kGammaOneBand)
            return std::log(rho_b / rho_a);
        const double e = 0.5 * (gamma_ - 1.0);
        return std::sqrt(gamma_) / e * (std::pow(rho_b, e) - std::pow(rho_a, e));
    }
    auto integrand = [this](double r) { return sound_speed(r) / r; };
    double lo = std::min(rho_a, rho_b), hi = std::max(rho_a, rho_b);
    double acc = 0.0, prev = lo;
    for (double b : {a1_, a2_}) {
        if (b > prev && b < hi) {
            acc += num::adaptive_simpson(integrand, prev, b, 1e-13);
            prev = b;
        }
    }
    acc += num::adaptive_simpson(integrand, prev, hi, 1e-13);
    return (rho_b >= rho_a) ? acc : -acc;
}

double PressureLaw::sonic_density(double q) const {
    const double absq = std::abs(q);
    if (absq == 0.0) return rho_min_;
    // rho * c(rho) is strictly increasing for convex p.
    auto f = [this, absq](double rho) {
        return rho * sound_speed(rho) - absq;
    };
    double lo = rho_min_, hi = rho_max_;
    if (f(lo) >= 0.0) return lo;
    if (f(hi) <= 0.0)
        throw SolverDomainError(
            "sonic_density: momentum exceeds the admissible subsonic range");
    return num::bisect(f, lo, hi, {.x_tol = 1e-15});
}

std::string PressureLaw::describe() const {
    std::ostringstream os;
    if (kind_ == LawKind::gamma_law)
        os << "gamma_law(gamma=" << gamma_ << ", rho_ref=" << rho_ref_ << ")";
    else
        os << "preissmann(r=" << radius_ << ", d=" << slot_ << ", g=" << g_
           << ", rho_ref=" << rho_ref_ << ")";
    return os.str();
}

double pressure(const PressureLaw& law, double rho) { return law.pressure(rho); }

double sound_speed(const PressureLaw& law, double rho) {
    return law.sound_speed(rho);
}

double dynamic_pressure(const PressureLaw& law, const State& u) {
    require_valid(u, "dynamic_pressure");
    return u.q * u.q / u.rho + law.pressure(u.rho);
}

double entropy(const PressureLaw& law, const State& u) {
    require_valid(u, "entropy");
    return 0.5 * u.q * u.q / u.rho + u.rho * law.internal_energy(u.rho);
}

double entropy_flux(const PressureLaw& law, const State& u) {
    require_valid(u, "entropy_flux");
    return u.velocity() * (entropy(law, u) + law.pressure(u.rho));
}

double subsonic_margin(const PressureLaw& law, const State& u) {
    require_valid(u, "subsonic_margin");
    return law.sound_speed(u.rho) - std::abs(u.velocity());
}

bool is_subsonic(const PressureLaw& law, const State& u) {
    return subsonic_margin(law, u) > 0.0;
}

} // namespace pipeflow
