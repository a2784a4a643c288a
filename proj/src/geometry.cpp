#include "pipeflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pipeflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kKinkPosTol = 1e-9;

double bump_profile(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    double w = 1.0 - s * s;
    return w * w * w;
}

// Antiderivative of (1-s^2)^3.
double bump_profile_int(double s) {
    s = std::clamp(s, -1.0, 1.0);
    return s - s * s * s + 0.6 * std::pow(s, 5) - std::pow(s, 7) / 7.0;
}

Vec3 tangent_from_angles(double alpha, double phi) {
    return {std::cos(alpha) * std::cos(phi), std::cos(alpha) * std::sin(phi),
            std::sin(alpha)};
}

} // namespace

double PipeGeometry::Seg::curvature(double x) const {
    switch (kind) {
    case Kind::straight:
        return 0.0;
    case Kind::arc_h:
    case Kind::arc_v:
        return 1.0 / radius;
    case Kind::bump: {
        double s = 2.0 * (x - x0) / (x1 - x0) - 1.0;
        return amplitude * bump_profile(s);
    }
    case Kind::sampled: {
        double d2x = sx.deriv2(x), d2y = sy.deriv2(x), d2z = sz.deriv2(x);
        return std::sqrt(d2x * d2x + d2y * d2y + d2z * d2z);
    }
    }
    return 0.0;
}

double PipeGeometry::Seg::alpha(double x) const {
    switch (kind) {
    case Kind::straight:
    case Kind::arc_h:
    case Kind::bump:
        return alpha0;
    case Kind::arc_v:
        return alpha0 + turn * (x - x0) / radius;
    case Kind::sampled:
        return std::asin(std::clamp(sz.deriv(x), -1.0, 1.0));
    }
    return 0.0;
}

double PipeGeometry::Seg::azimuth(double x) const {
    switch (kind) {
    case Kind::straight:
    case Kind::arc_v:
        return phi0;
    case Kind::arc_h:
        return phi0 + turn * (x - x0) / (radius * std::cos(alpha0));
    case Kind::bump: {
        double half = 0.5 * (x1 - x0);
        double s = (x - x0) / half - 1.0;
        double rot = amplitude * half * (bump_profile_int(s) - bump_profile_int(-1.0));
        return phi0 + turn * rot / std::cos(alpha0);
    }
    case Kind::sampled:
        return std::atan2(sy.deriv(x), sx.deriv(x));
    }
    return 0.0;
}

Vec3 PipeGeometry::Seg::tangent(double x) const {
    if (kind == Kind::sampled) return {sx.deriv(x), sy.deriv(x), sz.deriv(x)};
    return tangent_from_angles(alpha(x), azimuth(x));
}

PipeGeometry PipeGeometry::straight() {
    PipeGeometry g;
    g.x_begin_ = g.x_end_ = 0.0;
    g.support_radius_ = 0.0;
    return g;
}

PipeGeometry PipeGeometry::from_segments(double x_start,
                                         const std::vector<SegmentSpec>& specs,
                                         const std::vector<Kink>& kinks) {
    PipeGeometry g;
    g.kinks_ = kinks;
    std::sort(g.kinks_.begin(), g.kinks_.end(),
              [](const Kink& a, const Kink& b) { return a.position < b.position; });
    for (std::size_t i = 0; i + 1 < g.kinks_.size(); ++i)
        if (!(g.kinks_[i].position < g.kinks_[i + 1].position))
            throw ConfigError("geometry: kink positions must be strictly increasing");
    for (const Kink& k : g.kinks_)
        if (!(std::abs(k.angle) < kPi))
            throw ConfigError("geometry: kink angle must lie in (-pi, pi)");

    double x = x_start, alpha = 0.0, phi = 0.0;
    std::size_t next_kink = 0;
    auto apply_kinks_at = [&](double pos) {
        while (next_kink < g.kinks_.size() &&
               std::abs(g.kinks_[next_kink].position - pos) <= kKinkPosTol) {
            const Kink& k = g.kinks_[next_kink];
            if (k.plane == KinkPlane::horizontal) {
                if (std::abs(alpha) > 1e-9)
                    throw ConfigError(
                        "geometry: horizontal kink requires a level pipe at its position");
                phi += k.angle;
            } else {
                alpha += k.angle;
            }
            ++next_kink;
        }
    };

    apply_kinks_at(x);
    for (const SegmentSpec& spec : specs) {
        if (!(spec.length > 0.0))
            throw ConfigError("geometry: segment length must be > 0");
        Seg s;
        s.x0 = x;
        s.x1 = x + spec.length;
        s.alpha0 = alpha;
        s.phi0 = phi;
        s.turn = (spec.turn >= 0) ? +1 : -1;
        switch (spec.type) {
        case SegmentSpec::Type::straight:
            s.kind = Seg::Kind::straight;
            break;
        case SegmentSpec::Type::arc_horizontal:
            if (!(spec.radius > 0.0))
                throw ConfigError("geometry: arc radius must be > 0");
            s.kind = Seg::Kind::arc_h;
            s.radius = spec.radius;
            break;
        case SegmentSpec::Type::arc_vertical:
            if (!(spec.radius > 0.0))
                throw ConfigError("geometry: arc radius must be > 0");
            s.kind = Seg::Kind::arc_v;
            s.radius = spec.radius;
            break;
        case SegmentSpec::Type::curvature_bump:
            if (spec.amplitude < 0.0)
                throw ConfigError("geometry: bump amplitude must be >= 0");
            s.kind = Seg::Kind::bump;
            s.amplitude = spec.amplitude;
            break;
        }
        alpha = s.alpha(s.x1);
        phi = s.azimuth(s.x1);
        if (!(std::abs(alpha) < 0.5 * kPi))
            throw ConfigError("geometry: inclination left (-pi/2, pi/2)");
        x = s.x1;
        g.segments_.push_back(std::move(s));
        apply_kinks_at(x);
    }
    if (next_kink != g.kinks_.size())
        throw ConfigError("geometry: kink position does not match any segment boundary");

    g.x_begin_ = x_start;
    g.x_end_ = x;
    g.alpha_out_ = alpha;
    g.phi_in_ = 0.0;
    g.phi_out_ = phi;
    g.support_radius_ = std::max(std::abs(g.x_begin_), std::abs(g.x_end_));
    g.validate();
    return g;
}

PipeGeometry PipeGeometry::from_curve_samples(const std::vector<CurveSample>& samples,
                                              const std::vector<double>& kink_markers) {
    if (samples.size() < 4)
        throw ConfigError("from_curve_samples: need at least four samples");
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        if (!(samples[i].x < samples[i + 1].x))
            throw ConfigError("from_curve_samples: parameters must be strictly increasing");

    std::vector<double> markers = kink_markers;
    std::sort(markers.begin(), markers.end());

    PipeGeometry g;
    g.x_begin_ = samples.front().x;
    g.x_end_ = samples.back().x;

    // Split samples into smooth pieces at the kink markers.
    std::vector<std::vector<CurveSample>> pieces;
    std::vector<CurveSample> cur;
    std::size_t mk = 0;
    for (const CurveSample& s : samples) {
        while (mk < markers.size() && s.x > markers[mk] + kKinkPosTol) ++mk;
        cur.push_back(s);
        if (mk < markers.size() && std::abs(s.x - markers[mk]) <= kKinkPosTol) {
            pieces.push_back(cur);
            cur.clear();
            cur.push_back(s);
            ++mk;
        }
    }
    pieces.push_back(cur);
    if (pieces.size() != markers.size() + 1)
        throw ConfigError("from_curve_samples: kink marker does not coincide with a sample");

    for (const auto& piece : pieces) {
        if (piece.size() < 4)
            throw ConfigError("from_curve_samples: smooth piece has too few samples");
        std::vector<double> xs, px, py, pz;
        for (const CurveSample& s : piece) {
            xs.push_back(s.x);
            px.push_back(s.p[0]);
            py.push_back(s.p[1]);
            pz.push_back(s.p[2]);
        }
        Seg s;
        s.kind = Seg::Kind::sampled;
        s.x0 = xs.front();
        s.x1 = xs.back();
        s.sx = num::CubicSpline(xs, px);
        s.sy = num::CubicSpline(xs, py);
        s.sz = num::CubicSpline(xs, pz);
        // Unit-speed check: reject instead of silently re-fitting.
        int nchk = std::max<int>(8, (int)xs.size() * 2);
        for (int i = 0; i <= nchk; ++i) {
            double xq = s.x0 + (s.x1 - s.x0) * i / nchk;
            Vec3 t = s.tangent(xq);
            double speed = std::sqrt(dot(t, t));
            if (std::abs(speed - 1.0) > 1e-6)
                throw ConfigError(
                    "from_curve_samples: samples are not arc-length parametrized "
                    "(||Gamma'|| deviates from 1 by more than 1e-6)");
        }
        g.segments_.push_back(std::move(s));
    }

    // Kink angles from the tangent jumps.
    for (std::size_t i = 0; i < markers.size(); ++i) {
        Vec3 tl = g.segments_[i].tangent(markers[i]);
        Vec3 tr = g.segments_[i + 1].tangent(markers[i]);
        double c = std::clamp(dot(tl, tr), -1.0, 1.0);
        if (c <= -1.0 + 1e-12)
            throw ConfigError("from_curve_samples: kink angle of pi is not allowed");
        double theta = std::acos(c);
        double cross_z = tl[0] * tr[1] - tl[1] * tr[0];
        double dalpha = std::asin(std::clamp(tr[2], -1.0, 1.0)) -
                        std::asin(std::clamp(tl[2], -1.0, 1.0));
        Kink k;
        k.position = markers[i];
        if (std::abs(cross_z) >= std::abs(dalpha)) {
            k.plane = KinkPlane::horizontal;
            k.angle = std::copysign(theta, cross_z == 0.0 ? 1.0 : cross_z);
        } else {
            k.plane = KinkPlane::vertical;
            k.angle = std::copysign(theta, dalpha);
        }
        g.kinks_.push_back(k);
    }

    for (const Seg* s : {&g.segments_.front(), &g.segments_.back()}) {
        double xe = (s == &g.segments_.front()) ? s->x0 : s->x1;
        if (std::abs(s->tangent(xe)[2]) > 1e-6)
            throw ConfigError("from_curve_samples: pipe must be horizontal at the ends");
    }
    g.support_radius_ = std::max(std::abs(g.x_begin_), std::abs(g.x_end_));
    return g;
}

const PipeGeometry::Seg* PipeGeometry::segment_at(double x) const {
    for (const Seg& s : segments_)
        if (x >= s.x0 && x <= s.x1) return &s;
    return nullptr;
}

double PipeGeometry::curvature(double x) const {
    if (segments_.empty() || x < x_begin_ || x > x_end_) return 0.0;
    // At an interior boundary either side agrees up to the C2 joint.
    for (const Seg& s : segments_)
        if (x >= s.x0 && x <= s.x1) return s.curvature(x);
    return 0.0;
}

double PipeGeometry::inclination(double x) const {
    if (segments_.empty() || x < x_begin_ || x > x_end_) return 0.0;
    // Right limit at shared boundaries.
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it)
        if (x >= it->x0 && x <= it->x1) return it->alpha(x);
    return 0.0;
}

Vec3 PipeGeometry::tangent_left(double x) const {
    if (segments_.empty()) return {1.0, 0.0, 0.0};
    if (x <= x_begin_) return tangent_from_angles(0.0, phi_in_);
    if (x >= x_end_) return tangent_from_angles(alpha_out_, phi_out_);
    for (const Seg& s : segments_)
        if (x > s.x0 && x <= s.x1) return s.tangent(x);
    return tangent_from_angles(0.0, phi_in_);
}

Vec3 PipeGeometry::tangent_right(double x) const {
    if (segments_.empty()) return {1.0, 0.0, 0.0};
    if (x < x_begin_) return tangent_from_angles(0.0, phi_in_);
    if (x >= x_end_) return tangent_from_angles(alpha_out_, phi_out_);
    for (const Seg& s : segments_)
        if (x >= s.x0 && x < s.x1) return s.tangent(x);
    return tangent_from_angles(alpha_out_, phi_out_);
}

std::vector<double> PipeGeometry::breakpoints() const {
    std::vector<double> bp;
    for (const Seg& s : segments_) {
        bp.push_back(s.x0);
        bp.push_back(s.x1);
    }
    for (const Kink& k : kinks_) bp.push_back(k.position);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double a, double b) { return std::abs(a - b) <= kKinkPosTol; }),
             bp.end());
    return bp;
}

void PipeGeometry::validate() const {
    if (std::abs(alpha_out_) > 1e-9)
        throw ConfigError(
            "geometry: pipe must return to horizontal at the end of the interior "
            "(assumption of compactly supported inclination)");
    for (const Kink& k : kinks_) {
        bool on_boundary = std::abs(k.position - x_begin_) <= kKinkPosTol ||
                           std::abs(k.position - x_end_) <= kKinkPosTol;
        for (const Seg& s : segments_)
            if (std::abs(k.position - s.x0) <= kKinkPosTol ||
                std::abs(k.position - s.x1) <= kKinkPosTol)
                on_boundary = true;
        if (!on_boundary)
            throw ConfigError("geometry: kink must lie on a segment boundary");
    }
}

double kink_jump_magnitude(double theta) {
    if (!(std::abs(theta) < kPi))
        throw DomainError("kink_jump_magnitude: angle must lie in (-pi, pi)");
    return 2.0 * std::abs(std::sin(0.5 * theta));
}

double TangentVariation::total() const {
    double t = absolutely_continuous;
    for (double a : atoms) t += a;
    return t;
}

TangentVariation tangent_variation_measure(const PipeGeometry& geom) {
    TangentVariation tv;
    std::vector<double> bp = geom.breakpoints();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double a = bp[i], b = bp[i + 1];
        if (b - a <= 0.0) continue;
        tv.absolutely_continuous += num::adaptive_simpson(
            [&](double x) { return geom.curvature(x); }, a, b, 1e-10);
    }
    for (const Kink& k : geom.kinks()) tv.atoms.push_back(kink_jump_magnitude(k.angle));
    return tv;
}

ScalarField ScalarField::constant(double value) {
    if (value < 0.0 || !std::isfinite(value))
        throw ConfigError("friction field: constant must be finite and >= 0");
    ScalarField f;
    f.kind_ = Kind::constant;
    f.value_ = value;
    return f;
}

ScalarField ScalarField::bump(double amplitude, double center, double width) {
    if (amplitude < 0.0 || !(width > 0.0))
        throw ConfigError("friction field: bump needs amplitude >= 0, width > 0");
    ScalarField f;
    f.kind_ = Kind::bump;
    f.value_ = amplitude;
    f.center_ = center;
    f.width_ = width;
    return f;
}

ScalarField ScalarField::table(std::vector<double> xs, std::vector<double> ys) {
    for (double y : ys)
        if (y < 0.0) throw ConfigError("friction field: table values must be >= 0");
    ScalarField f;
    f.kind_ = Kind::table;
    f.table_lo_ = xs.front();
    f.table_hi_ = xs.back();
    f.table_ = num::Pchip(std::move(xs), std::move(ys));
    return f;
}

double ScalarField::operator()(double x) const {
    switch (kind_) {
    case Kind::constant:
        return value_;
    case Kind::bump:
        return value_ * bump_profile((x - center_) / width_);
    case Kind::table:
        return table_.eval(std::clamp(x, table_lo_, table_hi_));
    }
    return 0.0;
}

ResponseFunction ResponseFunction::identity() { return linear(1.0); }

ResponseFunction ResponseFunction::zero() { return linear(0.0); }

ResponseFunction ResponseFunction::linear(double slope) {
    if (slope < 0.0 || !std::isfinite(slope))
        throw ConfigError("response function: slope must be finite and >= 0");
    ResponseFunction k;
    k.kind_ = Kind::linear;
    k.slope_ = slope;
    return k;
}

ResponseFunction ResponseFunction::table(std::vector<double> xis,
                                         std::vector<double> values) {
    if (xis.empty() || xis.front() != 0.0 || values.front() != 0.0)
        throw ConfigError("response function: table must start at (0, 0)");
    for (double v : values)
        if (v < 0.0) throw ConfigError("response function: values must be >= 0");
    ResponseFunction k;
    k.kind_ = Kind::table;
    k.table_hi_ = xis.back();
    k.table_hi_val_ = values.back();
    k.table_ = num::Pchip(std::move(xis), std::move(values));
    return k;
}

double ResponseFunction::operator()(double xi) const {
    double a = std::abs(xi); // even by construction
    if (kind_ == Kind::linear) return slope_ * a;
    if (a >= table_hi_) return table_hi_val_;
    return table_.eval(a);
}

double smooth_source(const PipeGeometry& geom, const SourceCoefficients& coeffs,
                     const State& u, double x) {
    require_valid(u, "smooth_source");
    for (const Kink& k : geom.kinks())
        if (std::abs(x - k.position) <= 1e-12 * std::max(1.0, std::abs(k.position)))
            throw DomainError("smooth_source: undefined at a kink position");
    if (std::abs(x) > geom.support_radius()) return 0.0;
    double kap = coeffs.kappa(geom.curvature(x));
    return -coeffs.f(x) * kap * u.q -
           u.rho * coeffs.gravity * std::sin(geom.inclination(x));
}

} // namespace pipeflow
