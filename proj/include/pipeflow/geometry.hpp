#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pipeflow/numerics.hpp"
#include "pipeflow/state.hpp"

namespace pipeflow {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

enum class KinkPlane { horizontal, vertical };

/// Corner point of the pipe: the tangent jumps by `angle` at `position`.
/// Horizontal kinks rotate the tangent in the horizontal plane (the pipe must
/// be level there), vertical kinks change the inclination.
struct Kink {
    double position = 0.0;
    double angle = 0.0; // in (-pi, pi)
    KinkPlane plane = KinkPlane::horizontal;
};

/// Analytic segment description used by configurations. `length` is arc
/// length; the segment inherits its entry tangent from the previous one.
struct SegmentSpec {
    enum class Type {
        straight,       // zero curvature
        arc_horizontal, // constant curvature 1/radius, level plane
        arc_vertical,   // constant curvature 1/radius, inclination ramps
        curvature_bump, // C2 curvature profile amp*(1-s^2)^3, level plane
    };
    Type type = Type::straight;
    double length = 1.0;
    double radius = 1.0;    // arcs
    int turn = +1;          // arc orientation / bump sign of rotation
    double amplitude = 0.0; // curvature_bump peak curvature
};

/// One sample of a parametrized space curve (arc-length parameter + point).
struct CurveSample {
    double x = 0.0;
    Vec3 p{0.0, 0.0, 0.0};
};

/// Piecewise-C2 arc-length curve: finitely many smooth segments tiling the
/// real line (straight horizontal rays beyond the described interior), plus a
/// list of kinks at segment boundaries. Curvature and inclination vanish
/// outside [-R, R] with R the support radius. Immutable after construction.
class PipeGeometry {
public:
    /// Straight horizontal pipe (empty interior).
    static PipeGeometry straight();

    static PipeGeometry from_segments(double x_start,
                                      const std::vector<SegmentSpec>& specs,
                                      const std::vector<Kink>& kinks);

    /// Builds a geometry from sampled points of an arc-length parametrized
    /// curve. Kink markers split the samples into smooth pieces; each piece
    /// is fit with a natural cubic spline per coordinate. Throws if the
    /// samples deviate from unit speed by more than 1e-6 (the library does
    /// not re-fit).
    static PipeGeometry from_curve_samples(const std::vector<CurveSample>& samples,
                                           const std::vector<double>& kink_markers);

    double curvature(double x) const;   // ||Gamma''(x)||
    double inclination(double x) const; // alpha(x), right limit at kinks
    Vec3 tangent_left(double x) const;
    Vec3 tangent_right(double x) const;

    const std::vector<Kink>& kinks() const { return kinks_; }
    double support_radius() const { return support_radius_; }
    double interior_begin() const { return x_begin_; }
    double interior_end() const { return x_end_; }

    /// Segment boundaries and kink positions, sorted; the smooth pieces for
    /// ODE integration are the intervals in between.
    std::vector<double> breakpoints() const;

private:
    struct Seg {
        enum class Kind { straight, arc_h, arc_v, bump, sampled } kind;
        double x0 = 0.0, x1 = 0.0;
        double alpha0 = 0.0, phi0 = 0.0;
        double radius = 1.0;
        int turn = +1;
        double amplitude = 0.0;
        num::CubicSpline sx, sy, sz; // sampled pieces only
        double curvature(double x) const;
        double alpha(double x) const;
        double azimuth(double x) const;
        Vec3 tangent(double x) const;
    };

    const Seg* segment_at(double x) const;
    void validate() const;

    std::vector<Seg> segments_;
    std::vector<Kink> kinks_;
    double x_begin_ = 0.0, x_end_ = 0.0;
    double support_radius_ = 0.0;
    double alpha_out_ = 0.0, phi_in_ = 0.0, phi_out_ = 0.0;
};

/// ||Gamma'(x+)-Gamma'(x-)|| for a kink of angle theta: 2|sin(theta/2)|.
double kink_jump_magnitude(double theta);

struct TangentVariation {
    double absolutely_continuous = 0.0; // Int ||Gamma''|| dx
    std::vector<double> atoms;          // 2|sin(theta_i/2)| per kink
    double total() const;
};

TangentVariation tangent_variation_measure(const PipeGeometry& geom);

/// Friction / inhomogeneity factor f(x): nonnegative, bounded, continuous.
class ScalarField {
public:
    static ScalarField constant(double value);
    static ScalarField bump(double amplitude, double center, double width);
    static ScalarField table(std::vector<double> xs, std::vector<double> ys);
    double operator()(double x) const;

private:
    enum class Kind { constant, bump, table } kind_ = Kind::constant;
    double value_ = 0.0, center_ = 0.0, width_ = 1.0;
    num::Pchip table_;
    double table_lo_ = 0.0, table_hi_ = 0.0;
};

/// Curvature response kappa(xi): C1 away from 0, kappa(0) = 0, even
/// (evaluated at |xi|), nonnegative.
class ResponseFunction {
public:
    static ResponseFunction identity();
    static ResponseFunction linear(double slope);
    static ResponseFunction zero();
    static ResponseFunction table(std::vector<double> xis,
                                  std::vector<double> values);
    double operator()(double xi) const;

private:
    enum class Kind { linear, table } kind_ = Kind::linear;
    double slope_ = 1.0;
    num::Pchip table_;
    double table_hi_ = 0.0, table_hi_val_ = 0.0;
};

struct SourceCoefficients {
    ScalarField f = ScalarField::constant(0.0);
    ResponseFunction kappa = ResponseFunction::identity();
    double gravity = 0.0;
};

/// Momentum source rate of the distributed model away from kinks:
///   -f(x) kappa(||Gamma''(x)||) q - rho g sin(alpha(x)).
/// Zero outside the support radius. Throws DomainError at kink positions.
double smooth_source(const PipeGeometry& geom, const SourceCoefficients& coeffs,
                     const State& u, double x);

} // namespace pipeflow
