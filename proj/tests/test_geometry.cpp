#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pipeflow/geometry.hpp"

using namespace pipeflow;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<CurveSample> line_samples(double x0, double x1, int n, Vec3 dir,
                                      Vec3 origin = {0, 0, 0}) {
    std::vector<CurveSample> s;
    for (int i = 0; i <= n; ++i) {
        double x = x0 + (x1 - x0) * i / n;
        s.push_back({x, {origin[0] + dir[0] * x, origin[1] + dir[1] * x,
                         origin[2] + dir[2] * x}});
    }
    return s;
}
} // namespace

TEST_CASE("straight samples give a trivial geometry") {
    auto g = PipeGeometry::from_curve_samples(line_samples(-1.0, 1.0, 40, {1, 0, 0}),
                                              {});
    CHECK(g.kinks().empty());
    for (double x : {-0.9, 0.0, 0.7}) {
        CHECK(g.curvature(x) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(g.inclination(x) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("planar L-shape produces a right-angle kink") {
    // Two straight pieces: along (1,0,0) for x<0, along (0,1,0) for x>0.
    auto left = line_samples(-1.0, 0.0, 20, {1, 0, 0});
    auto right = line_samples(0.0, 1.0, 20, {0, 1, 0});
    std::vector<CurveSample> all = left;
    all.insert(all.end(), right.begin() + 1, right.end());
    auto g = PipeGeometry::from_curve_samples(all, {0.0});
    REQUIRE(g.kinks().size() == 1);
    CHECK(g.kinks()[0].angle == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(g.kinks()[0].position == doctest::Approx(0.0));
}

TEST_CASE("sampled circular arc recovers its curvature") {
    // Radius-2 arc in the horizontal plane, arc length 2.
    double R = 2.0;
    std::vector<CurveSample> s;
    int n = 400;
    for (int i = 0; i <= n; ++i) {
        double x = 2.0 * i / n;
        s.push_back({x, {R * std::sin(x / R), R * (1.0 - std::cos(x / R)), 0.0}});
    }
    auto g = PipeGeometry::from_curve_samples(s, {});
    for (double x : {0.3, 1.0, 1.7})
        CHECK(g.curvature(x) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("unit-speed violation is rejected") {
    auto bad = line_samples(-1.0, 1.0, 40, {2, 0, 0}); // speed 2
    CHECK_THROWS_AS(PipeGeometry::from_curve_samples(bad, {}), ConfigError);
}

TEST_CASE("kink jump magnitude") {
    CHECK(kink_jump_magnitude(0.0) == doctest::Approx(0.0));
    CHECK(kink_jump_magnitude(kPi / 2) == doctest::Approx(std::sqrt(2.0)));
    CHECK(kink_jump_magnitude(-kPi / 3) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kink_jump_magnitude(kPi), DomainError);
}

TEST_CASE("tangent variation measure") {
    SUBCASE("straight pipe") {
        auto g = PipeGeometry::straight();
        auto tv = tangent_variation_measure(g);
        CHECK(tv.absolutely_continuous == doctest::Approx(0.0));
        CHECK(tv.atoms.empty());
    }
    SUBCASE("single kink, straight elsewhere") {
        auto g = PipeGeometry::from_segments(
            -1.0, {{SegmentSpec::Type::straight, 1.0}, {SegmentSpec::Type::straight, 1.0}},
            {{0.0, kPi / 2, KinkPlane::horizontal}});
        auto tv = tangent_variation_measure(g);
        CHECK(tv.absolutely_continuous == doctest::Approx(0.0));
        REQUIRE(tv.atoms.size() == 1);
        CHECK(tv.atoms[0] == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("quarter circle of radius one") {
        SegmentSpec arc;
        arc.type = SegmentSpec::Type::arc_horizontal;
        arc.radius = 1.0;
        arc.length = kPi / 2;
        auto g = PipeGeometry::from_segments(0.0, {arc}, {});
        auto tv = tangent_variation_measure(g);
        CHECK(tv.atoms.empty());
        CHECK(std::abs(tv.absolutely_continuous - kPi / 2) <= 1e-6);
    }
}

TEST_CASE("atoms equal the kink jump magnitudes exactly") {
    std::vector<Kink> kinks = {{-1.0, 0.4, KinkPlane::horizontal},
                               {0.0, -0.9, KinkPlane::horizontal},
                               {1.0, 1.2, KinkPlane::horizontal}};
    auto g = PipeGeometry::from_segments(
        -1.0, {{SegmentSpec::Type::straight, 1.0}, {SegmentSpec::Type::straight, 1.0}},
        kinks);
    auto tv = tangent_variation_measure(g);
    REQUIRE(tv.atoms.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(tv.atoms[i] == doctest::Approx(kink_jump_magnitude(kinks[i].angle)));
}

TEST_CASE("smooth source") {
    SourceCoefficients plain;
    plain.f = ScalarField::constant(1.0);
    plain.kappa = ResponseFunction::identity();
    plain.gravity = 0.0;

    SUBCASE("straight horizontal pipe gives zero") {
        auto g = PipeGeometry::straight();
        SourceCoefficients c = plain;
        c.gravity = 9.81;
        for (double x : {-3.0, 0.0, 5.0})
            CHECK(smooth_source(g, c, {2.0, 1.5}, x) == doctest::Approx(0.0));
    }
    SUBCASE("circular arc of radius two") {
        SegmentSpec arc;
        arc.type = SegmentSpec::Type::arc_horizontal;
        arc.radius = 2.0;
        arc.length = 1.0;
        auto g = PipeGeometry::from_segments(0.0, {arc}, {});
        CHECK(smooth_source(g, plain, {1.0, 3.0}, 0.5) ==
              doctest::Approx(-1.5).epsilon(1e-12));
    }
    SUBCASE("inclined straight pipe under gravity") {
        // Vertical arcs ramp alpha to pi/6, hold, and ramp back down.
        double r = 0.05;
        std::vector<SegmentSpec> segs;
        SegmentSpec up;
        up.type = SegmentSpec::Type::arc_vertical;
        up.radius = r;
        up.turn = +1;
        up.length = r * kPi / 6;
        SegmentSpec mid;
        mid.type = SegmentSpec::Type::straight;
        mid.length = 1.0;
        SegmentSpec down = up;
        down.turn = -1;
        segs = {up, mid, down};
        auto g = PipeGeometry::from_segments(0.0, segs, {});
        SourceCoefficients c;
        c.f = ScalarField::constant(0.0);
        c.kappa = ResponseFunction::identity();
        c.gravity = 9.81;
        double x_mid = up.length + 0.5;
        CHECK(g.inclination(x_mid) == doctest::Approx(kPi / 6).epsilon(1e-12));
        CHECK(smooth_source(g, c, {2.0, 0.0}, x_mid) ==
              doctest::Approx(-9.81).epsilon(1e-9));
    }
    SUBCASE("kink positions are rejected") {
        auto g = PipeGeometry::from_segments(
            -1.0,
            {{SegmentSpec::Type::straight, 1.0}, {SegmentSpec::Type::straight, 1.0}},
            {{0.0, kPi / 2, KinkPlane::horizontal}});
        CHECK_THROWS_AS(smooth_source(g, plain, {1.0, 0.0}, 0.0), DomainError);
    }
}

TEST_CASE("source vanishes outside the support radius") {
    SegmentSpec arc;
    arc.type = SegmentSpec::Type::arc_horizontal;
    arc.radius = 2.0;
    arc.length = 1.0;
    auto g = PipeGeometry::from_segments(-0.5, {arc}, {});
    SourceCoefficients c;
    c.f = ScalarField::constant(1.0);
    c.kappa = ResponseFunction::identity();
    c.gravity = 9.81;
    double R = g.support_radius();
    for (double x : {R + 0.01, R + 2.0, -R - 0.01, -R - 7.0})
        CHECK(smooth_source(g, c, {1.0, 1.0}, x) == doctest::Approx(0.0));
}

TEST_CASE("angle recovery from two straight rays") {
    for (double theta : {0.3, -0.7, kPi / 2, 2.5}) {
        auto g = PipeGeometry::from_segments(
            -1.0,
            {{SegmentSpec::Type::straight, 1.0}, {SegmentSpec::Type::straight, 1.0}},
            {{0.0, theta, KinkPlane::horizontal}});
        REQUIRE(g.kinks().size() == 1);
        CHECK(g.kinks()[0].angle == doctest::Approx(theta).epsilon(1e-9));
        Vec3 tl = g.tangent_left(0.0), tr = g.tangent_right(0.0);
        CHECK(dot(tl, tr) == doctest::Approx(std::cos(theta)).epsilon(1e-12));
    }
}

TEST_CASE("coefficient presets") {
    SUBCASE("kappa is even and vanishes at zero") {
        auto ks = {ResponseFunction::identity(), ResponseFunction::linear(2.5),
                   ResponseFunction::table({0.0, 0.5, 1.0, 2.0},
                                           {0.0, 0.2, 0.7, 1.0})};
        for (const auto& k : ks) {
            CHECK(k(0.0) == doctest::Approx(0.0));
            for (double xi : {0.1, 0.37, 1.4, 3.0}) {
                CHECK(k(xi) == doctest::Approx(k(-xi)));
                CHECK(k(xi) >= 0.0);
            }
        }
    }
    SUBCASE("friction presets stay nonnegative") {
        auto f = ScalarField::bump(2.0, 0.0, 1.0);
        for (double x : {-2.0, -0.5, 0.0, 0.9, 3.0}) CHECK(f(x) >= 0.0);
        CHECK(f(0.0) == doctest::Approx(2.0));
        CHECK(f(1.5) == doctest::Approx(0.0));
        CHECK_THROWS_AS(ScalarField::constant(-1.0), ConfigError);
    }
}

TEST_CASE("geometry validation") {
    SUBCASE("kinks must sit on segment boundaries") {
        CHECK_THROWS_AS(PipeGeometry::from_segments(
                            -1.0, {{SegmentSpec::Type::straight, 2.0}},
                            {{0.3, 0.5, KinkPlane::horizontal}}),
                        ConfigError);
    }
    SUBCASE("pipe must end horizontally") {
        SegmentSpec up;
        up.type = SegmentSpec::Type::arc_vertical;
        up.radius = 1.0;
        up.turn = +1;
        up.length = 0.5;
        CHECK_THROWS_AS(PipeGeometry::from_segments(0.0, {up}, {}), ConfigError);
    }
}
