#include "doctest.h"

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/oracle.hpp"
#include "billiard/rng.hpp"
#include "oracle_helpers.hpp"

#include <cmath>

using namespace billiard;

namespace {
CuspTable default_table() { return build_table({3.0, 1.0, M_PI / 6}); }
}

TEST_CASE("build_table closed-form arc geometry") {
    const CuspTable t = default_table();
    CHECK(t.arc_radius == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(t.arc_center_x == doctest::Approx(1.0 + std::sqrt(3.0) / 3.0).epsilon(1e-14));
    CHECK(t.len_gamma3 == doctest::Approx(2.0 * M_PI / 9.0).epsilon(1e-14));
    CHECK(t.len_gamma1 == t.len_gamma2);
    CHECK(t.perimeter == doctest::Approx(t.len_gamma1 + t.len_gamma2 + t.len_gamma3));
    CHECK(t.r_prime == 0.0);
    CHECK(t.r_doubleprime == t.perimeter);
}

TEST_CASE("wall arclength matches the Romberg oracle") {
    const CuspTable t = default_table();
    // independent route: Romberg on sqrt(1 + s^4)
    const double oracle =
        testoracle::romberg([](double s) { return std::sqrt(1.0 + s * s * s * s); }, 0.0, 1.0);
    CHECK(oracle == doctest::Approx(1.08942941322482).epsilon(1e-12)); // frozen
    CHECK(t.len_gamma1 == doctest::Approx(oracle).epsilon(1e-12));
    // and against the 60-digit oracle route
    CHECK(std::abs(oracle_wall_arclength(t, 1.0, 60) - t.len_gamma1) < 1e-13);
    CHECK(std::abs(oracle_wall_arclength(t, 0.37, 60) - t.wall_arclength(0.37)) < 1e-13);
    CHECK(std::abs(oracle_wall_arclength(t, 0.85, 60) - t.wall_arclength(0.85)) < 1e-13);
}

TEST_CASE("junction constraint rejects steep arcs") {
    CHECK_THROWS_AS(build_table({3.0, 1.0, M_PI / 3}), InvalidParams); // cot(60) < 1
    CHECK_THROWS_AS(build_table({2.0, 1.0, M_PI / 6}), InvalidParams); // beta = 2
    CHECK_THROWS_AS(build_table({3.0, -1.0, M_PI / 6}), InvalidParams);
    // theta0 = 0.9 arctan(1/s1^(beta-1)) is feasible
    const double theta = 0.9 * std::atan(1.0);
    const CuspTable t = build_table({3.0, 1.0, theta});
    CHECK(validate_table(t).pass);
}

TEST_CASE("monotone wall length in beta") {
    const double l3 = build_table({3.0, 1.0, M_PI / 6}).len_gamma1;
    const double l4 = build_table({4.0, 1.0, M_PI / 6}).len_gamma1;
    const double l6 = build_table({6.0, 1.0, M_PI / 6}).len_gamma1;
    CHECK(l3 > l4);
    CHECK(l4 > l6);
    CHECK(l6 > 1.0); // integrand > 1 pointwise
}

TEST_CASE("point_at anchors") {
    const CuspTable t = default_table();
    const BoundaryPoint vertex = t.point_at(0.0);
    CHECK(vertex.x == 0.0);
    CHECK(vertex.z == 0.0);
    CHECK(vertex.tangent_angle == doctest::Approx(0.0));
    CHECK(vertex.curvature == 0.0);

    const BoundaryPoint axis = t.point_at(t.len_gamma1 + 0.5 * t.len_gamma3);
    CHECK(axis.x == doctest::Approx(t.arc_center_x - t.arc_radius).epsilon(1e-13));
    CHECK(axis.z == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(std::abs(std::cos(axis.tangent_angle)) < 1e-12); // vertical tangent
    CHECK(axis.curvature == doctest::Approx(1.0 / t.arc_radius));

    CHECK_THROWS_AS(t.point_at(-1e-9), OutOfRange);
    CHECK_THROWS_AS(t.point_at(t.perimeter + 1e-9), OutOfRange);
}

TEST_CASE("near-vertex abscissa inversion") {
    const CuspTable t = default_table();
    const double r = 1e-3;
    const double s = t.wall_abscissa(r);
    // bracketed bisection on the Romberg arclength, fully independent
    double lo = 0.0, hi = 2e-3;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double a = testoracle::romberg(
            [](double u) { return std::sqrt(1.0 + u * u * u * u); }, 0.0, mid, 24, 1e-16);
        (a < r ? lo : hi) = mid;
    }
    CHECK(std::abs(s - 0.5 * (lo + hi)) < 1e-12);
    CHECK(std::abs(s - r) < 1e-9);
    // Taylor inversion: s = r - r^(2b-1)/(2(2b-1)) + o(r^(2b-1))
    CHECK(s == doctest::Approx(r - std::pow(r, 5.0) / 10.0).epsilon(1e-10));
}

TEST_CASE("mirror symmetry and arclength round trip") {
    const CuspTable t = default_table();
    SplitMix64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        const double r = rng.uniform() * t.perimeter;
        const BoundaryPoint p = t.point_at(r);
        const BoundaryPoint q = t.point_at(t.perimeter - r);
        CHECK(std::abs(p.x - q.x) < 1e-12);
        CHECK(std::abs(p.z + q.z) < 1e-12);

        // reconstruct the arclength from the returned point
        double r_back;
        switch (p.component) {
            case Component::Gamma1: r_back = t.wall_arclength(p.x); break;
            case Component::Gamma2: r_back = t.perimeter - t.wall_arclength(p.x); break;
            default: {
                const double psi = std::atan2(p.z, p.x - t.arc_center_x);
                const double psi_pos = psi <= 0.0 ? psi + 2.0 * M_PI : psi;
                r_back = t.len_gamma1 + t.arc_radius * (M_PI + t.theta0() - psi_pos);
            }
        }
        CHECK(std::abs(r_back - r) < 1e-10);
    }
}

TEST_CASE("wall curvature against finite differences of the tangent angle") {
    const CuspTable t = default_table();
    for (double s : {1e-3, 1e-2, 0.1, 0.4, 0.75, 0.99}) {
        const double r = t.wall_arclength(s);
        const double h = 1e-6;
        const double a_plus = t.point_at(r + h).tangent_angle;
        const double a_minus = t.point_at(r - h).tangent_angle;
        const double fd = std::abs(a_plus - a_minus) / (2.0 * h);
        CHECK(fd == doctest::Approx(t.wall_curvature(s)).epsilon(1e-6));
    }
}

TEST_CASE("wall curvature formula on components") {
    const CuspTable t = default_table();
    // (b-1) s^(b-2) / (1+s^(2b-2))^(3/2), zero only at the flat point
    for (double s : {0.2, 0.6, 1.0}) {
        const double expect = 2.0 * s / std::pow(1.0 + s * s * s * s, 1.5);
        CHECK(t.wall_curvature(s) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(t.wall_curvature(0.0) == 0.0);
    CHECK(t.point_at(t.len_gamma1 + 0.1).curvature == doctest::Approx(1.5));
}

TEST_CASE("validate_table catches a perturbed arc") {
    CuspTable t = default_table();
    CHECK(validate_table(t).pass);
    CuspTable broken = t;
    broken.arc_radius *= 1.01;
    const ValidationReport rep = validate_table(broken);
    CHECK_FALSE(rep.pass);
    CHECK(rep.first_failure.find("arc_through_junctions") != std::string::npos);
    CHECK_THROWS_AS(validate_table_or_throw(broken), GeometryInvalid);
}

TEST_CASE("fast power helper agrees with std::pow") {
    WallPow wp3;
    wp3.init(3.0);
    WallPow wp27;
    wp27.init(2.7);
    for (double x : {1e-6, 0.03, 0.5, 0.99}) {
        CHECK(wp3.pow_beta(x) == doctest::Approx(std::pow(x, 3.0)).epsilon(1e-15));
        CHECK(wp3.pow_2beta_m2(x) == doctest::Approx(std::pow(x, 4.0)).epsilon(1e-15));
        CHECK(wp27.pow_beta(x) == doctest::Approx(std::pow(x, 2.7)).epsilon(1e-14));
    }
}

TEST_CASE("non-integer beta table builds and round-trips") {
    const CuspTable t = build_table({2.6, 0.9, 0.4});
    CHECK(validate_table(t, 10000).pass);
    for (double s : {1e-4, 0.05, 0.4, 0.7, 0.89}) {
        const double r = t.wall_arclength(s);
        CHECK(std::abs(t.wall_abscissa(r) - s) < 1e-12);
    }
    CHECK(std::abs(oracle_wall_arclength(t, 0.81, 60) - t.wall_arclength(0.81)) < 1e-12);
}
