#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace billiard {

enum class Component : int { Gamma1 = 0, Gamma2 = 1, Gamma3 = 2 };

inline const char* component_name(Component c) {
    switch (c) {
        case Component::Gamma1: return "Gamma1";
        case Component::Gamma2: return "Gamma2";
        default: return "Gamma3";
    }
}

struct TableParams {
    double beta = 3.0;       // cusp sharpness, walls z = +-s^beta/beta
    double s1 = 1.0;         // horizontal extent of the cusp walls
    double theta0 = M_PI / 6; // half-angle of the closing arc

    // Throws InvalidParams naming the violated constraint.
    void validate() const;
};

// x^beta etc. with a fast path when beta is a small integer.
struct WallPow {
    double beta = 3.0;
    int ibeta = 0; // nonzero when beta is an exact integer in [3,16]

    void init(double b) {
        beta = b;
        const int i = static_cast<int>(std::lround(b));
        ibeta = (b == static_cast<double>(i) && i >= 3 && i <= 16) ? i : 0;
    }
    static double ipow(double x, int n) {
        double p = x;
        for (int k = 1; k < n; ++k) p *= x;
        return p;
    }
    double pow_beta(double x) const { return ibeta ? ipow(x, ibeta) : std::pow(x, beta); }
    double pow_beta_m1(double x) const { return ibeta ? ipow(x, ibeta - 1) : std::pow(x, beta - 1.0); }
    double pow_beta_m2(double x) const {
        if (ibeta) return ibeta == 3 ? x : ipow(x, ibeta - 2);
        return std::pow(x, beta - 2.0);
    }
    double pow_2beta_m2(double x) const {
        if (ibeta) { const double p = ipow(x, ibeta - 1); return p * p; }
        return std::pow(x, 2.0 * beta - 2.0);
    }
};

struct BoundaryPoint {
    Component component;
    double r;            // arclength from the vertex P along Gamma1
    double x, z;         // Cartesian position
    double tangent_angle; // angle of the positive tangent
    double curvature;    // signed, positive = dispersing
};

// The table Q_beta: two cusp walls z = +-s^beta/beta over s in [0, s1], vertex
// at the origin, closed by a dispersing circular arc through both wall
// endpoints with center on the symmetry axis. Arclength runs
// P -> Gamma1 (lower wall) -> Gamma3 (arc) -> Gamma2 (upper wall) -> P.
// Immutable after build; safe to share across threads.
struct CuspTable {
    TableParams params;
    WallPow wp;
    double alpha = 1.5; // beta/(beta-1)

    double arc_center_x = 0.0; // d, on the symmetry axis
    double arc_radius = 0.0;   // R
    double junction_z = 0.0;   // s1^beta/beta
    double axis_point_x = 0.0; // d - R, the perpendicular opposing point

    double len_gamma1 = 0.0, len_gamma2 = 0.0, len_gamma3 = 0.0;
    double perimeter = 0.0;
    double r_prime = 0.0;      // vertex arclength on the Gamma1 side
    double r_doubleprime = 0.0; // vertex arclength on the Gamma2 side (= perimeter)

    double beta() const { return params.beta; }
    double s1() const { return params.s1; }
    double theta0() const { return params.theta0; }

    // Wall atlas: A(s) = int_0^s sqrt(1 + u^(2 beta - 2)) du and its inverse.
    double wall_arclength(double s) const;
    double wall_abscissa(double r_wall) const; // bracketed Newton solve of A(s) = r_wall
    double wall_arclength_deriv(double s) const { return std::sqrt(1.0 + wp.pow_2beta_m2(s)); }

    double wall_height(double s) const { return wp.pow_beta(s) / params.beta; }
    double wall_slope(double s) const { return wp.pow_beta_m1(s); }
    double wall_curvature(double s) const {
        const double q = 1.0 + wp.pow_2beta_m2(s);
        return (params.beta - 1.0) * wp.pow_beta_m2(s) / (q * std::sqrt(q));
    }

    BoundaryPoint point_at(double r) const;
    Component component_of(double r) const;

    // internal atlas data
    std::vector<double> series_coeff; // term k: coeff * s^(k*(2b-2)+1)
    double series_split = 0.0;        // series valid on [0, split]
    double arclen_at_split = 0.0;
    std::vector<double> cheb_coeff; // antiderivative Chebyshev coeffs on [split, s1]
};

CuspTable build_table(const TableParams& params);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    bool pass = false;
    std::vector<ValidationCheck> checks;
    std::string first_failure;
};

// Runs the boundary sanity checks (simple boundary by dense sampling, arc
// inside the channel, arc curvature floor, perpendicular opposing point,
// arc through both junctions). Throws nothing; inspect `pass`.
ValidationReport validate_table(const CuspTable& table, int samples_per_component = 20000);

// Same but throws GeometryInvalid on the first failed check.
void validate_table_or_throw(const CuspTable& table);

struct ComponentLengths {
    double gamma1, gamma2, gamma3, total;
};

ComponentLengths component_lengths(const CuspTable& table);

} // namespace billiard
