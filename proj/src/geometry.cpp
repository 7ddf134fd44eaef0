#include "billiard/geometry.hpp"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace billiard {
namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Chebyshev fit of f on [a,b] followed by coefficient-wise integration, so the
// returned coefficients represent F(x) = int_a^x f with F(a) = 0.
std::vector<double> chebyshev_antiderivative(const std::function<double(double)>& f, double a,
                                             double b, int degree) {
    const int K = degree;
    std::vector<double> fx(K);
    for (int j = 0; j < K; ++j) {
        const double theta = M_PI * (j + 0.5) / K;
        const double xi = std::cos(theta);
        fx[j] = f(0.5 * (a + b) + 0.5 * (b - a) * xi);
    }
    std::vector<double> c(K, 0.0);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int j = 0; j < K; ++j) s += fx[j] * std::cos(M_PI * k * (j + 0.5) / K);
        c[k] = 2.0 / K * s;
    }
    // integrate: antiderivative coefficients (scaled by (b-a)/2)
    std::vector<double> C(K + 1, 0.0);
    const double h = 0.5 * (b - a);
    for (int k = 1; k < K; ++k) {
        const double next = (k + 1 < K) ? c[k + 1] : 0.0;
        C[k] = h * (c[k - 1] - next) / (2.0 * k);
    }
    C[K] = h * c[K - 1] / (2.0 * K);
    // fix constant so F(a) = 0; T_k(-1) = (-1)^k
    double at_a = 0.0;
    for (int k = 1; k <= K; ++k) at_a += C[k] * ((k % 2) ? -1.0 : 1.0);
    C[0] = -2.0 * at_a; // stored with the Clenshaw half-c0 convention
    return C;
}

double clenshaw(const std::vector<double>& c, double a, double b, double x) {
    const double xi = (2.0 * x - a - b) / (b - a);
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        const double t = 2.0 * xi * b1 - b2 + c[static_cast<std::size_t>(k)];
        b2 = b1;
        b1 = t;
    }
    return xi * b1 - b2 + 0.5 * c[0];
}

} // namespace

void TableParams::validate() const {
    if (!(beta > 2.0))
        throw InvalidParams("TableParams: beta must be > 2 (got " + fmt(beta) + ")");
    if (!(s1 > 0.0))
        throw InvalidParams("TableParams: s1 must be > 0 (got " + fmt(s1) + ")");
    if (!(theta0 > 0.0 && theta0 < M_PI / 2))
        throw InvalidParams("TableParams: theta0 must lie in (0, pi/2) (got " + fmt(theta0) + ")");
    const double wall_slope_end = std::pow(s1, beta - 1.0);
    if (!(1.0 / std::tan(theta0) > wall_slope_end))
        throw InvalidParams("TableParams: junction constraint cot(theta0) > s1^(beta-1) violated (cot = " +
                            fmt(1.0 / std::tan(theta0)) + ", s1^(beta-1) = " + fmt(wall_slope_end) + ")");
}

double CuspTable::wall_arclength(double s) const {
    if (s <= 0.0) return 0.0;
    if (s <= series_split) {
        // int_0^s (1 + u^(2b-2))^(1/2) du expanded binomially; the k-th term is
        // coeff_k * s^(k(2b-2)+1) and the expansion converges for s < 1.
        const double q = wp.pow_2beta_m2(s);
        double term_pow = s;
        double total = 0.0;
        for (double coeff : series_coeff) {
            total += coeff * term_pow;
            term_pow *= q;
        }
        return total;
    }
    const double s_hi = std::min(s, params.s1);
    return arclen_at_split + clenshaw(cheb_coeff, series_split, params.s1, s_hi);
}

double CuspTable::wall_abscissa(double r_wall) const {
    if (r_wall <= 0.0) return 0.0;
    if (r_wall >= len_gamma1) return params.s1;
    double lo = 0.0, hi = params.s1;
    double s = std::min(r_wall, params.s1); // A(s) >= s, so the root is at most r_wall
    for (int it = 0; it < 60; ++it) {
        const double g = wall_arclength(s) - r_wall;
        if (g > 0.0)
            hi = s;
        else
            lo = s;
        const double step = g / wall_arclength_deriv(s);
        double next = s - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-16 * params.s1) { s = next; break; }
        s = next;
    }
    return s;
}

Component CuspTable::component_of(double r) const {
    if (r < 0.0 || r > perimeter) throw OutOfRange("arclength outside [0, perimeter]: " + fmt(r));
    if (r <= len_gamma1) return Component::Gamma1;
    if (r <= len_gamma1 + len_gamma3) return Component::Gamma3;
    return Component::Gamma2;
}

BoundaryPoint CuspTable::point_at(double r) const {
    const Component c = component_of(r);
    BoundaryPoint p;
    p.component = c;
    p.r = r;
    switch (c) {
        case Component::Gamma1: {
            const double s = wall_abscissa(r);
            p.x = s;
            p.z = -wall_height(s);
            p.tangent_angle = std::atan2(-wall_slope(s), 1.0);
            p.curvature = wall_curvature(s);
            break;
        }
        case Component::Gamma3: {
            const double xi = r - len_gamma1;
            const double psi = M_PI + theta0() - xi / arc_radius;
            p.x = arc_center_x + arc_radius * std::cos(psi);
            p.z = arc_radius * std::sin(psi);
            p.tangent_angle = std::atan2(-std::cos(psi), std::sin(psi));
            p.curvature = 1.0 / arc_radius;
            break;
        }
        case Component::Gamma2: {
            const double s = wall_abscissa(perimeter - r);
            p.x = s;
            p.z = wall_height(s);
            p.tangent_angle = std::atan2(-wall_slope(s), -1.0);
            p.curvature = wall_curvature(s);
            break;
        }
    }
    return p;
}

CuspTable build_table(const TableParams& params) {
    params.validate();
    CuspTable t;
    t.params = params;
    t.wp.init(params.beta);
    t.alpha = params.beta / (params.beta - 1.0);

    t.junction_z = t.wall_height(params.s1);
    t.arc_radius = t.junction_z / std::sin(params.theta0);
    t.arc_center_x = params.s1 + t.arc_radius * std::cos(params.theta0);
    t.axis_point_x = t.arc_center_x - t.arc_radius;
    if (!(t.axis_point_x > 0.0))
        throw InvalidParams("TableParams: arc reaches past the vertex (axis point x = " +
                            fmt(t.axis_point_x) + " <= 0); widen theta0 or shorten the walls");

    // Wall arclength atlas. Binomial series of sqrt(1 + u^(2b-2)) integrated
    // termwise covers [0, split]; a Chebyshev antiderivative covers the rest.
    t.series_split = std::min(0.7, params.s1);
    const double q_split = std::pow(t.series_split, 2.0 * params.beta - 2.0);
    double binom = 1.0; // binom(1/2, k)
    for (int k = 0; k < 200; ++k) {
        if (k > 0) binom *= (0.5 - (k - 1)) / k;
        const double expo = k * (2.0 * params.beta - 2.0) + 1.0;
        t.series_coeff.push_back(binom / expo);
        if (k > 0 && std::abs(binom) * std::pow(q_split, k) / expo < 1e-18) break;
    }
    t.arclen_at_split = t.wall_arclength(t.series_split);
    if (params.s1 > t.series_split) {
        t.cheb_coeff = chebyshev_antiderivative(
            [&t](double s) { return t.wall_arclength_deriv(s); }, t.series_split, params.s1, 96);
    } else {
        t.cheb_coeff.assign(2, 0.0);
    }

    t.len_gamma1 = t.wall_arclength(params.s1);
    t.len_gamma2 = t.len_gamma1;
    t.len_gamma3 = 2.0 * params.theta0 * t.arc_radius;
    t.perimeter = t.len_gamma1 + t.len_gamma2 + t.len_gamma3;
    t.r_prime = 0.0;
    t.r_doubleprime = t.perimeter;

    // Cross-check the series/Chebyshev atlas against direct adaptive quadrature.
    const double direct = integrate_value(
        [&t](double u) { return t.wall_arclength_deriv(u); }, 0.0, params.s1, 0.0, 1e-12);
    if (std::abs(direct - t.len_gamma1) > 1e-11 * std::max(1.0, direct))
        throw GeometryInvalid("wall arclength atlas disagrees with adaptive quadrature: " +
                              fmt(t.len_gamma1) + " vs " + fmt(direct));
    return t;
}

ComponentLengths component_lengths(const CuspTable& t) {
    return {t.len_gamma1, t.len_gamma2, t.len_gamma3, t.perimeter};
}

namespace {

bool segments_intersect(double ax, double az, double bx, double bz, double cx, double cz,
                        double dx, double dz) {
    auto orient = [](double px, double pz, double qx, double qz, double rx, double rz) {
        return (qx - px) * (rz - pz) - (qz - pz) * (rx - px);
    };
    const double o1 = orient(ax, az, bx, bz, cx, cz);
    const double o2 = orient(ax, az, bx, bz, dx, dz);
    const double o3 = orient(cx, cz, dx, dz, ax, az);
    const double o4 = orient(cx, cz, dx, dz, bx, bz);
    // proper crossings only; touching (zero orientation) at shared junctions is fine
    return (o1 * o2 < 0.0) && (o3 * o4 < 0.0);
}

} // namespace

ValidationReport validate_table(const CuspTable& t, int samples_per_component) {
    ValidationReport report;
    auto add = [&report](const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
        if (!pass && report.first_failure.empty()) report.first_failure = name + ": " + detail;
    };

    // (0) arc passes through both wall endpoints, 1e-12 relative
    {
        const double dx = t.s1() - t.arc_center_x;
        const double rad_up = std::hypot(dx, t.junction_z);
        const double rad_dn = std::hypot(dx, -t.junction_z);
        const double err =
            std::max(std::abs(rad_up - t.arc_radius), std::abs(rad_dn - t.arc_radius)) / t.arc_radius;
        add("arc_through_junctions", err <= 1e-12, "relative endpoint error " + fmt(err));
    }

    // (a) simple boundary: dense polylines, no proper crossings between distinct
    // components (the strict orientation test ignores the shared junction points).
    {
        const int n = std::max(samples_per_component, 10000);
        auto sample = [&t, n](double r_lo, double r_hi) {
            std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(n) + 1);
            for (int i = 0; i <= n; ++i) {
                const BoundaryPoint p = t.point_at(r_lo + (r_hi - r_lo) * i / n);
                pts[static_cast<std::size_t>(i)] = {p.x, p.z};
            }
            return pts;
        };
        const auto g1 = sample(0.0, t.len_gamma1);
        const auto g3 = sample(t.len_gamma1, t.len_gamma1 + t.len_gamma3);
        const auto g2 = sample(t.len_gamma1 + t.len_gamma3, t.perimeter);

        // bucket segments by x to keep the pairwise test near-linear
        const double x_lo = 0.0, x_hi = t.s1();
        const int nbuckets = 1024;
        auto bucket_of = [&](double x) {
            int b = static_cast<int>((x - x_lo) / (x_hi - x_lo) * nbuckets);
            return std::clamp(b, 0, nbuckets - 1);
        };
        auto bucketize = [&](const std::vector<std::pair<double, double>>& poly) {
            std::vector<std::vector<int>> buckets(nbuckets);
            for (int i = 0; i + 1 < static_cast<int>(poly.size()); ++i) {
                const int b0 = bucket_of(std::min(poly[i].first, poly[i + 1].first));
                const int b1 = bucket_of(std::max(poly[i].first, poly[i + 1].first));
                for (int b = b0; b <= b1; ++b) buckets[static_cast<std::size_t>(b)].push_back(i);
            }
            return buckets;
        };
        bool simple = true;
        std::string where;
        auto check_pair = [&](const std::vector<std::pair<double, double>>& A,
                              const std::vector<std::pair<double, double>>& B, const char* label) {
            const auto bb = bucketize(B);
            for (int i = 0; i + 1 < static_cast<int>(A.size()) && simple; ++i) {
                const int b0 = bucket_of(std::min(A[i].first, A[i + 1].first));
                const int b1 = bucket_of(std::max(A[i].first, A[i + 1].first));
                int last = -1;
                for (int b = b0; b <= b1 && simple; ++b) {
                    for (int j : bb[static_cast<std::size_t>(b)]) {
                        if (j <= last) continue;
                        if (segments_intersect(A[i].first, A[i].second, A[i + 1].first,
                                               A[i + 1].second, B[j].first, B[j].second,
                                               B[j + 1].first, B[j + 1].second)) {
                            simple = false;
                            where = label;
                            break;
                        }
                    }
                    if (!bb[static_cast<std::size_t>(b)].empty())
                        last = bb[static_cast<std::size_t>(b)].back();
                }
            }
        };
        check_pair(g1, g2, "Gamma1 x Gamma2");
        check_pair(g1, g3, "Gamma1 x Gamma3");
        check_pair(g2, g3, "Gamma2 x Gamma3");
        add("simple_boundary", simple, simple ? "no crossings" : "crossing between " + where);
    }

    // (b) the arc stays strictly inside the channel between its axis point and s1
    {
        bool inside = true;
        double worst = -1e300;
        const int n = std::max(samples_per_component, 10000);
        for (int i = 1; i < n; ++i) {
            const double x = t.axis_point_x + (t.s1() - t.axis_point_x) * i / n;
            const double dx = x - t.arc_center_x;
            const double arc_z = std::sqrt(std::max(0.0, t.arc_radius * t.arc_radius - dx * dx));
            const double wall_z = t.wall_height(x);
            worst = std::max(worst, arc_z - wall_z);
            if (arc_z >= wall_z) { inside = false; }
        }
        add("arc_inside_channel", inside, "max(arc_z - wall_z) = " + fmt(worst));
    }

    // (c) arc curvature bounded away from zero
    {
        const double k = 1.0 / t.arc_radius;
        add("arc_curvature_floor", k > 1e-6, "curvature = " + fmt(k));
    }

    // (d) perpendicular opposing point: the axis ray from P meets the arc at its
    // nearest axis point with horizontal inward normal.
    {
        const bool exists = t.axis_point_x > 0.0 && t.axis_point_x < t.s1();
        const BoundaryPoint p = t.point_at(t.len_gamma1 + 0.5 * t.len_gamma3);
        const double pos_err = std::hypot(p.x - t.axis_point_x, p.z);
        const double normal_tilt = std::abs(std::cos(p.tangent_angle)); // tangent should be vertical
        add("perpendicular_opposing_point", exists && pos_err <= 1e-10 && normal_tilt <= 1e-10,
            "axis point x = " + fmt(t.axis_point_x) + ", position error " + fmt(pos_err));
    }

    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

void validate_table_or_throw(const CuspTable& table) {
    const ValidationReport rep = validate_table(table);
    if (!rep.pass) throw GeometryInvalid(rep.first_failure);
}

} // namespace billiard
