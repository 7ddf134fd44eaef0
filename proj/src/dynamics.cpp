#include "billiard/dynamics.hpp"

#include "billiard/errors.hpp"
#include "billiard/oracle.hpp"

#include <cmath>

namespace billiard {
namespace {

constexpr double kGrazingCutoff = 1e-12; // below this the state is singular
constexpr double kCornerSingular = 1e-12;
constexpr double kCornerNear = 1e-10;

struct WallFrame {
    double tx, tz, nx, nz; // unit tangent / inward normal
};

WallFrame wall_frame(const CuspTable& t, Component comp, double s) {
    const double m = t.wall_slope(s);
    const double inv = 1.0 / std::sqrt(1.0 + m * m);
    if (comp == Component::Gamma1) return {inv, -m * inv, m * inv, inv};
    return {-inv, -m * inv, m * inv, -inv};
}

// First intersection with the wall z = sign * x^beta/beta along p + t v.
// The gap h(t) = sign*z(t) - x(t)^beta/beta is concave in t wherever
// x(t) > 0, so the window [0, tb] is split at the unique interior extremum
// and each sub-bracket holds at most one root.
bool wall_hit(const CuspTable& tab, double px, double pz, double vx, double vz, double sign,
              double& t_out) {
    const double beta = tab.beta();
    const int ib = tab.wp.ibeta;
    const double svz = sign * vz;
    const double spz = sign * pz;
    // gap and its t-derivative share the powers of x
    auto eval = [&](double t, double& ht, double& dht) {
        const double x = px + t * vx;
        double pb, pbm1; // x^beta, x^(beta-1)
        if (ib == 3) {
            pbm1 = x * x;
            pb = pbm1 * x;
        } else if (ib) {
            pbm1 = WallPow::ipow(x, ib - 1);
            pb = pbm1 * x;
        } else {
            pbm1 = std::pow(x, beta - 1.0);
            pb = pbm1 * x;
        }
        ht = spz + t * svz - pb / beta;
        dht = svz - pbm1 * vx;
    };

    double tb;
    if (vx > 1e-300) {
        tb = (tab.s1() - px) / vx;
    } else if (vx < -1e-300) {
        tb = -px / vx;
    } else {
        // vertical ray: x is constant, the gap is linear in t
        const double z_wall = sign * tab.wall_height(px);
        if (vz == 0.0) return false;
        const double t = (z_wall - pz) / vz;
        if (!(t > 0.0)) return false;
        t_out = t;
        return true;
    }
    if (!(tb > 0.0)) return false;

    double lo = 0.0, hi = tb;
    double h_lo, h_hi, dh;
    eval(0.0, h_lo, dh);
    if (h_lo >= 0.0) return false; // on or beyond this wall; the source wall is never queried

    // interior extremum: sign*vz = x^(beta-1) vx
    const double ratio = svz / vx;
    bool have_root = false;
    if (ratio > 0.0) {
        const double xv = (ib == 3) ? std::sqrt(ratio) : std::pow(ratio, 1.0 / (beta - 1.0));
        const double tv = (xv - px) / vx;
        if (tv > 0.0 && tv < tb) {
            eval(tv, h_hi, dh);
            if (h_hi < 0.0) return false; // concave max below the wall
            hi = tv;
            have_root = true;
        }
    }
    if (!have_root) {
        eval(tb, h_hi, dh);
        if (h_hi < 0.0) return false;
        hi = tb;
    }

    // Safeguarded Newton on [lo, hi] with h(lo) < 0 <= h(hi). Starting on the
    // h < 0 side of a concave branch gives monotone quadratic convergence (the
    // tangent line lies above h, so iterates approach the root from one side);
    // starting at the extremum end would divide by h' ~ 0.
    double t = lo;
    if (h_hi > h_lo) {
        const double sec = lo - h_lo * (hi - lo) / (h_hi - h_lo);
        if (sec > lo && sec < hi) t = sec;
    }
    for (int it = 0; it < 60; ++it) {
        double ht, d;
        eval(t, ht, d);
        if (ht > 0.0)
            hi = t;
        else if (ht < 0.0)
            lo = t;
        else
            break;
        double next = (d != 0.0) ? t - ht / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 2e-16 * (1.0 + t)) {
            t = next;
            break;
        }
        t = next;
    }
    t_out = t;
    return true;
}

// Intersections with the closing arc's circle; valid hits have x <= s1,
// which is exactly the sub-arc between the junctions.
bool arc_hit(const CuspTable& tab, double px, double pz, double vx, double vz, double& t_out) {
    const double wx = px - tab.arc_center_x;
    const double wz = pz;
    const double b = wx * vx + wz * vz;
    const double c = wx * wx + wz * wz - tab.arc_radius * tab.arc_radius;
    const double disc = b * b - c;
    if (disc <= 0.0) return false;
    const double sd = std::sqrt(disc);
    // monic quadratic t^2 + 2bt + c; both roots share the sign of -b when c > 0
    double t1, t2;
    if (b <= 0.0) {
        t2 = -b + sd;
        t1 = c / t2;
    } else {
        t1 = -b - sd;
        t2 = c / t1;
    }
    if (t1 > t2) std::swap(t1, t2);
    for (double t : {t1, t2}) {
        if (t <= 1e-15) continue;
        const double x = px + t * vx;
        if (x <= tab.s1() + 1e-14) {
            t_out = t;
            return true;
        }
    }
    return false;
}

FlightResult step_double(const CuspTable& tab, const CollisionState& st) {
    double best_t = INFINITY;
    int best = -1; // 0 = Gamma1, 1 = Gamma2, 2 = arc
    double t;
    if (st.comp != Component::Gamma1 && wall_hit(tab, st.x, st.z, st.vx, st.vz, -1.0, t)) {
        best_t = t;
        best = 0;
    }
    if (st.comp != Component::Gamma2 && wall_hit(tab, st.x, st.z, st.vx, st.vz, +1.0, t) &&
        t < best_t) {
        best_t = t;
        best = 1;
    }
    if (st.comp != Component::Gamma3 && arc_hit(tab, st.x, st.z, st.vx, st.vz, t) && t < best_t) {
        best_t = t;
        best = 2;
    }
    if (best < 0) throw NoIntersection("no boundary intersection found (geometry bug guard)");

    const double hx = st.x + best_t * st.vx;
    const double hz = st.z + best_t * st.vz;

    // singular set: vertex and the two wall/arc junctions
    const double d_vertex = std::sqrt(hx * hx + hz * hz);
    const double jux = hx - tab.s1(), juz = hz - tab.junction_z;
    const double d_jup = std::sqrt(jux * jux + juz * juz);
    const double jdz = hz + tab.junction_z;
    const double d_jdn = std::sqrt(jux * jux + jdz * jdz);
    const double d_corner = std::min({d_vertex, d_jup, d_jdn});
    if (d_corner <= kCornerSingular)
        throw SingularHit("trajectory hit a corner point (vertex or junction)");

    FlightResult out;
    out.tau = best_t;
    out.flags.near_corner = d_corner < kCornerNear;

    CollisionState& n = out.next;
    double tx, tz, nx, nz;
    if (best == 2) {
        double psi = std::atan2(hz, hx - tab.arc_center_x);
        const double psi_pos = (psi <= 0.0) ? psi + 2.0 * M_PI : psi;
        n.comp = Component::Gamma3;
        n.param = tab.arc_radius * (M_PI + tab.theta0() - psi_pos);
        n.x = tab.arc_center_x + tab.arc_radius * std::cos(psi);
        n.z = tab.arc_radius * std::sin(psi);
        n.r = tab.len_gamma1 + n.param;
        tx = std::sin(psi);
        tz = -std::cos(psi);
        nx = std::cos(psi);
        nz = std::sin(psi);
    } else {
        const Component comp = (best == 0) ? Component::Gamma1 : Component::Gamma2;
        const double s = std::min(std::max(hx, 0.0), tab.s1());
        n.comp = comp;
        n.param = s;
        n.x = s;
        n.z = (best == 0) ? -tab.wall_height(s) : tab.wall_height(s);
        const double rw = tab.wall_arclength(s);
        n.r = (best == 0) ? rw : tab.perimeter - rw;
        const WallFrame f = wall_frame(tab, comp, s);
        tx = f.tx;
        tz = f.tz;
        nx = f.nx;
        nz = f.nz;
    }

    // specular reflection
    const double vn = st.vx * nx + st.vz * nz;
    double rvx = st.vx - 2.0 * vn * nx;
    double rvz = st.vz - 2.0 * vn * nz;
    const double norm = std::sqrt(rvx * rvx + rvz * rvz);
    rvx /= norm;
    rvz /= norm;
    n.vx = rvx;
    n.vz = rvz;
    n.sin_phi = tx * rvz - tz * rvx;
    n.cos_phi = tx * rvx + tz * rvz;
    if (n.sin_phi <= kGrazingCutoff)
        throw SingularHit("reflected state numerically grazing (sin phi below cutoff)");
    out.flags.near_grazing = n.sin_phi < 1e-8;
    return out;
}

} // namespace

CollisionState make_state(const CuspTable& t, Component comp, double param, double phi) {
    CollisionState st;
    st.comp = comp;
    st.param = param;
    st.sin_phi = std::sin(phi);
    st.cos_phi = std::cos(phi);
    double tx, tz, nx, nz;
    switch (comp) {
        case Component::Gamma1: {
            st.x = param;
            st.z = -t.wall_height(param);
            st.r = t.wall_arclength(param);
            const WallFrame f = wall_frame(t, comp, param);
            tx = f.tx; tz = f.tz; nx = f.nx; nz = f.nz;
            break;
        }
        case Component::Gamma2: {
            st.x = param;
            st.z = t.wall_height(param);
            st.r = t.perimeter - t.wall_arclength(param);
            const WallFrame f = wall_frame(t, comp, param);
            tx = f.tx; tz = f.tz; nx = f.nx; nz = f.nz;
            break;
        }
        default: {
            const double psi = M_PI + t.theta0() - param / t.arc_radius;
            st.x = t.arc_center_x + t.arc_radius * std::cos(psi);
            st.z = t.arc_radius * std::sin(psi);
            st.r = t.len_gamma1 + param;
            tx = std::sin(psi);
            tz = -std::cos(psi);
            nx = std::cos(psi);
            nz = std::sin(psi);
            break;
        }
    }
    st.vx = st.cos_phi * tx + st.sin_phi * nx;
    st.vz = st.cos_phi * tz + st.sin_phi * nz;
    return st;
}

CollisionState state_from_r_phi(const CuspTable& t, double r, double phi) {
    const Component comp = t.component_of(r);
    double param;
    switch (comp) {
        case Component::Gamma1: param = t.wall_abscissa(r); break;
        case Component::Gamma3: param = r - t.len_gamma1; break;
        default: param = t.wall_abscissa(t.perimeter - r); break;
    }
    return make_state(t, comp, param, phi);
}

FlightResult next_collision(const CuspTable& table, const CollisionState& state,
                            const PrecisionPolicy& policy) {
    FlightResult res = step_double(table, state);
    if (policy.allow_escalation) {
        const bool wall_next = res.next.comp != Component::Gamma3;
        if (res.next.sin_phi < policy.escalate_sin_phi || res.tau < policy.escalate_tau ||
            (wall_next && res.next.param < policy.escalate_abscissa)) {
            res = oracle_next_collision(table, state, policy.digits);
            res.flags.precision_escalated = true;
        }
    }
    return res;
}

CollisionState time_reverse(const CuspTable& table, const CollisionState& state) {
    CollisionState r = state;
    r.cos_phi = -state.cos_phi; // phi -> pi - phi
    // velocity reflects across the normal: v -> v - 2 (v.t) t
    double tx, tz;
    if (state.comp == Component::Gamma3) {
        const double psi = M_PI + table.theta0() - state.param / table.arc_radius;
        tx = std::sin(psi);
        tz = -std::cos(psi);
    } else {
        const WallFrame f = wall_frame(table, state.comp, state.param);
        tx = f.tx;
        tz = f.tz;
    }
    const double vt = state.vx * tx + state.vz * tz;
    r.vx = state.vx - 2.0 * vt * tx;
    r.vz = state.vz - 2.0 * vt * tz;
    return r;
}

FlightResult prev_collision(const CuspTable& table, const CollisionState& state,
                            const PrecisionPolicy& policy) {
    FlightResult res = next_collision(table, time_reverse(table, state), policy);
    res.next = time_reverse(table, res.next);
    return res;
}

CollisionState mirror_state(const CuspTable& table, const CollisionState& state) {
    Component comp = state.comp;
    double param = state.param;
    if (comp == Component::Gamma1)
        comp = Component::Gamma2;
    else if (comp == Component::Gamma2)
        comp = Component::Gamma1;
    else
        param = table.len_gamma3 - param;
    const double phi = std::atan2(state.sin_phi, state.cos_phi);
    return make_state(table, comp, param, M_PI - phi);
}

CollisionState sample_mu(const CuspTable& table, SplitMix64& rng) {
    const double r = rng.uniform() * table.perimeter;
    const double phi = std::acos(1.0 - 2.0 * rng.uniform());
    return state_from_r_phi(table, r, phi);
}

CollisionState sample_mu_tilde(const CuspTable& table, SplitMix64& rng) {
    const double xi = rng.uniform() * table.len_gamma3;
    const double phi = std::acos(1.0 - 2.0 * rng.uniform());
    return make_state(table, Component::Gamma3, xi, phi);
}

} // namespace billiard
