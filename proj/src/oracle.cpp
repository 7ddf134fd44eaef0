#include "billiard/oracle.hpp"

#include "billiard/bigfloat.hpp"
#include "billiard/errors.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace billiard {
namespace {

// Gauss-Legendre nodes/weights on [-1,1] at working precision (Newton on the
// three-term recurrence).
void legendre_nodes(int n, mpfr_prec_t prec, std::vector<BigFloat>& x, std::vector<BigFloat>& w) {
    x.assign(n, BigFloat(prec));
    w.assign(n, BigFloat(prec));
    const BigFloat pi = BigFloat::pi(prec);
    const BigFloat tol = BigFloat(1.0, prec) / pow_int(BigFloat(2.0, prec), prec - 8);
    for (int i = 0; i < n; ++i) {
        BigFloat xi(std::cos(M_PI * (i + 0.75) / (n + 0.5)), prec);
        for (int it = 0; it < 200; ++it) {
            // evaluate P_n and P_n' at xi
            BigFloat p0(1.0, prec), p1 = xi;
            for (int k = 2; k <= n; ++k) {
                BigFloat p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            BigFloat dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
            BigFloat step = p1 / dp;
            xi = xi - step;
            if (abs(step) <= tol) break;
        }
        x[i] = xi;
        // recompute derivative for the weight
        BigFloat p0(1.0, prec), p1 = xi;
        for (int k = 2; k <= n; ++k) {
            BigFloat p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / double(k);
            p0 = p1;
            p1 = p2;
        }
        BigFloat dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
        (void)pi;
    }
}

struct Ctx {
    mpfr_prec_t prec;
    int digits;
    double beta_d;
    int ibeta;
    BigFloat beta, s1, theta0, radius, center_x, junction_z, pi;
    BigFloat split, arclen_split, len1, len3, perimeter;
    std::vector<BigFloat> series_coeff;
    std::vector<BigFloat> glx, glw;

    BigFloat pow_beta(const BigFloat& v) const {
        return ibeta ? pow_int(v, ibeta) : pow(v, beta);
    }
    BigFloat pow_beta_m1(const BigFloat& v) const {
        return ibeta ? pow_int(v, ibeta - 1) : pow(v, beta - 1.0);
    }
    BigFloat pow_2beta_m2(const BigFloat& v) const {
        const BigFloat p = pow_beta_m1(v);
        return p * p;
    }
    BigFloat wall_height(const BigFloat& v) const { return pow_beta(v) / beta; }
    BigFloat integrand(const BigFloat& u) const { return sqrt(1.0 + pow_2beta_m2(u)); }

    BigFloat series_arclength(const BigFloat& s) const {
        const BigFloat q = pow_2beta_m2(s);
        BigFloat term = s;
        BigFloat total(prec);
        for (const BigFloat& c : series_coeff) {
            total = total + c * term;
            term = term * q;
        }
        return total;
    }

    BigFloat gl_integral(const BigFloat& a, const BigFloat& b) const {
        const BigFloat c = 0.5 * (a + b);
        const BigFloat h = 0.5 * (b - a);
        BigFloat total(prec);
        for (std::size_t i = 0; i < glx.size(); ++i)
            total = total + glw[i] * integrand(c + h * glx[i]);
        return h * total;
    }

    BigFloat arclength(const BigFloat& s) const {
        if (s <= 0.0) return BigFloat(0.0, prec);
        if (s <= split) return series_arclength(s);
        return arclen_split + gl_integral(split, s < s1 ? s : s1);
    }

    Ctx(const CuspTable& t, int digits_in) : prec(BigFloat::prec_for_digits(digits_in)) {
        digits = digits_in;
        beta_d = t.beta();
        ibeta = t.wp.ibeta;
        beta = BigFloat(t.beta(), prec);
        s1 = BigFloat(t.s1(), prec);
        theta0 = BigFloat(t.theta0(), prec);
        pi = BigFloat::pi(prec);
        junction_z = wall_height(s1);
        radius = junction_z / sin(theta0);
        center_x = s1 + radius * cos(theta0);

        split = BigFloat(std::min(0.7, t.s1()), prec);
        // binomial series of sqrt(1+q), q = s^(2 beta - 2), integrated termwise
        BigFloat binom(1.0, prec);
        const double qs = std::pow(std::min(0.7, t.s1()), 2.0 * t.beta() - 2.0);
        const int terms = std::max(40, static_cast<int>(digits * 2.4 / -std::log10(qs)) + 12);
        for (int k = 0; k < terms; ++k) {
            if (k > 0) binom = binom * ((0.5 - (k - 1)) / double(k));
            const BigFloat expo = double(k) * (2.0 * beta_d - 2.0) + BigFloat(1.0, prec);
            series_coeff.push_back(binom / expo);
        }
        legendre_nodes(48, prec, glx, glw);
        arclen_split = series_arclength(split);
        len1 = arclength(s1);
        len3 = 2.0 * theta0 * radius;
        perimeter = 2.0 * len1 + len3;
    }
};

// Context construction costs ~0.1 s (high-precision Legendre nodes), so
// contexts are cached for the process lifetime, keyed by the table parameters
// rather than the table's address.
std::shared_ptr<const Ctx> get_ctx(const CuspTable& t, int digits) {
    static std::mutex mu;
    static std::map<std::tuple<double, double, double, int>, std::shared_ptr<const Ctx>> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(t.beta(), t.s1(), t.theta0(), digits);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto sp = std::make_shared<const Ctx>(t, digits);
    cache[key] = sp;
    return sp;
}

struct HpState {
    Component comp = Component::Gamma3;
    BigFloat param, x, z, vx, vz, sin_phi, cos_phi;
};

struct Frame {
    BigFloat tx, tz, nx, nz;
};

Frame frame_at(const Ctx& c, Component comp, const BigFloat& param) {
    if (comp == Component::Gamma3) {
        const BigFloat psi = c.pi + c.theta0 - param / c.radius;
        return {sin(psi), -cos(psi), cos(psi), sin(psi)};
    }
    const BigFloat m = c.pow_beta_m1(param);
    const BigFloat inv = 1.0 / sqrt(1.0 + m * m);
    if (comp == Component::Gamma1) return {inv, -m * inv, m * inv, inv};
    return {-inv, -m * inv, m * inv, -inv};
}

HpState lift_state(const Ctx& c, const CollisionState& s) {
    HpState h;
    h.comp = s.comp;
    h.param = BigFloat(s.param, c.prec);
    if (s.comp == Component::Gamma3) {
        const BigFloat psi = c.pi + c.theta0 - h.param / c.radius;
        h.x = c.center_x + c.radius * cos(psi);
        h.z = c.radius * sin(psi);
    } else {
        h.x = h.param;
        h.z = c.wall_height(h.param);
        if (s.comp == Component::Gamma1) h.z = -h.z;
    }
    BigFloat sp(s.sin_phi, c.prec), cp(s.cos_phi, c.prec);
    const BigFloat norm = sqrt(sp * sp + cp * cp);
    h.sin_phi = sp / norm;
    h.cos_phi = cp / norm;
    const Frame f = frame_at(c, s.comp, h.param);
    h.vx = h.cos_phi * f.tx + h.sin_phi * f.nx;
    h.vz = h.cos_phi * f.tz + h.sin_phi * f.nz;
    return h;
}

bool wall_hit_hp(const Ctx& c, const HpState& st, double sign, BigFloat& t_out) {
    auto h = [&](const BigFloat& t) {
        const BigFloat x = st.x + t * st.vx;
        return sign * (st.z + t * st.vz) - c.pow_beta(x) / c.beta;
    };
    auto hd = [&](const BigFloat& t) {
        const BigFloat x = st.x + t * st.vx;
        return sign * st.vz - c.pow_beta_m1(x) * st.vx;
    };
    BigFloat tb(c.prec);
    const double vxd = st.vx.to_double();
    if (st.vx.sign() > 0 && std::abs(vxd) > 1e-300) {
        tb = (c.s1 - st.x) / st.vx;
    } else if (st.vx.sign() < 0 && std::abs(vxd) > 1e-300) {
        tb = -st.x / st.vx;
    } else {
        const BigFloat z_wall = sign * c.wall_height(st.x);
        if (st.vz.sign() == 0) return false;
        const BigFloat t = (z_wall - st.z) / st.vz;
        if (!(t > 0.0)) return false;
        t_out = t;
        return true;
    }
    if (!(tb > 0.0)) return false;

    BigFloat lo(0.0, c.prec), hi = tb;
    if (h(lo) >= 0.0) return false;

    const BigFloat ratio = sign * st.vz / st.vx;
    bool have_root = false;
    if (ratio > 0.0) {
        const BigFloat xv = pow(ratio, 1.0 / (BigFloat(c.beta_d, c.prec) - 1.0));
        const BigFloat tv = (xv - st.x) / st.vx;
        if (tv > 0.0 && tv < tb) {
            if (h(tv) < 0.0) return false;
            hi = tv;
            have_root = true;
        }
    }
    if (!have_root) {
        if (h(tb) < 0.0) return false;
        hi = tb;
    }

    BigFloat t = hi;
    const BigFloat tol = BigFloat(1.0, c.prec) / pow_int(BigFloat(2.0, c.prec), c.prec - 8);
    for (int it = 0; it < 500; ++it) {
        const BigFloat ht = h(t);
        if (ht > 0.0)
            hi = t;
        else if (ht < 0.0)
            lo = t;
        else
            break;
        const BigFloat d = hd(t);
        BigFloat next = (d.sign() != 0) ? t - ht / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (abs(next - t) <= tol * (1.0 + abs(t))) {
            t = next;
            break;
        }
        t = next;
    }
    t_out = t;
    return true;
}

bool arc_hit_hp(const Ctx& c, const HpState& st, BigFloat& t_out) {
    const BigFloat wx = st.x - c.center_x;
    const BigFloat& wz = st.z;
    const BigFloat b = wx * st.vx + wz * st.vz;
    const BigFloat cc = wx * wx + wz * wz - c.radius * c.radius;
    const BigFloat disc = b * b - cc;
    if (!(disc > 0.0)) return false;
    const BigFloat sd = sqrt(disc);
    BigFloat t1(c.prec), t2(c.prec);
    if (b <= 0.0) {
        t2 = -b + sd;
        t1 = cc / t2;
    } else {
        t1 = -b - sd;
        t2 = cc / t1;
    }
    if (t1 > t2) std::swap(t1, t2);
    for (const BigFloat* t : {&t1, &t2}) {
        if (!(*t > 1e-25)) continue;
        const BigFloat x = st.x + (*t) * st.vx;
        if (x <= c.s1 + 1e-20) {
            t_out = *t;
            return true;
        }
    }
    return false;
}

// One collision step at working precision; mirrors the double-precision
// contract including the singular-set cutoffs.
BigFloat step_hp(const Ctx& c, HpState& st, StepFlags& flags) {
    BigFloat best_t(c.prec);
    int best = -1;
    BigFloat t(c.prec);
    if (st.comp != Component::Gamma1 && wall_hit_hp(c, st, -1.0, t)) {
        best_t = t;
        best = 0;
    }
    if (st.comp != Component::Gamma2 && wall_hit_hp(c, st, +1.0, t) && (best < 0 || t < best_t)) {
        best_t = t;
        best = 1;
    }
    if (st.comp != Component::Gamma3 && arc_hit_hp(c, st, t) && (best < 0 || t < best_t)) {
        best_t = t;
        best = 2;
    }
    if (best < 0) throw NoIntersection("oracle: no boundary intersection found");

    const BigFloat hx = st.x + best_t * st.vx;
    const BigFloat hz = st.z + best_t * st.vz;
    const BigFloat d_vertex = hypot(hx, hz);
    const BigFloat d_jup = hypot(hx - c.s1, hz - c.junction_z);
    const BigFloat d_jdn = hypot(hx - c.s1, hz + c.junction_z);
    BigFloat d_corner = d_vertex;
    if (d_jup < d_corner) d_corner = d_jup;
    if (d_jdn < d_corner) d_corner = d_jdn;
    if (d_corner <= 1e-12) throw SingularHit("oracle: trajectory hit a corner point");
    flags.near_corner = d_corner < 1e-10;

    HpState n;
    Frame f{BigFloat(c.prec), BigFloat(c.prec), BigFloat(c.prec), BigFloat(c.prec)};
    if (best == 2) {
        BigFloat psi = atan2(hz, hx - c.center_x);
        BigFloat psi_pos = psi;
        if (!(psi > 0.0)) psi_pos = psi + 2.0 * c.pi;
        n.comp = Component::Gamma3;
        n.param = c.radius * (c.pi + c.theta0 - psi_pos);
        n.x = c.center_x + c.radius * cos(psi);
        n.z = c.radius * sin(psi);
        f = frame_at(c, n.comp, n.param);
    } else {
        n.comp = (best == 0) ? Component::Gamma1 : Component::Gamma2;
        BigFloat s = hx;
        if (s < 0.0) s = BigFloat(0.0, c.prec);
        if (s > c.s1) s = c.s1;
        n.param = s;
        n.x = s;
        n.z = c.wall_height(s);
        if (best == 0) n.z = -n.z;
        f = frame_at(c, n.comp, n.param);
    }

    const BigFloat vn = st.vx * f.nx + st.vz * f.nz;
    BigFloat rvx = st.vx - 2.0 * vn * f.nx;
    BigFloat rvz = st.vz - 2.0 * vn * f.nz;
    const BigFloat norm = sqrt(rvx * rvx + rvz * rvz);
    rvx = rvx / norm;
    rvz = rvz / norm;
    n.vx = rvx;
    n.vz = rvz;
    n.sin_phi = f.tx * rvz - f.tz * rvx;
    n.cos_phi = f.tx * rvx + f.tz * rvz;
    if (n.sin_phi <= 1e-12) throw SingularHit("oracle: reflected state numerically grazing");
    flags.near_grazing = n.sin_phi < 1e-8;
    st = n;
    return best_t;
}

CollisionState round_state(const Ctx& c, const HpState& h) {
    CollisionState s;
    s.comp = h.comp;
    s.param = h.param.to_double();
    s.x = h.x.to_double();
    s.z = h.z.to_double();
    s.vx = h.vx.to_double();
    s.vz = h.vz.to_double();
    s.sin_phi = h.sin_phi.to_double();
    s.cos_phi = h.cos_phi.to_double();
    switch (h.comp) {
        case Component::Gamma1: s.r = c.arclength(h.param).to_double(); break;
        case Component::Gamma2: s.r = (c.perimeter - c.arclength(h.param)).to_double(); break;
        default: s.r = (c.len1 + h.param).to_double(); break;
    }
    return s;
}

} // namespace

struct OracleSolver::Impl {
    std::shared_ptr<const Ctx> ctx;
    HpState state;
};

OracleSolver::OracleSolver(const CuspTable& table, int digits) : impl_(new Impl) {
    if (digits < 30) throw InvalidParams("oracle requires digits >= 30");
    impl_->ctx = get_ctx(table, digits);
}
OracleSolver::~OracleSolver() = default;
OracleSolver::OracleSolver(OracleSolver&&) noexcept = default;

void OracleSolver::set_state(const CollisionState& s) { impl_->state = lift_state(*impl_->ctx, s); }

FlightResult OracleSolver::step() {
    FlightResult out;
    out.tau = 0.0;
    StepFlags flags;
    const BigFloat tau = step_hp(*impl_->ctx, impl_->state, flags);
    out.tau = tau.to_double();
    out.flags = flags;
    out.next = round_state(*impl_->ctx, impl_->state);
    return out;
}

void OracleSolver::reverse() {
    HpState& st = impl_->state;
    const Ctx& c = *impl_->ctx;
    st.cos_phi = -st.cos_phi;
    const Frame f = frame_at(c, st.comp, st.param);
    const BigFloat vt = st.vx * f.tx + st.vz * f.tz;
    st.vx = st.vx - 2.0 * vt * f.tx;
    st.vz = st.vz - 2.0 * vt * f.tz;
}

CollisionState OracleSolver::state() const { return round_state(*impl_->ctx, impl_->state); }

Component OracleSolver::component() const { return impl_->state.comp; }

double OracleSolver::param_distance(const OracleSolver& a, const OracleSolver& b) {
    return abs(a.impl_->state.param - b.impl_->state.param).to_double();
}

double OracleSolver::wall_arclength(double s) const {
    return impl_->ctx->arclength(BigFloat(s, impl_->ctx->prec)).to_double();
}

FlightResult oracle_next_collision(const CuspTable& table, const CollisionState& state, int digits) {
    OracleSolver solver(table, digits);
    solver.set_state(state);
    return solver.step();
}

double oracle_wall_arclength(const CuspTable& table, double s, int digits) {
    OracleSolver solver(table, digits);
    return solver.wall_arclength(s);
}

} // namespace billiard
