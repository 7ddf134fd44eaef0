#include "billiard/observables.hpp"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"

#include <cmath>
#include <utility>

namespace billiard {

Observable Observable::from_eval(std::string id, double gamma,
                                 std::function<double(Component, double, double)> f) {
    Observable o;
    o.id = std::move(id);
    o.gamma = gamma;
    o.eval = std::move(f);
    o.eval_state = [fn = o.eval](const CollisionState& s) { return fn(s.comp, s.r, s.phi()); };
    return o;
}

double mu_mean(const CuspTable& t, const Observable& f) {
    // outer adaptive over r per component, inner adaptive over phi
    auto inner = [&](Component c, double r) {
        return integrate_value(
            [&](double phi) { return f.eval(c, r, phi) * std::sin(phi); }, 0.0, M_PI, 1e-13, 0.0,
            800);
    };
    double total = 0.0;
    const double ranges[3][2] = {{0.0, t.len_gamma1},
                                 {t.len_gamma1 + t.len_gamma3, t.perimeter},
                                 {t.len_gamma1, t.len_gamma1 + t.len_gamma3}};
    const Component comps[3] = {Component::Gamma1, Component::Gamma2, Component::Gamma3};
    for (int i = 0; i < 3; ++i) {
        total += integrate_value([&](double r) { return inner(comps[i], r); }, ranges[i][0],
                                 ranges[i][1], 1e-11, 0.0, 2000);
    }
    return total / (2.0 * t.perimeter);
}

Observable center(const CuspTable& t, const Observable& f) {
    const double c0 = mu_mean(t, f);
    Observable g;
    g.id = f.id;
    g.gamma = f.gamma;
    g.centered = true;
    g.mu_mean = c0;
    g.eval = [inner = f.eval, c0](Component c, double r, double phi) {
        return inner(c, r, phi) - c0;
    };
    g.eval_state = [inner = f.eval_state, c0](const CollisionState& s) { return inner(s) - c0; };
    return g;
}

double induced_value(const CuspTable& t, const Observable& f, const CollisionState& x,
                     long* return_time_out, const PrecisionPolicy& policy) {
    if (x.comp != Component::Gamma3)
        throw InvalidParams("induced_value: x must lie on Gamma3");
    double sum = 0.0;
    long steps = 0;
    CollisionState cur = x;
    for (;;) {
        sum += f(cur);
        const FlightResult fr = next_collision(t, cur, policy);
        cur = fr.next;
        ++steps;
        if (cur.comp == Component::Gamma3) break;
        if (steps > 100000000) throw RunawayOrbit("induced_value: runaway excursion");
    }
    if (return_time_out) *return_time_out = steps;
    return sum;
}

CuspConstants cusp_constants(const CuspTable& t, const Observable& f, bool require_skewed) {
    CuspConstants out;
    out.alpha = t.alpha;
    const double p = 1.0 / t.alpha;
    // f evaluated on the two cusp-wall sides of the vertex, r' = 0 and r'' = |dQ|
    out.I_f = 0.25 * integrate_value(
                         [&](double phi) {
                             const double sp = std::pow(std::sin(phi), p);
                             return (f.eval(Component::Gamma1, 0.0, phi) +
                                     f.eval(Component::Gamma2, t.perimeter, phi)) *
                                    sp;
                         },
                         0.0, M_PI, 1e-11, 0.0, 2000);
    out.I_1 = integrate_value([p](double phi) { return std::pow(std::sin(phi), p); }, 0.0,
                              0.5 * M_PI, 1e-11, 0.0, 2000);
    out.skewed_positive = out.I_f > 0.0;
    if (!out.skewed_positive) {
        if (require_skewed)
            throw NotApplicable("I_f <= 0: observable is not in the positively skewed regime");
        return out; // scales undefined, I_f/I_1 still meaningful for the E-term
    }
    const double mm = mu_M(t);
    const double if_a = std::pow(out.I_f, t.alpha);
    out.tail_full = 2.0 * if_a / (t.beta() * t.perimeter);
    out.tail_induced = 2.0 * if_a / (t.beta() * mm * t.perimeter);
    const double c_alpha = stable_tail_factor(t.alpha);
    out.sigma_f = std::pow(out.tail_full / c_alpha, p);
    out.sigma_tilde_f = std::pow(out.tail_induced / c_alpha, p);
    return out;
}

double stable_tail_factor(double alpha) {
    return (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(0.5 * M_PI * alpha));
}

namespace {

// C^2 bump in arclength distance from the vertex: 1 on [0, a], 0 beyond b.
struct VertexBump {
    double a, b, perimeter;
    double operator()(double r) const {
        const double dv = std::min(r, perimeter - r);
        if (dv <= a) return 1.0;
        if (dv >= b) return 0.0;
        const double u = (b - dv) / (b - a);
        return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); // quintic smoothstep
    }
};

} // namespace

Observable make_f0(const CuspTable& t) {
    const double inv_mm = 1.0 / mu_M(t);
    Observable o;
    o.id = "f0";
    o.gamma = 1.0;
    o.centered = true; // mu(f0) = 1 - mu(M)/mu(M) = 0 by construction
    o.mu_mean = 0.0;
    o.eval = [inv_mm](Component c, double, double) {
        return c == Component::Gamma3 ? 1.0 - inv_mm : 1.0;
    };
    o.eval_state = [inv_mm](const CollisionState& s) {
        return s.comp == Component::Gamma3 ? 1.0 - inv_mm : 1.0;
    };
    return o;
}

Observable make_f_smooth(const CuspTable& t) {
    const VertexBump w{0.5 * t.len_gamma1, 0.9 * t.len_gamma1, t.perimeter};
    Observable raw;
    raw.id = "f_smooth";
    raw.gamma = 1.0;
    raw.eval = [w](Component, double r, double phi) { return std::sin(phi) * w(r); };
    raw.eval_state = [w](const CollisionState& s) { return s.sin_phi * w(s.r); };
    return center(t, raw);
}

Observable make_f_rough(const CuspTable& t) {
    const VertexBump w{0.5 * t.len_gamma1, 0.9 * t.len_gamma1, t.perimeter};
    const double freq = 2.0 * M_PI / t.perimeter;
    auto rough = [w, freq](double r) {
        return std::sqrt(std::abs(std::sin(freq * r))) * w(r);
    };
    Observable raw;
    raw.id = "f_rough";
    raw.gamma = 0.5;
    raw.eval = [rough](Component, double r, double phi) { return std::sin(phi) * rough(r); };
    raw.eval_state = [rough](const CollisionState& s) { return s.sin_phi * rough(s.r); };
    return center(t, raw);
}

Observable make_observable(const CuspTable& t, const std::string& name) {
    if (name == "f0") return make_f0(t);
    if (name == "f_smooth") return make_f_smooth(t);
    if (name == "f_rough") return make_f_rough(t);
    throw ConfigError("unknown observable name: " + name);
}

Observable scale_observable(const Observable& f, double c) {
    Observable g;
    g.id = f.id + "_scaled";
    g.gamma = f.gamma;
    g.centered = f.centered;
    g.mu_mean = c * f.mu_mean;
    g.eval = [inner = f.eval, c](Component comp, double r, double phi) {
        return c * inner(comp, r, phi);
    };
    g.eval_state = [inner = f.eval_state, c](const CollisionState& s) { return c * inner(s); };
    return g;
}

} // namespace billiard
