#pragma once

#include "billiard/dynamics.hpp"
#include "billiard/induced.hpp"

#include <functional>
#include <string>

namespace billiard {

// A bounded observable on the collision space, piecewise smooth in (r, phi).
// `eval` is the defining form; `eval_state` is the same function on a cached
// collision state (built-ins override it to skip the atan2).
struct Observable {
    std::string id;
    double gamma = 1.0; // declared Holder exponent
    std::function<double(Component, double r, double phi)> eval;
    std::function<double(const CollisionState&)> eval_state;
    bool centered = false;
    double mu_mean = 0.0; // mu(f) before centering

    double operator()(const CollisionState& s) const { return eval_state(s); }

    static Observable from_eval(std::string id, double gamma,
                                std::function<double(Component, double, double)> f);
};

// mu(f) = (1/2|dQ|) int f sin(phi) dr dphi by per-component tensor adaptive
// quadrature (absolute tolerance 1e-11).
double mu_mean(const CuspTable& table, const Observable& f);

// Returns f - mu(f). Throws QuadratureFailure if the tolerance is not met.
Observable center(const CuspTable& table, const Observable& f);

// f~(x) = sum_{k=0}^{R(x)-1} f(T^k x); regenerates the excursion
// deterministically from x. Also reports R through `return_time_out`.
double induced_value(const CuspTable& table, const Observable& f, const CollisionState& x,
                     long* return_time_out = nullptr,
                     const PrecisionPolicy& policy = default_policy());

struct CuspConstants {
    double I_f = 0.0;
    double I_1 = 0.0;
    // x^alpha-tail constants of the limit laws:
    //   full map:    2 I_f^alpha / (beta |dQ|)
    //   induced map: 2 I_f^alpha / (beta mu(M) |dQ|)
    double tail_full = 0.0;
    double tail_induced = 0.0;
    // CF-convention scale parameters of the same laws, sigma^alpha =
    // tail / C_alpha with C_alpha = (1-alpha)/(Gamma(2-alpha) cos(pi alpha/2)),
    // so that exp(-|u sigma|^alpha (1 - i sign(u) tan(pi alpha/2))) has
    // exactly the tail constant above.
    double sigma_f = 0.0;       // Birkhoff scale for T
    double sigma_tilde_f = 0.0; // Birkhoff scale for F
    double alpha = 0.0;
    bool skewed_positive = false; // I_f > 0
};

// Asymptotic tail constant <-> CF scale conversion factor C_alpha.
double stable_tail_factor(double alpha);

// I_f = (1/4) int_0^pi (f(r',phi) + f(r'',phi)) sin^(1/alpha) phi dphi,
// I_1 = int_0^(pi/2) sin^(1/alpha) phi dphi, plus the tail constants and
// scale parameters of the stable limit laws.
// With require_skewed (the default) throws NotApplicable when I_f <= 0; the
// scales are only defined in the positively skewed regime.
CuspConstants cusp_constants(const CuspTable& table, const Observable& f,
                             bool require_skewed = true);

// Built-in suite (all centered):
//   f0       = 1 - 1_M / mu(M)                                   (gamma = 1)
//   f_smooth = sin(phi) w(r) - const                             (gamma = 1)
//   f_rough  = sin(phi) |sin(2 pi r/|dQ|)|^(1/2) w(r) - const    (gamma = 1/2)
// where w is a C^2 bump in arclength distance from the vertex, equal to 1
// near r' and r'' and vanishing before the junctions.
Observable make_f0(const CuspTable& table);
Observable make_f_smooth(const CuspTable& table);
Observable make_f_rough(const CuspTable& table);
Observable make_observable(const CuspTable& table, const std::string& name);

Observable scale_observable(const Observable& f, double c);

} // namespace billiard
