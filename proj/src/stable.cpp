#include "billiard/stable.hpp"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace billiard {

void StableParams::validate() const {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw InvalidParams("StableParams: alpha must lie strictly in (1,2)");
    if (!(sigma > 0.0)) throw InvalidParams("StableParams: sigma must be positive");
}

std::complex<double> characteristic_fn(const StableParams& p, double u) {
    if (u == 0.0) return {1.0, 0.0};
    const double mag = std::pow(std::abs(u * p.sigma), p.alpha);
    const double sgn = (u > 0.0) ? 1.0 : -1.0;
    const std::complex<double> expo(-mag, mag * sgn * std::tan(0.5 * M_PI * p.alpha));
    return std::exp(expo);
}

TailConstants tail_constant(const StableParams& p) {
    p.validate();
    TailConstants out;
    out.C = std::pow(p.sigma, p.alpha) * (1.0 - p.alpha) /
            (std::tgamma(2.0 - p.alpha) * std::cos(0.5 * M_PI * p.alpha));
    out.C_minus = 0.0;
    return out;
}

StableDist::StableDist(const StableParams& p) : p_(p) {
    p_.validate();
    tan_half_pi_alpha_ = std::tan(0.5 * M_PI * p_.alpha);
    tail_C_ = tail_constant(p_).C;
    u_max_ = std::pow(12.0 * std::log(10.0), 1.0 / p_.alpha) / p_.sigma;

    // left grid edge: walk out until the quadrature CDF dips below 1e-9
    const double s = p_.sigma;
    x_lo_ = -2.0 * s;
    while (x_lo_ > -100.0 * s && cdf_quadrature(x_lo_) > 1e-9) x_lo_ *= 1.5;
    x_hi_ = 50.0 * s;

    std::vector<double> xs;
    const double seg1_hi = -3.0 * s;
    if (x_lo_ < seg1_hi)
        for (int i = 0; i < 120; ++i) xs.push_back(x_lo_ + (seg1_hi - x_lo_) * i / 120.0);
    for (int i = 0; i <= 900; ++i) xs.push_back(-3.0 * s + (9.0 * s) * i / 900.0);
    const double lg_lo = std::log(6.0 * s), lg_hi = std::log(x_hi_);
    for (int i = 1; i <= 380; ++i) xs.push_back(std::exp(lg_lo + (lg_hi - lg_lo) * i / 380.0));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> fs(xs.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = std::clamp(cdf_quadrature(xs[i]), 0.0, 1.0);
        v = std::max(v, prev); // monotone clip
        fs[i] = v;
        prev = v;
    }
    grid_ = Pchip(std::move(xs), std::move(fs));
}

double StableDist::cdf_quadrature(double x) const {
    const double a = p_.alpha, s = p_.sigma, tanA = tan_half_pi_alpha_;
    const auto integrand = [a, s, tanA, x](double u) {
        const double m = std::pow(s * u, a);
        return std::exp(-m) * std::sin(m * tanA - x * u) / u;
    };
    const double integral = integrate_value(integrand, 0.0, u_max_, 1e-8, 0.0, 60000);
    return 0.5 - integral / M_PI;
}

double StableDist::cdf(double x) const {
    if (x < x_lo_) return 0.0;
    if (x <= x_hi_) return std::clamp(grid_(x), 0.0, 1.0);
    // right tail: P(S > x) = C x^-alpha (1 + o(1)) beyond 50 sigma
    const double tail = tail_C_ * std::pow(x, -p_.alpha);
    return std::clamp(std::max(1.0 - tail, grid_.y_back()), 0.0, 1.0);
}

double StableDist::pdf(double x) const {
    const double h = 1e-4 * p_.sigma;
    return (cdf(x + h) - cdf(x - h)) / (2.0 * h);
}

double StableDist::sample(SplitMix64& rng) const {
    // Chambers-Mallows-Stuck in the one-parametrization, skew fixed at +1
    const double a = p_.alpha;
    const double theta0 = (0.5 * M_PI * a - M_PI) / a; // atan(tan(pi a/2))/a
    const double B = std::pow(1.0 + tan_half_pi_alpha_ * tan_half_pi_alpha_, 0.5 / a);
    const double theta = rng.uniform(-0.5 * M_PI, 0.5 * M_PI);
    const double w = rng.exponential();
    const double at = a * (theta + theta0);
    const double x = B * std::sin(at) / std::pow(std::cos(theta), 1.0 / a) *
                     std::pow(std::cos(theta - at) / w, (1.0 - a) / a);
    return p_.sigma * x;
}

double ks_distance(std::vector<double> samples, const StableDist& dist) {
    return ks_distance(std::move(samples), [&dist](double x) { return dist.cdf(x); });
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InsufficientData("ks_distance: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

} // namespace billiard
