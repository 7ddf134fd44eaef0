#pragma once

#include "billiard/interp.hpp"
#include "billiard/rng.hpp"

#include <complex>
#include <vector>

namespace billiard {

// Totally skewed (skew = +1) alpha-stable law, one-parametrization:
// E exp(iuS) = exp(-|u sigma|^alpha (1 - i sign(u) tan(pi alpha/2))).
struct StableParams {
    double alpha = 1.5; // in (1,2)
    double sigma = 1.0;

    void validate() const;
};

std::complex<double> characteristic_fn(const StableParams& p, double u);

struct TailConstants {
    double C = 0.0;       // lim x^alpha P(S > x)
    double C_minus = 0.0; // lim x^alpha P(S < -x) = 0, totally skewed
};

// C = sigma^alpha (1 - alpha) / (Gamma(2 - alpha) cos(pi alpha / 2)); both
// factors are negative for alpha in (1,2), so C > 0.
TailConstants tail_constant(const StableParams& p);

// CDF by Gil-Pelaez inversion with an interpolation grid; exact CMS sampler.
class StableDist {
public:
    explicit StableDist(const StableParams& p);

    const StableParams& params() const { return p_; }

    double cdf(double x) const;
    double pdf(double x) const; // central difference of the cdf, h = 1e-4 sigma

    // Direct Gil-Pelaez quadrature, no grid. Absolute error target 1e-8.
    double cdf_quadrature(double x) const;

    double sample(SplitMix64& rng) const;

    double grid_lo() const { return x_lo_; }
    double grid_hi() const { return x_hi_; }

private:
    StableParams p_;
    double tan_half_pi_alpha_;
    double tail_C_;
    double u_max_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
    Pchip grid_;
};

// Two-sided sup distance between the empirical CDF and dist.cdf. The input
// need not be sorted.
double ks_distance(std::vector<double> samples, const StableDist& dist);

// KS distance against an arbitrary CDF callable.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

} // namespace billiard
