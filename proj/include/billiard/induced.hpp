#pragma once

#include "billiard/dynamics.hpp"
#include "billiard/errors.hpp"
#include "billiard/interp.hpp"

#include <cstdint>
#include <vector>

namespace billiard {

// mu(M): measure of the arc collisions under the invariant measure.
inline double mu_M(const CuspTable& t) { return t.len_gamma3 / t.perimeter; }

// Mean return time by Kac's formula.
inline double mean_return_time(const CuspTable& t) { return 1.0 / mu_M(t); }

struct ReturnSample {
    CollisionState start;       // on Gamma3
    long run_length = 0;        // N, cusp-wall collisions before returning
    long return_time = 0;       // R = N + 1 T-steps
    CollisionState end;         // on Gamma3
};

// Per-bounce corner-series quantities for one excursion (n = 1..N).
struct CornerSeriesTrace {
    std::vector<double> s;    // wall abscissa
    std::vector<double> eta;  // min(phi, pi - phi)
    std::vector<double> rho;  // arctan(s^(beta-1)), tangent angle at the bounce
    std::vector<double> H;    // s^beta sin(eta), the adiabatic invariant
    std::vector<double> v;    // int_0^eta sin^(1/alpha) u du
    bool alternation_ok = true; // consecutive bounces alternate Gamma1/Gamma2
};

// Cached Psi(eta) = int_0^eta sin^(1/alpha) u du on [0, pi/2].
class SinPowIntegral {
public:
    explicit SinPowIntegral(double alpha);
    double operator()(double eta) const;
    double total() const { return total_; } // Psi(pi/2) = I_1

private:
    Pchip table_;
    double total_;
};

ReturnSample first_return(const CuspTable& table, const CollisionState& x,
                          const PrecisionPolicy& policy = default_policy(),
                          long runaway_cap = 10000000);

ReturnSample first_return_traced(const CuspTable& table, const CollisionState& x,
                                 const SinPowIntegral& psi, CornerSeriesTrace& trace,
                                 const PrecisionPolicy& policy = default_policy(),
                                 long runaway_cap = 10000000);

struct SeriesSummary {
    long N = 0;
    long N1 = 0, N2 = 0, N3 = 0; // entering/turning/exiting boundaries, N2 = argmin rho
    double C_N = 0.0;            // H at the turning bounce
    double h_drift = 0.0;        // max_n |H_n - H_1| / H_1 over the whole series
    double h_drift_turn = 0.0;   // max |H_n - C_N| / C_N over the turning period [N1, N3]
    double s_max = 0.0;          // deepest-entry abscissa (drives the full-series drift bound)
    // entering-period power law: slope of ln(eta_n) vs ln((n - 1/2)/N) on
    // n in [2, N1]; the half-step offset comes from the v_n recursion and the
    // first bounce obeys only a one-sided bound, so it is excluded.
    double eta_exponent = 0.0;
    double eta_exponent_stderr = 0.0;
    double v_residual = 0.0; // max_n<=N2 |v_n - 2 n C_N^(1/alpha)| / v_N2
};

// Segments the series at threshold eta_bar and fits the entering-period
// exponent. Throws InsufficientData for N < 10 and DegenerateSeries when no
// bounce dips below eta_bar.
SeriesSummary corner_series_stats(const CornerSeriesTrace& trace, double eta_bar, double alpha);

struct CellStats {
    long band_lo = 0, band_hi = 0; // dyadic band [lo, hi)
    long count = 0;
    double mass = 0.0;   // fraction of samples with run length in the band
    double stderr = 0.0; // binomial
};

// Dyadic histogram of run lengths N >= 1. Throws InsufficientData below the
// sample floor.
std::vector<CellStats> cell_histogram(const std::vector<std::int32_t>& run_lengths,
                                      std::size_t min_samples = 100000);

// Log-log slope of per-cell mass density over bands inside [n_lo, n_hi];
// expected -(1+alpha).
LineFit cell_mass_slope(const std::vector<CellStats>& cells, double n_lo, double n_hi);

} // namespace billiard
