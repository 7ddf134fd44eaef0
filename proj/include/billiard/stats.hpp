#pragma once

#include "billiard/induced.hpp"
#include "billiard/observables.hpp"
#include "billiard/parallel.hpp"
#include "billiard/stable.hpp"

#include <cstdint>
#include <vector>

namespace billiard {

struct EngineOptions {
    std::uint64_t seed = 1;
    PrecisionPolicy policy{};
    ExecPolicy exec = ExecPolicy::openmp;
    int workers = 0; // 0 = runtime default
    long runaway_cap = 10000000;
};

// ---- return-time ensembles ----------------------------------------------

struct ReturnEnsemble {
    std::vector<std::int32_t> run_lengths; // N per excursion; R = N + 1
    long singular_resamples = 0;
    double mean_return_time = 0.0;
};

ReturnEnsemble return_time_ensemble(const CuspTable& table, std::size_t count,
                                    const EngineOptions& opt);

struct HillEstimate {
    double alpha_hat = 0.0;
    double stderr = 0.0; // jackknife over the top-k exceedances
    long k = 0;
};

// Hill tail-index estimator on the top k_frac order statistics.
HillEstimate hill(const std::vector<double>& samples, double k_frac);
HillEstimate hill(const std::vector<std::int32_t>& return_times, double k_frac);

struct PlateauPoint {
    double n = 0.0;
    double value = 0.0;  // n * P(R > n^(1/alpha))
    double stderr = 0.0; // binomial
};

std::vector<PlateauPoint> tail_plateau(const std::vector<std::int32_t>& return_times,
                                       const std::vector<double>& n_grid, double alpha);

// 2 I_1^alpha / (beta mu(M) |dQ|): the tail-constant target and sigma~_R^alpha.
double return_time_tail_constant(const CuspTable& table);

// ---- Birkhoff sums --------------------------------------------------------

enum class BirkhoffMode { full_map, induced };

struct BirkhoffEnsemble {
    BirkhoffMode mode;
    std::vector<long> n_grid;
    // values[i][j] = S_{n_grid[i]} / n_grid[i]^(1/alpha) for orbit j
    std::vector<std::vector<double>> values;
    long singular_resamples = 0;
};

// m independent orbits from mu (full_map) or mu~ (induced); one orbit serves
// every n in the grid (partial sums at checkpoints).
BirkhoffEnsemble birkhoff_samples(const CuspTable& table, const Observable& f, BirkhoffMode mode,
                                  std::vector<long> n_grid, std::size_t m,
                                  const EngineOptions& opt);

struct TruncatedSums {
    double delta = 0.0;
    long n = 0;
    std::vector<double> low, mid, high; // per-orbit normalized component sums
    long singular_resamples = 0;
};

// Splits each orbit's induced sum by the return-time band of each excursion:
// R < delta n^(1/alpha) (low), up to delta^(-1) n^(1/alpha) (mid), above (high).
TruncatedSums truncated_birkhoff(const CuspTable& table, const Observable& f, double delta, long n,
                                 std::size_t m, const EngineOptions& opt);

// ---- Poisson structure ----------------------------------------------------

struct PoissonReport {
    double a = 0.0, b = 0.0;
    long n = 0;
    std::size_t reps = 0;
    double lambda = 0.0;          // sigma~_R^alpha (a^-alpha - b^-alpha)
    std::vector<long> histogram;  // counts of {0, 1, 2, >=3}
    double chi2 = 0.0;
    int dof = 3;
    double chi2_quantile_99 = 0.0;
    double mean_count = 0.0;
    // counts on a second disjoint interval, for the independent-scattering check
    double a2 = 0.0, b2 = 0.0;
    double cov_disjoint = 0.0;
    double cov_stderr = 0.0;
};

PoissonReport poisson_counts(const CuspTable& table, long n, double a, double b, double a2,
                             double b2, std::size_t reps, const EngineOptions& opt);

// ---- correlation decay ----------------------------------------------------

struct AutocovReport {
    std::vector<long> lags;
    std::vector<double> cov;
    std::vector<double> cov_stderr; // batch-block estimates
    LineFit loglog;                 // fitted on lags inside [fit_lo, fit_hi]
    double fit_lo = 10, fit_hi = 1000;
};

// Time-average covariance of f along one T-orbit of length orbit_len.
AutocovReport autocovariance_T(const CuspTable& table, const Observable& f,
                               const std::vector<long>& lags, std::size_t orbit_len,
                               const EngineOptions& opt);

struct InducedCovReport {
    double c0 = 0.0;
    double c_lag = 0.0;
    long lag = 20;
    double ratio = 0.0;
    double cap = 0.0; // truncation level on R
};

// Covariance of the truncated induced observable along one F-orbit.
InducedCovReport autocovariance_F_truncated(const CuspTable& table, const Observable& f,
                                            double delta, long n_ref, long lag,
                                            std::size_t orbit_len, const EngineOptions& opt);

// ---- E-term ----------------------------------------------------------------

struct ErrorSlopeBand {
    long lo = 0, hi = 0;
    long count = 0;
    double max_abs_e = 0.0;
};

struct ErrorSlopeReport {
    std::vector<ErrorSlopeBand> bands;
    LineFit slope; // ln(max |E|) vs ln(band center)
    std::size_t samples_used = 0;
    double c_ratio = 0.0; // I_f / I_1 used in the decomposition
};

// E(x) = f~(x) - (I_f/I_1)(R(x) - 1/mu(M)) over mu~ samples, binned by dyadic
// run-length bands covering N_grid. Throws InsufficientData if a band stays
// below samples_per_band after max_samples draws.
ErrorSlopeReport error_term_slope(const CuspTable& table, const Observable& f,
                                  const std::vector<long>& n_grid, std::size_t samples_per_band,
                                  std::size_t max_samples, const EngineOptions& opt);

// ---- small utilities --------------------------------------------------------

double chi2_cdf(double x, int dof);
double chi2_quantile(double p, int dof);

// KS distance of phi-marginal against (1-cos phi)/2 and r-marginal against
// uniform, for measure-invariance checks.
struct MarginalKs {
    double r_ks = 0.0;
    double phi_ks = 0.0;
};
MarginalKs pushforward_marginals(const CuspTable& table, std::size_t samples, bool induced,
                                 const EngineOptions& opt);

} // namespace billiard
