#include "billiard/stats.hpp"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace billiard {
namespace {

// Draws starts until `body` completes without hitting the singular set;
// resample count is reported (commutative sum, so thread order is irrelevant).
template <typename Sampler, typename Body>
auto with_resample(SplitMix64& rng, Sampler&& sampler, Body&& body, std::atomic<long>& resamples) {
    for (int attempt = 0;; ++attempt) {
        const CollisionState s = sampler(rng);
        try {
            return body(s);
        } catch (const SingularHit&) {
            resamples.fetch_add(1, std::memory_order_relaxed);
            if (attempt >= 64) throw;
        }
    }
}

long excursion_run_length(const CuspTable& t, const CollisionState& start,
                          const PrecisionPolicy& pol, long cap) {
    long n = 0;
    CollisionState cur = start;
    for (;;) {
        cur = next_collision(t, cur, pol).next;
        if (cur.comp == Component::Gamma3) return n;
        if (++n > cap) throw RunawayOrbit("excursion exceeded bounce cap");
    }
}

} // namespace

ReturnEnsemble return_time_ensemble(const CuspTable& table, std::size_t count,
                                    const EngineOptions& opt) {
    ReturnEnsemble out;
    out.run_lengths.assign(count, 0);
    std::atomic<long> resamples{0};
    for_each_index(static_cast<std::int64_t>(count), opt.exec, opt.workers, [&](std::int64_t i) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(i));
        const long n = with_resample(
            rng, [&](SplitMix64& g) { return sample_mu_tilde(table, g); },
            [&](const CollisionState& s) {
                return excursion_run_length(table, s, opt.policy, opt.runaway_cap);
            },
            resamples);
        out.run_lengths[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(n);
    });
    out.singular_resamples = resamples.load();
    double acc = 0.0;
    for (std::int32_t n : out.run_lengths) acc += n + 1.0;
    out.mean_return_time = acc / static_cast<double>(count);
    return out;
}

HillEstimate hill(const std::vector<double>& samples, double k_frac) {
    if (!(k_frac > 0.0 && k_frac <= 0.05))
        throw InvalidParams("hill: k_frac must lie in (0, 0.05]");
    if (samples.size() < 10000)
        throw InsufficientData("hill: needs at least 1e4 samples");
    for (double v : samples)
        if (!(v > 0.0)) throw InvalidParams("hill: samples must be positive");

    const long k = static_cast<long>(std::floor(k_frac * static_cast<double>(samples.size())));
    if (k < 10) throw InsufficientData("hill: k too small");
    std::vector<double> top(samples);
    std::nth_element(top.begin(), top.begin() + k, top.end(), std::greater<double>());
    const double threshold = top[static_cast<std::size_t>(k)]; // X_(k+1)
    top.resize(static_cast<std::size_t>(k));

    std::vector<double> y(top.size());
    double m = 0.0;
    const double log_thr = std::log(threshold);
    for (std::size_t i = 0; i < top.size(); ++i) {
        y[i] = std::log(top[i]) - log_thr;
        m += y[i];
    }
    m /= static_cast<double>(k);
    if (!(m > 0.0)) throw InsufficientData("hill: zero log-spacings (degenerate tail)");

    HillEstimate est;
    est.k = k;
    est.alpha_hat = 1.0 / m;
    // delete-one jackknife over the k exceedances
    double jk_mean = 0.0;
    std::vector<double> jk(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < jk.size(); ++i) {
        const double mi = (static_cast<double>(k) * m - y[i]) / static_cast<double>(k - 1);
        jk[i] = 1.0 / mi;
        jk_mean += jk[i];
    }
    jk_mean /= static_cast<double>(k);
    double var = 0.0;
    for (double v : jk) var += (v - jk_mean) * (v - jk_mean);
    est.stderr = std::sqrt(var * static_cast<double>(k - 1) / static_cast<double>(k));
    return est;
}

HillEstimate hill(const std::vector<std::int32_t>& return_times, double k_frac) {
    std::vector<double> vals(return_times.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = return_times[i] + 1.0; // R = N + 1
    return hill(vals, k_frac);
}

std::vector<PlateauPoint> tail_plateau(const std::vector<std::int32_t>& return_times,
                                       const std::vector<double>& n_grid, double alpha) {
    std::vector<std::int32_t> sorted(return_times);
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    std::vector<PlateauPoint> out;
    for (double n : n_grid) {
        const double thr = std::pow(n, 1.0 / alpha) - 1.0; // run length N vs R = N+1 > n^(1/a)
        const auto it = std::upper_bound(sorted.begin(), sorted.end(),
                                         static_cast<std::int32_t>(std::floor(thr)));
        const double count = static_cast<double>(sorted.end() - it);
        const double p = count / total;
        out.push_back({n, n * p, n * std::sqrt(p * (1.0 - p) / total)});
    }
    return out;
}

double return_time_tail_constant(const CuspTable& table) {
    const double p = 1.0 / table.alpha;
    const double I1 = integrate_value([p](double phi) { return std::pow(std::sin(phi), p); }, 0.0,
                                      0.5 * M_PI, 1e-11, 0.0, 2000);
    return 2.0 * std::pow(I1, table.alpha) / (table.beta() * mu_M(table) * table.perimeter);
}

BirkhoffEnsemble birkhoff_samples(const CuspTable& table, const Observable& f, BirkhoffMode mode,
                                  std::vector<long> n_grid, std::size_t m,
                                  const EngineOptions& opt) {
    std::sort(n_grid.begin(), n_grid.end());
    BirkhoffEnsemble out;
    out.mode = mode;
    out.n_grid = n_grid;
    out.values.assign(n_grid.size(), std::vector<double>(m, 0.0));
    const double inv_alpha = 1.0 / table.alpha;
    std::atomic<long> resamples{0};

    for_each_index(static_cast<std::int64_t>(m), opt.exec, opt.workers, [&](std::int64_t j) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(j));
        auto sampler = [&](SplitMix64& g) {
            return mode == BirkhoffMode::induced ? sample_mu_tilde(table, g) : sample_mu(table, g);
        };
        const std::vector<double> sums = with_resample(
            rng, sampler,
            [&](const CollisionState& s0) {
                std::vector<double> partial(n_grid.size(), 0.0);
                double S = 0.0;
                CollisionState cur = s0;
                if (mode == BirkhoffMode::full_map) {
                    long step = 0;
                    for (std::size_t ci = 0; ci < n_grid.size(); ++ci) {
                        for (; step < n_grid[ci]; ++step) {
                            S += f(cur);
                            cur = next_collision(table, cur, opt.policy).next;
                        }
                        partial[ci] = S;
                    }
                } else {
                    long returns = 0;
                    std::size_t ci = 0;
                    while (ci < n_grid.size()) {
                        S += f(cur);
                        cur = next_collision(table, cur, opt.policy).next;
                        if (cur.comp == Component::Gamma3) {
                            ++returns;
                            if (returns == n_grid[ci]) {
                                partial[ci] = S;
                                ++ci;
                            }
                        }
                    }
                }
                return partial;
            },
            resamples);
        for (std::size_t ci = 0; ci < n_grid.size(); ++ci)
            out.values[ci][static_cast<std::size_t>(j)] =
                sums[ci] / std::pow(static_cast<double>(n_grid[ci]), inv_alpha);
    });
    out.singular_resamples = resamples.load();
    return out;
}

TruncatedSums truncated_birkhoff(const CuspTable& table, const Observable& f, double delta, long n,
                                 std::size_t m, const EngineOptions& opt) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParams("truncated_birkhoff: delta in (0,1)");
    TruncatedSums out;
    out.delta = delta;
    out.n = n;
    out.low.assign(m, 0.0);
    out.mid.assign(m, 0.0);
    out.high.assign(m, 0.0);
    const double n_pow = std::pow(static_cast<double>(n), 1.0 / table.alpha);
    const double t_lo = delta * n_pow;
    const double t_hi = n_pow / delta;
    std::atomic<long> resamples{0};

    for_each_index(static_cast<std::int64_t>(m), opt.exec, opt.workers, [&](std::int64_t j) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(j));
        const auto sums = with_resample(
            rng, [&](SplitMix64& g) { return sample_mu_tilde(table, g); },
            [&](const CollisionState& s0) {
                double SL = 0.0, SI = 0.0, SH = 0.0;
                CollisionState cur = s0;
                for (long k = 0; k < n; ++k) {
                    double g = 0.0;
                    long R = 0;
                    do {
                        g += f(cur);
                        cur = next_collision(table, cur, opt.policy).next;
                        ++R;
                    } while (cur.comp != Component::Gamma3);
                    if (static_cast<double>(R) < t_lo)
                        SL += g;
                    else if (static_cast<double>(R) < t_hi)
                        SI += g;
                    else
                        SH += g;
                }
                return std::array<double, 3>{SL, SI, SH};
            },
            resamples);
        out.low[static_cast<std::size_t>(j)] = sums[0] / n_pow;
        out.mid[static_cast<std::size_t>(j)] = sums[1] / n_pow;
        out.high[static_cast<std::size_t>(j)] = sums[2] / n_pow;
    });
    out.singular_resamples = resamples.load();
    return out;
}

PoissonReport poisson_counts(const CuspTable& table, long n, double a, double b, double a2,
                             double b2, std::size_t reps, const EngineOptions& opt) {
    PoissonReport rep;
    rep.a = a;
    rep.b = b;
    rep.a2 = a2;
    rep.b2 = b2;
    rep.n = n;
    rep.reps = reps;
    const double alpha = table.alpha;
    const double sig_a = return_time_tail_constant(table);
    rep.lambda = sig_a * (std::pow(a, -alpha) - (std::isinf(b) ? 0.0 : std::pow(b, -alpha)));
    const double n_pow = std::pow(static_cast<double>(n), 1.0 / alpha);

    std::vector<std::int32_t> c1(reps), c2(reps);
    std::atomic<long> resamples{0};
    for_each_index(static_cast<std::int64_t>(reps), opt.exec, opt.workers, [&](std::int64_t j) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(j));
        const auto counts = with_resample(
            rng, [&](SplitMix64& g) { return sample_mu_tilde(table, g); },
            [&](const CollisionState& s0) {
                CollisionState cur = s0;
                // advance to F(x): X_{n,k} = R(F^k x) / n^(1/alpha) for k = 1..n
                do {
                    cur = next_collision(table, cur, opt.policy).next;
                } while (cur.comp != Component::Gamma3);
                std::int32_t k1 = 0, k2 = 0;
                for (long k = 0; k < n; ++k) {
                    CollisionState land = cur;
                    long R = 0;
                    do {
                        land = next_collision(table, land, opt.policy).next;
                        ++R;
                    } while (land.comp != Component::Gamma3);
                    cur = land;
                    const double xnk = static_cast<double>(R) / n_pow;
                    if (xnk > a && xnk < b) ++k1;
                    if (xnk > a2 && xnk < b2) ++k2;
                }
                return std::pair<std::int32_t, std::int32_t>{k1, k2};
            },
            resamples);
        c1[static_cast<std::size_t>(j)] = counts.first;
        c2[static_cast<std::size_t>(j)] = counts.second;
    });

    rep.histogram.assign(4, 0);
    double mean1 = 0.0, mean2 = 0.0;
    for (std::size_t j = 0; j < reps; ++j) {
        ++rep.histogram[static_cast<std::size_t>(std::min<std::int32_t>(c1[j], 3))];
        mean1 += c1[j];
        mean2 += c2[j];
    }
    mean1 /= static_cast<double>(reps);
    mean2 /= static_cast<double>(reps);
    rep.mean_count = mean1;

    const double lam = rep.lambda;
    const double p0 = std::exp(-lam);
    const double probs[4] = {p0, lam * p0, 0.5 * lam * lam * p0,
                             1.0 - p0 * (1.0 + lam + 0.5 * lam * lam)};
    rep.chi2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double expected = probs[i] * static_cast<double>(reps);
        const double diff = static_cast<double>(rep.histogram[static_cast<std::size_t>(i)]) - expected;
        rep.chi2 += diff * diff / expected;
    }
    rep.dof = 3;
    rep.chi2_quantile_99 = chi2_quantile(0.99, 3);

    double cov = 0.0, m22 = 0.0;
    for (std::size_t j = 0; j < reps; ++j)
        cov += (c1[j] - mean1) * (c2[j] - mean2);
    cov /= static_cast<double>(reps);
    for (std::size_t j = 0; j < reps; ++j) {
        const double q = (c1[j] - mean1) * (c2[j] - mean2) - cov;
        m22 += q * q;
    }
    rep.cov_disjoint = cov;
    rep.cov_stderr = std::sqrt(m22) / static_cast<double>(reps);
    return rep;
}

AutocovReport autocovariance_T(const CuspTable& table, const Observable& f,
                               const std::vector<long>& lags, std::size_t orbit_len,
                               const EngineOptions& opt) {
    if (orbit_len < 100000) throw InsufficientData("autocovariance_T: orbit too short");
    AutocovReport rep;
    rep.lags = lags;

    std::vector<double> series(orbit_len);
    {
        std::atomic<long> resamples{0};
        SplitMix64 rng = SplitMix64::stream(opt.seed, 0);
        with_resample(
            rng, [&](SplitMix64& g) { return sample_mu(table, g); },
            [&](const CollisionState& s0) {
                CollisionState cur = s0;
                for (std::size_t i = 0; i < orbit_len; ++i) {
                    series[i] = f(cur);
                    cur = next_collision(table, cur, opt.policy).next;
                }
                return 0;
            },
            resamples);
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(orbit_len);
    for (double& v : series) v -= mean;

    const int n_blocks = 50;
    const std::size_t block = orbit_len / n_blocks;
    rep.cov.resize(lags.size());
    rep.cov_stderr.resize(lags.size());
    std::vector<double> lx, ly, lw;
    for (std::size_t li = 0; li < lags.size(); ++li) {
        const std::size_t lag = static_cast<std::size_t>(lags[li]);
        std::vector<double> block_cov;
        double total = 0.0;
        std::size_t total_n = 0;
        for (int bi = 0; bi < n_blocks; ++bi) {
            const std::size_t lo = static_cast<std::size_t>(bi) * block;
            const std::size_t hi = std::min(lo + block, orbit_len - lag);
            if (hi <= lo) continue;
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) acc += series[i] * series[i + lag];
            block_cov.push_back(acc / static_cast<double>(hi - lo));
            total += acc;
            total_n += hi - lo;
        }
        rep.cov[li] = total / static_cast<double>(total_n);
        double bm = 0.0;
        for (double v : block_cov) bm += v;
        bm /= static_cast<double>(block_cov.size());
        double bv = 0.0;
        for (double v : block_cov) bv += (v - bm) * (v - bm);
        rep.cov_stderr[li] =
            std::sqrt(bv / (static_cast<double>(block_cov.size()) *
                            static_cast<double>(block_cov.size() - 1)));
        if (lags[li] >= rep.fit_lo && lags[li] <= rep.fit_hi && rep.cov[li] > 2.0 * rep.cov_stderr[li]) {
            lx.push_back(std::log(static_cast<double>(lags[li])));
            ly.push_back(std::log(rep.cov[li]));
            const double rel = rep.cov_stderr[li] / rep.cov[li];
            lw.push_back(1.0 / (rel * rel));
        }
    }
    if (lx.size() >= 3) rep.loglog = fit_line(lx, ly, &lw);
    return rep;
}

InducedCovReport autocovariance_F_truncated(const CuspTable& table, const Observable& f,
                                            double delta, long n_ref, long lag,
                                            std::size_t orbit_len, const EngineOptions& opt) {
    InducedCovReport rep;
    rep.lag = lag;
    rep.cap = std::pow(static_cast<double>(n_ref), 1.0 / table.alpha) / delta;

    std::vector<double> series(orbit_len);
    std::atomic<long> resamples{0};
    SplitMix64 rng = SplitMix64::stream(opt.seed, 0);
    with_resample(
        rng, [&](SplitMix64& g) { return sample_mu_tilde(table, g); },
        [&](const CollisionState& s0) {
            CollisionState cur = s0;
            for (std::size_t i = 0; i < orbit_len; ++i) {
                double g = 0.0;
                long R = 0;
                do {
                    g += f(cur);
                    cur = next_collision(table, cur, opt.policy).next;
                    ++R;
                } while (cur.comp != Component::Gamma3);
                series[i] = (static_cast<double>(R) <= rep.cap) ? g : 0.0;
            }
            return 0;
        },
        resamples);

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(orbit_len);
    for (double& v : series) v -= mean;
    double c0 = 0.0, cl = 0.0;
    for (std::size_t i = 0; i < orbit_len; ++i) c0 += series[i] * series[i];
    c0 /= static_cast<double>(orbit_len);
    const std::size_t l = static_cast<std::size_t>(lag);
    for (std::size_t i = 0; i + l < orbit_len; ++i) cl += series[i] * series[i + l];
    cl /= static_cast<double>(orbit_len - l);
    rep.c0 = c0;
    rep.c_lag = cl;
    rep.ratio = std::abs(cl) / c0;
    return rep;
}

ErrorSlopeReport error_term_slope(const CuspTable& table, const Observable& f,
                                  const std::vector<long>& n_grid, std::size_t samples_per_band,
                                  std::size_t max_samples, const EngineOptions& opt) {
    if (n_grid.size() < 2) throw InvalidParams("error_term_slope: need at least 2 bands");
    const CuspConstants cc = cusp_constants(table, f, /*require_skewed=*/false);
    const double ratio = cc.I_f / cc.I_1;
    const double mean_r = mean_return_time(table);

    ErrorSlopeReport rep;
    rep.c_ratio = ratio;
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
        rep.bands.push_back({n_grid[i], n_grid[i + 1], 0, 0.0});
    const long band_min = rep.bands.front().lo;

    const std::size_t chunk = 1 << 20;
    std::vector<std::int32_t> run(chunk);
    std::vector<double> fsum(chunk);
    std::atomic<long> resamples{0};
    std::size_t used = 0;
    while (used < max_samples) {
        const std::size_t todo = std::min(chunk, max_samples - used);
        for_each_index(static_cast<std::int64_t>(todo), opt.exec, opt.workers, [&](std::int64_t i) {
            SplitMix64 rng =
                SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(used + static_cast<std::size_t>(i)));
            const auto rec = with_resample(
                rng, [&](SplitMix64& g) { return sample_mu_tilde(table, g); },
                [&](const CollisionState& s0) {
                    double g = 0.0;
                    long R = 0;
                    CollisionState cur = s0;
                    do {
                        g += f(cur);
                        cur = next_collision(table, cur, opt.policy).next;
                        ++R;
                    } while (cur.comp != Component::Gamma3);
                    return std::pair<long, double>{R, g};
                },
                resamples);
            run[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(rec.first);
            fsum[static_cast<std::size_t>(i)] = rec.second;
        });
        for (std::size_t i = 0; i < todo; ++i) {
            const long R = run[i];
            if (R < band_min) continue;
            for (ErrorSlopeBand& b : rep.bands) {
                if (R >= b.lo && R < b.hi) {
                    const double e = fsum[i] - ratio * (static_cast<double>(R) - mean_r);
                    b.max_abs_e = std::max(b.max_abs_e, std::abs(e));
                    ++b.count;
                    break;
                }
            }
        }
        used += todo;
        bool all_full = true;
        for (const ErrorSlopeBand& b : rep.bands)
            if (b.count < static_cast<long>(samples_per_band)) all_full = false;
        if (all_full) break;
    }
    rep.samples_used = used;

    std::vector<double> lx, ly;
    for (const ErrorSlopeBand& b : rep.bands) {
        if (b.count < static_cast<long>(samples_per_band))
            throw InsufficientData("error_term_slope: band [" + std::to_string(b.lo) + "," +
                                   std::to_string(b.hi) + ") holds " + std::to_string(b.count) +
                                   " < " + std::to_string(samples_per_band) + " samples");
        if (b.max_abs_e <= 0.0) continue; // exact identity (f0): slope is reported as 0
        lx.push_back(std::log(std::sqrt(static_cast<double>(b.lo) * static_cast<double>(b.hi))));
        ly.push_back(std::log(b.max_abs_e));
    }
    if (lx.size() >= 2) rep.slope = fit_line(lx, ly);
    return rep;
}

double chi2_cdf(double x, int dof) {
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * dof;
    const double xx = 0.5 * x;
    // regularized lower incomplete gamma P(a, xx)
    if (xx < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 500; ++n) {
            term *= xx / (a + n);
            sum += term;
            if (term < sum * 1e-15) break;
        }
        return sum * std::exp(-xx + a * std::log(xx) - std::lgamma(a));
    }
    // continued fraction for Q(a, xx)
    double b = xx + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-xx + a * std::log(xx) - std::lgamma(a)) * h;
    return 1.0 - q;
}

double chi2_quantile(double p, int dof) {
    double lo = 0.0, hi = 1e3;
    while (chi2_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf(mid, dof) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

MarginalKs pushforward_marginals(const CuspTable& table, std::size_t samples, bool induced,
                                 const EngineOptions& opt) {
    std::vector<double> rs(samples), phis(samples);
    std::atomic<long> resamples{0};
    for_each_index(static_cast<std::int64_t>(samples), opt.exec, opt.workers, [&](std::int64_t i) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, static_cast<std::uint64_t>(i));
        const CollisionState next = with_resample(
            rng,
            [&](SplitMix64& g) {
                return induced ? sample_mu_tilde(table, g) : sample_mu(table, g);
            },
            [&](const CollisionState& s0) {
                if (!induced) return next_collision(table, s0, opt.policy).next;
                return first_return(table, s0, opt.policy, opt.runaway_cap).end;
            },
            resamples);
        rs[static_cast<std::size_t>(i)] = next.r;
        phis[static_cast<std::size_t>(i)] = next.phi();
    });
    const double r_lo = induced ? table.len_gamma1 : 0.0;
    const double r_hi = induced ? table.len_gamma1 + table.len_gamma3 : table.perimeter;
    MarginalKs out;
    out.r_ks = ks_distance(std::move(rs), [r_lo, r_hi](double r) {
        return std::clamp((r - r_lo) / (r_hi - r_lo), 0.0, 1.0);
    });
    out.phi_ks = ks_distance(std::move(phis), [](double phi) {
        return 0.5 * (1.0 - std::cos(phi));
    });
    return out;
}

} // namespace billiard
