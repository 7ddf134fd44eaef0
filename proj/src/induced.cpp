#include "billiard/induced.hpp"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace billiard {

SinPowIntegral::SinPowIntegral(double alpha) {
    const double p = 1.0 / alpha;
    const int K = 2048;
    std::vector<double> eta(K + 1), val(K + 1);
    double acc = 0.0;
    eta[0] = 0.0;
    val[0] = 0.0;
    for (int i = 1; i <= K; ++i) {
        const double frac = static_cast<double>(i) / K;
        eta[i] = 0.5 * M_PI * frac * frac; // quadratic clustering near 0
        acc += integrate_value([p](double u) { return std::pow(std::sin(u), p); }, eta[i - 1],
                               eta[i], 1e-13, 0.0, 200);
        val[i] = acc;
    }
    total_ = acc;
    table_ = Pchip(std::move(eta), std::move(val));
}

double SinPowIntegral::operator()(double eta) const {
    if (eta <= 0.0) return 0.0;
    if (eta >= 0.5 * M_PI) return total_;
    return table_(eta);
}

namespace {

ReturnSample run_excursion(const CuspTable& table, const CollisionState& x,
                           const SinPowIntegral* psi, CornerSeriesTrace* trace,
                           const PrecisionPolicy& policy, long cap) {
    if (x.comp != Component::Gamma3)
        throw InvalidParams("first_return: start state must lie on Gamma3");
    ReturnSample out;
    out.start = x;
    CollisionState cur = x;
    Component last_wall = Component::Gamma3;
    long n = 0;
    for (;;) {
        const FlightResult fr = next_collision(table, cur, policy);
        cur = fr.next;
        if (cur.comp == Component::Gamma3) break;
        ++n;
        if (n > cap)
            throw RunawayOrbit("cusp excursion exceeded the bounce cap (singular start or precision fault)");
        if (trace) {
            const double s = cur.param;
            const double sin_eta = cur.sin_phi;
            const double eta = std::atan2(cur.sin_phi, std::abs(cur.cos_phi));
            trace->s.push_back(s);
            trace->eta.push_back(eta);
            trace->rho.push_back(std::atan(table.wall_slope(s)));
            trace->H.push_back(table.wp.pow_beta(s) * sin_eta);
            trace->v.push_back((*psi)(eta));
            if (last_wall != Component::Gamma3 && cur.comp == last_wall)
                trace->alternation_ok = false;
            last_wall = cur.comp;
        }
    }
    out.run_length = n;
    out.return_time = n + 1;
    out.end = cur;
    return out;
}

} // namespace

ReturnSample first_return(const CuspTable& table, const CollisionState& x,
                          const PrecisionPolicy& policy, long runaway_cap) {
    return run_excursion(table, x, nullptr, nullptr, policy, runaway_cap);
}

ReturnSample first_return_traced(const CuspTable& table, const CollisionState& x,
                                 const SinPowIntegral& psi, CornerSeriesTrace& trace,
                                 const PrecisionPolicy& policy, long runaway_cap) {
    trace = CornerSeriesTrace{};
    return run_excursion(table, x, &psi, &trace, policy, runaway_cap);
}

SeriesSummary corner_series_stats(const CornerSeriesTrace& trace, double eta_bar, double alpha) {
    const long N = static_cast<long>(trace.s.size());
    if (N < 10) throw InsufficientData("corner series shorter than 10 bounces");

    SeriesSummary out;
    out.N = N;

    // N2 = argmin rho (1-based bounce indices)
    long n2 = 1;
    for (long i = 1; i < N; ++i)
        if (trace.rho[static_cast<std::size_t>(i)] < trace.rho[static_cast<std::size_t>(n2 - 1)])
            n2 = i + 1;
    out.N2 = n2;
    out.C_N = trace.H[static_cast<std::size_t>(n2 - 1)];

    bool any_below = false;
    for (double e : trace.eta)
        if (e < eta_bar) { any_below = true; break; }
    if (!any_below) throw DegenerateSeries("no bounce below eta_bar; no turning period at this threshold");

    long n1 = 0;
    for (long i = 1; i <= n2; ++i)
        if (trace.eta[static_cast<std::size_t>(i - 1)] < eta_bar) n1 = i;
    long n3 = N + 1;
    for (long i = N; i >= n2; --i)
        if (trace.eta[static_cast<std::size_t>(i - 1)] < eta_bar) n3 = i;
    out.N1 = n1;
    out.N3 = n3;

    const double h1 = trace.H.front();
    double drift = 0.0;
    for (double h : trace.H) drift = std::max(drift, std::abs(h - h1));
    out.h_drift = drift / h1;
    double drift_turn = 0.0;
    for (long i = std::max<long>(n1, 1); i <= std::min<long>(n3, N); ++i)
        drift_turn = std::max(drift_turn,
                              std::abs(trace.H[static_cast<std::size_t>(i - 1)] - out.C_N));
    out.h_drift_turn = drift_turn / out.C_N;
    out.s_max = *std::max_element(trace.s.begin(), trace.s.end());

    if (n1 >= 4) {
        std::vector<double> lx, ly;
        lx.reserve(static_cast<std::size_t>(n1));
        for (long i = 2; i <= n1; ++i) {
            lx.push_back(std::log((static_cast<double>(i) - 0.5) / N));
            ly.push_back(std::log(trace.eta[static_cast<std::size_t>(i - 1)]));
        }
        const LineFit fit = fit_line(lx, ly);
        out.eta_exponent = fit.slope;
        out.eta_exponent_stderr = fit.slope_stderr;
    }

    const double cn_root = std::pow(out.C_N, 1.0 / alpha);
    const double v_scale = trace.v[static_cast<std::size_t>(n2 - 1)];
    double vres = 0.0;
    for (long i = 1; i <= n2; ++i)
        vres = std::max(vres, std::abs(trace.v[static_cast<std::size_t>(i - 1)] - 2.0 * i * cn_root));
    out.v_residual = vres / v_scale;
    return out;
}

std::vector<CellStats> cell_histogram(const std::vector<std::int32_t>& run_lengths,
                                      std::size_t min_samples) {
    if (run_lengths.size() < min_samples)
        throw InsufficientData("cell_histogram needs at least " + std::to_string(min_samples) +
                               " samples, got " + std::to_string(run_lengths.size()));
    std::int32_t n_max = 0;
    for (std::int32_t n : run_lengths) n_max = std::max(n_max, n);
    int bands = 1;
    while ((1L << bands) <= n_max) ++bands;
    std::vector<long> counts(static_cast<std::size_t>(bands), 0);
    for (std::int32_t n : run_lengths) {
        if (n < 1) continue;
        const int b = 63 - __builtin_clzll(static_cast<unsigned long long>(n));
        ++counts[static_cast<std::size_t>(b)];
    }
    const double total = static_cast<double>(run_lengths.size());
    std::vector<CellStats> out;
    for (int b = 0; b < bands; ++b) {
        CellStats cs;
        cs.band_lo = 1L << b;
        cs.band_hi = 1L << (b + 1);
        cs.count = counts[static_cast<std::size_t>(b)];
        cs.mass = cs.count / total;
        cs.stderr = std::sqrt(cs.mass * (1.0 - cs.mass) / total);
        out.push_back(cs);
    }
    return out;
}

LineFit cell_mass_slope(const std::vector<CellStats>& cells, double n_lo, double n_hi) {
    std::vector<double> lx, ly, w;
    for (const CellStats& c : cells) {
        if (c.band_lo < n_lo || c.band_hi > n_hi || c.count < 4) continue;
        const double center = std::sqrt(static_cast<double>(c.band_lo) * static_cast<double>(c.band_hi));
        const double density = c.mass / static_cast<double>(c.band_hi - c.band_lo);
        lx.push_back(std::log(center));
        ly.push_back(std::log(density));
        w.push_back(static_cast<double>(c.count)); // var(ln mass) ~ 1/count
    }
    if (lx.size() < 3) throw InsufficientData("cell_mass_slope: fewer than 3 usable bands");
    return fit_line(lx, ly, &w);
}

} // namespace billiard
