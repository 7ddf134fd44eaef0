#include "doctest.h"

#include "billiard/errors.hpp"
#include "billiard/quadrature.hpp"
#include "billiard/stable.hpp"
#include "billiard/stats.hpp"

#include <cmath>

using namespace billiard;

TEST_CASE("adaptive quadrature sanity") {
    CHECK(integrate_value([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(integrate_value([](double x) { return 1.0 / std::sqrt(std::abs(x) + 1e-300); },
                                    0.0, 1.0, 1e-15, 0.0, 8),
                    QuadratureFailure);
}

TEST_CASE("characteristic function basics") {
    const StableParams p{1.5, 1.0};
    CHECK(characteristic_fn(p, 0.0) == std::complex<double>(1.0, 0.0));
    const auto plus = characteristic_fn(p, 0.7);
    const auto minus = characteristic_fn(p, -0.7);
    CHECK(plus.real() == doctest::Approx(minus.real()).epsilon(1e-14));
    CHECK(plus.imag() == doctest::Approx(-minus.imag()).epsilon(1e-14));
    CHECK(std::abs(characteristic_fn(p, 1.0 / p.sigma)) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("tail constant closed form and homogeneity") {
    const TailConstants c1 = tail_constant({1.5, 1.0});
    CHECK(c1.C == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-13));
    CHECK(c1.C_minus == 0.0);
    const TailConstants c2 = tail_constant({1.5, 2.0});
    CHECK(c2.C / c1.C == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-13));
    CHECK_THROWS_AS(tail_constant({2.0, 1.0}), InvalidParams);
    CHECK_THROWS_AS(tail_constant({1.5, -1.0}), InvalidParams);
}

TEST_CASE("cdf limits, monotonicity, and tail match") {
    const StableDist d({1.5, 1.0});
    CHECK(d.cdf(-1000.0) <= 1e-6);
    CHECK(d.cdf(1000.0) >= 1.0 - 1e-3);
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = -30.0 + 90.0 * i / 10000.0;
        const double v = d.cdf(x);
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    const double tail = std::pow(50.0, 1.5) * (1.0 - d.cdf_quadrature(50.0));
    CHECK(std::abs(tail - tail_constant({1.5, 1.0}).C) < 0.1 * tail_constant({1.5, 1.0}).C);
}

TEST_CASE("sampler against the cdf (null KS calibration)") {
    const StableDist d({1.5, 1.0});
    SplitMix64 rng(51);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = d.sample(rng);
    CHECK(ks_distance(std::move(xs), d) < 0.007);
}

TEST_CASE("scale family") {
    const StableDist d1({1.5, 1.0});
    const StableDist d2({1.5, 2.0});
    SplitMix64 rng(52);
    std::vector<double> scaled(100000);
    for (auto& x : scaled) x = 2.0 * d1.sample(rng);
    CHECK(ks_distance(std::move(scaled), d2) < 0.01);
}

TEST_CASE("location shift is detected") {
    const StableDist d({1.5, 1.0});
    SplitMix64 rng(53);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = d.sample(rng) + 1.0;
    CHECK(ks_distance(std::move(xs), d) > 0.1);
}

TEST_CASE("single sample at the median gives KS = 1/2") {
    const StableDist d({1.5, 1.0});
    double lo = -5.0, hi = 5.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (d.cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    CHECK(ks_distance({0.5 * (lo + hi)}, d) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("empirical CF of sampler draws") {
    const StableParams p{1.5, 1.0};
    const StableDist d(p);
    SplitMix64 rng(54);
    const std::size_t n = 1000000;
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        re += std::cos(x);
        im += std::sin(x);
    }
    re /= double(n);
    im /= double(n);
    const auto cf = characteristic_fn(p, 1.0);
    CHECK(std::hypot(re - cf.real(), im - cf.imag()) < 5e-3);
}

TEST_CASE("alpha -> 2 trends toward symmetry") {
    SplitMix64 rng(55);
    auto med_mode_gap = [&rng](double alpha) {
        const StableDist d({alpha, 1.0});
        std::vector<double> xs(200000);
        for (auto& x : xs) x = d.sample(rng);
        std::sort(xs.begin(), xs.end());
        const double median = xs[xs.size() / 2];
        // crude mode from a histogram over [-4, 4]
        const int bins = 81;
        std::vector<int> hist(bins, 0);
        for (double x : xs)
            if (x > -4.0 && x < 4.0) ++hist[(std::size_t)((x + 4.0) / 8.0 * bins)];
        int best = 0;
        for (int b = 0; b < bins; ++b)
            if (hist[(std::size_t)b] > hist[(std::size_t)best]) best = b;
        const double mode = -4.0 + (best + 0.5) * 8.0 / bins;
        return std::abs(median - mode);
    };
    CHECK(med_mode_gap(1.95) < med_mode_gap(1.5));
}

TEST_CASE("hill estimator calibration on exact Pareto") {
    SplitMix64 rng(56);
    std::vector<double> xs(1000000);
    for (auto& x : xs) x = std::pow(rng.uniform(), -1.0 / 1.5);
    const HillEstimate h = hill(xs, 0.05);
    CHECK(std::abs(h.alpha_hat - 1.5) <= 0.01);
    CHECK(h.stderr < 0.01);
}

TEST_CASE("hill recovers alpha from stable draws") {
    const StableDist d({1.5, 1.0});
    SplitMix64 rng(57);
    std::vector<double> xs;
    xs.reserve(10000000);
    for (std::size_t i = 0; i < 10000000; ++i) {
        const double x = d.sample(rng);
        if (x > 0.0) xs.push_back(x);
    }
    const HillEstimate h = hill(xs, 0.005);
    CHECK(std::abs(h.alpha_hat - 1.5) <= 0.05);
}

TEST_CASE("hill error paths") {
    CHECK_THROWS_AS(hill(std::vector<double>(100, 1.0), 0.01), InsufficientData);
    CHECK_THROWS_AS(hill(std::vector<double>(20000, 3.0), 0.01), InsufficientData); // all equal
    std::vector<double> bad(20000, 1.0);
    bad[0] = -1.0;
    CHECK_THROWS_AS(hill(bad, 0.01), InvalidParams);
    CHECK_THROWS_AS(hill(std::vector<double>(20000, 1.0), 0.5), InvalidParams);
}

TEST_CASE("chi-square cdf and quantile") {
    CHECK(chi2_cdf(11.344867, 3) == doctest::Approx(0.99).epsilon(1e-5));
    CHECK(chi2_quantile(0.99, 3) == doctest::Approx(11.344867).epsilon(1e-4));
    CHECK(chi2_cdf(0.0, 3) == 0.0);
    CHECK(chi2_quantile(0.5, 1) == doctest::Approx(0.4549364).epsilon(1e-5));
}
