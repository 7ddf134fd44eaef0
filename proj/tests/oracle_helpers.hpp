#pragma once

// Test-side independent numerics: Romberg integration and closed forms used to
// freeze expected values. Kept apart from the library's adaptive Gauss-Kronrod
// so the two routes stay independent.

#include <cmath>
#include <functional>
#include <vector>

namespace testoracle {

// Romberg integration with Richardson extrapolation.
inline double romberg(const std::function<double(double)>& f, double a, double b, int max_k = 22,
                      double tol = 1e-13) {
    std::vector<std::vector<double>> R(1, std::vector<double>(1));
    R[0][0] = 0.5 * (b - a) * (f(a) + f(b));
    double h = b - a;
    for (int k = 1; k <= max_k; ++k) {
        h *= 0.5;
        double sum = 0.0;
        const long pts = 1L << (k - 1);
        for (long i = 0; i < pts; ++i) sum += f(a + (2 * i + 1) * h);
        std::vector<double> row(static_cast<std::size_t>(k) + 1);
        row[0] = 0.5 * R.back()[0] + h * sum;
        double p4 = 1.0;
        for (int j = 1; j <= k; ++j) {
            p4 *= 4.0;
            row[static_cast<std::size_t>(j)] =
                (p4 * row[static_cast<std::size_t>(j - 1)] - R.back()[static_cast<std::size_t>(j - 1)]) /
                (p4 - 1.0);
        }
        if (k > 3 && std::abs(row[static_cast<std::size_t>(k)] -
                              R.back()[static_cast<std::size_t>(k - 1)]) < tol)
            return row[static_cast<std::size_t>(k)];
        R.push_back(std::move(row));
    }
    return R.back().back();
}

// Wallis: int_0^(pi/2) sin^p = (sqrt(pi)/2) Gamma((p+1)/2) / Gamma(p/2 + 1).
inline double wallis_sin_power(double p) {
    return 0.5 * std::sqrt(M_PI) *
           std::exp(std::lgamma(0.5 * (p + 1.0)) - std::lgamma(0.5 * p + 1.0));
}

} // namespace testoracle
