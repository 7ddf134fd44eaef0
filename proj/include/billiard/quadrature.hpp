#pragma once

#include <functional>

namespace billiard {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0; // estimated absolute error
    int subdivisions = 0;
};

// Adaptive Gauss-Kronrod (G7,K15) with a worst-interval-first queue.
// Stops when the summed error estimate is below abs_tol (or rel_tol * |value|).
// Throws QuadratureFailure if the budget is exhausted first.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol = 0.0, int max_subdivisions = 4000);

double integrate_value(const std::function<double(double)>& f, double a, double b,
                       double abs_tol, double rel_tol = 0.0, int max_subdivisions = 4000);

} // namespace billiard
