#include "billiard/quadrature.hpp"
#include "billiard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace billiard {
namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double res_g = fc * kWg[3];
    double res_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        res_k += fsum * kWgk[j];
        if (j % 2 == 1) res_g += fsum * kWg[j / 2];
    }
    res_g *= h;
    res_k *= h;
    double err = std::abs(res_k - res_g);
    // standard QUADPACK-style error sharpening
    err = std::min(err, 200.0 * err * std::sqrt(std::max(err, 1e-300)));
    return {a, b, res_k, std::max(err, 1e-300)};
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_subdivisions) {
    if (a == b) return {0.0, 0.0, 0};
    std::priority_queue<Panel> queue;
    Panel p0 = gk15(f, a, b);
    double total = p0.value;
    double err = p0.error;
    queue.push(p0);
    int n = 1;
    auto tol = [&]() { return std::max(abs_tol, rel_tol * std::abs(total)); };
    while (err > tol()) {
        if (n >= max_subdivisions || queue.empty())
            throw QuadratureFailure("adaptive quadrature: tolerance not met at max refinement");
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) // interval at machine resolution
            throw QuadratureFailure("adaptive quadrature: interval underflow before tolerance");
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++n;
    }
    return {total, err, n};
}

double integrate_value(const std::function<double(double)>& f, double a, double b,
                       double abs_tol, double rel_tol, int max_subdivisions) {
    return integrate(f, a, b, abs_tol, rel_tol, max_subdivisions).value;
}

} // namespace billiard
