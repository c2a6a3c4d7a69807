#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <vector>

#include <posds/quadrature.hpp>

namespace oracle {

/// integral_x^inf t^n e^{-t} dt by adaptive Simpson, split at the peak t = n.
inline double upper_gamma_by_quadrature(int n, double x, double rel_tol = 1e-13)
{
    auto f = [n](double t) { return std::pow(t, n) * std::exp(-t); };
    const double top = std::max(x, static_cast<double>(n)) + 120.0;
    const double peak = std::max(x, static_cast<double>(n));
    // magnitude estimate from a coarse pass fixes the absolute tolerance
    const double scale = posds::quad::simpson(f, x, top, 2000);
    const double tol = rel_tol * std::max(scale, 1e-300);
    return posds::quad::adaptive_simpson(f, x, peak, 0.5 * tol) + posds::quad::adaptive_simpson(f, peak, top, 0.5 * tol);
}

/// integral_0^1 t^n e^{-t} dt.
inline double gamma_gap_by_quadrature(int n)
{
    auto f = [n](double t) { return std::pow(t, n) * std::exp(-t); };
    return posds::quad::adaptive_simpson(f, 0.0, 1.0, 1e-16);
}

/// Brute-force sup |f| on a dense uniform grid of [a, b].
inline double dense_sup(const std::function<double(double)>& f, double a, double b, int points = 20001)
{
    double m = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = a + (b - a) * i / (points - 1);
        m = std::max(m, std::abs(f(x)));
    }
    return m;
}

/// integral_0^inf e^{-lambda t} f(x + t) dt by adaptive Simpson split at the
/// listed kinks (already in t coordinates), truncated at 60/lambda.
inline double laplace_by_adaptive(const std::function<double(double)>& f, double x, double lambda,
                                  std::initializer_list<double> kinks_in_x)
{
    auto g = [&](double t) { return std::exp(-lambda * t) * f(x + t); };
    double lo = 0.0, acc = 0.0;
    std::vector<double> cuts;
    for (double k : kinks_in_x)
        if (k - x > 0.0)
            cuts.push_back(k - x);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(60.0 / lambda);
    for (double c : cuts) {
        acc += posds::quad::adaptive_simpson(g, lo, c, 1e-14);
        lo = c;
    }
    return acc;
}

} // namespace oracle
