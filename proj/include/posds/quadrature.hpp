#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace posds::quad {

/// Composite Simpson rule on [a,b] with `panels` panels (rounded up to even).
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels)
{
    if (b == a)
        return 0.0;
    if (panels < 2)
        panels = 2;
    if (panels % 2 != 0)
        ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < panels; ++i) {
        const double x = a + static_cast<double>(i) * h;
        if (i % 2 != 0)
            odd += f(x);
        else
            even += f(x);
    }
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

/// Composite Simpson on [a,b], split at every cut point strictly inside the
/// interval. Panels are shared out proportionally to sub-interval length with
/// at least `min_panels` on every piece.
template <typename F>
double simpson_split(F&& f, double a, double b, std::span<const double> cuts,
                     std::size_t panels, std::size_t min_panels = 2)
{
    if (b <= a)
        return 0.0;
    std::vector<double> pts;
    pts.reserve(cuts.size() + 2);
    pts.push_back(a);
    for (double c : cuts)
        if (c > a && c < b)
            pts.push_back(c);
    pts.push_back(b);
    std::sort(pts.begin() + 1, pts.end() - 1);
    double total = 0.0;
    const double len = b - a;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i], hi = pts[i + 1];
        if (hi <= lo)
            continue;
        auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(panels) * (hi - lo) / len));
        total += simpson(f, lo, hi, std::max(n, min_panels));
    }
    return total;
}

namespace detail {

template <typename F>
double adaptive_simpson_step(F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson with Richardson correction. `tol` is an absolute
/// tolerance for the whole interval.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50)
{
    if (b == a)
        return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Two-point Gauss-Legendre on [a,b]; exact for cubics.
template <typename F>
double gauss2(F&& f, double a, double b)
{
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    constexpr double node = 0.57735026918962576451; // 1/sqrt(3)
    return r * (f(c - r * node) + f(c + r * node));
}

} // namespace posds::quad
