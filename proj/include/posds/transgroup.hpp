#pragma once

// Left translation semigroup (T(t)f)(x) = f(x+t) on BC(R), its resolvent as
// a Laplace transform, the explicit family h, h_n with closed-form
// resolvents, and sampled checks of the bi-continuity axioms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "funcspace.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace posds {

/// Contractive (M = 1, omega = 0).
struct TranslationSemigroup {
    static constexpr double M = 1.0;
    static constexpr double omega = 0.0;

    BoundedFunction operator()(double t, const BoundedFunction& f) const
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("translation time must be nonnegative");
        return f.shifted(t);
    }
};

inline BoundedFunction apply_T(double t, const BoundedFunction& f) { return TranslationSemigroup{}(t, f); }

struct ResolventQuadrature {
    double lambda = 1.0;
    double t_max = 40.0;
    std::size_t panels = 4000;
    std::size_t min_panels_per_piece = 64;

    static ResolventQuadrature for_lambda(double lambda)
    {
        ResolventQuadrature q;
        q.lambda = lambda;
        q.t_max = 40.0 / lambda;
        return q;
    }

    void validate() const
    {
        if (!(lambda > 0.0))
            throw std::invalid_argument("resolvent needs lambda > 0");
        if (!(t_max > 0.0) || panels < 2)
            throw std::invalid_argument("resolvent quadrature needs t_max > 0 and panels >= 2");
    }
};

struct ResolventImage {
    BoundedFunction image;
    /// sup_bound(f) e^{-lambda t_max} / lambda, the cost of cutting the
    /// Laplace integral at t_max.
    double truncation_bound;
};

/// Pointwise value of integral_0^{t_max} e^{-lambda t} f(x+t) dt.
inline double resolvent_at(const ResolventQuadrature& q, const BoundedFunction& f, double x)
{
    auto cuts = f.breakpoints();
    for (double& c : cuts)
        c -= x; // kink of f at y sits at t = y - x
    return quad::simpson_split([&](double t) { return std::exp(-q.lambda * t) * f(x + t); }, 0.0, q.t_max,
                               cuts, q.panels, q.min_panels_per_piece);
}

inline ResolventImage resolvent(const ResolventQuadrature& q, const BoundedFunction& f)
{
    q.validate();
    const double bound = f.sup_bound() * std::exp(-q.lambda * q.t_max) / q.lambda;
    auto image = BoundedFunction::analytic([q, f](double x) { return resolvent_at(q, f, x); },
                                           f.sup_bound() / q.lambda, f.breakpoints());
    return {std::move(image), bound};
}

/// max over the sample grid of |lambda R f - (R f)' - f| with a central
/// difference of width `step`.
inline double resolvent_identity_residual(const ResolventQuadrature& q, const BoundedFunction& f,
                                          const SeminormSpec& where, double step = 1e-3)
{
    double worst = 0.0;
    for (double x : where.samples()) {
        const double r = resolvent_at(q, f, x);
        const double d = (resolvent_at(q, f, x + step) - resolvent_at(q, f, x - step)) / (2.0 * step);
        worst = std::max(worst, std::abs(q.lambda * r - d - f(x)));
    }
    return worst;
}

// --- the explicit family --------------------------------------------------

/// h_n(x) = 0 for x <= 0, x^n on (0,1], 1 beyond.
inline BoundedFunction hn_family(int n)
{
    if (n < 0)
        throw std::invalid_argument("h_n needs n >= 0");
    PolyExpPiece zero{{0.0}, 0.0};
    PolyExpPiece mono{std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0), 0.0};
    mono.coeffs.back() = 1.0;
    PolyExpPiece one{{1.0}, 0.0};
    return BoundedFunction::piecewise({0.0, 1.0}, {zero, mono, one}, 1.0);
}

/// h(x) = e^{x - c} for x <= c, 1 beyond (c = 1 by default). This is the
/// resolvent image R(1, A_{-1}) of the indicator of [c, inf).
inline BoundedFunction h_function(double threshold = 1.0)
{
    PolyExpPiece rising{{std::exp(-threshold)}, 1.0};
    PolyExpPiece one{{1.0}, 0.0};
    return BoundedFunction::piecewise({threshold}, {rising, one}, 1.0);
}

/// g = indicator of [threshold, inf). g is not continuous; it lives in the
/// extrapolation space and enters computations only through the threshold
/// and its resolvent image h.
struct IndicatorKernel {
    double threshold = 1.0;

    double operator()(double x) const { return x >= threshold ? 1.0 : 0.0; }

    BoundedFunction as_function() const
    {
        const double c = threshold;
        return BoundedFunction::analytic([c](double x) { return x >= c ? 1.0 : 0.0; }, 1.0, {c});
    }
};

inline IndicatorKernel g_kernel_indicator() { return IndicatorKernel{1.0}; }

/// Closed form of (R(1,A) h_n)(x) = integral_0^inf e^{-t} h_n(x+t) dt.
inline double resolvent_hn_analytic(int n, double x)
{
    if (n < 0)
        throw std::invalid_argument("h_n needs n >= 0");
    if (x > 1.0)
        return 1.0;
    if (x <= 0.0)
        return std::exp(x) * gamma_gap(n) + std::exp(x - 1.0);
    // Gamma(n+1,x) - Gamma(n+1,1) = gamma(n+1,1) - gamma(n+1,x)
    const double diff = gamma_gap(n) - lower_incomplete_gamma_int(n, x);
    return std::exp(x) * diff + std::exp(x - 1.0);
}

inline BoundedFunction resolvent_hn_function(int n)
{
    return BoundedFunction::analytic([n](double x) { return resolvent_hn_analytic(n, x); }, 1.0, {0.0, 1.0});
}

/// p_K(R(1,A) h_n - h): the extrapolated seminorm p_{-1}(h_n - g).
inline double extrapolated_gap(int n, const SeminormSpec& p)
{
    return seminorm_pK(resolvent_hn_function(n) - h_function(), p);
}

// --- bi-continuity axioms -------------------------------------------------

struct BicontinuityReport {
    double semigroup_law_error = 0.0;
    bool contractive = false;
    /// (t, p(T(t)f - f)) for t = t0 / 2^k.
    std::vector<std::pair<double, double>> continuity_table;
    bool continuity_decreasing = false;
    /// (k, sup_{t<=t0} p(T(t) f_k), p_{K + [0,t0]}(f_k)) for the escaping bumps.
    struct EquicontinuityRow {
        int k;
        double sup_over_t;
        double enlarged_window;
    };
    std::vector<EquicontinuityRow> equicontinuity_table;
    bool equicontinuity_vanishes = false;

    bool ok() const noexcept
    {
        return semigroup_law_error == 0.0 && contractive && continuity_decreasing && equicontinuity_vanishes;
    }
};

/// Unit-height tent of half-width 1 centred at `centre`.
inline BoundedFunction tent(double centre)
{
    return BoundedFunction::analytic([centre](double x) { return std::max(0.0, 1.0 - std::abs(x - centre)); },
                                     1.0, {centre - 1.0, centre, centre + 1.0});
}

inline BicontinuityReport check_bicontinuity_axioms(const BoundedFunction& f, double t0, const SeminormSpec& p,
                                                    int dyadic_levels = 12)
{
    if (!(t0 > 0.0))
        throw std::invalid_argument("check_bicontinuity_axioms needs t0 > 0");
    BicontinuityReport r;
    const auto xs = p.samples();

    // semigroup law on a small set of (t, s)
    const double times[] = {0.0, t0 / 7.0, t0 / 3.0, t0 / 2.0, t0};
    for (double t : times)
        for (double s : times) {
            const auto lhs = apply_T(s, apply_T(t, f));
            const auto rhs = apply_T(s + t, f);
            for (double x : xs)
                r.semigroup_law_error = std::max(r.semigroup_law_error, std::abs(lhs(x) - rhs(x)));
        }

    const auto norm = default_norm_sampler();
    const double fnorm = sampled_sup_norm(f, norm);
    r.contractive = true;
    for (double t : times)
        if (sampled_sup_norm(apply_T(t, f), norm) > fnorm + 1e-15)
            r.contractive = false;

    double t = t0;
    for (int k = 0; k < dyadic_levels; ++k, t *= 0.5)
        r.continuity_table.emplace_back(t, seminorm_pK(apply_T(t, f) - f, p));
    r.continuity_decreasing = true;
    for (std::size_t i = 1; i < r.continuity_table.size(); ++i)
        if (r.continuity_table[i].second > r.continuity_table[i - 1].second + 1e-14)
            r.continuity_decreasing = false;

    // Norm-bounded bumps whose supports leave every compact set.
    const SeminormSpec enlarged(CompactWindow(p.window.a, p.window.b + t0), p.resolution);
    const std::size_t t_samples = 64;
    for (int k = 0; k < 8; ++k) {
        const auto fk = tent(p.window.b + 1.0 + 2.0 * k);
        double sup_t = 0.0;
        for (std::size_t i = 0; i <= t_samples; ++i)
            sup_t = std::max(sup_t, seminorm_pK(apply_T(t0 * static_cast<double>(i) / t_samples, fk), p));
        r.equicontinuity_table.push_back({k, sup_t, seminorm_pK(fk, enlarged)});
    }
    r.equicontinuity_vanishes = r.equicontinuity_table.back().sup_over_t == 0.0 &&
                                r.equicontinuity_table.back().enlarged_window == 0.0;
    return r;
}

} // namespace posds
