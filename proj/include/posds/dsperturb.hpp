#pragma once

// Rank-one Desch-Schappacher perturbation B f = Phi(f) g of the translation
// semigroup, with g the indicator of [c, inf) living in the extrapolation
// space. Since T_{-1}(r) g is the indicator of [c - r, inf), every
// Dyson-Phillips term reduces to a scalar trace phi_n(s) = Phi(S_n(s) u0):
//
//   (S_n(t) u0)(x) = Psi_{n-1}(ell(t, x)),  ell(t, x) = min(t, max(0, x + t - c)),
//
// where Psi is the primitive of phi. The independent check solves the
// scalar Volterra equation phi = a + k * phi obtained by applying Phi to the
// mild formulation, with kernel k(r) = mu([c - r, inf)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "funcspace.hpp"
#include "measures.hpp"
#include "quadrature.hpp"
#include "trace.hpp"
#include "transgroup.hpp"

namespace posds {

inline constexpr const char* smallness_condition = "smallness hypothesis |mu|(R) * ||h|| < 1";
inline constexpr const char* positivity_condition = "positivity hypothesis mu >= 0";

class DSPerturbation {
public:
    explicit DSPerturbation(RegularMeasure mu, double threshold = 1.0)
        : mu_(std::move(mu)), threshold_(threshold), h_(h_function(threshold))
    {
    }

    const RegularMeasure& measure() const noexcept { return mu_; }
    double threshold() const noexcept { return threshold_; }
    /// R(1, A_{-1}) g
    const BoundedFunction& h() const noexcept { return h_; }

    /// K = ||R(1, A_{-1}) B|| <= |mu|(R) ||h||.
    double smallness_constant() const { return total_variation(mu_) * h_.sup_bound(); }

    void certify_smallness() const
    {
        const double k = smallness_constant();
        if (!(k < 1.0))
            throw HypothesisViolation(smallness_condition,
                                      "K = " + std::to_string(k) + " is not below 1; the perturbation "
                                      "theorem does not apply");
    }

    double ell(double t, double x) const { return std::min(t, std::max(0.0, x + t - threshold_)); }

    /// k(r) = mu([c - r, inf)).
    double kernel(double r) const { return upper_tail(mu_, threshold_ - r); }

    /// Points r where k jumps or kinks.
    std::vector<double> kernel_breakpoints() const
    {
        std::vector<double> b;
        for (const auto& a : mu_.atoms())
            b.push_back(threshold_ - a.location);
        for (const auto& d : mu_.densities()) {
            b.push_back(threshold_ - d.b);
            b.push_back(threshold_ - d.a);
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

private:
    RegularMeasure mu_;
    double threshold_;
    BoundedFunction h_;
};

/// R(1, A_{-1}) B f = Phi(f) h.
inline BoundedFunction apply_RB(const DSPerturbation& pert, const BoundedFunction& f)
{
    return pert.h().scaled(integrate(pert.measure(), f));
}

// --- locality -------------------------------------------------------------

struct LocalityCertificate {
    CompactWindow window{-1.0, 1.0};
    double tail = 0.0;
    double lhs = 0.0; // ||R B f||
    double rhs = 0.0; // (|mu|(K') p_K'(f) + eps ||f||) ||h||
    bool holds = false;
};

/// Windows [-2^k, 2^k], k = 0, 1, ..., tried in order.
inline std::vector<CompactWindow> dyadic_windows(int count = 24)
{
    std::vector<CompactWindow> w;
    for (int k = 0; k < count; ++k)
        w.emplace_back(-std::ldexp(1.0, k), std::ldexp(1.0, k));
    return w;
}

inline LocalityCertificate locality_certificate(const DSPerturbation& pert, double eps, const BoundedFunction& f,
                                                const std::vector<CompactWindow>& windows = dyadic_windows(),
                                                std::size_t resolution = 4001)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("locality certificate needs eps > 0");
    const auto& mu = pert.measure();
    std::optional<CompactWindow> chosen;
    for (const auto& w : windows)
        if (tail_mass(mu, w) < eps) {
            chosen = w;
            break;
        }
    if (!chosen)
        throw std::invalid_argument("no configured window leaves a tail below eps");

    LocalityCertificate c;
    c.window = *chosen;
    c.tail = tail_mass(mu, c.window);
    // Sampled p_K' on a uniform grid plus the atoms inside K'.
    double pk = seminorm_pK(f, SeminormSpec(c.window, resolution));
    for (const auto& a : mu.atoms())
        if (c.window.contains(a.location))
            pk = std::max(pk, std::abs(f(a.location)));
    const double hnorm = pert.h().sup_bound();
    c.lhs = std::abs(integrate(mu, f)) * hnorm;
    c.rhs = (variation_inside(mu, c.window) * pk + eps * f.sup_bound()) * hnorm;
    c.holds = c.lhs <= c.rhs + 1e-12;
    return c;
}

// --- extrapolated convolution ---------------------------------------------

/// x -> integral_0^t [T_{-1}(t - r) g](x) phi(r) dr = Psi(ell(t, x)).
template <CumulativeTrace Trace>
BoundedFunction extrapolated_convolution(const DSPerturbation& pert, const Trace& phi, double t)
{
    const double c = pert.threshold();
    return BoundedFunction::analytic(
        [phi, c, t](double x) { return phi.integral(std::min(t, std::max(0.0, x + t - c))); },
        phi.abs_integral(t), {c - t, c});
}

/// Phi applied to x -> Psi(ell(s, x)), exact for a piecewise-linear trace.
inline double trace_of_convolution(const DSPerturbation& pert, const TraceFunction& phi, double s)
{
    const double c = pert.threshold();
    double acc = 0.0;
    for (const auto& a : pert.measure().atoms())
        acc += a.weight * phi.integral(pert.ell(s, a.location));
    for (const auto& d : pert.measure().densities()) {
        // u = x + s - c runs over [lo, hi]; Psi(clamp(u, 0, s)) du
        const double lo = d.a + s - c, hi = d.b + s - c;
        double part = 0.0;
        const double mid_lo = std::max(lo, 0.0), mid_hi = std::min(hi, s);
        if (mid_hi > mid_lo)
            part += phi.double_integral(mid_hi) - phi.double_integral(mid_lo);
        const double above = hi - std::max(lo, s);
        if (above > 0.0)
            part += phi.integral(s) * above;
        acc += d.height * part;
    }
    return acc;
}

/// a(s_j) = Phi(T(s_j) u0) on the uniform grid.
inline TraceFunction source_trace(const DSPerturbation& pert, const BoundedFunction& u0, double dt,
                                  std::size_t steps)
{
    std::vector<double> a(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j)
        a[j] = integrate(pert.measure(), apply_T(dt * static_cast<double>(j), u0));
    return TraceFunction(dt, std::move(a));
}

namespace detail {
inline std::size_t grid_steps(double horizon, double dt)
{
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("time grid needs dt > 0 and horizon > 0");
    return static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
}
} // namespace detail

// --- Dyson-Phillips series ------------------------------------------------

struct DPState {
    double dt = 0.0;
    double horizon = 0.0;
    /// phi_0 .. phi_N; phi_N only feeds the tail estimate.
    std::vector<TraceFunction> phi;
    std::vector<double> term_sup;
    /// term_sup[n] / term_sup[n-1], n >= 1 (0 when the previous term vanishes)
    std::vector<double> ratios;
    /// ||phi_N||_inf * t, a bound for the first omitted term
    double tail_estimate = 0.0;
    bool certified = false;
    bool contraction_observed = false;
};

class DysonPhillipsSolution {
public:
    DysonPhillipsSolution(DSPerturbation pert, BoundedFunction u0, DPState state)
        : pert_(std::move(pert)), u0_(std::move(u0)), state_(std::move(state))
    {
    }

    const DPState& state() const noexcept { return state_; }
    std::size_t terms() const noexcept { return state_.phi.size() - 1; }

    /// (S_n(t) u0)(x).
    double term(std::size_t n, double t, double x) const
    {
        if (n == 0)
            return u0_(x + t);
        return state_.phi[n - 1].integral(pert_.ell(t, x));
    }

    /// sum_{n=0}^{N} (S_n(t) u0)(x).
    double value(double t, double x) const
    {
        double v = u0_(x + t);
        const double l = pert_.ell(t, x);
        for (std::size_t n = 0; n < terms(); ++n)
            v += state_.phi[n].integral(l);
        return v;
    }

    BoundedFunction at(double t) const
    {
        auto self = *this;
        double bound = u0_.sup_bound();
        for (std::size_t n = 0; n < terms(); ++n)
            bound += state_.phi[n].abs_integral(t);
        return BoundedFunction::analytic([self, t](double x) { return self.value(t, x); }, bound,
                                         {pert_.threshold() - t, pert_.threshold()});
    }

private:
    DSPerturbation pert_;
    BoundedFunction u0_;
    DPState state_;
};

struct DysonPhillipsOptions {
    double horizon = 2.0;
    std::size_t terms = 20;
    double dt = 1e-3;
    double certify_tolerance = 1e-8;
};

inline DysonPhillipsSolution dyson_phillips(const DSPerturbation& pert, const BoundedFunction& u0,
                                           const DysonPhillipsOptions& opt = {})
{
    pert.certify_smallness();
    if (opt.terms < 1)
        throw std::invalid_argument("Dyson-Phillips needs at least one term");
    const std::size_t steps = detail::grid_steps(opt.horizon, opt.dt);
    const double dt = opt.horizon / static_cast<double>(steps);

    DPState st;
    st.dt = dt;
    st.horizon = opt.horizon;
    st.phi.reserve(opt.terms + 1);
    st.phi.push_back(source_trace(pert, u0, dt, steps));
    for (std::size_t n = 1; n <= opt.terms; ++n) {
        std::vector<double> v(steps + 1);
        const auto& prev = st.phi.back();
        for (std::size_t j = 0; j <= steps; ++j)
            v[j] = trace_of_convolution(pert, prev, dt * static_cast<double>(j));
        st.phi.emplace_back(dt, std::move(v));
    }
    for (const auto& p : st.phi)
        st.term_sup.push_back(p.sup_abs());
    for (std::size_t n = 1; n < st.term_sup.size(); ++n)
        st.ratios.push_back(st.term_sup[n - 1] > 0.0 ? st.term_sup[n] / st.term_sup[n - 1] : 0.0);
    st.tail_estimate = st.term_sup.back() * opt.horizon;
    st.certified = st.tail_estimate <= opt.certify_tolerance * u0.sup_bound();
    st.contraction_observed = !st.ratios.empty() && st.ratios.back() < 1.0;
    return DysonPhillipsSolution(pert, u0, std::move(st));
}

// --- Volterra oracle ------------------------------------------------------

class MildSolution {
public:
    MildSolution(DSPerturbation pert, BoundedFunction u0, TraceFunction phi)
        : pert_(std::move(pert)), u0_(std::move(u0)), phi_(std::move(phi))
    {
    }

    /// Phi(w(t, .)) on the time grid.
    const TraceFunction& phi() const noexcept { return phi_; }

    /// w(t, x) = u0(x + t) + integral_0^{ell(t,x)} phi.
    double value(double t, double x) const { return u0_(x + t) + phi_.integral(pert_.ell(t, x)); }

private:
    DSPerturbation pert_;
    BoundedFunction u0_;
    TraceFunction phi_;
};

namespace detail {

// integral_alpha^beta k(r) * (p + q r) dr, split at the kernel breakpoints so
// that two-point Gauss is exact on every piece.
inline double kernel_moment(const DSPerturbation& pert, const std::vector<double>& cuts, double alpha, double beta,
                            double p, double q)
{
    double acc = 0.0;
    double lo = alpha;
    auto it = std::upper_bound(cuts.begin(), cuts.end(), alpha);
    auto f = [&](double r) { return pert.kernel(r) * (p + q * r); };
    for (; it != cuts.end() && *it < beta; ++it) {
        acc += quad::gauss2(f, lo, *it);
        lo = *it;
    }
    return acc + quad::gauss2(f, lo, beta);
}

} // namespace detail

/// Trapezoidal product integration of phi = a + k * phi: phi is taken
/// piecewise linear on the grid and the kernel is integrated exactly against
/// each hat function; the diagonal term is treated implicitly.
inline MildSolution volterra_oracle(const DSPerturbation& pert, const BoundedFunction& u0, double horizon, double dt)
{
    const std::size_t steps = detail::grid_steps(horizon, dt);
    const double h = horizon / static_cast<double>(steps);
    const auto cuts = pert.kernel_breakpoints();

    // rising[m] = int_{(m-1)h}^{mh} k(r) (r - (m-1)h)/h dr
    // falling[m] = int_{mh}^{(m+1)h} k(r) ((m+1)h - r)/h dr
    std::vector<double> rising(steps + 1, 0.0), falling(steps + 1, 0.0);
    for (std::size_t m = 0; m <= steps; ++m) {
        const double md = static_cast<double>(m);
        if (m >= 1)
            rising[m] = detail::kernel_moment(pert, cuts, (md - 1.0) * h, md * h, -(md - 1.0), 1.0 / h);
        falling[m] = detail::kernel_moment(pert, cuts, md * h, (md + 1.0) * h, md + 1.0, -1.0 / h);
    }

    const auto a = source_trace(pert, u0, h, steps);
    std::vector<double> phi(steps + 1);
    phi[0] = a.values()[0];
    const double diag = 1.0 - falling[0];
    for (std::size_t i = 1; i <= steps; ++i) {
        double acc = a.values()[i] + rising[i] * phi[0];
        for (std::size_t j = 1; j < i; ++j)
            acc += (rising[i - j] + falling[i - j]) * phi[j];
        phi[i] = acc / diag;
    }
    return MildSolution(pert, u0, TraceFunction(h, std::move(phi)));
}

// --- step-function integrals ----------------------------------------------

struct ValuedStep {
    double begin;
    double end;
    BoundedFunction value;
};

struct StepIntegralReport {
    bool continuous = false;        // Lipschitz bound respected on the sample grid
    double additivity_error = 0.0;  // |whole - sum of single steps|
    bool positivity_applicable = false;
    bool nonnegative = false;
    bool damped_monotone = false;   // finite horizon <= infinite horizon, per step
    bool damped_sup_bound = false;  // whole <= Phi(sup x_n) h
    double min_value = 0.0;

    bool ok() const noexcept
    {
        return continuous && additivity_error <= 1e-12 && (!positivity_applicable || nonnegative) &&
               (!positivity_applicable || (damped_monotone && damped_sup_bound));
    }
};

/// integral_0^{t0} T_{-1}(s) B u(s) ds for u = sum x_n 1_{I_n}.
inline BoundedFunction step_function_integral(const DSPerturbation& pert, const std::vector<ValuedStep>& u,
                                              double t0)
{
    // substitute r = t0 - s to reuse the convolution form
    std::vector<StepTrace::Step> steps;
    for (const auto& st : u) {
        if (st.begin < 0.0 || st.end > t0)
            throw std::invalid_argument("step interval leaves [0, t0]");
        steps.push_back({t0 - st.end, t0 - st.begin, integrate(pert.measure(), st.value)});
    }
    return extrapolated_convolution(pert, StepTrace(std::move(steps)), t0);
}

inline StepIntegralReport step_function_integral_checks(const DSPerturbation& pert, const std::vector<ValuedStep>& u,
                                                        double t0, const SeminormSpec& where)
{
    StepIntegralReport r;
    const auto whole = step_function_integral(pert, u, t0);
    const auto xs = where.samples();
    const auto& mu = pert.measure();

    double lip = 0.0;
    for (const auto& st : u)
        lip = std::max(lip, std::abs(integrate(mu, st.value)));
    r.continuous = true;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (std::abs(whole(xs[i]) - whole(xs[i - 1])) > lip * (xs[i] - xs[i - 1]) + 1e-12)
            r.continuous = false;

    std::vector<BoundedFunction> singles;
    for (const auto& st : u)
        singles.push_back(step_function_integral(pert, {st}, t0));
    r.min_value = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        double sum = 0.0;
        for (const auto& s : singles)
            sum += s(x);
        r.additivity_error = std::max(r.additivity_error, std::abs(whole(x) - sum));
        r.min_value = std::min(r.min_value, whole(x));
    }

    bool all_positive = mu.is_nonnegative();
    for (const auto& st : u)
        for (double x : xs)
            if (st.value(x) < 0.0)
                all_positive = false;
    r.positivity_applicable = all_positive;
    r.nonnegative = r.min_value >= -1e-12;

    if (all_positive) {
        // Damped semigroup e^{-s} T(s): integral over I of e^{-s} 1[x + s >= c]
        // against the full-line value Phi(x_n) h(x).
        const double c = pert.threshold();
        auto damped = [c](double lo, double hi, double x) {
            const double start = std::max(lo, c - x);
            return start < hi ? std::exp(-start) - std::exp(-hi) : 0.0;
        };
        std::vector<BoundedFunction> values;
        for (const auto& st : u)
            values.push_back(st.value);
        BoundedFunction z = values.empty() ? BoundedFunction::constant(0.0) : values.front();
        for (std::size_t i = 1; i < values.size(); ++i)
            z = lattice_sup(z, values[i]);
        const double phi_z = integrate(mu, z);
        r.damped_monotone = true;
        r.damped_sup_bound = true;
        for (double x : xs) {
            double total = 0.0;
            for (const auto& st : u) {
                const double phi_n = integrate(mu, st.value);
                const double finite = phi_n * damped(st.begin, st.end, x);
                if (finite > phi_n * pert.h()(x) + 1e-14)
                    r.damped_monotone = false;
                total += finite;
            }
            if (total > phi_z * pert.h()(x) + 1e-12)
                r.damped_sup_bound = false;
        }
    }
    return r;
}

// --- positivity -----------------------------------------------------------

struct PositivityAudit {
    double min_total = 0.0;
    double min_term = 0.0;
};

inline PositivityAudit positivity_audit(const DSPerturbation& pert, const BoundedFunction& u0,
                                        const std::vector<double>& times, const SeminormSpec& window,
                                        const DysonPhillipsOptions& opt = {})
{
    if (!pert.measure().is_nonnegative())
        throw HypothesisViolation(positivity_condition, "signed measures give a non-positive perturbation");
    const auto xs = window.samples();
    for (double x : xs)
        if (u0(x) < 0.0)
            throw std::invalid_argument("positivity audit needs u0 >= 0 on the grid");
    if (times.empty())
        throw std::invalid_argument("positivity audit needs at least one time");

    auto o = opt;
    o.horizon = std::max(opt.horizon, *std::max_element(times.begin(), times.end()));
    const auto sol = dyson_phillips(pert, u0, o);
    PositivityAudit r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (double t : times)
        for (double x : xs) {
            r.min_total = std::min(r.min_total, sol.value(t, x));
            for (std::size_t n = 0; n <= sol.terms(); ++n)
                r.min_term = std::min(r.min_term, sol.term(n, t, x));
        }
    return r;
}

} // namespace posds
