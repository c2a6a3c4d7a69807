#pragma once

// Bounded continuous functions on the real line, the compact-open seminorms
// p_K(f) = sup_{x in K} |f(x)|, mixed-topology seminorms and lattice
// operations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace posds {

enum class FunctionKind { analytic, piecewise, grid };

/// One piece (c_0 + c_1 x + ... + c_d x^d) * exp(rate * x) of a
/// piecewise polynomial-exponential function.
struct PolyExpPiece {
    std::vector<double> coeffs;
    double rate = 0.0;

    double operator()(double x) const
    {
        double p = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            p = p * x + *it;
        return rate == 0.0 ? p : p * std::exp(rate * x);
    }
};

namespace detail {

struct FunctionBody {
    virtual ~FunctionBody() = default;
    virtual double eval(double x) const = 0;
    virtual std::vector<double> breakpoints() const { return {}; }
};

struct AnalyticBody final : FunctionBody {
    std::function<double(double)> fn;
    std::vector<double> kinks;
    AnalyticBody(std::function<double(double)> f, std::vector<double> k)
        : fn(std::move(f)), kinks(std::move(k)) {}
    double eval(double x) const override { return fn(x); }
    std::vector<double> breakpoints() const override { return kinks; }
};

// Piece i covers (cuts[i-1], cuts[i]]; the first piece extends to -inf and
// the last to +inf.
struct PiecewiseBody final : FunctionBody {
    std::vector<double> cuts;
    std::vector<PolyExpPiece> pieces;
    double eval(double x) const override
    {
        auto it = std::lower_bound(cuts.begin(), cuts.end(), x);
        return pieces[static_cast<std::size_t>(it - cuts.begin())](x);
    }
    std::vector<double> breakpoints() const override { return cuts; }
};

struct GridBody final : FunctionBody {
    std::vector<double> nodes;
    std::vector<double> values;
    double eval(double x) const override
    {
        if (x <= nodes.front())
            return values.front();
        if (x >= nodes.back())
            return values.back();
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        const auto j = static_cast<std::size_t>(it - nodes.begin());
        const double x0 = nodes[j - 1], x1 = nodes[j];
        const double w = (x - x0) / (x1 - x0);
        return (1.0 - w) * values[j - 1] + w * values[j];
    }
    std::vector<double> breakpoints() const override { return nodes; }
};

} // namespace detail

/// Element of BC(R): an immutable, cheaply copyable handle to an evaluation
/// rule together with a declared bound on sup|f|. Translation is a shift of
/// the argument and never resamples.
class BoundedFunction {
public:
    BoundedFunction() : BoundedFunction(constant(0.0)) {}

    static BoundedFunction constant(double c)
    {
        return analytic([c](double) { return c; }, std::abs(c));
    }

    /// `kinks` lists points where f or a low derivative is not smooth; they
    /// are used to split quadratures.
    static BoundedFunction analytic(std::function<double(double)> fn, double sup_bound,
                                    std::vector<double> kinks = {})
    {
        if (!(sup_bound >= 0.0))
            throw std::invalid_argument("sup_bound must be nonnegative");
        std::sort(kinks.begin(), kinks.end());
        return BoundedFunction(FunctionKind::analytic,
                               std::make_shared<detail::AnalyticBody>(std::move(fn), std::move(kinks)),
                               sup_bound);
    }

    /// `cuts` strictly increasing, `pieces.size() == cuts.size() + 1`.
    static BoundedFunction piecewise(std::vector<double> cuts, std::vector<PolyExpPiece> pieces,
                                     double sup_bound)
    {
        if (pieces.size() != cuts.size() + 1)
            throw std::invalid_argument("piecewise function needs one more piece than cuts");
        if (std::adjacent_find(cuts.begin(), cuts.end(), std::greater_equal<>()) != cuts.end())
            throw std::invalid_argument("piecewise cuts must be strictly increasing");
        if (!(sup_bound >= 0.0))
            throw std::invalid_argument("sup_bound must be nonnegative");
        auto body = std::make_shared<detail::PiecewiseBody>();
        body->cuts = std::move(cuts);
        body->pieces = std::move(pieces);
        return BoundedFunction(FunctionKind::piecewise, std::move(body), sup_bound);
    }

    /// Linear interpolation between nodes, constant continuation outside.
    static BoundedFunction grid(std::vector<double> nodes, std::vector<double> values)
    {
        if (nodes.empty() || nodes.size() != values.size())
            throw std::invalid_argument("grid function needs matching, nonempty nodes and values");
        if (std::adjacent_find(nodes.begin(), nodes.end(), std::greater_equal<>()) != nodes.end())
            throw std::invalid_argument("grid nodes must be strictly increasing");
        double bound = 0.0;
        for (double v : values) {
            if (!std::isfinite(v))
                throw std::invalid_argument("grid values must be finite");
            bound = std::max(bound, std::abs(v));
        }
        auto body = std::make_shared<detail::GridBody>();
        body->nodes = std::move(nodes);
        body->values = std::move(values);
        return BoundedFunction(FunctionKind::grid, std::move(body), bound);
    }

    double operator()(double x) const { return scale_ * body_->eval(x + shift_); }

    double sup_bound() const noexcept { return std::abs(scale_) * sup_bound_; }
    FunctionKind kind() const noexcept { return kind_; }

    /// Non-smooth points in the caller's coordinates.
    std::vector<double> breakpoints() const
    {
        auto b = body_->breakpoints();
        for (double& x : b)
            x -= shift_;
        return b;
    }

    /// x -> f(x + t).
    BoundedFunction shifted(double t) const
    {
        BoundedFunction g = *this;
        g.shift_ += t;
        return g;
    }

    BoundedFunction scaled(double c) const
    {
        BoundedFunction g = *this;
        g.scale_ *= c;
        return g;
    }

    friend BoundedFunction operator+(const BoundedFunction& f, const BoundedFunction& g)
    {
        return combine(f, g, [](double a, double b) { return a + b; }, f.sup_bound() + g.sup_bound());
    }

    friend BoundedFunction operator-(const BoundedFunction& f, const BoundedFunction& g)
    {
        return combine(f, g, [](double a, double b) { return a - b; }, f.sup_bound() + g.sup_bound());
    }

    template <typename Op>
    static BoundedFunction combine(const BoundedFunction& f, const BoundedFunction& g, Op op, double bound)
    {
        auto kinks = f.breakpoints();
        auto gk = g.breakpoints();
        kinks.insert(kinks.end(), gk.begin(), gk.end());
        std::sort(kinks.begin(), kinks.end());
        kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
        return analytic([f, g, op](double x) { return op(f(x), g(x)); }, bound, std::move(kinks));
    }

private:
    BoundedFunction(FunctionKind kind, std::shared_ptr<const detail::FunctionBody> body, double bound)
        : kind_(kind), body_(std::move(body)), sup_bound_(bound) {}

    FunctionKind kind_;
    std::shared_ptr<const detail::FunctionBody> body_;
    double sup_bound_;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

// --- lattice operations ---------------------------------------------------

inline BoundedFunction lattice_sup(const BoundedFunction& f, const BoundedFunction& g)
{
    return BoundedFunction::combine(f, g, [](double a, double b) { return std::max(a, b); },
                                    std::max(f.sup_bound(), g.sup_bound()));
}

inline BoundedFunction lattice_inf(const BoundedFunction& f, const BoundedFunction& g)
{
    return BoundedFunction::combine(f, g, [](double a, double b) { return std::min(a, b); },
                                    std::max(f.sup_bound(), g.sup_bound()));
}

inline BoundedFunction abs_val(const BoundedFunction& f)
{
    return BoundedFunction::analytic([f](double x) { return std::abs(f(x)); }, f.sup_bound(), f.breakpoints());
}

/// f+ = f v 0
inline BoundedFunction pos_part(const BoundedFunction& f)
{
    return BoundedFunction::analytic([f](double x) { return std::max(f(x), 0.0); }, f.sup_bound(),
                                     f.breakpoints());
}

/// f- = (-f) v 0
inline BoundedFunction neg_part(const BoundedFunction& f)
{
    return BoundedFunction::analytic([f](double x) { return std::max(-f(x), 0.0); }, f.sup_bound(),
                                     f.breakpoints());
}

// --- seminorms ------------------------------------------------------------

struct CompactWindow {
    double a;
    double b;

    CompactWindow(double lo, double hi) : a(lo), b(hi)
    {
        if (!(lo < hi))
            throw std::invalid_argument("compact window needs a < b");
    }

    bool contains(double x) const noexcept { return a <= x && x <= b; }
    double length() const noexcept { return b - a; }
};

struct SeminormSpec {
    CompactWindow window;
    std::size_t resolution;

    SeminormSpec(CompactWindow w, std::size_t n) : window(w), resolution(n)
    {
        if (n < 2)
            throw std::invalid_argument("seminorm resolution must be at least 2");
    }

    /// Uniform sample grid including both window endpoints.
    std::vector<double> samples() const
    {
        std::vector<double> xs(resolution);
        const double h = window.length() / static_cast<double>(resolution - 1);
        for (std::size_t i = 0; i < resolution; ++i)
            xs[i] = window.a + static_cast<double>(i) * h;
        xs.back() = window.b;
        return xs;
    }
};

/// Sampled p_K; a lower bound for the true sup over K.
inline double seminorm_pK(const BoundedFunction& f, const SeminormSpec& p)
{
    double m = 0.0;
    for (double x : p.samples())
        m = std::max(m, std::abs(f(x)));
    return m;
}

struct MixedSeminormSpec {
    struct Term {
        double weight;
        SeminormSpec seminorm;
    };
    std::vector<Term> terms;
    std::size_t tail_index = 0; // terms beyond this index are declared negligible

    MixedSeminormSpec() = default;
    explicit MixedSeminormSpec(std::vector<Term> t, std::size_t tail = 0)
        : terms(std::move(t)), tail_index(tail == 0 ? terms.size() : tail)
    {
        for (const auto& term : terms)
            if (!(term.weight >= 0.0))
                throw std::invalid_argument("mixed seminorm weights must be nonnegative");
    }
};

inline double mixed_seminorm(const BoundedFunction& f, const MixedSeminormSpec& m)
{
    double best = 0.0;
    for (const auto& term : m.terms)
        best = std::max(best, term.weight * seminorm_pK(f, term.seminorm));
    return best;
}

/// Window used to sample the sup-norm of BC(R).
inline SeminormSpec default_norm_sampler() { return SeminormSpec(CompactWindow(-50.0, 50.0), 20001); }

inline double sampled_sup_norm(const BoundedFunction& f, const SeminormSpec& sampler = default_norm_sampler())
{
    return seminorm_pK(f, sampler);
}

// --- structural checks ----------------------------------------------------

struct LatticeCheck {
    bool precondition_met = true;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string note;
};

struct BiAmCheck {
    bool precondition_met = true;
    bool seminorm_identity = false;
    bool norm_identity = false;
    double seminorm_lhs = 0.0, seminorm_rhs = 0.0;
    double norm_lhs = 0.0, norm_rhs = 0.0;
    std::string note;

    bool holds() const noexcept { return precondition_met && seminorm_identity && norm_identity; }
};

namespace detail {
inline bool nonnegative_on(const BoundedFunction& f, const std::vector<double>& xs)
{
    return std::all_of(xs.begin(), xs.end(), [&](double x) { return f(x) >= 0.0; });
}
} // namespace detail

/// max{p(f), p(g)} == p(f v g) and the same for the sampled sup-norm, for
/// f, g >= 0.
inline BiAmCheck check_bi_am(const BoundedFunction& f, const BoundedFunction& g, const SeminormSpec& p,
                             double tol = 1e-12, const SeminormSpec& norm = default_norm_sampler())
{
    BiAmCheck r;
    const auto xs = p.samples();
    const auto ns = norm.samples();
    if (!detail::nonnegative_on(f, xs) || !detail::nonnegative_on(g, xs) ||
        !detail::nonnegative_on(f, ns) || !detail::nonnegative_on(g, ns)) {
        r.precondition_met = false;
        r.note = "precondition violated: f and g must be nonnegative on the sample grid";
        return r;
    }
    const auto fg = lattice_sup(f, g);
    r.seminorm_lhs = std::max(seminorm_pK(f, p), seminorm_pK(g, p));
    r.seminorm_rhs = seminorm_pK(fg, p);
    r.norm_lhs = std::max(seminorm_pK(f, norm), seminorm_pK(g, norm));
    r.norm_rhs = seminorm_pK(fg, norm);
    r.seminorm_identity = std::abs(r.seminorm_lhs - r.seminorm_rhs) <= tol;
    r.norm_identity = std::abs(r.norm_lhs - r.norm_rhs) <= tol;
    return r;
}

/// |f| <= |g| on the grid implies p(f) <= p(g).
inline LatticeCheck check_compatibility(const BoundedFunction& f, const BoundedFunction& g,
                                        const SeminormSpec& p, double tol = 1e-12)
{
    LatticeCheck r;
    for (double x : p.samples()) {
        if (std::abs(f(x)) > std::abs(g(x))) {
            r.precondition_met = false;
            r.note = "precondition violated: |f| > |g| at x = " + std::to_string(x);
            return r;
        }
    }
    r.lhs = seminorm_pK(f, p);
    r.rhs = seminorm_pK(g, p);
    r.holds = r.lhs <= r.rhs + tol;
    return r;
}

} // namespace posds
