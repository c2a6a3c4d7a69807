#pragma once

// Finitely parameterized signed Borel measures on R (atoms plus piecewise
// constant densities) and the functional f -> integral of f d(mu).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "funcspace.hpp"
#include "quadrature.hpp"

namespace posds {

struct Atom {
    double location;
    double weight;
};

struct DensityPiece {
    double a;
    double b;
    double height;
};

class RegularMeasure {
public:
    RegularMeasure() = default;

    RegularMeasure(std::vector<Atom> atoms, std::vector<DensityPiece> densities)
        : atoms_(std::move(atoms)), densities_(std::move(densities))
    {
        for (const auto& d : densities_)
            if (!(d.a < d.b))
                throw std::invalid_argument("density interval needs a < b");
        for (const auto& a : atoms_)
            if (!std::isfinite(a.location) || !std::isfinite(a.weight))
                throw std::invalid_argument("atoms must be finite");
    }

    static RegularMeasure dirac(double x, double weight = 1.0) { return RegularMeasure({{x, weight}}, {}); }
    static RegularMeasure uniform(double a, double b, double height)
    {
        return RegularMeasure({}, {{a, b, height}});
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<DensityPiece>& densities() const noexcept { return densities_; }

    bool is_zero() const noexcept
    {
        return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.weight == 0.0; }) &&
               std::all_of(densities_.begin(), densities_.end(),
                           [](const DensityPiece& d) { return d.height == 0.0; });
    }

    bool is_nonnegative() const noexcept
    {
        return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.weight >= 0.0; }) &&
               std::all_of(densities_.begin(), densities_.end(),
                           [](const DensityPiece& d) { return d.height >= 0.0; });
    }

    friend RegularMeasure operator+(RegularMeasure m, const RegularMeasure& n)
    {
        m.atoms_.insert(m.atoms_.end(), n.atoms_.begin(), n.atoms_.end());
        m.densities_.insert(m.densities_.end(), n.densities_.begin(), n.densities_.end());
        return m;
    }

    RegularMeasure scaled(double c) const
    {
        RegularMeasure m = *this;
        for (auto& a : m.atoms_)
            a.weight *= c;
        for (auto& d : m.densities_)
            d.height *= c;
        return m;
    }

private:
    std::vector<Atom> atoms_;
    std::vector<DensityPiece> densities_;
};

inline double total_variation(const RegularMeasure& mu)
{
    double tv = 0.0;
    for (const auto& a : mu.atoms())
        tv += std::abs(a.weight);
    for (const auto& d : mu.densities())
        tv += std::abs(d.height) * (d.b - d.a);
    return tv;
}

/// |mu|(K) for a compact window K (closed at both ends).
inline double variation_inside(const RegularMeasure& mu, const CompactWindow& k)
{
    double m = 0.0;
    for (const auto& a : mu.atoms())
        if (k.contains(a.location))
            m += std::abs(a.weight);
    for (const auto& d : mu.densities()) {
        const double overlap = std::max(0.0, std::min(d.b, k.b) - std::max(d.a, k.a));
        m += std::abs(d.height) * overlap;
    }
    return m;
}

/// |mu|(R \ K).
inline double tail_mass(const RegularMeasure& mu, const CompactWindow& k)
{
    return std::max(0.0, total_variation(mu) - variation_inside(mu, k));
}

/// mu([c, inf)); an atom sitting at c is included.
inline double upper_tail(const RegularMeasure& mu, double c)
{
    double m = 0.0;
    for (const auto& a : mu.atoms())
        if (a.location >= c)
            m += a.weight;
    for (const auto& d : mu.densities())
        m += d.height * std::max(0.0, d.b - std::max(d.a, c));
    return m;
}

/// mu({c}).
inline double atom_mass_at(const RegularMeasure& mu, double c)
{
    double m = 0.0;
    for (const auto& a : mu.atoms())
        if (a.location == c)
            m += a.weight;
    return m;
}

/// Phi(f) = integral of f d(mu). Atoms are exact; each density piece is
/// integrated by composite Simpson, split at the kinks of f.
inline double integrate(const RegularMeasure& mu, const BoundedFunction& f, std::size_t panels = 512)
{
    double s = 0.0;
    for (const auto& a : mu.atoms())
        s += a.weight * f(a.location);
    if (!mu.densities().empty()) {
        const auto kinks = f.breakpoints();
        for (const auto& d : mu.densities())
            if (d.height != 0.0)
                s += d.height * quad::simpson_split(f, d.a, d.b, kinks, panels, 2);
    }
    return s;
}

} // namespace posds
