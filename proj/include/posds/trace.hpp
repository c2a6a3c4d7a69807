#pragma once

// Scalar time traces phi(s) with exact first and second primitives.

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace posds {

/// Piecewise-linear function on the uniform grid s_j = j*dt, j = 0..M.
/// integral(s) = Psi(s) = int_0^s phi and double_integral(s) = int_0^s Psi
/// are exact for the interpolant.
class TraceFunction {
public:
    TraceFunction() = default;

    TraceFunction(double dt, std::vector<double> values) : dt_(dt), values_(std::move(values))
    {
        if (!(dt > 0.0) || values_.empty())
            throw std::invalid_argument("trace needs dt > 0 and at least one value");
        const std::size_t n = values_.size();
        psi_.assign(n, 0.0);
        dpsi_.assign(n, 0.0);
        abs_.assign(n, 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double a = values_[j], b = values_[j + 1];
            psi_[j + 1] = psi_[j] + 0.5 * dt_ * (a + b);
            dpsi_[j + 1] = dpsi_[j] + psi_[j] * dt_ + dt_ * dt_ * (a / 3.0 + b / 6.0);
            abs_[j + 1] = abs_[j] + 0.5 * dt_ * (std::abs(a) + std::abs(b));
        }
    }

    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return values_.size(); }
    double horizon() const noexcept { return dt_ * static_cast<double>(values_.size() - 1); }
    const std::vector<double>& values() const noexcept { return values_; }
    double node(std::size_t j) const noexcept { return dt_ * static_cast<double>(j); }

    double operator()(double s) const
    {
        auto [j, tau] = locate(s);
        if (j + 1 >= values_.size())
            return values_.back();
        return values_[j] + (values_[j + 1] - values_[j]) * tau / dt_;
    }

    double integral(double s) const
    {
        auto [j, tau] = locate(s);
        if (j + 1 >= values_.size())
            return psi_.back();
        const double a = values_[j], slope = (values_[j + 1] - a) / dt_;
        return psi_[j] + a * tau + 0.5 * slope * tau * tau;
    }

    double double_integral(double s) const
    {
        auto [j, tau] = locate(s);
        if (j + 1 >= values_.size())
            return dpsi_.back();
        const double a = values_[j], slope = (values_[j + 1] - a) / dt_;
        return dpsi_[j] + psi_[j] * tau + 0.5 * a * tau * tau + slope * tau * tau * tau / 6.0;
    }

    /// Upper bound for int_0^s |phi|.
    double abs_integral(double s) const
    {
        auto [j, tau] = locate(s);
        if (j + 1 >= values_.size())
            return abs_.back();
        return abs_[j] + tau * std::max(std::abs(values_[j]), std::abs(values_[j + 1]));
    }

    double sup_abs() const
    {
        double m = 0.0;
        for (double v : values_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    // s is clamped to [0, horizon]
    std::pair<std::size_t, double> locate(double s) const
    {
        if (s <= 0.0)
            return {0, 0.0};
        const double u = s / dt_;
        auto j = static_cast<std::size_t>(std::floor(u));
        if (j + 1 >= values_.size())
            return {values_.size() - 1, 0.0};
        return {j, s - static_cast<double>(j) * dt_};
    }

    double dt_ = 1.0;
    std::vector<double> values_;
    std::vector<double> psi_;
    std::vector<double> dpsi_;
    std::vector<double> abs_;
};

/// Piecewise-constant trace: value v_i on [t_i, t_{i+1}), zero elsewhere.
class StepTrace {
public:
    struct Step {
        double begin;
        double end;
        double value;
    };

    explicit StepTrace(std::vector<Step> steps) : steps_(std::move(steps))
    {
        std::sort(steps_.begin(), steps_.end(), [](const Step& a, const Step& b) { return a.begin < b.begin; });
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            if (!(steps_[i].begin < steps_[i].end))
                throw std::invalid_argument("step interval needs begin < end");
            if (i > 0 && steps_[i].begin < steps_[i - 1].end)
                throw std::invalid_argument("step intervals overlap");
        }
    }

    double operator()(double s) const
    {
        for (const auto& st : steps_)
            if (st.begin <= s && s < st.end)
                return st.value;
        return 0.0;
    }

    double integral(double s) const
    {
        double acc = 0.0;
        for (const auto& st : steps_)
            acc += st.value * std::max(0.0, std::min(s, st.end) - st.begin);
        return acc;
    }

    double abs_integral(double s) const
    {
        double acc = 0.0;
        for (const auto& st : steps_)
            acc += std::abs(st.value) * std::max(0.0, std::min(s, st.end) - st.begin);
        return acc;
    }

    double sup_abs() const
    {
        double m = 0.0;
        for (const auto& st : steps_)
            m = std::max(m, std::abs(st.value));
        return m;
    }

    const std::vector<Step>& steps() const noexcept { return steps_; }

private:
    std::vector<Step> steps_;
};

template <typename T>
concept CumulativeTrace = requires(const T& t, double s) {
    { t.integral(s) } -> std::convertible_to<double>;
    { t.abs_integral(s) } -> std::convertible_to<double>;
    { t.sup_abs() } -> std::convertible_to<double>;
};

} // namespace posds
