#pragma once

// Experiment configuration: YAML text in, validated ExperimentConfig out.
// Every diagnostic carries a 1-based line and column.
//
// Measure literals are sums of terms
//     w*delta(x)        atom of weight w at x
//     w*uniform(a,b)    density of height w on [a, b]
// with optional leading signs, e.g. "0.4*delta(0) + 0.1*uniform(0,1)".
// A bare "delta(x)" has weight 1; "0" is the zero measure.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "funcspace.hpp"
#include "matrixlab.hpp"
#include "measures.hpp"

namespace posds {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, int column, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                             message),
          line_(line), column_(column)
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

enum class ExperimentKind { simulate_pde, dyson_phillips, matrix_dp, gamma_table, verify };

inline std::string to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::simulate_pde: return "simulate-pde";
    case ExperimentKind::dyson_phillips: return "dyson-phillips";
    case ExperimentKind::matrix_dp: return "matrix-dp";
    case ExperimentKind::gamma_table: return "gamma-table";
    case ExperimentKind::verify: return "verify";
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s)
{
    for (auto k : {ExperimentKind::simulate_pde, ExperimentKind::dyson_phillips, ExperimentKind::matrix_dp,
                   ExperimentKind::gamma_table, ExperimentKind::verify})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

struct InitialDatum {
    enum class Preset { constant, rational_bump, spline };
    Preset preset = Preset::rational_bump;
    double value = 1.0; // constant
    std::vector<double> nodes;
    std::vector<double> values;

    BoundedFunction build() const
    {
        switch (preset) {
        case Preset::constant: return BoundedFunction::constant(value);
        case Preset::rational_bump:
            return BoundedFunction::analytic([](double x) { return 1.0 / (1.0 + x * x); }, 1.0);
        case Preset::spline: return BoundedFunction::grid(nodes, values);
        }
        throw std::logic_error("unknown initial datum preset");
    }
};

struct MatrixSection {
    /// Empty A means: draw `instances` random Metzler systems.
    mat::Matrix A;
    mat::Matrix B;
    mat::Matrix S0;
    std::optional<double> lambda;
    int stages = 0; // 0: plain series, >= 1: staged construction
    int instances = 50;
    int max_dim = 8;
    double target_smallness = 0.5;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::verify;
    std::uint64_t seed = 1;
    std::string output = "out";

    std::string measure_literal = "0.4*delta(0) + 0.1*uniform(0,1)";
    RegularMeasure measure = RegularMeasure::dirac(0.0, 0.4) + RegularMeasure::uniform(0.0, 1.0, 0.1);
    double threshold = 1.0;

    InitialDatum initial;

    double horizon = 2.0;
    double dt = 1e-3;
    int terms = 20;
    std::vector<double> samples{0.5, 1.0, 2.0};

    double window_a = -5.0;
    double window_b = 5.0;
    int resolution = 501;

    double tolerance = 1e-4;

    MatrixSection matrix;
    int n_max = 50;
};

// --- measure literal ------------------------------------------------------

namespace detail {

class MeasureLexer {
public:
    explicit MeasureLexer(std::string_view s) : s_(s) {}

    std::size_t pos() const noexcept { return i_; }
    bool done()
    {
        skip();
        return i_ >= s_.size();
    }

    char peek()
    {
        skip();
        return i_ < s_.size() ? s_[i_] : '\0';
    }

    bool accept(char c)
    {
        if (peek() == c) {
            ++i_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            fail(std::string("expected '") + c + "'");
    }

    double number()
    {
        skip();
        const char* first = s_.data() + i_;
        const char* last = s_.data() + s_.size();
        if (first < last && *first == '+')
            ++first; // from_chars rejects a leading '+'
        double v = 0.0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || p == first)
            fail("expected a number");
        i_ = static_cast<std::size_t>(p - s_.data());
        return v;
    }

    std::string word()
    {
        skip();
        std::size_t j = i_;
        while (j < s_.size() && std::isalpha(static_cast<unsigned char>(s_[j])))
            ++j;
        std::string w(s_.substr(i_, j - i_));
        i_ = j;
        return w;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::invalid_argument(what + " at offset " + std::to_string(i_));
    }

private:
    void skip()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
            ++i_;
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

} // namespace detail

/// Throws std::invalid_argument naming the offset of the first bad token.
inline RegularMeasure parse_measure_literal(std::string_view text)
{
    detail::MeasureLexer lx(text);
    std::vector<Atom> atoms;
    std::vector<DensityPiece> pieces;
    if (lx.done())
        lx.fail("empty measure literal");
    bool first = true;
    while (!lx.done()) {
        double sign = 1.0;
        if (!first) {
            if (lx.accept('-'))
                sign = -1.0;
            else
                lx.expect('+');
        } else if (lx.accept('-')) {
            sign = -1.0;
        }
        first = false;

        double weight = 1.0;
        const char c = lx.peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-') {
            weight = lx.number();
            if (!lx.accept('*')) {
                // a bare number is only allowed as the zero measure
                if (weight != 0.0)
                    lx.fail("expected '*' after weight");
                continue;
            }
        }
        weight *= sign;
        const std::string w = lx.word();
        if (w == "delta") {
            lx.expect('(');
            const double x = lx.number();
            lx.expect(')');
            atoms.push_back({x, weight});
        } else if (w == "uniform") {
            lx.expect('(');
            const double a = lx.number();
            lx.expect(',');
            const double b = lx.number();
            lx.expect(')');
            if (!(a < b))
                lx.fail("uniform(a,b) needs a < b");
            pieces.push_back({a, b, weight});
        } else {
            lx.fail("unknown term '" + w + "' (expected delta or uniform)");
        }
    }
    return RegularMeasure(std::move(atoms), std::move(pieces));
}

// --- YAML -----------------------------------------------------------------

namespace detail {

inline ConfigError error_at(const YAML::Node& n, const std::string& msg)
{
    const auto m = n.Mark();
    return ConfigError(m.line + 1, m.column + 1, msg);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key)
{
    if (!n.IsScalar())
        throw error_at(n, "'" + key + "' must be a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw error_at(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
    }
}

inline std::vector<double> number_list(const YAML::Node& n, const std::string& key)
{
    if (!n.IsSequence())
        throw error_at(n, "'" + key + "' must be a list of numbers");
    std::vector<double> v;
    for (const auto& e : n)
        v.push_back(scalar<double>(e, key));
    return v;
}

inline mat::Matrix matrix_value(const YAML::Node& n, const std::string& key)
{
    if (n.IsScalar() && n.Scalar() == "identity")
        return mat::Matrix(); // resolved against A later
    if (!n.IsSequence() || n.size() == 0)
        throw error_at(n, "'" + key + "' must be a list of rows or 'identity'");
    const auto rows = static_cast<Eigen::Index>(n.size());
    Eigen::Index cols = -1;
    std::vector<std::vector<double>> data;
    for (const auto& row : n) {
        auto r = number_list(row, key);
        if (cols < 0)
            cols = static_cast<Eigen::Index>(r.size());
        else if (cols != static_cast<Eigen::Index>(r.size()))
            throw error_at(row, "'" + key + "' has rows of different length");
        data.push_back(std::move(r));
    }
    if (rows > mat::max_dim || cols > mat::max_dim || cols == 0)
        throw error_at(n, "'" + key + "' must have between 1 and " + std::to_string(mat::max_dim) +
                              " rows and columns");
    mat::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

// Rejects keys outside `allowed`, naming the offender.
inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section)
{
    if (!map.IsMap())
        throw error_at(map, (section.empty() ? std::string("config") : "'" + section + "'") + " must be a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            throw error_at(kv.first, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
}

} // namespace detail

/// Parses and structurally validates a configuration. Hypotheses of the
/// perturbation theorem are not checked here; see validate_hypotheses.
inline ExperimentConfig parse_config(const std::string& text)
{
    using detail::error_at;
    using detail::scalar;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.mark.line + 1, e.mark.column + 1, e.msg);
    }

    ExperimentConfig c;
    if (root.IsNull())
        return c;
    detail::check_keys(root, {"experiment", "seed", "output", "perturbation", "initial", "time", "grid", "matrix", "gamma", "tolerance"}, "");

    if (auto n = root["experiment"]) {
        const auto s = scalar<std::string>(n, "experiment");
        const auto k = parse_kind(s);
        if (!k)
            throw error_at(n, "unknown experiment '" + s + "'");
        c.kind = *k;
    }
    if (auto n = root["seed"])
        c.seed = scalar<std::uint64_t>(n, "seed");
    if (auto n = root["output"])
        c.output = scalar<std::string>(n, "output");
    if (auto n = root["tolerance"]) {
        c.tolerance = scalar<double>(n, "tolerance");
        if (!(c.tolerance > 0.0))
            throw error_at(n, "tolerance must be positive");
    }

    if (auto p = root["perturbation"]) {
        detail::check_keys(p, {"measure", "threshold"}, "perturbation");
        if (auto n = p["measure"]) {
            c.measure_literal = scalar<std::string>(n, "measure");
            try {
                c.measure = parse_measure_literal(c.measure_literal);
            } catch (const std::invalid_argument& e) {
                throw error_at(n, std::string("bad measure literal: ") + e.what());
            }
        }
        if (auto n = p["threshold"])
            c.threshold = scalar<double>(n, "threshold");
    }

    if (auto p = root["initial"]) {
        detail::check_keys(p, {"preset", "value", "nodes", "values"}, "initial");
        if (auto n = p["preset"]) {
            const auto s = scalar<std::string>(n, "preset");
            if (s == "constant")
                c.initial.preset = InitialDatum::Preset::constant;
            else if (s == "rational-bump")
                c.initial.preset = InitialDatum::Preset::rational_bump;
            else if (s == "spline")
                c.initial.preset = InitialDatum::Preset::spline;
            else
                throw error_at(n, "unknown preset '" + s + "' (constant, rational-bump, spline)");
        }
        if (auto n = p["value"])
            c.initial.value = scalar<double>(n, "value");
        if (auto n = p["nodes"])
            c.initial.nodes = detail::number_list(n, "nodes");
        if (auto n = p["values"])
            c.initial.values = detail::number_list(n, "values");
        if (c.initial.preset == InitialDatum::Preset::spline) {
            try {
                (void)c.initial.build();
            } catch (const std::invalid_argument& e) {
                throw error_at(p, std::string("bad spline: ") + e.what());
            }
        }
    }

    if (auto p = root["time"]) {
        detail::check_keys(p, {"horizon", "dt", "terms", "samples"}, "time");
        if (auto n = p["horizon"]) {
            c.horizon = scalar<double>(n, "horizon");
            if (!(c.horizon > 0.0))
                throw error_at(n, "horizon must be positive");
        }
        if (auto n = p["dt"]) {
            c.dt = scalar<double>(n, "dt");
            if (!(c.dt > 0.0))
                throw error_at(n, "dt must be positive");
        }
        if (auto n = p["terms"]) {
            c.terms = scalar<int>(n, "terms");
            if (c.terms < 1)
                throw error_at(n, "terms must be at least 1");
        }
        if (auto n = p["samples"]) {
            c.samples = detail::number_list(n, "samples");
            for (double t : c.samples)
                if (!(t >= 0.0 && t <= c.horizon))
                    throw error_at(n, "sample times must lie in [0, horizon]");
        }
    }

    if (auto p = root["grid"]) {
        detail::check_keys(p, {"window", "resolution"}, "grid");
        if (auto n = p["window"]) {
            const auto w = detail::number_list(n, "window");
            if (w.size() != 2 || !(w[0] < w[1]))
                throw error_at(n, "window must be [a, b] with a < b");
            c.window_a = w[0];
            c.window_b = w[1];
        }
        if (auto n = p["resolution"]) {
            c.resolution = scalar<int>(n, "resolution");
            if (c.resolution < 2)
                throw error_at(n, "resolution must be at least 2");
        }
    }

    if (auto p = root["matrix"]) {
        detail::check_keys(p, {"A", "B", "S0", "lambda", "stages", "instances", "max_dim", "target_smallness"}, "matrix");
        auto& m = c.matrix;
        if (auto n = p["A"])
            m.A = detail::matrix_value(n, "A");
        if (auto n = p["B"])
            m.B = detail::matrix_value(n, "B");
        if (auto n = p["S0"])
            m.S0 = detail::matrix_value(n, "S0");
        if (auto n = p["lambda"])
            m.lambda = scalar<double>(n, "lambda");
        if (auto n = p["stages"]) {
            m.stages = scalar<int>(n, "stages");
            if (m.stages < 0)
                throw error_at(n, "stages must be nonnegative");
        }
        if (auto n = p["instances"]) {
            m.instances = scalar<int>(n, "instances");
            if (m.instances < 1)
                throw error_at(n, "instances must be at least 1");
        }
        if (auto n = p["max_dim"]) {
            m.max_dim = scalar<int>(n, "max_dim");
            if (m.max_dim < 1 || m.max_dim > mat::max_dim)
                throw error_at(n, "max_dim must lie in [1, " + std::to_string(mat::max_dim) + "]");
        }
        if (auto n = p["target_smallness"]) {
            m.target_smallness = scalar<double>(n, "target_smallness");
            if (!(m.target_smallness > 0.0))
                throw error_at(n, "target_smallness must be positive");
        }
        if (m.A.size() > 0) {
            if (m.A.rows() != m.A.cols())
                throw error_at(p["A"], "A must be square");
            if (m.B.size() == 0)
                m.B = mat::Matrix::Zero(m.A.rows(), m.A.cols());
            if (m.S0.size() == 0)
                m.S0 = mat::Matrix::Identity(m.A.rows(), m.A.rows());
            if (m.B.rows() != m.A.rows() || m.B.cols() != m.A.cols())
                throw error_at(p["B"] ? p["B"] : p, "B must have the shape of A");
            if (m.S0.rows() != m.A.rows())
                throw error_at(p["S0"] ? p["S0"] : p, "S0 must have as many rows as A");
        } else if (p["B"] || p["S0"]) {
            throw error_at(p, "B and S0 need an explicit A");
        }
    }

    if (auto p = root["gamma"]) {
        detail::check_keys(p, {"n_max"}, "gamma");
        if (auto n = p["n_max"]) {
            c.n_max = scalar<int>(n, "n_max");
            if (c.n_max < 1)
                throw error_at(n, "n_max must be at least 1");
        }
    }
    return c;
}

} // namespace posds
