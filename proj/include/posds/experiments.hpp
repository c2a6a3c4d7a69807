#pragma once

// Experiment runner behind the command-line tool. Every experiment writes a
// data CSV plus a checks CSV (id,status,measured,bound,tolerance) into the
// output directory and maps its outcome to an exit status:
//   0 all checks pass, 1 a check failed, 2 bad configuration,
//   3 a hypothesis of the perturbation theorem is violated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "dsperturb.hpp"
#include "errors.hpp"
#include "funcspace.hpp"
#include "matrixlab.hpp"
#include "measures.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
#include "transgroup.hpp"

namespace posds {

enum ExitStatus : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2, exit_hypothesis = 3 };

struct ReportRow {
    std::string id;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
};

struct VerificationReport {
    std::vector<ReportRow> rows;

    bool passed() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.passed; });
    }

    /// measured <= bound + tolerance
    void at_most(std::string id, double measured, double bound, double tolerance = 0.0)
    {
        rows.push_back({std::move(id), measured <= bound + tolerance, measured, bound, tolerance});
    }

    /// measured >= bound - tolerance
    void at_least(std::string id, double measured, double bound, double tolerance = 0.0)
    {
        rows.push_back({std::move(id), measured >= bound - tolerance, measured, bound, tolerance});
    }

    void flag(std::string id, bool ok) { rows.push_back({std::move(id), ok, ok ? 1.0 : 0.0, 1.0, 0.0}); }
};

// --- CSV ------------------------------------------------------------------

inline std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != header_.size())
            throw std::logic_error("csv row width does not match the header");
        rows_.push_back(cells);
    }

    std::size_t size() const noexcept { return rows_.size(); }

    std::string str() const
    {
        std::string s;
        auto line = [&s](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i)
                    s += ',';
                s += cells[i];
            }
            s += '\n';
        };
        line(header_);
        for (const auto& r : rows_)
            line(r);
        return s;
    }

    /// Written to a temporary file and renamed into place.
    void write(const std::filesystem::path& path) const
    {
        std::filesystem::create_directories(path.parent_path());
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f)
                throw std::runtime_error("cannot write " + tmp.string());
            f << str();
        }
        std::filesystem::rename(tmp, path);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline CsvTable report_table(const VerificationReport& r)
{
    CsvTable t({"id", "status", "measured", "bound", "tolerance"});
    for (const auto& row : r.rows)
        t.row({row.id, row.passed ? "pass" : "fail", csv_number(row.measured), csv_number(row.bound),
               csv_number(row.tolerance)});
    return t;
}

struct RunResult {
    int status = exit_ok;
    std::string message;
    VerificationReport report;
    std::vector<std::filesystem::path> artifacts;
};

// --- shared pieces --------------------------------------------------------

inline std::vector<double> grid_points(double a, double b, int n)
{
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return x;
}

/// Nonnegative piecewise-linear function on [-4, 4], constant beyond.
inline BoundedFunction random_nonnegative_spline(std::mt19937_64& rng, int knots = 17)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> nodes = grid_points(-4.0, 4.0, knots), values(nodes.size());
    for (auto& v : values)
        v = u(rng);
    return BoundedFunction::grid(std::move(nodes), std::move(values));
}

/// Random Metzler A (diagonal in [-3, 0.5], off-diagonal in [0, 1]), B >= 0
/// rescaled so ||(lambda I - A)^{-1} B|| = target at lambda = s(A) + 1, and a
/// nonnegative S0.
inline mat::MatrixSystem random_scaled_system(std::mt19937_64& rng, int n, int m, double target)
{
    std::uniform_real_distribution<double> off(0.0, 1.0), diag(-3.0, 0.5);
    mat::MatrixSystem sys;
    sys.A = mat::Matrix(n, n);
    sys.B = mat::Matrix(n, n);
    sys.S0 = mat::Matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            sys.A(i, j) = i == j ? diag(rng) : off(rng);
            sys.B(i, j) = off(rng);
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            sys.S0(i, j) = off(rng);
    sys.lambda = mat::MatrixSystem::default_lambda(sys.A);
    sys.B *= target / mat::inf_norm(mat::resolvent(sys.A, sys.lambda) * sys.B);
    return sys;
}

inline double relative_entry_error(const mat::Matrix& v, const mat::Matrix& oracle)
{
    return mat::max_entry(v - oracle) / std::max(1.0, mat::max_entry(oracle));
}

/// Throws HypothesisViolation when the configured perturbation is not small.
inline void validate_hypotheses(const ExperimentConfig& c)
{
    if (c.kind == ExperimentKind::simulate_pde || c.kind == ExperimentKind::dyson_phillips)
        DSPerturbation(c.measure, c.threshold).certify_smallness();
}

// --- experiments ----------------------------------------------------------

namespace experiments {

inline void simulate_pde(const ExperimentConfig& c, RunResult& out)
{
    const DSPerturbation pert(c.measure, c.threshold);
    const auto u0 = c.initial.build();
    const auto sol = dyson_phillips(pert, u0, {c.horizon, static_cast<std::size_t>(c.terms), c.dt});
    const auto mild = volterra_oracle(pert, u0, c.horizon, c.dt);

    CsvTable t({"t", "x", "w_series", "w_oracle", "diff"});
    double worst = 0.0, lowest = std::numeric_limits<double>::infinity();
    for (double s : c.samples)
        for (double x : grid_points(c.window_a, c.window_b, c.resolution)) {
            const double a = sol.value(s, x), b = mild.value(s, x);
            worst = std::max(worst, std::abs(a - b));
            lowest = std::min(lowest, a);
            t.row({csv_number(s), csv_number(x), csv_number(a), csv_number(b), csv_number(a - b)});
        }
    const auto path = std::filesystem::path(c.output) / "simulate-pde.csv";
    t.write(path);
    out.artifacts.push_back(path);

    out.report.at_most("pde.series_vs_volterra", worst, 0.0, c.tolerance);
    out.report.at_most("pde.series_tail", sol.state().tail_estimate, 0.0, 1e-8 * u0.sup_bound());
    bool positive_data = c.measure.is_nonnegative();
    for (double x : grid_points(c.window_a - c.horizon, c.window_b + c.horizon, c.resolution))
        positive_data = positive_data && u0(x) >= 0.0;
    if (positive_data)
        out.report.at_least("pde.positivity", lowest, 0.0, 1e-9);
}

inline void dyson_phillips_terms(const ExperimentConfig& c, RunResult& out)
{
    const DSPerturbation pert(c.measure, c.threshold);
    const auto u0 = c.initial.build();
    const auto sol = dyson_phillips(pert, u0, {c.horizon, static_cast<std::size_t>(c.terms), c.dt});
    const auto& st = sol.state();

    CsvTable t({"n", "phi_sup", "ratio", "tail_estimate"});
    for (std::size_t n = 0; n < st.term_sup.size(); ++n)
        t.row({std::to_string(n), csv_number(st.term_sup[n]), n == 0 ? "" : csv_number(st.ratios[n - 1]),
               csv_number(st.term_sup[n] * c.horizon)});
    const auto path = std::filesystem::path(c.output) / "dyson-phillips.csv";
    t.write(path);
    out.artifacts.push_back(path);

    // "eventually": the last quarter of the ratios
    const std::size_t from = st.ratios.size() - std::max<std::size_t>(1, st.ratios.size() / 4);
    double late = 0.0;
    for (std::size_t i = from; i < st.ratios.size(); ++i)
        late = std::max(late, st.ratios[i]);
    out.report.at_most("dp.eventual_ratio", late, 0.6);
    out.report.at_most("dp.tail", st.tail_estimate, 0.0, 1e-8 * u0.sup_bound());
}

inline void matrix_dp(const ExperimentConfig& c, RunResult& out)
{
    const auto& ms = c.matrix;
    std::vector<mat::MatrixSystem> systems;
    if (ms.A.size() > 0) {
        mat::MatrixSystem s{ms.A, ms.B, 0.0, ms.S0};
        s.lambda = ms.lambda ? *ms.lambda : mat::MatrixSystem::default_lambda(ms.A);
        systems.push_back(s);
    } else {
        std::mt19937_64 rng(c.seed);
        std::uniform_int_distribution<int> dim(1, ms.max_dim);
        for (int i = 0; i < ms.instances; ++i) {
            const int n = dim(rng), m = dim(rng);
            systems.push_back(random_scaled_system(rng, n, m, ms.target_smallness));
        }
    }

    std::vector<double> times = c.samples;
    std::sort(times.begin(), times.end());
    std::vector<double> err(times.size(), 0.0), low(times.size(), std::numeric_limits<double>::infinity()),
        stage_norm(times.size(), 0.0);
    std::vector<bool> stages_ok(times.size(), true);

    for (const auto& sys : systems) {
        if (ms.stages == 0) {
            const double k = (sys.validate(), sys.smallness());
            const auto tr = mat::dp_implemented_trajectory(sys, times.back(), {static_cast<std::size_t>(std::max(c.terms, 30)), true});
            for (std::size_t i = 0; i < times.size(); ++i) {
                const auto& v = tr.at_time(times[i]);
                err[i] = std::max(err[i], relative_entry_error(v, mat::expm(sys.A + sys.B, times[i]) * sys.S0));
                low[i] = std::min(low[i], v.minCoeff());
                stage_norm[i] = std::max(stage_norm[i], k);
            }
        } else {
            for (std::size_t i = 0; i < times.size(); ++i) {
                const auto r = mat::staged_corollary(sys, ms.stages, times[i]);
                double worst_stage = 0.0;
                for (const auto& st : r.stages)
                    worst_stage = std::max(worst_stage, st.norm);
                stage_norm[i] = std::max(stage_norm[i], worst_stage);
                if (!r.ok()) {
                    stages_ok[i] = false;
                    err[i] = std::numeric_limits<double>::infinity();
                    continue;
                }
                err[i] = std::max(err[i], relative_entry_error(r.value, mat::expm(sys.A + sys.B, times[i]) * sys.S0));
                low[i] = std::min(low[i], r.value.minCoeff());
            }
        }
    }

    CsvTable t({"t", "max_entry_error", "min_entry", "max_stage_norm", "stages_ok"});
    for (std::size_t i = 0; i < times.size(); ++i)
        t.row({csv_number(times[i]), csv_number(err[i]), csv_number(low[i]), csv_number(stage_norm[i]),
               stages_ok[i] ? "1" : "0"});
    const auto path = std::filesystem::path(c.output) / "matrix-dp.csv";
    t.write(path);
    out.artifacts.push_back(path);

    double worst = 0.0, lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) {
        worst = std::max(worst, err[i]);
        lowest = std::min(lowest, low[i]);
    }
    out.report.flag("matrix.stages_certified", std::all_of(stages_ok.begin(), stages_ok.end(), [](bool b) { return b; }));
    out.report.at_most("matrix.series_vs_expm", worst, 0.0, 1e-8);
    out.report.at_least("matrix.min_entry", lowest, 0.0, 1e-10);
}

inline void gamma_table(const ExperimentConfig& c, RunResult& out)
{
    CsvTable t({"n", "gamma_upper_scaled", "gamma_gap", "floor_residual"});
    double worst = 0.0;
    for (int n = 1; n <= c.n_max; ++n) {
        const auto chk = gamma_gap_floor_identity_check(n);
        worst = std::max(worst, chk.relative_residual);
        t.row({std::to_string(n), csv_number(regularized_upper_gamma_at_one(n)), csv_number(gamma_gap(n)),
               csv_number(chk.relative_residual)});
    }
    const auto path = std::filesystem::path(c.output) / "gamma-table.csv";
    t.write(path);
    out.artifacts.push_back(path);
    out.report.at_most("gamma.floor_identity", worst, 0.0, 1e-10);
    out.report.flag("gamma.floor_identity_fails_at_0", !gamma_gap_floor_identity_check(0).holds);
}

// The full invariant suite, assembled from each module.
inline void verify(const ExperimentConfig& c, RunResult& out)
{
    auto& rep = out.report;
    std::mt19937_64 rng(c.seed);

    // specfun
    {
        double worst = 0.0;
        for (int n = 0; n <= 20; ++n)
            for (double x : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                auto f = [n](double s) { return std::pow(s, n) * std::exp(-s); };
                const double peak = std::max(x, double(n)), top = peak + 100.0;
                // relative tolerance: the integrals reach 20!
                const double tol = 1e-13 * quad::simpson(f, x, top, 2000);
                const double ref = quad::adaptive_simpson(f, x, peak, tol) + quad::adaptive_simpson(f, peak, top, tol);
                worst = std::max(worst, std::abs(incomplete_gamma_int(n, x).value() / ref - 1.0));
            }
        rep.at_most("specfun.incomplete_gamma_vs_quadrature", worst, 0.0, 1e-10);
        double floor_worst = 0.0;
        for (int n = 1; n <= 30; ++n)
            floor_worst = std::max(floor_worst, gamma_gap_floor_identity_check(n).relative_residual);
        rep.at_most("specfun.floor_identity", floor_worst, 0.0, 1e-10);
        rep.flag("specfun.floor_identity_fails_at_0", !gamma_gap_floor_identity_check(0).holds);
    }

    // transgroup
    {
        const SeminormSpec k(CompactWindow(-2.0, 2.0), 401);
        double ratio = 0.0;
        bool monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        for (int n = 1; n <= 100; ++n) {
            const double g = extrapolated_gap(n, k);
            ratio = std::max(ratio, g * (n + 1.0) / 3.0);
            monotone = monotone && g <= prev + 1e-15;
            prev = g;
        }
        rep.at_most("transgroup.extrapolated_gap_scaled", ratio, 1.0);
        rep.flag("transgroup.extrapolated_gap_monotone", monotone);

        ResolventQuadrature q;
        q.min_panels_per_piece = 2000;
        double worst = 0.0;
        for (int n : {1, 5, 10, 25}) {
            const auto hn = hn_family(n);
            for (double x : grid_points(-2.0, 2.0, 41))
                worst = std::max(worst, std::abs(resolvent_at(q, hn, x) - resolvent_hn_analytic(n, x)));
        }
        rep.at_most("transgroup.resolvent_closed_form", worst, 0.0, 1e-8);

        const auto bc = check_bicontinuity_axioms(h_function(), 1.0, SeminormSpec(CompactWindow(-1.0, 1.0), 201));
        rep.at_most("transgroup.semigroup_law", bc.semigroup_law_error, 0.0);
        rep.flag("transgroup.bicontinuity", bc.ok());
    }

    // funcspace
    {
        const SeminormSpec k(CompactWindow(-2.0, 2.0), 257);
        double gap = 0.0;
        bool compatible = true;
        std::uniform_real_distribution<double> shrink(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const auto f = random_nonnegative_spline(rng), g = random_nonnegative_spline(rng);
            const auto b = check_bi_am(f, g, k, 0.0);
            gap = std::max({gap, std::abs(b.norm_lhs - b.norm_rhs), std::abs(b.seminorm_lhs - b.seminorm_rhs)});
            if (!b.holds())
                gap = std::max(gap, 1.0);
            const double s = shrink(rng);
            const auto small = f.scaled(s);
            compatible = compatible && check_compatibility(small, f, k).holds;
        }
        rep.at_most("funcspace.bi_am", gap, 0.0);
        rep.flag("funcspace.compatibility", compatible);
    }

    // dsperturb
    {
        const DSPerturbation pert(c.measure, c.threshold);
        const auto u0 = c.initial.build();
        const DysonPhillipsOptions opt{c.horizon, static_cast<std::size_t>(c.terms), c.dt};
        const auto sol = dyson_phillips(pert, u0, opt);
        const auto mild = volterra_oracle(pert, u0, c.horizon, c.dt);
        double worst = 0.0;
        for (double s : c.samples)
            for (double x : grid_points(c.window_a, c.window_b, c.resolution))
                worst = std::max(worst, std::abs(sol.value(s, x) - mild.value(s, x)));
        rep.at_most("dsperturb.series_vs_volterra", worst, 0.0, c.tolerance);

        const DSPerturbation far(RegularMeasure::dirac(2.0, 0.5));
        const auto one = BoundedFunction::constant(1.0);
        const auto fs = dyson_phillips(far, one, opt);
        const auto fm = volterra_oracle(far, one, c.horizon, c.dt);
        double cf = 0.0;
        for (double s : c.samples)
            for (double x : grid_points(c.window_a, c.window_b, c.resolution)) {
                const double exact = std::exp(0.5 * far.ell(s, x));
                cf = std::max({cf, std::abs(fs.value(s, x) - exact), std::abs(fm.value(s, x) - exact)});
            }
        rep.at_most("dsperturb.closed_form", cf, 0.0, 1e-6);

        const DSPerturbation atom(RegularMeasure::dirac(0.0, 0.5));
        const SeminormSpec win(CompactWindow(c.window_a, c.window_b), c.resolution);
        double low_total = std::numeric_limits<double>::infinity(), low_term = low_total;
        for (int i = 0; i < 100; ++i) {
            const auto a = positivity_audit(atom, random_nonnegative_spline(rng), c.samples, win, opt);
            low_total = std::min(low_total, a.min_total);
            low_term = std::min(low_term, a.min_term);
        }
        rep.at_least("dsperturb.positivity_total", low_total, 0.0, 1e-9);
        rep.at_least("dsperturb.positivity_terms", low_term, 0.0, 1e-9);

        auto unit = opt;
        unit.horizon = 1.0;
        const auto contr = dyson_phillips(pert, u0, unit);
        const auto& r = contr.state().ratios;
        rep.at_most("dsperturb.eventual_ratio", *std::max_element(r.end() - 5, r.end()), 0.6);
        rep.at_most("dsperturb.tail", contr.state().tail_estimate, 0.0, 1e-10 * u0.sup_bound());

        bool refused = false;
        try {
            DSPerturbation(RegularMeasure::dirac(0.0, 1.2)).certify_smallness();
        } catch (const HypothesisViolation& e) {
            refused = e.condition() == smallness_condition;
        }
        rep.flag("dsperturb.smallness_violation_detected", refused);
    }

    // matrixlab
    {
        double worst = 0.0, lowest = std::numeric_limits<double>::infinity();
        std::uniform_int_distribution<int> dim(1, 8);
        for (int i = 0; i < 50; ++i) {
            const auto sys = random_scaled_system(rng, dim(rng), dim(rng), 0.5);
            const auto tr = mat::dp_implemented_trajectory(sys, 2.0);
            for (double t : {0.5, 1.0, 2.0}) {
                const auto& v = tr.at_time(t);
                worst = std::max(worst, relative_entry_error(v, mat::expm(sys.A + sys.B, t) * sys.S0));
                lowest = std::min(lowest, v.minCoeff());
            }
        }
        rep.at_most("matrixlab.series_vs_expm", worst, 0.0, 1e-8);
        rep.at_least("matrixlab.min_entry", lowest, 0.0, 1e-10);

        mat::Matrix a = -mat::Matrix::Identity(2, 2), b = mat::Matrix::Zero(2, 2);
        b(0, 1) = 4.0;
        const mat::MatrixSystem nil{a, b, 1.0, mat::Matrix::Identity(2, 2)};
        double staged = 0.0;
        bool chain = true;
        for (double t : {0.5, 1.0, 2.0}) {
            const auto r = mat::staged_corollary(nil, 4, t);
            if (!r.ok()) {
                chain = false;
                staged = std::numeric_limits<double>::infinity();
                break;
            }
            mat::Matrix exact(2, 2);
            exact << 1.0, 4.0 * t, 0.0, 1.0;
            staged = std::max(staged, mat::max_entry(r.value - std::exp(-t) * exact));
            for (const auto& s : r.stages)
                chain = chain && s.monotone_chain;
        }
        rep.at_most("matrixlab.staged_nilpotent", staged, 0.0, 1e-8);
        rep.flag("matrixlab.monotone_chain", chain);

        double am = 0.0;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            mat::Matrix s(4, 3), r(4, 3);
            for (Eigen::Index p = 0; p < 4; ++p)
                for (Eigen::Index q = 0; q < 3; ++q) {
                    s(p, q) = u(rng);
                    r(p, q) = u(rng);
                }
            am = std::max(am, mat::check_bi_am(s, r).worst_gap);
        }
        rep.at_most("matrixlab.bi_am", am, 0.0);

        bool refused = false;
        try {
            mat::dp_implemented(nil, 1.0);
        } catch (const HypothesisViolation& e) {
            refused = e.condition() == mat::matrix_smallness_condition;
        }
        rep.flag("matrixlab.smallness_violation_detected", refused);
    }

    const auto path = std::filesystem::path(c.output) / "verify-report.csv";
    report_table(rep).write(path);
    out.artifacts.push_back(path);
}

} // namespace experiments

/// Runs one configured experiment. Never throws for configuration or
/// hypothesis problems; those become exit statuses 2 and 3.
inline RunResult run(const ExperimentConfig& c)
{
    RunResult out;
    try {
        validate_hypotheses(c);
        switch (c.kind) {
        case ExperimentKind::simulate_pde: experiments::simulate_pde(c, out); break;
        case ExperimentKind::dyson_phillips: experiments::dyson_phillips_terms(c, out); break;
        case ExperimentKind::matrix_dp: experiments::matrix_dp(c, out); break;
        case ExperimentKind::gamma_table: experiments::gamma_table(c, out); break;
        case ExperimentKind::verify: experiments::verify(c, out); break;
        }
    } catch (const HypothesisViolation& e) {
        out.status = exit_hypothesis;
        out.message = std::string("hypothesis violated: ") + e.what();
        return out;
    } catch (const ConfigError& e) {
        out.status = exit_config_error;
        out.message = e.what();
        return out;
    } catch (const std::invalid_argument& e) {
        out.status = exit_config_error;
        out.message = std::string("invalid configuration: ") + e.what();
        return out;
    }

    if (c.kind != ExperimentKind::verify) {
        const auto path = std::filesystem::path(c.output) / (to_string(c.kind) + "-checks.csv");
        report_table(out.report).write(path);
        out.artifacts.push_back(path);
    }
    out.status = out.report.passed() ? exit_ok : exit_check_failed;
    if (out.status != exit_ok)
        for (const auto& r : out.report.rows)
            if (!r.passed)
                out.message += "check failed: " + r.id + " measured " + csv_number(r.measured) + "\n";
    return out;
}

} // namespace posds
