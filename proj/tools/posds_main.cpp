#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <posds/config.hpp>
#include <posds/experiments.hpp>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<int> terms;
    std::optional<double> t_max;
    std::optional<int> n_max;
};

void add_common(CLI::App* sub, Overrides& o)
{
    sub->add_option("--config", o.config, "YAML experiment configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory for CSV files");
    sub->add_option("--seed", o.seed, "seed for randomized suites");
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--terms", o.terms, "number of series terms");
    sub->add_option("--t-max", o.t_max, "time horizon");
}

int execute(posds::ExperimentKind kind, const Overrides& o)
{
    posds::ExperimentConfig cfg;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        std::stringstream text;
        text << in.rdbuf();
        try {
            cfg = posds::parse_config(text.str());
        } catch (const posds::ConfigError& e) {
            std::cerr << o.config << ": " << e.what() << "\n";
            return posds::exit_config_error;
        }
    }
    cfg.kind = kind;
    if (o.out)
        cfg.output = *o.out;
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.dt) {
        if (!(*o.dt > 0.0)) {
            std::cerr << "--dt must be positive\n";
            return posds::exit_config_error;
        }
        cfg.dt = *o.dt;
    }
    if (o.terms) {
        if (*o.terms < 1) {
            std::cerr << "--terms must be at least 1\n";
            return posds::exit_config_error;
        }
        cfg.terms = *o.terms;
    }
    if (o.t_max) {
        if (!(*o.t_max > 0.0)) {
            std::cerr << "--t-max must be positive\n";
            return posds::exit_config_error;
        }
        cfg.horizon = *o.t_max;
        std::erase_if(cfg.samples, [&](double t) { return t > cfg.horizon; });
        if (cfg.samples.empty())
            cfg.samples.push_back(cfg.horizon);
    }
    if (o.n_max) {
        if (*o.n_max < 1) {
            std::cerr << "--n-max must be at least 1\n";
            return posds::exit_config_error;
        }
        cfg.n_max = *o.n_max;
    }

    const auto res = posds::run(cfg);
    if (!res.message.empty())
        std::cerr << res.message << (res.message.back() == '\n' ? "" : "\n");
    for (const auto& row : res.report.rows)
        std::cout << (row.passed ? "pass " : "FAIL ") << row.id << "  measured=" << posds::csv_number(row.measured)
                  << " bound=" << posds::csv_number(row.bound) << " tol=" << posds::csv_number(row.tolerance)
                  << "\n";
    for (const auto& a : res.artifacts)
        std::cout << "wrote " << a.string() << "\n";
    return res.status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"positive perturbations of the transport semigroup and of implemented matrix semigroups"};
    app.require_subcommand(1);

    Overrides o;
    struct Entry {
        const char* name;
        const char* help;
        posds::ExperimentKind kind;
    };
    const Entry entries[] = {
        {"simulate-pde", "series solution vs Volterra oracle on a space-time grid",
         posds::ExperimentKind::simulate_pde},
        {"dyson-phillips", "term sizes, ratios and tail of the series", posds::ExperimentKind::dyson_phillips},
        {"matrix-dp", "implemented matrix semigroup vs expm", posds::ExperimentKind::matrix_dp},
        {"gamma-table", "incomplete gamma values and the floor identity", posds::ExperimentKind::gamma_table},
        {"verify", "run every invariant suite and write a report", posds::ExperimentKind::verify},
    };
    std::optional<posds::ExperimentKind> chosen;
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        add_common(sub, o);
        if (e.kind == posds::ExperimentKind::gamma_table)
            sub->add_option("--n-max", o.n_max, "largest n in the table");
        sub->callback([&chosen, k = e.kind] { chosen = k; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return posds::exit_config_error;
    }
    return execute(*chosen, o);
}
