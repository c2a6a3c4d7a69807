#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <posds/experiments.hpp>

using namespace posds;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("posds_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("report rows")
{
    VerificationReport r;
    r.at_most("a", 1e-5, 0.0, 1e-4);
    r.at_least("b", -1e-12, 0.0, 1e-9);
    r.flag("c", true);
    CHECK(r.passed());
    r.at_most("d", 2.0, 1.0);
    CHECK_FALSE(r.passed());
    const auto csv = report_table(r).str();
    CHECK(csv.rfind("id,status,measured,bound,tolerance\n", 0) == 0);
    CHECK(csv.find("d,fail,2,1,0\n") != std::string::npos);
}

TEST_CASE("gamma table has one row per n")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::gamma_table;
    c.output = scratch("gamma").string();
    const auto r = run(c);
    CHECK(r.status == exit_ok);
    const auto text = slurp(std::filesystem::path(c.output) / "gamma-table.csv");
    CHECK(text.rfind("n,gamma_upper_scaled,gamma_gap,floor_residual\n", 0) == 0);
    CHECK(lines(text) == 51);
    CHECK(std::filesystem::exists(std::filesystem::path(c.output) / "gamma-table-checks.csv"));
}

TEST_CASE("oversized measure exits with status 3")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::simulate_pde;
    c.measure = parse_measure_literal("0.8*delta(0) + 0.4*uniform(0,1)");
    c.output = scratch("big").string();
    const auto r = run(c);
    CHECK(r.status == exit_hypothesis);
    CHECK(r.message.find(smallness_condition) != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(std::filesystem::path(c.output) / "simulate-pde.csv"));
}

TEST_CASE("direct series on the nilpotent instance exits with status 3")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::matrix_dp;
    c.matrix.A = -mat::Matrix::Identity(2, 2);
    c.matrix.B = mat::Matrix::Zero(2, 2);
    c.matrix.B(0, 1) = 4.0;
    c.matrix.S0 = mat::Matrix::Identity(2, 2);
    c.matrix.lambda = 1.0;
    c.output = scratch("nil").string();
    auto r = run(c);
    CHECK(r.status == exit_hypothesis);
    CHECK(r.message.find(mat::matrix_smallness_condition) != std::string::npos);

    c.matrix.stages = 4;
    r = run(c);
    CHECK(r.status == exit_ok);
    const auto text = slurp(std::filesystem::path(c.output) / "matrix-dp.csv");
    CHECK(text.rfind("t,max_entry_error,min_entry,max_stage_norm,stages_ok\n", 0) == 0);
    CHECK(lines(text) == 4);
}

TEST_CASE("simulate-pde writes the grid and is deterministic")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::simulate_pde;
    c.dt = 1e-2;
    c.resolution = 21;
    c.output = scratch("pde1").string();
    const auto a = run(c);
    CHECK(a.status == exit_ok);
    const auto first = slurp(std::filesystem::path(c.output) / "simulate-pde.csv");
    CHECK(first.rfind("t,x,w_series,w_oracle,diff\n", 0) == 0);
    CHECK(lines(first) == 1 + 3 * 21);

    c.output = scratch("pde2").string();
    CHECK(run(c).status == exit_ok);
    CHECK(slurp(std::filesystem::path(c.output) / "simulate-pde.csv") == first);
}

TEST_CASE("dyson-phillips table")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::dyson_phillips;
    c.dt = 1e-2;
    c.output = scratch("dp").string();
    const auto r = run(c);
    CHECK(r.status == exit_ok);
    const auto text = slurp(std::filesystem::path(c.output) / "dyson-phillips.csv");
    CHECK(text.rfind("n,phi_sup,ratio,tail_estimate\n", 0) == 0);
    CHECK(lines(text) == 1 + 21);
}

TEST_CASE("random matrix runs depend only on the seed")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::matrix_dp;
    c.matrix.instances = 3;
    c.matrix.max_dim = 4;
    c.seed = 7;
    c.output = scratch("m1").string();
    CHECK(run(c).status == exit_ok);
    const auto first = slurp(std::filesystem::path(c.output) / "matrix-dp.csv");
    c.output = scratch("m2").string();
    CHECK(run(c).status == exit_ok);
    CHECK(slurp(std::filesystem::path(c.output) / "matrix-dp.csv") == first);
    c.seed = 8;
    c.output = scratch("m3").string();
    CHECK(run(c).status == exit_ok);
    CHECK(slurp(std::filesystem::path(c.output) / "matrix-dp.csv") != first);
}

TEST_CASE("failed checks give status 1")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::simulate_pde;
    c.dt = 0.25;
    c.terms = 1; // the tail check cannot pass with a single term
    c.output = scratch("fail").string();
    const auto r = run(c);
    CHECK(r.status == exit_check_failed);
    CHECK(r.message.find("pde.series_tail") != std::string::npos);
}
