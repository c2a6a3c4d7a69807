#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <posds/transgroup.hpp>

#include "oracles.hpp"

using namespace posds;
using Catch::Approx;

TEST_CASE("translation at t = 0 is the identity and shifts exactly")
{
    const auto h = h_function();
    const auto same = apply_T(0.0, h);
    for (double x : {-3.0, 0.0, 0.5, 1.0, 7.0})
        CHECK(same(x) == h(x));
    CHECK(apply_T(1.0, h)(0.0) == 1.0);
    CHECK(h(1.0) == 1.0);
    CHECK(h(0.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(apply_T(-0.1, h), std::invalid_argument);
}

TEST_CASE("semigroup law is exact on a grid")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> time(0.0, 3.0);
    const auto f = BoundedFunction::analytic([](double x) { return 1.0 / (1.0 + x * x); }, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double s = time(rng), t = time(rng);
        const auto lhs = apply_T(s, apply_T(t, f));
        const auto rhs = apply_T(s + t, f);
        for (double x = -5.0; x <= 5.0; x += 0.25)
            CHECK(lhs(x) == rhs(x));
    }
}

TEST_CASE("resolvent of constants")
{
    const auto one = resolvent(ResolventQuadrature{}, BoundedFunction::constant(1.0));
    for (double x : {-4.0, 0.0, 2.5})
        CHECK(one.image(x) == Approx(1.0).margin(1e-12));
    CHECK(one.truncation_bound < 1e-17);

    const auto q2 = ResolventQuadrature::for_lambda(2.0);
    const auto c = resolvent(q2, BoundedFunction::constant(3.0));
    CHECK(c.image(0.7) == Approx(1.5).margin(1e-12));

    ResolventQuadrature bad;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(resolvent(bad, BoundedFunction::constant(1.0)), std::invalid_argument);
}

TEST_CASE("resolvent of h_0 beyond the jump is 1")
{
    const auto r = resolvent(ResolventQuadrature{}, hn_family(0));
    for (double x : {1.1, 2.0, 5.0})
        CHECK(r.image(x) == Approx(1.0).margin(1e-12));
}

TEST_CASE("h_n family")
{
    CHECK(hn_family(2)(0.5) == 0.25);
    CHECK(hn_family(3)(-0.5) == 0.0);
    for (int n : {0, 1, 7, 40})
        for (double x : {1.0001, 2.0, 100.0})
            CHECK(hn_family(n)(x) == 1.0);
    CHECK_THROWS_AS(hn_family(-1), std::invalid_argument);
}

TEST_CASE("closed-form resolvent of h_n")
{
    for (int n : {0, 1, 3, 20})
        CHECK(resolvent_hn_analytic(n, 1.5) == 1.0);
    CHECK(resolvent_hn_analytic(0, 0.0) == Approx(1.0).epsilon(1e-15));
    for (int n : {0, 1, 4, 30})
        CHECK(resolvent_hn_analytic(n, 1.0) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed-form resolvent agrees with adaptive Laplace quadrature")
{
    for (int n : {1, 2, 5, 10, 25}) {
        const auto hn = hn_family(n);
        for (double x : {-2.0, -0.75, 0.0, 0.3, 0.9, 1.5}) {
            const double ref = oracle::laplace_by_adaptive([&](double y) { return hn(y); }, x, 1.0, {0.0, 1.0});
            INFO("n = " << n << ", x = " << x);
            CHECK(resolvent_hn_analytic(n, x) == Approx(ref).margin(1e-11));
        }
    }
}

TEST_CASE("library resolvent quadrature matches the closed form")
{
    ResolventQuadrature q;
    q.min_panels_per_piece = 2000;
    for (int n : {1, 5, 10, 25}) {
        const auto hn = hn_family(n);
        for (double x = -2.0; x <= 2.0; x += 0.1)
            CHECK(std::abs(resolvent_at(q, hn, x) - resolvent_hn_analytic(n, x)) < 1e-8);
    }
}

TEST_CASE("resolvent identity lambda R f - (R f)' = f")
{
    const auto f = BoundedFunction::analytic([](double x) { return std::cos(x); }, 1.0);
    const SeminormSpec where(CompactWindow(-2.0, 2.0), 21);
    CHECK(resolvent_identity_residual(ResolventQuadrature{}, f, where) < 1e-6);
}

TEST_CASE("extrapolated gap")
{
    const SeminormSpec right(CompactWindow(2.0, 3.0), 101);
    for (int n : {1, 5, 50})
        CHECK(extrapolated_gap(n, right) == 0.0);

    const SeminormSpec k(CompactWindow(-2.0, 2.0), 4001);
    // direct quadrature of R h_1 - h on the same grid
    const auto h1 = hn_family(1);
    const auto h = h_function();
    double direct = 0.0;
    for (double x : k.samples()) {
        const double r = oracle::laplace_by_adaptive([&](double y) { return h1(y); }, x, 1.0, {0.0, 1.0});
        direct = std::max(direct, std::abs(r - h(x)));
    }
    CHECK(extrapolated_gap(1, k) == Approx(direct).margin(1e-8));

    double prev = extrapolated_gap(1, k);
    for (int n = 1; n <= 100; ++n) {
        const double g = extrapolated_gap(n, k);
        CHECK(g <= 3.0 / (n + 1.0));
        CHECK(g <= prev + 1e-15);
        prev = g;
    }
}

TEST_CASE("indicator kernel")
{
    const auto g = g_kernel_indicator();
    CHECK(g(1.0) == 1.0);
    CHECK(g(0.999) == 0.0);
    CHECK(g.as_function()(3.0) == 1.0);
}

TEST_CASE("bi-continuity axioms")
{
    const SeminormSpec p(CompactWindow(-1.0, 1.0), 201);
    const auto ones = check_bicontinuity_axioms(BoundedFunction::constant(1.0), 1.0, p);
    CHECK(ones.ok());
    for (const auto& [t, v] : ones.continuity_table)
        CHECK(v == 0.0);

    const auto r = check_bicontinuity_axioms(h_function(), 1.0, p);
    CHECK(r.ok());
    for (const auto& [t, v] : r.continuity_table)
        CHECK(v <= t + 1e-15); // |h'| <= 1
    CHECK(r.continuity_table.back().second < 1e-3);
    CHECK(r.equicontinuity_table.back().sup_over_t == 0.0);
    CHECK_THROWS_AS(check_bicontinuity_axioms(h_function(), 0.0, p), std::invalid_argument);
}
