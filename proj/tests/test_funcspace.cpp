#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <posds/funcspace.hpp>
#include <posds/transgroup.hpp>

#include "oracles.hpp"

using namespace posds;
using Catch::Approx;

namespace {

BoundedFunction identity_on(double bound)
{
    return BoundedFunction::analytic([](double x) { return x; }, bound);
}

// Random nonnegative piecewise-linear function on [-3, 3].
BoundedFunction random_grid(std::mt19937_64& rng, double lo = 0.0, double hi = 2.0)
{
    std::uniform_real_distribution<double> val(lo, hi);
    std::vector<double> nodes, values;
    for (int i = 0; i <= 12; ++i) {
        nodes.push_back(-3.0 + 0.5 * i);
        values.push_back(val(rng));
    }
    return BoundedFunction::grid(nodes, values);
}

} // namespace

TEST_CASE("grid functions interpolate linearly and continue constantly")
{
    const auto f = BoundedFunction::grid({0.0, 1.0, 3.0}, {1.0, 3.0, -1.0});
    CHECK(f(-10.0) == 1.0);
    CHECK(f(0.5) == Approx(2.0));
    CHECK(f(2.0) == Approx(1.0));
    CHECK(f(50.0) == -1.0);
    CHECK(f.sup_bound() == 3.0);
    CHECK(f.kind() == FunctionKind::grid);
    CHECK_THROWS_AS(BoundedFunction::grid({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(BoundedFunction::grid({0.0, 1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("sup bound dominates every sampled value")
{
    std::mt19937_64 rng(11);
    const SeminormSpec wide(CompactWindow(-10.0, 10.0), 4001);
    for (int i = 0; i < 20; ++i) {
        const auto f = random_grid(rng, -3.0, 3.0);
        CHECK(seminorm_pK(f, wide) <= f.sup_bound());
        const auto g = f.shifted(0.7).scaled(-2.0);
        CHECK(seminorm_pK(g, wide) <= g.sup_bound() + 1e-15);
    }
    CHECK(seminorm_pK(h_function(), wide) <= h_function().sup_bound());
}

TEST_CASE("compact-open seminorm examples")
{
    const SeminormSpec k(CompactWindow(-2.0, 2.0), 401);
    CHECK(seminorm_pK(BoundedFunction::constant(0.0), k) == 0.0);
    CHECK(seminorm_pK(identity_on(1e9), k) == 2.0);
    // h(x) = min(e^{x-1}, 1) on [-2,2]: e^{-3} at the left end, 1 on [1,2]
    CHECK(seminorm_pK(h_function(), k) == 1.0);
    CHECK(oracle::dense_sup([](double x) { return h_function()(x); }, -2.0, 2.0) == Approx(1.0));
    CHECK(h_function()(-2.0) == Approx(std::exp(-3.0)));
    CHECK_THROWS_AS(SeminormSpec(CompactWindow(0.0, 1.0), 1), std::invalid_argument);
    CHECK_THROWS_AS(CompactWindow(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("seminorm is exact for grid functions whose nodes are sampled")
{
    const auto f = BoundedFunction::grid({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.2, -1.7, 0.4, 1.1, 0.0});
    CHECK(seminorm_pK(f, SeminormSpec(CompactWindow(-1.0, 1.0), 5)) == 1.7);
}

TEST_CASE("mixed seminorm")
{
    const auto one = BoundedFunction::constant(1.0);
    CHECK(mixed_seminorm(one, MixedSeminormSpec{}) == 0.0);
    const SeminormSpec k(CompactWindow(-1.0, 3.0), 101);
    CHECK(mixed_seminorm(h_function(), MixedSeminormSpec({{1.0, k}})) == seminorm_pK(h_function(), k));
    const MixedSeminormSpec two({{0.5, SeminormSpec(CompactWindow(0.0, 1.0), 11)},
                                 {0.25, SeminormSpec(CompactWindow(0.0, 2.0), 11)}});
    CHECK(mixed_seminorm(one, two) == 0.5);
    CHECK_THROWS_AS(MixedSeminormSpec({{-0.1, k}}), std::invalid_argument);
}

TEST_CASE("lattice operations")
{
    const auto f = h_function();
    const auto ff = lattice_sup(f, f);
    for (double x : {-3.0, 0.0, 0.7, 1.0, 4.0})
        CHECK(ff(x) == f(x));

    const auto id = identity_on(5.0);
    CHECK(pos_part(id)(-1.0) == 0.0);
    CHECK(pos_part(id)(1.0) == 1.0);
    CHECK(neg_part(id)(-1.0) == 1.0);
    CHECK(neg_part(id)(1.0) == 0.0);

    const auto s = BoundedFunction::analytic([](double x) { return std::sin(x); }, 1.0);
    CHECK(abs_val(s)(3.0 * std::numbers::pi / 2.0) == Approx(1.0));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const auto a = random_grid(rng, -2.0, 1.0), b = random_grid(rng, -1.0, 3.0);
        const auto up = lattice_sup(a, b), down = lattice_inf(a, b);
        CHECK(up.sup_bound() <= std::max(a.sup_bound(), b.sup_bound()));
        CHECK(down.sup_bound() <= std::max(a.sup_bound(), b.sup_bound()));
        for (double x = -4.0; x <= 4.0; x += 0.37) {
            CHECK(up(x) + down(x) == Approx(a(x) + b(x)));
            CHECK(pos_part(a)(x) - neg_part(a)(x) == Approx(a(x)));
            CHECK(abs_val(a)(x) == Approx(pos_part(a)(x) + neg_part(a)(x)));
        }
    }
}

TEST_CASE("seminorm triangle inequality and homogeneity")
{
    std::mt19937_64 rng(5);
    const SeminormSpec k(CompactWindow(-3.0, 3.0), 601);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_grid(rng, -2.0, 2.0), b = random_grid(rng, -2.0, 2.0);
        CHECK(seminorm_pK(a + b, k) <= seminorm_pK(a, k) + seminorm_pK(b, k) + 1e-14);
        CHECK(seminorm_pK(a.scaled(-3.5), k) == Approx(3.5 * seminorm_pK(a, k)).epsilon(1e-15));
    }
}

TEST_CASE("bi-AM identity")
{
    const SeminormSpec k(CompactWindow(0.0, 1.0), 101);
    const auto one = BoundedFunction::constant(1.0), two = BoundedFunction::constant(2.0);
    const auto c = check_bi_am(one, two, k);
    CHECK(c.holds());
    CHECK(c.norm_rhs == 2.0);
    CHECK(c.seminorm_rhs == 2.0);

    // ramp up and ramp down on [0,1]
    const auto up = BoundedFunction::grid({0.0, 1.0}, {0.0, 1.0});
    const auto down = BoundedFunction::grid({0.0, 1.0}, {1.0, 0.0});
    const auto r = check_bi_am(up, down, k);
    CHECK(r.holds());
    CHECK(r.seminorm_lhs == Approx(oracle::dense_sup([&](double x) { return std::max(up(x), down(x)); }, 0.0, 1.0)));

    const auto neg = BoundedFunction::grid({0.0, 1.0}, {-1.0, 1.0});
    const auto bad = check_bi_am(neg, one, k);
    CHECK_FALSE(bad.precondition_met);
    CHECK_FALSE(bad.holds());
}

TEST_CASE("bi-AM identity on random nonnegative pairs")
{
    std::mt19937_64 rng(2024);
    const SeminormSpec k(CompactWindow(-2.0, 2.5), 257);
    for (int i = 0; i < 100; ++i) {
        const auto f = random_grid(rng), g = random_grid(rng);
        const auto c = check_bi_am(f, g, k, 0.0);
        CHECK(c.holds());
    }
}

TEST_CASE("compatibility of the seminorms with the lattice")
{
    const SeminormSpec k(CompactWindow(-1.0, 1.0), 201);
    const auto g = h_function();
    CHECK(check_compatibility(BoundedFunction::constant(0.0), g, k).holds);
    CHECK(check_compatibility(g.scaled(0.5), g, k).holds);
    const auto bad = check_compatibility(g.scaled(2.0), g, k);
    CHECK_FALSE(bad.precondition_met);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> shrink(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto big = random_grid(rng, -2.0, 2.0);
        const double c1 = shrink(rng), c2 = shrink(rng);
        // |f| <= |g| pointwise: f = g * (piecewise factor in [-1, 1])
        const auto factor = BoundedFunction::grid({-1.0, 1.0}, {c1, c2});
        const auto small = BoundedFunction::analytic([big, factor](double x) { return big(x) * factor(x); },
                                                     big.sup_bound());
        const auto r = check_compatibility(small, big, k);
        CHECK(r.precondition_met);
        CHECK(r.holds);
    }
}
