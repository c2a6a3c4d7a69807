// Transport u_t = u_x perturbed by a rank-one source switched on at x >= 1:
//   w_t = w_x + (integral of w d(mu)) * 1[x >= 1].
// Prints the series solution next to the Volterra reference at a few points.

#include <cmath>
#include <cstdio>

#include <posds/dsperturb.hpp>

int main()
{
    using namespace posds;
    const DSPerturbation pert(RegularMeasure::dirac(0.0, 0.4) + RegularMeasure::uniform(0.0, 1.0, 0.1));
    const auto u0 = BoundedFunction::analytic([](double x) { return 1.0 / (1.0 + x * x); }, 1.0);

    std::printf("K = |mu|(R) ||h|| = %.3f\n", pert.smallness_constant());
    const auto sol = dyson_phillips(pert, u0, {2.0, 20, 1e-3});
    const auto ref = volterra_oracle(pert, u0, 2.0, 1e-3);

    std::printf("\nterm sizes sup|phi_n| and ratios:\n");
    const auto& st = sol.state();
    for (std::size_t n = 0; n < st.term_sup.size(); n += 4)
        std::printf("  n=%2zu  %.3e  %s\n", n, st.term_sup[n],
                    n ? std::to_string(st.ratios[n - 1]).c_str() : "");
    std::printf("  tail estimate %.2e\n\n", st.tail_estimate);

    std::printf("%6s %6s %14s %14s %10s\n", "t", "x", "series", "volterra", "diff");
    for (double t : {0.5, 1.0, 2.0})
        for (double x : {-2.0, 0.0, 0.5, 1.0, 3.0}) {
            const double a = sol.value(t, x), b = ref.value(t, x);
            std::printf("%6.2f %6.2f %14.10f %14.10f %10.2e\n", t, x, a, b, a - b);
        }
}
