// The nilpotent system A = -I, B = [[0,4],[0,0]] at lambda = 1: the norm
// condition fails (||R(1,A) B|| = 2) but r(R(1,A) B) = 0, so the
// perturbation can be added in four pieces of size B/4.

#include <cmath>
#include <cstdio>
#include <iostream>

#include <posds/matrixlab.hpp>

int main()
{
    using namespace posds;
    using namespace posds::mat;

    Matrix a = -Matrix::Identity(2, 2), b = Matrix::Zero(2, 2);
    b(0, 1) = 4.0;
    const MatrixSystem sys{a, b, 1.0, Matrix::Identity(2, 2)};
    std::printf("||R(1,A)B|| = %.3f\n", sys.smallness());

    try {
        dp_implemented(sys, 1.0);
    } catch (const HypothesisViolation& e) {
        std::printf("direct series refused: %s\n", e.what());
    }

    for (double t : {0.5, 1.0, 2.0}) {
        const auto r = staged_corollary(sys, 4, t);
        Matrix exact(2, 2);
        exact << 1.0, 4.0 * t, 0.0, 1.0;
        exact *= std::exp(-t);
        std::printf("\nt = %.1f  stages ok: %s  r = %g\n", t, r.ok() ? "yes" : "no", r.spectral_radius);
        for (const auto& s : r.stages)
            std::printf("  stage %d  norm %.3f  chain %s\n", s.stage, s.norm, s.monotone_chain ? "ok" : "broken");
        std::cout << r.value << "\n  error " << max_entry(r.value - exact) << "\n";
    }
}
