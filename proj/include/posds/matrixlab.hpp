#pragma once

// Finite-dimensional operator-space example: F = l^inf(n), E = l^1(m),
// operators S in L(E, F) are n x m matrices, the implemented semigroup is
// U(t) S = e^{tA} S and the perturbation is K S = B S. In finite dimension
// the extrapolation layer is the identity (X_{-1} = X).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace posds::mat {

inline constexpr int max_dim = 16;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, max_dim, max_dim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, max_dim, 1>;

inline constexpr const char* metzler_condition = "Metzler generator (off-diagonal entries >= 0)";
inline constexpr const char* perturbation_positivity_condition = "positive perturbation B >= 0";
inline constexpr const char* resolvent_positivity_condition = "resolvent positivity (lambda I - A)^{-1} >= 0";
inline constexpr const char* matrix_smallness_condition = "smallness ||(lambda I - A)^{-1} B|| < 1";

inline bool is_metzler(const Matrix& a, double tol = 0.0)
{
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && a(i, j) < -tol)
                return false;
    return true;
}

inline bool is_nonnegative(const Matrix& a, double tol = 0.0) { return a.size() == 0 || a.minCoeff() >= -tol; }

/// Induced l^inf norm: max absolute row sum.
inline double inf_norm(const Matrix& a) { return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff(); }

inline double max_entry(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// --- matrix exponential ---------------------------------------------------

/// Scaling and squaring with the degree-13 diagonal Pade approximant.
inline Matrix expm(const Matrix& a, double t = 1.0)
{
    if (!(t >= 0.0))
        throw std::invalid_argument("expm: t must be nonnegative");
    const Eigen::Index n = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("expm: matrix must be square");
    Matrix x = t * a;
    if (x.isZero(0.0))
        return Matrix::Identity(n, n);
    const Matrix id = Matrix::Identity(n, n);
    if (n == 0)
        return x;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13)
        s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    x /= std::ldexp(1.0, s);

    const Matrix x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
    const Matrix u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < s; ++k)
        r = r * r;
    return r;
}

// --- spectral quantities --------------------------------------------------

struct SpectralRadius {
    double value = 0.0;
    double gelfand_estimate = 0.0; // ||M^64||^{1/64}
    std::size_t iterations = 0;
};

/// Power iteration on |M| with Collatz-Wielandt stopping (relative gap
/// 1e-10). Exact for nonnegative M; an upper bound for r(M) otherwise.
inline SpectralRadius spectral_radius(const Matrix& m, std::size_t max_iterations = 100000)
{
    const Eigen::Index n = m.rows();
    if (m.cols() != n)
        throw std::invalid_argument("spectral_radius: matrix must be square");
    SpectralRadius r;
    if (n == 0)
        return r;

    Matrix p = m;
    for (int k = 0; k < 6; ++k)
        p = p * p; // M^64
    r.gelfand_estimate = std::pow(inf_norm(p), 1.0 / 64.0);

    const Matrix abs_m = m.cwiseAbs();
    // Shift by the identity after a while: |M| + I is primitive whenever |M|
    // is irreducible, which removes oscillation from periodic matrices.
    const std::size_t shift_after = 2000;
    Vector v = Vector::Ones(n);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        const double shift = it > shift_after ? 1.0 : 0.0;
        const Vector w = abs_m * v + shift * v;
        r.iterations = it;
        if (w.isZero(0.0))
            return r; // |M| v = 0 along a nonnegative orbit: nilpotent part only
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        bool bounded = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (v(i) > 0.0) {
                const double q = w(i) / v(i);
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            } else if (w(i) > 0.0) {
                bounded = false;
            }
        }
        v = w / w.maxCoeff();
        if (bounded && hi - lo <= 1e-10 * hi) {
            r.value = std::max(0.0, 0.5 * (lo + hi) - shift);
            return r;
        }
    }
    throw std::runtime_error("spectral_radius: power iteration did not converge after " +
                             std::to_string(max_iterations) + " iterations");
}

/// s(A) for a Metzler matrix: shift by the most negative diagonal entry
/// (Gershgorin) so A + cI >= 0, then s(A) = r(A + cI) - c.
inline double spectral_abscissa_metzler(const Matrix& a)
{
    if (!is_metzler(a))
        throw HypothesisViolation(metzler_condition, "spectral_abscissa_metzler needs a Metzler matrix");
    const Eigen::Index n = a.rows();
    const double c = std::max(0.0, -a.diagonal().minCoeff());
    const Matrix shifted = a + c * Matrix::Identity(n, n);
    return spectral_radius(shifted).value - c;
}

inline Matrix resolvent(const Matrix& a, double lambda)
{
    const Eigen::Index n = a.rows();
    auto lu = (lambda * Matrix::Identity(n, n) - a).fullPivLu();
    if (!lu.isInvertible())
        throw std::domain_error("lambda lies in the spectrum");
    return lu.inverse();
}

// --- positive generation --------------------------------------------------

struct GenerationCheck {
    bool metzler = false;
    bool all_nonnegative = false;
    double min_entry = 0.0;
    double first_negative_time = -1.0;

    bool consistent() const noexcept { return metzler == all_nonnegative; }
};

/// e^{tA} >= -1e-12 on the grid, compared against the Metzler property.
inline GenerationCheck check_positive_generation(const Matrix& a, const std::vector<double>& t_grid)
{
    GenerationCheck r;
    r.metzler = is_metzler(a);
    r.all_nonnegative = true;
    r.min_entry = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        const double m = expm(a, t).minCoeff();
        r.min_entry = std::min(r.min_entry, m);
        if (m < -1e-12 && r.all_nonnegative) {
            r.all_nonnegative = false;
            r.first_negative_time = t;
        }
    }
    return r;
}

inline std::vector<double> positivity_time_grid()
{
    std::vector<double> g;
    for (int k = 20; k >= 0; --k)
        g.push_back(std::ldexp(1.0, -k));
    g.push_back(2.0);
    return g;
}

// --- operator space -------------------------------------------------------

/// ||S|| for S : l^1(m) -> l^inf(n) is the largest |S_ij|.
inline double operator_norm(const Matrix& s) { return max_entry(s); }

/// p_x(S) = ||S x||_inf.
inline double seminorm_px(const Matrix& s, const Vector& x) { return x.size() == 0 ? 0.0 : (s * x).cwiseAbs().maxCoeff(); }

struct OperatorSpaceNorms {
    double norm = 0.0;
    std::vector<double> seminorms;
};

inline OperatorSpaceNorms operator_space_norms(const Matrix& s, const std::vector<Vector>& xs)
{
    OperatorSpaceNorms r;
    r.norm = operator_norm(s);
    for (const auto& x : xs)
        r.seminorms.push_back(seminorm_px(s, x));
    return r;
}

inline Matrix lattice_sup(const Matrix& s, const Matrix& r) { return s.cwiseMax(r); }

struct MatrixBiAmCheck {
    bool precondition_met = true;
    bool seminorm_identity = false;
    bool norm_identity = false;
    double worst_gap = 0.0;
};

/// For S, R >= 0: max{p_x(S), p_x(R)} = p_x(S v R) for coordinate vectors x
/// and max{||S||, ||R||} = ||S v R||.
inline MatrixBiAmCheck check_bi_am(const Matrix& s, const Matrix& r, double tol = 0.0)
{
    MatrixBiAmCheck c;
    if (!is_nonnegative(s) || !is_nonnegative(r)) {
        c.precondition_met = false;
        return c;
    }
    const Matrix sr = lattice_sup(s, r);
    c.seminorm_identity = true;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        for (double scale : {1.0, 0.5, 3.0}) {
            Vector x = Vector::Zero(s.cols());
            x(j) = scale;
            const double gap =
                std::abs(std::max(seminorm_px(s, x), seminorm_px(r, x)) - seminorm_px(sr, x));
            c.worst_gap = std::max(c.worst_gap, gap);
            if (gap > tol)
                c.seminorm_identity = false;
        }
    }
    const double ngap = std::abs(std::max(operator_norm(s), operator_norm(r)) - operator_norm(sr));
    c.worst_gap = std::max(c.worst_gap, ngap);
    c.norm_identity = ngap <= tol;
    return c;
}

// --- systems --------------------------------------------------------------

struct MatrixSystem {
    Matrix A;
    Matrix B;
    double lambda = 0.0;
    Matrix S0;

    Eigen::Index n() const noexcept { return A.rows(); }
    Eigen::Index m() const noexcept { return S0.cols(); }

    /// lambda = s(A) + 1.
    static double default_lambda(const Matrix& a) { return spectral_abscissa_metzler(a) + 1.0; }

    void validate() const
    {
        if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols() || S0.rows() != A.rows())
            throw std::invalid_argument("matrix system dimensions do not match");
        if (A.rows() > max_dim || S0.cols() > max_dim)
            throw std::invalid_argument("matrix system dimension exceeds " + std::to_string(max_dim));
        if (!is_metzler(A))
            throw HypothesisViolation(metzler_condition, "A has a negative off-diagonal entry");
        if (!is_nonnegative(B))
            throw HypothesisViolation(perturbation_positivity_condition, "B has a negative entry");
        if (!(lambda > spectral_abscissa_metzler(A)))
            throw HypothesisViolation(resolvent_positivity_condition, "lambda must exceed s(A)");
        if (!is_nonnegative(resolvent(A, lambda), 1e-14))
            throw HypothesisViolation(resolvent_positivity_condition, "resolvent has a negative entry");
    }

    double smallness() const { return inf_norm(resolvent(A, lambda) * B); }
};

// --- Dyson-Phillips on the operator space ---------------------------------

inline constexpr std::size_t panels_per_unit_time = 2048;

struct Trajectory {
    double h = 0.0;
    std::vector<Matrix> values; // at s_k = k h

    const Matrix& at_time(double t) const
    {
        const auto k = static_cast<std::size_t>(std::llround(t / h));
        if (k >= values.size() || std::abs(static_cast<double>(k) * h - t) > 1e-9 * std::max(1.0, t))
            throw std::out_of_range("time is not a node of the trajectory grid");
        return values[k];
    }
};

namespace detail {

inline std::size_t even_steps(double t_max)
{
    auto m = static_cast<std::size_t>(std::ceil(t_max * static_cast<double>(panels_per_unit_time) - 1e-9));
    if (m < 2)
        m = 2;
    return m + (m % 2);
}

/// Sum of the first N+1 Dyson-Phillips terms on the grid s_k = k h, k = 0..M
/// (M even), given the base propagators P(h), P(2h) of the unperturbed
/// semigroup. Even nodes use Simpson over [s_{2k}, s_{2k+2}]; odd nodes
/// integrate the quadratic through s_{2k-1}, s_{2k}, s_{2k+1} over the last
/// panel (node 1 uses s_0, s_1, s_2 and the inverse propagator).
inline std::vector<Matrix> dyson_phillips_grid(const Matrix& p1, const Matrix& p2, const Matrix& b, const Matrix& s0,
                                               double h, std::size_t steps, std::size_t terms)
{
    const Matrix p1_inv = p1.partialPivLu().inverse();
    std::vector<Matrix> term(steps + 1), next(steps + 1), total(steps + 1);

    term[0] = s0;
    for (std::size_t k = 1; k <= steps; ++k)
        term[k] = (k % 2 == 0) ? Matrix(p2 * term[k - 2]) : Matrix(p1 * term[k - 1]);
    total = term;

    const Matrix zero = Matrix::Zero(s0.rows(), s0.cols());
    std::vector<Matrix> y(steps + 1), z1(steps + 1), z2(steps + 1);
    for (std::size_t n = 1; n <= terms; ++n) {
        for (std::size_t k = 0; k <= steps; ++k) {
            y[k] = b * term[k];
            z1[k] = p1 * y[k];
            z2[k] = p2 * y[k];
        }
        next[0] = zero;
        for (std::size_t k = 1; k <= steps; ++k) {
            if (k % 2 == 0) {
                next[k] = p2 * next[k - 2] + (h / 3.0) * (z2[k - 2] + 4.0 * z1[k - 1] + y[k]);
            } else if (k == 1) {
                next[k] = p1 * next[0] + h * ((5.0 / 12.0) * z1[0] + (8.0 / 12.0) * y[1] -
                                              (1.0 / 12.0) * (p1_inv * y[2]));
            } else {
                next[k] = p1 * next[k - 1] +
                          h * (-(1.0 / 12.0) * z2[k - 2] + (8.0 / 12.0) * z1[k - 1] + (5.0 / 12.0) * y[k]);
            }
        }
        std::swap(term, next);
        for (std::size_t k = 0; k <= steps; ++k)
            total[k] += term[k];
    }
    return total;
}

} // namespace detail

struct DPOptions {
    std::size_t terms = 30;
    bool check_smallness = true;
};

/// sum_n V_n on [0, t_max], V_0(t) = e^{tA} S0,
/// V_n(t) = int_0^t e^{(t-s)A} B V_{n-1}(s) ds.
inline Trajectory dp_implemented_trajectory(const MatrixSystem& sys, double t_max, const DPOptions& opt = {})
{
    sys.validate();
    if (opt.check_smallness) {
        const double k = sys.smallness();
        if (!(k < 1.0))
            throw HypothesisViolation(matrix_smallness_condition,
                                      "||(lambda I - A)^{-1} B|| = " + std::to_string(k) +
                                          " >= 1; use staged_corollary when r((lambda I - A)^{-1} B) < 1");
    }
    const std::size_t steps = detail::even_steps(t_max);
    const double h = t_max / static_cast<double>(steps);
    Trajectory tr;
    tr.h = h;
    tr.values = detail::dyson_phillips_grid(expm(sys.A, h), expm(sys.A, 2.0 * h), sys.B, sys.S0, h, steps, opt.terms);
    return tr;
}

inline Matrix dp_implemented(const MatrixSystem& sys, double t, const DPOptions& opt = {})
{
    return dp_implemented_trajectory(sys, t, opt).values.back();
}

// --- staged corollary -----------------------------------------------------

struct StageCertificate {
    int stage = 0;
    double norm = 0.0;          // ||(lambda - A - (j-1)/n B)^{-1} B/n||
    bool norm_ok = false;
    bool monotone_chain = false; // R(A) <= R(A + (j/n) B) <= R(A + B) entrywise
};

struct StagedResult {
    Matrix value;
    double spectral_radius = 0.0;  // r((lambda I - A)^{-1} B)
    double abscissa_perturbed = 0.0; // s(A + B)
    std::vector<StageCertificate> stages;
    std::optional<int> failing_stage;

    bool ok() const noexcept { return !failing_stage.has_value(); }
};

/// Splits B into n_stages equal parts, certifies each stage against the
/// norm smallness condition, and composes the Dyson-Phillips series stage by
/// stage: stage j perturbs the semigroup built in stage j-1 by B/n.
inline StagedResult staged_corollary(const MatrixSystem& sys, int n_stages, double t)
{
    if (n_stages < 1)
        throw std::invalid_argument("staged_corollary needs at least one stage");
    const Eigen::Index n = sys.n();
    // Dimensions and positivity; smallness is replaced by the stage certificates.
    sys.validate();

    StagedResult res;
    res.spectral_radius = spectral_radius(resolvent(sys.A, sys.lambda) * sys.B).value;
    if (!(res.spectral_radius < 1.0))
        throw HypothesisViolation("spectral radius condition r((lambda I - A)^{-1} B) < 1",
                                  "r = " + std::to_string(res.spectral_radius));
    res.abscissa_perturbed = spectral_abscissa_metzler(sys.A + sys.B);
    if (!(sys.lambda > res.abscissa_perturbed))
        throw HypothesisViolation("lambda > s(A + B)", "s(A + B) = " + std::to_string(res.abscissa_perturbed));

    const double nd = static_cast<double>(n_stages);
    const Matrix b_part = sys.B / nd;
    const Matrix r_base = resolvent(sys.A, sys.lambda);
    const Matrix r_full = resolvent(sys.A + sys.B, sys.lambda);
    for (int j = 1; j <= n_stages; ++j) {
        StageCertificate c;
        c.stage = j;
        c.norm = inf_norm(resolvent(sys.A + (j - 1) / nd * sys.B, sys.lambda) * b_part);
        c.norm_ok = c.norm < 1.0;
        const Matrix r_mid = resolvent(sys.A + (j / nd) * sys.B, sys.lambda);
        const double slack = 1e-12 * std::max(1.0, max_entry(r_full));
        c.monotone_chain = (r_mid - r_base).minCoeff() >= -slack && (r_full - r_mid).minCoeff() >= -slack;
        if ((!c.norm_ok || !c.monotone_chain) && !res.failing_stage)
            res.failing_stage = j;
        res.stages.push_back(c);
    }
    if (res.failing_stage)
        return res;

    const std::size_t steps = detail::even_steps(t);
    const double h = t / static_cast<double>(steps);
    const Matrix id = Matrix::Identity(n, n);
    Matrix p1 = expm(sys.A, h), p2 = expm(sys.A, 2.0 * h);
    std::vector<Matrix> propagator;
    for (int j = 1; j <= n_stages; ++j) {
        propagator = detail::dyson_phillips_grid(p1, p2, b_part, id, h, steps, DPOptions{}.terms);
        p1 = propagator[1];
        p2 = propagator[2];
    }
    res.value = propagator.back() * sys.S0;
    return res;
}

} // namespace posds::mat
