#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gramlab/errors.hpp"

namespace gramlab {

// ---------------------------------------------------------------------------
// precision handling

enum class Precision { f32, f64 };

inline double machine_eps(Precision p) {
    return p == Precision::f32 ? static_cast<double>(std::numeric_limits<float>::epsilon())
                               : std::numeric_limits<double>::epsilon();
}

inline int mantissa_bits(Precision p) { return p == Precision::f32 ? 23 : 52; }

inline std::string precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& s); // throws ConfigError

// ---------------------------------------------------------------------------
// quadrature

struct QuadratureRule {
    enum class Kind { gauss_legendre, trapezoid };
    Kind kind = Kind::gauss_legendre;
    int points = 64;
    double lo = -1.0;
    double hi = 1.0;

    static QuadratureRule gauss(int points, double lo = -1.0, double hi = 1.0) {
        return QuadratureRule{Kind::gauss_legendre, points, lo, hi};
    }
    static QuadratureRule trapezoid(int points, double lo = -1.0, double hi = 1.0) {
        return QuadratureRule{Kind::trapezoid, points, lo, hi};
    }
};

// Nodes and weights of the p-point Gauss-Legendre rule on [-1,1].
// Computed once per p (Newton iteration on P_p) and cached.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_nodes(int p);

namespace detail {
void check_rule(const QuadratureRule& r);
}

// Single-panel quadrature of f over [rule.lo, rule.hi].  The accumulation is
// done in the scalar type T so that an f32 pipeline really performs f32 sums.
template <class T, class F>
T integrate_t(F&& f, const QuadratureRule& rule) {
    detail::check_rule(rule);
    const T lo = static_cast<T>(rule.lo), hi = static_cast<T>(rule.hi);
    if (rule.kind == QuadratureRule::Kind::trapezoid) {
        const int m = rule.points;
        const T h = (hi - lo) / static_cast<T>(m - 1);
        T acc = (f(lo) + f(hi)) / static_cast<T>(2);
        for (int i = 1; i + 1 < m; ++i) acc += f(static_cast<T>(lo + h * static_cast<T>(i)));
        return acc * h;
    }
    const auto& [xs, ws] = gauss_legendre_nodes(rule.points);
    const T mid = (lo + hi) / static_cast<T>(2);
    const T half = (hi - lo) / static_cast<T>(2);
    T acc = static_cast<T>(0);
    for (int i = 0; i < rule.points; ++i)
        acc += static_cast<T>(ws[i]) * f(static_cast<T>(mid + half * static_cast<T>(xs[i])));
    return acc * half;
}

inline double integrate(const std::function<double(double)>& f, const QuadratureRule& rule) {
    return integrate_t<double>(f, rule);
}

// Composite Gauss-Legendre over [lo,hi] split at the given interior
// breakpoints (values outside (lo,hi) are ignored, duplicates merged).
double integrate_composite(const std::function<double(double)>& f, double lo, double hi,
                           std::vector<double> splits, int points_per_piece);

// Composite quadrature grid: all nodes and weights laid out piece by piece,
// so integrands sharing the same breakpoints can reuse one evaluation pass.
struct CompositeGrid {
    std::vector<double> x, w;
    std::vector<std::size_t> piece_start; // first node index of each piece
    std::vector<double> breaks;           // piece boundaries incl. lo and hi
};
CompositeGrid composite_grid(double lo, double hi, std::vector<double> splits,
                             int points_per_piece);

// ---------------------------------------------------------------------------
// root bracketing

// Plain bisection: requires a sign change (or a zero endpoint); throws
// BracketError otherwise.  Deterministic, tolerance on interval width.
double bisect(const std::function<double(double)>& g, double lo, double hi,
              double tol = 1e-14, int max_iter = 200);

// ---------------------------------------------------------------------------
// dense symmetric eigenproblems

inline constexpr int kMaxDenseOrder = 4096;

struct EigResult {
    Eigen::VectorXd values;  // descending
    Eigen::MatrixXd vectors; // column k pairs with values[k]; empty if not requested
};

// Symmetric eigendecomposition.  The matrix must be square, symmetric up to
// a tolerance scaled with the precision mode, and of order <= 4096.
// In f32 mode the factorization runs in single precision end to end.
EigResult sym_eig(const Eigen::MatrixXd& a, bool want_vectors, Precision prec = Precision::f64);

struct PinvSolution {
    Eigen::VectorXd x;
    int rank = 0;
    bool rank_warning = false; // every singular value fell below the cutoff
    double sigma_max = 0.0;
    double cutoff = 0.0;
};

// Least squares via truncated SVD: singular values below eta * sigma_max are
// discarded.  eta == 0 selects the machine default N * eps * sigma_max with
// eps taken from the active precision mode.
PinvSolution svd_pinv_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& y, double eta,
                            Precision prec = Precision::f64);

// ---------------------------------------------------------------------------
// log-log regression

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0; // in log10 space
    double r2 = 0.0;
    int count = 0;
};

// Ordinary least squares of log10(y) against log10(x) over the inclusive
// index window [i_lo, i_hi].  All windowed values must be positive.
SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                          int i_lo, int i_hi);

// ---------------------------------------------------------------------------
// deterministic random streams

// Seeded mt19937_64 wrapper.  The (seed, stream_id) pair fully determines
// the sequence on every platform: the engine output is pinned by the
// standard, and the distributions are implemented by hand here because
// std:: distribution objects are implementation defined.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    double uniform01();                       // [0, 1)
    double uniform(double a, double b);       // [a, b)
    double normal(double mean = 0.0, double sd = 1.0);
    int uniform_int(int lo, int hi);          // inclusive range
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    RngStream substream(std::uint64_t id) const;

private:
    std::uint64_t seed_ = 0, stream_id_ = 0;
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// threading

// Static partition of [0, n) over hardware threads (overridable through the
// GRAMLAB_THREADS environment variable).  fn(i) must be safe to run
// concurrently for distinct i; chunk boundaries are independent of the
// thread count so results never depend on the machine.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace gramlab
