#pragma once

// Rashomon-set machinery: the constant kappa = sup over hyperplane slices of
// the potential g solving the Poisson problem (Laplacian g = f), the Hoeffding
// probability bound built from it, and a Monte Carlo estimate of the measure
// of networks h with ||h - f|| <= eps ||f|| under random parameters.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gramlab/activations.hpp"
#include "gramlab/approx.hpp"
#include "gramlab/numerics.hpp"

namespace gramlab {

// Targets with an analytically or cheaply solvable potential.  1D targets are
// arbitrary; in d >= 2 the domain is the unit ball and only ridge sinusoids
// sin(nu pi w0.x) and even radial polynomials sum_j c_j r^{2j} are supported.
struct RashomonTarget {
    enum class Kind { one_d, ridge_sine, radial_poly };
    Kind kind = Kind::one_d;
    int d = 1;
    TargetFunction f1d = TargetFunction::sine(1);
    double nu = 1.0;             // ridge frequency
    Eigen::VectorXd w0;          // unit ridge direction
    std::vector<double> coeffs;  // radial polynomial in r^2

    static RashomonTarget one_d(TargetFunction f);
    static RashomonTarget ridge_sine(double nu, Eigen::VectorXd w0);
    static RashomonTarget radial_poly(std::vector<double> coeffs, int d);

    double eval1(double x) const;                 // 1D only
    double eval(const Eigen::VectorXd& x) const;  // any d
    std::string describe() const;
};

// Mean-zero sub-Gaussian outer weights with Orlicz psi_2 norm theta; switches
// the Hoeffding bound to its two-sided form with absolute constant C.
struct SubGaussian {
    double theta = 1.0;
    double C = 1.0;
};

struct RashomonConfig {
    RashomonTarget target;
    int n = 100;          // width
    double A = 1.0;       // outer weights U(-A, A) unless subgaussian is set
    std::optional<SubGaussian> subgaussian;
    double eps = 0.5;     // relative L2 tolerance
    long long samples = 10000;
    std::uint64_t seed = 0;
    Activation act = Activation::relu();
    int quad_points = 2048;  // 1D L2 quadrature order
    int mc_points = 100000;  // d-D L2 point cloud size

    void validate() const;  // ConfigError on violation
};

struct RashomonEstimate {
    std::string target;
    int n = 0;
    double A = 0.0;
    double eps = 0.0;
    double kappa = 0.0;
    double f_norm = 0.0;
    double p_hat = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double hoeffding_bound = 0.0;
    long long samples = 0;
    std::uint64_t seed = 0;
};

// g'' = f on (-1,1), g(+-1) = 0, by double quadrature over per-interval
// Gauss-Legendre moments with compensated cumulative sums.  residual is the
// worst second-difference defect |g_{i+1} - 2 g_i + g_{i-1} - K_i| / h^2
// against the tent-kernel moments K_i = int (h - |s - x_i|) f(s) ds, i.e. the
// stencil form of the ODE.
struct PoissonSolve1D {
    std::vector<double> x, g;
    double residual = 0.0;
};
PoissonSolve1D poisson_solve_1d(const RashomonTarget& f, int grid_points = 2001);

// kappa = sup over hyperplanes {w.x = b} of |int_slice g dH|.  1D: sup |g| on
// the solve grid.  d-D: analytic g for the supported families, slices scanned
// on a 64 x 64 (direction, offset) grid with Gauss-Legendre slice quadrature.
double kappa(const RashomonTarget& f, int grid_points = 2001);

// L2(D) norm of the target (D = (-1,1) or the unit ball).
double target_l2_norm(const RashomonTarget& f, int quad_points = 2048);

// Probability that a random network lands in the Rashomon set: the Thm-style
// bound exp(-n (1-eps)^2 ||f||^4 / (2 A^2 kappa^2)), or its two-sided
// sub-Gaussian variant 2 exp(-C n (1-eps)^2 ||f||^4 / (4 kappa^2 l^2 theta^2))
// with l = diam(D) = 2 when cfg.subgaussian is set.  Values are clamped to 1;
// eps >= 1 yields the vacuous bound 1.
double hoeffding_bound(const RashomonConfig& cfg, double kappa_value, double f_norm);

// Least-squares affine fit f ~ v.x + c in L2(D); the Rashomon analysis is
// invariant to this component, so mc_measure fits it per draw instead of
// drawing it.
struct AffineFit {
    Eigen::VectorXd v;
    double c = 0.0;
    double residual_norm = 0.0;
};
AffineFit affinity_correction(const RashomonTarget& f, int quad_points = 2048);

// Fraction of draws a ~ U(-A,A) (or sub-Gaussian), w uniform on the sphere,
// b ~ U(-1,1), with per-draw optimal affine part, satisfying
// ||h - f||_L2 <= eps ||f||_L2.  Draw j consumes RngStream(seed, j); the
// reduction is a hit count, so the result is independent of thread order.
RashomonEstimate mc_measure(const RashomonConfig& cfg);

// 95% Wilson score interval for hits out of samples.
std::pair<double, double> wilson_interval(long long hits, long long samples,
                                          double z = 1.959963984540054);

// Columns: target, n, A, eps, kappa, p_hat, wilson_lo, wilson_hi, bound,
// samples, seed.
void export_estimates_csv(const std::string& path,
                          const std::vector<RashomonEstimate>& rows);

}  // namespace gramlab
