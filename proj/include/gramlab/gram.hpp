#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gramlab/activations.hpp"
#include "gramlab/numerics.hpp"

namespace gramlab {

// ---------------------------------------------------------------------------
// bias grids

struct BiasGrid {
    enum class Scheme { equispaced, adaptive, iid, custom };
    Scheme scheme = Scheme::custom;
    std::vector<double> b; // sorted ascending, strictly (jitter applied on collision)
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(b.size()); }
    std::string describe() const;

    // b_i = -1 + 2 (i-1)/(n-1): endpoints included, matching the cumulative
    // characterization F(b_i) = (i-1)/(n-1) for uniform mass.
    static BiasGrid equispaced(int n);
    static BiasGrid iid_uniform(int n, std::uint64_t seed);
    // Rejection sampling against the envelope rho_max >= sup rho.
    static BiasGrid iid_density(int n, std::uint64_t seed,
                                const std::function<double(double)>& rho, double rho_max);
    static BiasGrid from_points(std::vector<double> pts, Scheme label = Scheme::custom);
};

// Grid whose cumulative share of integral |f'| mass is uniform:
// F(b_i) = (i-1)/(n-1) with F the normalized cumulative of |f'|.
// When fprime is absent, f' is taken by central differences.
BiasGrid make_adaptive_grid(const std::function<double(double)>& f, int n,
                            const QuadratureRule& quad);
BiasGrid make_adaptive_grid(const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime, int n,
                            const QuadratureRule& quad);

// Directions on the unit sphere paired with bias offsets, for kernels over
// the d-dimensional unit ball.
struct DirBiasGrid {
    Eigen::MatrixXd w; // n x d, unit rows
    std::vector<double> b;

    int n() const { return static_cast<int>(b.size()); }
    int dim() const { return static_cast<int>(w.cols()); }

    // Equispaced product of n_theta directions on S^1 and n_b biases in [-1,1].
    static DirBiasGrid product_2d(int n_theta, int n_b);
    static DirBiasGrid iid(int n, int d, std::uint64_t seed);
};

// ---------------------------------------------------------------------------
// kernels (1D closed forms)

// L2(D) inner product of z -> relu(z - x) and z -> relu(z - y), D = [-1,1].
template <class T>
T kernel_relu_1d_t(T x, T y) {
    const T ax = x < T(0) ? -x : x, ay = y < T(0) ? -y : y;
    if (ax > T(1) || ay > T(1)) throw DomainError("kernel_relu_1d: arguments must lie in [-1,1]");
    const T d = x - y < T(0) ? y - x : x - y;
    const T s = T(2) - x - y;
    return (s - d) * (s - d) * (s + T(2) * d) / T(24);
}
inline double kernel_relu_1d(double x, double y) { return kernel_relu_1d_t<double>(x, y); }

// Leaky variant: sigma_a(z) = z for z >= 0, a z otherwise.
template <class T>
T kernel_leaky_1d_t(T x, T y, T alpha) {
    const T d = x - y < T(0) ? y - x : x - y;
    return kernel_relu_1d_t<T>(x, y) + alpha * alpha * kernel_relu_1d_t<T>(-x, -y) -
           alpha * d * d * d / T(6);
}
double kernel_leaky_1d(double x, double y, double alpha); // ArgError on alpha outside (0,1)

// Mixed-sign blocks for bases {relu(z - x)} (sign +1) and {relu(x - z)}
// (sign -1), both indexed by the kink location.  A network unit
// relu(-z - b) corresponds to sign -1 with kink at -b.
template <class T>
T kernel_block_pm1_t(T x, T y, int sign_x, int sign_y) {
    if (sign_x > 0 && sign_y > 0) return kernel_relu_1d_t<T>(x, y);
    if (sign_x < 0 && sign_y < 0) return kernel_relu_1d_t<T>(-x, -y);
    // (+,-): overlap [x, y]; (-,+): overlap [y, x].
    const T g = sign_x > 0 ? y - x : x - y;
    if (g <= T(0)) return T(0);
    return g * g * g / T(6);
}
double kernel_block_pm1(double x, double y, int sign_x, int sign_y);

// Density-weighted kernel sqrt(rho(x)) K(x,y) sqrt(rho(y)).
double kernel_weighted(double x, double y, const std::function<double(double)>& rho);

// Quadrature kernel for an arbitrary activation pair:
// integral over [-1,1] of sigma(w1 x + b1) sigma(w2 x + b2) dx.
// Gauss-Legendre rules split the interval at every kink; rule.points is the
// per-piece order (minimum 32).
double kernel_general_1d(const Activation& act, double w1, double b1, double w2, double b2,
                         const QuadratureRule& rule);

// ReLU ridge kernel over the unit ball in dimension d = w1.size() >= 2:
// integral of relu(w1.x - b1) relu(w2.x - b2) over B_d(1), reduced to the
// plane spanned by the two directions; the inner cross-section integral is
// closed form, the outer one uses Gauss-Legendre in the angle variable.
double kernel_relu_dD(const Eigen::VectorXd& w1, double b1, const Eigen::VectorXd& w2, double b2,
                      int outer_points = 64);

// ---------------------------------------------------------------------------
// assembly

struct GramMatrix {
    Eigen::MatrixXd entries; // values rounded through the requested precision
    std::string basis_desc;
    Precision precision = Precision::f64;
    int n() const { return static_cast<int>(entries.rows()); }
};

// Which kernel family an assembled matrix uses.
struct KernelSpec {
    enum class Family { relu, leaky, pm1_block, weighted, general, fem_hat };
    Family family = Family::relu;
    double alpha = 0.1;                          // leaky
    std::vector<int> signs;                      // pm1_block, one per basis
    std::function<double(double)> rho;           // weighted
    std::string rho_label;                       // for the descriptor string
    Activation act = Activation::relu();         // general
    std::vector<double> weights;                 // general: w_i (empty = all ones)
    int quad_points = 64;                        // general: per-piece order

    static KernelSpec relu() { return {}; }
    static KernelSpec leaky(double alpha);
    static KernelSpec pm1_block(std::vector<int> signs);
    static KernelSpec weighted(std::function<double(double)> rho, std::string label);
    static KernelSpec general(Activation act, std::vector<double> weights = {},
                              int quad_points = 64);
    static KernelSpec fem_hat() {
        KernelSpec s;
        s.family = Family::fem_hat;
        return s;
    }
    std::string describe(const BiasGrid& grid) const;
};

// Upper triangle computed once, mirrored; rows run in parallel.
// n above 4096 raises CapacityError.
GramMatrix assemble(const KernelSpec& spec, const BiasGrid& grid,
                    Precision prec = Precision::f64);

// d-dimensional ReLU ridge version of assemble.
GramMatrix assemble_dD(const DirBiasGrid& grid, Precision prec = Precision::f64,
                       int outer_points = 64);

// CSV dump: "# gram n=<n> basis=<desc>" header line, then one row per line.
void export_gram_csv(const GramMatrix& gm, const std::string& path);

} // namespace gramlab
