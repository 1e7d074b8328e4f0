#pragma once

// Least-squares approximation engine: sampled design matrices for the ReLU
// (two-layer network) and FEM hat bases, truncated-SVD solves in either
// precision mode, eigenmode projections of target functions, and the derived
// noise / overfitting / scaled-family studies.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gramlab/activations.hpp"
#include "gramlab/gram.hpp"
#include "gramlab/numerics.hpp"
#include "gramlab/spectral.hpp"

namespace gramlab {

// Closed-form 1-D targets used across the experiments.
class TargetFunction {
public:
    enum class Id { arctan25, trig, lowtrig, bump, sine };

    static TargetFunction arctan25();      // arctan(25 x)
    static TargetFunction trig(int r);     // cos(6 pi r x) - sin(2 pi r x)
    static TargetFunction lowtrig();       // cos(3 pi x) - sin(pi x)
    static TargetFunction bump();          // 1 / (1 + 3600 (x - 0.2)^2)
    static TargetFunction sine(int k);     // sin(k pi x)
    static TargetFunction parse(const std::string& name);

    double operator()(double x) const;
    double deriv(double x) const;
    std::string name() const;
    Id id() const { return id_; }
    int param() const { return p_; }

private:
    TargetFunction(Id id, int p) : id_(id), p_(p) {}
    Id id_;
    int p_ = 0;
};

struct NoiseSpec {
    double lo = -0.5, hi = 0.5;
    std::uint64_t seed = 0;
};

// A 1-D fitting basis. nn_relu and fem_hat live on a bias grid; general is
// act(w_i x + b_i) with explicit weight/bias vectors.
struct Basis1D {
    enum class Kind { nn_relu, fem_hat, general };

    Kind kind = Kind::nn_relu;
    BiasGrid grid;
    Activation act = Activation::relu();
    Eigen::VectorXd w, b;

    static Basis1D nn_relu(BiasGrid g);
    static Basis1D fem_hat(BiasGrid g);
    static Basis1D general(Activation act, Eigen::VectorXd w, Eigen::VectorXd b);

    int n() const;
    std::string describe() const;
    // Basis function i at x, in double precision.
    double eval_one(int i, double x) const;
    double eval_sum(const Eigen::VectorXd& coef, double offset, double x) const;
};

// Entry (j,i) = basis_i(x_j). In f32 mode every entry is computed in float
// arithmetic (then stored exactly in the double matrix).
Eigen::MatrixXd design_matrix(const Basis1D& basis, const std::vector<double>& samples,
                              Precision prec);

enum class FitMethod { svd, adam };

struct AdamOptions {
    int iters = 20000;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct FitOptions {
    int n_samples = 0;        // 0 -> 4 * basis.n()
    // Cutoff ratio on the Gram (B^T B) spectrum: modes with eigenvalue below
    // eta * lambda_max are dropped, i.e. singular values of B below
    // sqrt(eta) * sigma_max. 0 -> the machine epsilon of the working
    // precision.
    double eta = 0.0;
    Precision precision = Precision::f64;
    std::optional<NoiseSpec> noise;   // added to samples only
    FitMethod method = FitMethod::svd;
    AdamOptions adam;
    int eval_points = 10001;
};

struct FitReport {
    Eigen::VectorXd coef;
    double offset = 0.0;     // fixed constant absorbed before the solve
    double max_err = 0.0;    // sup |h - f_clean| on the evaluation grid
    double mse = 0.0;        // mean squared error against f_clean
    int rank = 0;
    bool rank_warning = false;
    Precision precision = Precision::f64;
    std::string basis_desc, target_desc;
    int n_basis = 0, n_samples = 0;
    double eta = 0.0;
    std::uint64_t seed = 0;
};

// Sampled least squares on equispaced samples. The nn_relu basis absorbs the
// constant c = f(-1) (clean value) so that the remaining columns vanish at
// x = -1; fem_hat and general bases carry no offset. Errors are always
// measured against the clean target on a uniform evaluation grid, in f64.
FitReport ls_fit(const Basis1D& basis, const TargetFunction& f, const FitOptions& opt = {});

// Same solve factored over several cutoff ratios, reusing one SVD.
std::vector<FitReport> ls_fit_multi(const Basis1D& basis, const TargetFunction& f,
                                    FitOptions opt, const std::vector<double>& etas);

// ls_fit with uniform noise on N=1000 samples (default), errors still clean.
FitReport noise_study(const Basis1D& basis, const TargetFunction& f,
                      std::uint64_t noise_seed, FitOptions opt = {});

struct OverfitPair {
    FitReport fem, nn;
};

// Underdetermined regime: N samples < n basis functions, equispaced grids.
OverfitPair overfit_study(const TargetFunction& f, int n_samples = 1000, int n_basis = 1500,
                          FitOptions opt = {});

// Fit with the scaled random family act(w_i (x + b_i)), w ~ U(-s,s),
// b ~ U(-1,1).
FitReport scaled_family_fit(const Activation& act, int n, double s, const TargetFunction& f,
                            std::uint64_t seed, FitOptions opt = {});

// |<f, v_k-interpolant>| per mode, where eigenvector k of S is read as nodal
// values on the bias grid and scaled by sqrt(n/2). Integrals are composite
// Gauss panels between nodes (points_per_panel each).
std::vector<double> project_on_eigenmodes(const TargetFunction& f, const Spectrum& s,
                                          const BiasGrid& grid, int points_per_panel = 8);

// Smallest K with sum_{k<=K} c_k^2 >= frac * sum c_k^2.
int modes_for_energy(const std::vector<double>& coeffs, double frac);

// Per-direction resolvable mode count 2^{mantissa_bits/(2d+3)}, rounded to
// the nearest integer.
int resolvable_mode_count(Precision prec, int d);

enum class ErrorRegimeKind { discretization, precision_floor };

struct RegimePrediction {
    ErrorRegimeKind regime;
    double value = 0.0;
    double n_threshold = 0.0;   // eps^{-d/(2d+3)}
};

// Predicted L2 error scale: n^{-2/d} ||f||_{H^2} below the threshold,
// eps^{p/(2d+3)} ||f||_{H^p} above it.
RegimePrediction error_regime(int n, int d, Precision prec, int p, double h2_norm,
                              double hp_norm);

// CSV row per report: basis,n,N,eta,precision,target,seed,rank,max_err,mse.
void export_fit_csv(const std::string& path, const std::vector<FitReport>& rows);

}  // namespace gramlab
