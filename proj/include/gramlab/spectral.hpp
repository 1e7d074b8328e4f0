#pragma once

// Spectral analysis of assembled Gram matrices: eigendecomposition wrappers,
// comparison against the continuum eigenvalues mu_k, condition-number growth
// across grid sizes, eigenvector-as-function extraction, and power-law decay
// fits over a resolvable eigenvalue window.

#include <string>
#include <vector>

#include "gramlab/gram.hpp"
#include "gramlab/numerics.hpp"

namespace gramlab {

struct Spectrum {
    std::vector<double> values;   // descending
    Eigen::MatrixXd vectors;      // column k = eigenvector of values[k]; empty unless requested
    std::string source;           // basis descriptor carried over from the GramMatrix
    Precision precision = Precision::f64;

    int n() const { return static_cast<int>(values.size()); }
};

Spectrum spectrum(const GramMatrix& gm, bool want_vectors = false);

struct ContinuumComparison {
    double max_dev = 0.0;           // max_k |lambda_k - (n/2) mu_k|
    std::vector<double> per_k;      // deviation for k = 1..K
    std::vector<double> ratio;      // lambda_k / ((n/2) mu_k)
};

// Compare the leading K discrete eigenvalues against (n/2) mu_k where mu_k are
// continuum eigenvalues (genfourier::continuous_eigenvalues). n_basis is the
// grid size that produced S (S.n() for a plain 1-D assembly).
ContinuumComparison compare_to_continuum(const Spectrum& s,
                                         const std::vector<double>& mu,
                                         int n_basis, int K);

struct ConditionGrowth {
    double exponent = 0.0;          // fitted log-log slope of kappa(n) = lambda_1/lambda_n
    double r2 = 0.0;
    std::vector<int> ns_used;       // sizes that survived the precision floor
    std::vector<double> kappas;     // kappa for each used size
    std::vector<int> ns_floored;    // sizes excluded because lambda_n < 10 eps lambda_1
};

// Assemble an equispaced-grid Gram matrix for each n in ns (f64 only) and fit
// the growth exponent of the condition number.
ConditionGrowth condition_growth(const std::vector<int>& ns, const KernelSpec& spec);

struct EigenmodeSamples {
    std::vector<double> b;          // bias abscissae (sorted)
    std::vector<double> value;      // v_k[i] * sqrt(n/2), sign-normalized
    int k = 0;
    int sign_changes = 0;
};

// Extract eigenvector k (1-based) as a sampled function of the bias grid,
// scaled by sqrt(n/2) so it approximates the unit-L2 continuum eigenfunction.
// Sign convention: the first component with |v_i| > 0.1 * max|v| is >= 0.
EigenmodeSamples eigenmode_function(const Spectrum& s, int k, const BiasGrid& grid);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int k_lo = 0, k_hi = 0;         // window actually used after floor clipping
};

// Fit log10(lambda_k) vs log10(k) over k in [k_lo, k_hi], clipped to the
// resolvable range lambda_k >= 100 * eps(precision) * lambda_1.
DecayFit fit_decay(const Spectrum& s, int k_lo, int k_hi);

// Convenience: assemble an n-point equispaced grid for the given kernel and
// fit the decay window in one call.
DecayFit slope_for_family(const KernelSpec& spec, int n, int k_lo, int k_hi,
                          Precision prec = Precision::f64);

void export_spectrum_csv(const std::string& path, const Spectrum& s);
void export_eigenmode_csv(const std::string& path, const EigenmodeSamples& em);

}  // namespace gramlab
