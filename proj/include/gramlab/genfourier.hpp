#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gramlab/numerics.hpp"

namespace gramlab {

// Eigenfunctions of the fourth-order problem theta'''' = c^4 theta on [-1,1]
// with theta(1) = theta'(1) = theta''(-1) = theta'''(-1) = 0.  The roots c_k
// interlace the quarter-pi lattice and the eigenfunctions are trigonometric
// modes plus an exponentially small hyperbolic tail.
//
// Odd k solve tan(c) tanh(c) = +1 on ((j+1/4)pi, (j+1/2)pi) and read
//   theta(x) = N (sin(c x) - sin(c) cosh(c x)/cosh(c));
// even k solve tan(c) tanh(c) = -1 on ((j+1/2)pi, (j+3/4)pi) and read
//   theta(x) = N (cos(c x) - cos(c) sinh(c x)/sinh(c)).
// Both forms satisfy the four boundary conditions identically once c_k is a
// root; the coefficients come from the boundary linear system, not copied
// from anywhere, so the sign conventions are internally consistent.
enum class ModeBranch { sin_like, cos_like };

struct GenFourierMode {
    int k = 1;
    double c = 0.0;          // frequency root
    ModeBranch branch = ModeBranch::sin_like;
    double norm = 1.0;       // N, fixes unit L2 norm
    double trig_coef = 0.0;  // coefficient on sin(c) or cos(c) in the tail

    double mu() const { return 1.0 / (c * c * c * c); }
};

GenFourierMode gf_mode(int k);

// theta_k, theta_k' or theta_k'' at x (deriv in {0,1,2}); hyperbolic parts
// are evaluated through e^{-c(1 -+ x)} ratios so large k never overflows.
double eval_mode(const GenFourierMode& m, double x, int deriv = 0);

// mu_k = c_k^{-4}, k = 1..k_max (descending).
std::vector<double> continuous_eigenvalues(int k_max);

// Coefficients <g, theta_m> for m = 1..m_max.  The rule must offer at least
// 8 points per oscillation period of the highest mode, else ResolutionError.
std::vector<double> gft(const std::function<double(double)>& g, int m_max,
                        const QuadratureRule& rule);

// Analytic bracket for the leading eigenvalue of the leaky-ReLU kernel as a
// function of the negative slope alpha in [0,1].
std::pair<double, double> leaky_leading_eigenvalue_bounds(double alpha);

// CSV with columns k, c_k, mu_k, branch.
void export_mode_table_csv(const std::string& path, int k_max);

} // namespace gramlab
