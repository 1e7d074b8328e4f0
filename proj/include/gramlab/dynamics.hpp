#pragma once

// Training-dynamics simulator for the two-layer model
//   h(x) = c + sum_i a_i psi(x, b_i),   psi(x, b) = chi(b) sigma(x - b),
// with full-batch gradient descent (explicit-Euler gradient flow) or Adam on
// (a, b).  Includes the closed-form mode decay of the frozen-bias
// least-squares flow, per-mode error tracking E_k, the auxiliary function
// w(b) with w'' = h - f, half-reduction times, and weight total variation.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gramlab/activations.hpp"
#include "gramlab/approx.hpp"
#include "gramlab/gram.hpp"
#include "gramlab/numerics.hpp"

namespace gramlab {

// Smoothed indicator of D = (-1,1): 1 inside, a quadratic ramp on
// (-1-eps, -1], zero elsewhere (in particular for b >= 1, where a kink
// activation sigma(x - b) is dead on D anyway).
struct Mollifier {
    double epsilon = 0.05;

    double chi(double b) const {
        if (b > -1.0 && b < 1.0) return 1.0;
        if (b > -1.0 - epsilon && b <= -1.0) {
            const double t = (b + 1.0) / epsilon;
            return 1.0 - t * t;
        }
        return 0.0;
    }
    double dchi(double b) const {
        if (b > -1.0 - epsilon && b <= -1.0) return -2.0 * (b + 1.0) / (epsilon * epsilon);
        return 0.0;
    }
};

struct NetworkParams {
    Eigen::VectorXd a, b;
    double c = 0.0;
    Activation act = Activation::relu();
    std::optional<Mollifier> moll;

    int n() const { return static_cast<int>(a.size()); }
    double chi(double bias) const { return moll ? moll->chi(bias) : 1.0; }
    double dchi(double bias) const { return moll ? moll->dchi(bias) : 0.0; }
    double eval(double x) const;

    // a_i = (-1)^i / 2 (i = 1..n), biases equispaced ascending on [-1,1].
    static NetworkParams init_alternating(int n, Activation act = Activation::relu(),
                                          bool mollified = true);
    // a_i = cos(i) / 2 (i = 1..n), same bias layout.
    static NetworkParams init_cosine(int n, Activation act = Activation::relu(),
                                     bool mollified = true);
};

// Quadrature-measure loss 1/2 int_D (h - f)^2, split at activation kinks.
double training_loss(const NetworkParams& p, const std::function<double(double)>& f,
                     int quad_total = 4096);

struct Gradient {
    Eigen::VectorXd da, db;
    double dc = 0.0;
};

// Exact gradient of training_loss with respect to (a, b, c) under the same
// composite quadrature.
Gradient gradient(const NetworkParams& p, const std::function<double(double)>& f,
                  int quad_total = 4096);

struct TrainConfig {
    enum class Optimizer { gd, adam };
    Optimizer optimizer = Optimizer::gd;
    double step = 0.0;             // gd step size; 0 -> 1/n
    AdamOptions adam;
    long long steps = 0;
    bool train_biases = true;
    int quad_total = 4096;         // continuous-loss quadrature budget
    int loss_samples = 0;          // > 0: equispaced sampled loss instead
    long long stride = 0;          // record stride; 0 -> max(1, steps/10000)
    std::vector<int> track_modes;  // reference frequencies for E_k
    double bias_jitter = 0.0;      // uniform perturbation of initial biases
    std::uint64_t seed = 0;        // jitter stream
    double stop_at_fraction = 0.0; // > 0: stop once E_{track[0]} <= frac * E(0)
    bool record_biases = false;
};

struct TrainTrace {
    std::vector<long long> steps;   // recorded step indices
    std::vector<double> times;      // flow time (step index * gd step)
    std::vector<double> loss;
    std::vector<int> tracked_modes;
    Eigen::MatrixXd E;              // record r, mode m -> E_{tracked[m]}
    std::vector<double> tv;
    std::vector<double> sup_a2;
    Eigen::MatrixXd bias_snapshots; // filled only when requested
    int loss_increases = 0;         // recorded-loss monotonicity violations
    bool confinement_ok = true;     // biases stayed in [-1-eps, 1] (mollified)
    NetworkParams final_params;
    double gd_step = 0.0;
};

// E_k(t) = | int_D (h - f) sin(k pi x) dx | for each tracked k.
TrainTrace train(NetworkParams params, const std::function<double(double)>& f,
                 const TrainConfig& cfg);

// First recorded step index with E_k <= E_k(0) / 2, or -1 if never reached.
long long half_reduction_time(const TrainTrace& trace, int k);

// V(A) = a_1^2 + sum_i |a_i^2 - a_{i+1}^2| + a_n^2.
double total_variation(const Eigen::VectorXd& a);

// Load vector F_i = int_D f(x) chi(b_i) sigma(x - b_i) dx on a bias grid.
Eigen::VectorXd load_vector(const BiasGrid& grid, const std::function<double(double)>& f,
                            const Activation& act = Activation::relu(),
                            int quad_total = 4096);

struct ModeDecay {
    std::vector<double> lambda;   // eigenvalues of G, descending
    Eigen::VectorXd fhat, ahat0;  // eigenbasis projections of F and a(0)
    std::vector<double> times;    // checkpoint times, ascending, last = t_final
    Eigen::MatrixXd analytic;     // checkpoint x mode
    Eigen::MatrixXd euler;
    double dt = 0.0;
    long long steps = 0;
};

// Frozen-bias least-squares flow a' = -(G a - F).  Per eigenmode the analytic
// solution is ahat_k(t) = (ahat_k(0) - fhat_k/lambda_k) e^{-lambda_k t}
// + fhat_k/lambda_k; the explicit-Euler iterate with dt = t_final/steps is
// integrated alongside.  Throws StabilityError when dt > 2/lambda_1.
ModeDecay ls_mode_decay(const GramMatrix& gm, const Eigen::VectorXd& F,
                        const Eigen::VectorXd& a0, double t_final, long long steps,
                        int checkpoints = 11);

struct AuxiliaryW {
    std::vector<double> b, w, dw;  // w(b) = int_b^1 (x-b) r(x) dx, r = h - f
};

// Double integral of the residual with w(1) = w'(1) = 0, sampled on a uniform
// output grid; w'' = h - f.
AuxiliaryW auxiliary_w(const NetworkParams& p, const std::function<double(double)>& f,
                       int output_points = 1001, int points_per_panel = 8);

struct PowComparison {
    std::vector<int> ks;
    std::vector<double> tau;  // flow time to reach drop_fraction * E_k(0)
    double gamma = 0.0;       // slope of log tau vs log k
    double r2 = 0.0;
};

// Train sin(k pi x) targets with sigma = relu^m and fit the growth exponent
// of the mode-k reduction time.  Reduction times that never occur within
// cfg.steps are reported as -1 and excluded from the fit.
PowComparison relu_pow_comparison(int m, const std::vector<int>& ks, int n, TrainConfig cfg,
                                  double drop_fraction = 0.5);

// Trace CSV: t, loss, E_<k>..., tv, sup_a2 with a config echo comment line.
void export_trace_csv(const std::string& path, const TrainTrace& trace);

}  // namespace gramlab
