#include "gramlab/rashomon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gramlab/errors.hpp"

namespace gramlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double ball_volume(int p) {
    return std::pow(kPi, 0.5 * p) / std::tgamma(0.5 * p + 1.0);
}

// Surface area of the unit sphere S^k (k = 0 gives 2, the two endpoints).
double sphere_area(int k) {
    return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};
}  // namespace

RashomonTarget RashomonTarget::one_d(TargetFunction f) {
    RashomonTarget t;
    t.kind = Kind::one_d;
    t.d = 1;
    t.f1d = f;
    return t;
}

RashomonTarget RashomonTarget::ridge_sine(double nu, Eigen::VectorXd w0) {
    if (!(nu > 0)) throw ArgError("ridge_sine: frequency must be positive");
    if (w0.size() < 2) throw ArgError("ridge_sine: direction needs d >= 2");
    const double nrm = w0.norm();
    if (!(nrm > 0)) throw ArgError("ridge_sine: zero direction");
    RashomonTarget t;
    t.kind = Kind::ridge_sine;
    t.d = static_cast<int>(w0.size());
    t.nu = nu;
    t.w0 = w0 / nrm;
    return t;
}

RashomonTarget RashomonTarget::radial_poly(std::vector<double> coeffs, int d) {
    if (coeffs.empty()) throw ArgError("radial_poly: empty coefficient list");
    if (d < 1) throw ArgError("radial_poly: d must be >= 1");
    RashomonTarget t;
    t.kind = Kind::radial_poly;
    t.d = d;
    t.coeffs = std::move(coeffs);
    return t;
}

double RashomonTarget::eval1(double x) const {
    switch (kind) {
        case Kind::one_d: return f1d(x);
        case Kind::ridge_sine: return std::sin(nu * kPi * x);
        case Kind::radial_poly: {
            double r2 = x * x, acc = 0.0, p = 1.0;
            for (double cj : coeffs) {
                acc += cj * p;
                p *= r2;
            }
            return acc;
        }
    }
    return 0.0;
}

double RashomonTarget::eval(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::one_d: return f1d(x[0]);
        case Kind::ridge_sine: return std::sin(nu * kPi * w0.dot(x));
        case Kind::radial_poly: {
            const double r2 = x.squaredNorm();
            double acc = 0.0, p = 1.0;
            for (double cj : coeffs) {
                acc += cj * p;
                p *= r2;
            }
            return acc;
        }
    }
    return 0.0;
}

std::string RashomonTarget::describe() const {
    switch (kind) {
        case Kind::one_d: return f1d.name();
        case Kind::ridge_sine:
            return "ridge_sine/nu" + std::to_string(nu) + "/d" + std::to_string(d);
        case Kind::radial_poly:
            return "radial_poly/deg" + std::to_string(2 * (coeffs.size() - 1)) + "/d" +
                   std::to_string(d);
    }
    return "?";
}

void RashomonConfig::validate() const {
    if (n < 1) throw ConfigError("rashomon: width must be >= 1");
    if (!(eps > 0)) throw ConfigError("rashomon: eps must be positive");
    if (samples < 100) throw ConfigError("rashomon: need at least 100 samples");
    if (!subgaussian && !(A > 0)) throw ConfigError("rashomon: weight bound A must be positive");
    if (subgaussian && !(subgaussian->theta > 0))
        throw ConfigError("rashomon: sub-Gaussian theta must be positive");
    if (quad_points < 16) throw ConfigError("rashomon: quad_points too small");
    if (target.d > 1 && mc_points < 1000) throw ConfigError("rashomon: mc_points too small");
}

PoissonSolve1D poisson_solve_1d(const RashomonTarget& f, int grid_points) {
    if (f.d != 1) throw UnsupportedTargetError("poisson_solve_1d: 1D targets only");
    if (grid_points < 3) throw ArgError("poisson_solve_1d: need at least 3 grid points");
    const int N = grid_points;
    const double h = 2.0 / (N - 1);

    PoissonSolve1D out;
    out.x.resize(N);
    for (int i = 0; i < N; ++i) out.x[i] = -1.0 + h * i;

    // Per-interval moments M0 = int f, M1 = int s f(s) ds (Gauss order 8).
    const auto& [gx, gw] = gauss_legendre_nodes(8);
    std::vector<double> M0(N - 1), M1(N - 1);
    for (int j = 0; j + 1 < N; ++j) {
        const double mid = 0.5 * (out.x[j] + out.x[j + 1]), half = 0.5 * h;
        double m0 = 0.0, m1 = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double s = mid + half * gx[q];
            const double v = half * gw[q] * f.eval1(s);
            m0 += v;
            m1 += v * s;
        }
        M0[j] = m0;
        M1[j] = m1;
    }

    // G1 = int_{-1}^{x} f, G2 = int_{-1}^{x} G1, with the inner interval piece
    // int_{x_j}^{x_{j+1}} G1 = h G1_j + x_{j+1} M0_j - M1_j.
    std::vector<double> G1(N), G2(N);
    Kahan k1, k2;
    G1[0] = G2[0] = 0.0;
    for (int j = 0; j + 1 < N; ++j) {
        k2.add(h * k1.s + out.x[j + 1] * M0[j] - M1[j]);
        G2[j + 1] = k2.s;
        k1.add(M0[j]);
        G1[j + 1] = k1.s;
    }

    const double alpha = -G2[N - 1] / 2.0;
    out.g.resize(N);
    for (int i = 0; i < N; ++i) out.g[i] = G2[i] + alpha * (out.x[i] + 1.0);

    // Stencil defect against the tent-kernel moments (exact for the true g).
    double worst = 0.0;
    for (int i = 1; i + 1 < N; ++i) {
        const double K = (M1[i - 1] - out.x[i - 1] * M0[i - 1]) +
                         (out.x[i + 1] * M0[i] - M1[i]);
        const double defect = out.g[i + 1] - 2.0 * out.g[i] + out.g[i - 1] - K;
        worst = std::max(worst, std::abs(defect) / (h * h));
    }
    out.residual = worst;
    return out;
}

namespace {

// Radial potential for f = sum_j c_j r^{2j}: g = sum_j c_j r^{2j+2} /
// ((2j+2)(2j+d)) + const, pinned to g(1) = 0.
double radial_potential(const RashomonTarget& t, double r) {
    double acc = 0.0, shift = 0.0;
    double p = r * r;
    for (std::size_t j = 0; j < t.coeffs.size(); ++j) {
        const double den = (2.0 * j + 2.0) * (2.0 * j + t.d);
        acc += t.coeffs[j] * p / den;
        shift += t.coeffs[j] / den;
        p *= r * r;
    }
    return acc - shift;
}

double kappa_dd(const RashomonTarget& t) {
    const int d = t.d;
    const auto& [gx, gw] = gauss_legendre_nodes(64);
    const double vd2 = ball_volume(d - 2);  // (d-2)-ball cross sections

    auto vball = [&](int k, double r) {
        return k == 0 ? 1.0 : ball_volume(k) * std::pow(r, k);
    };

    double best = 0.0;
    if (t.kind == RashomonTarget::Kind::ridge_sine) {
        const double npi = t.nu * kPi;
        auto u = [npi](double s) { return -std::sin(npi * s) / (npi * npi); };
        for (int ig = 0; ig <= 64; ++ig) {
            const double gamma = -1.0 + 2.0 * ig / 64.0;  // w . w0
            const double tau = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
            for (int ib = 0; ib < 64; ++ib) {
                const double b = -1.0 + 2.0 * (ib + 0.5) / 64.0;
                const double rho = std::sqrt(std::max(0.0, 1.0 - b * b));
                double I;
                if (tau < 1e-12) {
                    I = u(gamma * b) * vball(d - 1, rho);
                } else {
                    I = 0.0;
                    for (int q = 0; q < 64; ++q) {
                        const double s = rho * gx[q];
                        const double cross =
                            d == 2 ? 1.0
                                   : vd2 * std::pow(std::max(0.0, rho * rho - s * s),
                                                    0.5 * (d - 2));
                        I += rho * gw[q] * u(gamma * b + tau * s) * cross;
                    }
                }
                best = std::max(best, std::abs(I));
            }
        }
        return best;
    }

    // Radial: slices depend on the offset only.
    const double sd2 = sphere_area(d - 2);
    for (int ib = 0; ib < 64; ++ib) {
        const double b = -1.0 + 2.0 * (ib + 0.5) / 64.0;
        const double rho = std::sqrt(std::max(0.0, 1.0 - b * b));
        double I = 0.0;
        for (int q = 0; q < 64; ++q) {
            const double s = 0.5 * rho * (gx[q] + 1.0);
            const double r = std::sqrt(b * b + s * s);
            I += 0.5 * rho * gw[q] * radial_potential(t, r) *
                 (d == 2 ? 1.0 : std::pow(s, d - 2));
        }
        best = std::max(best, std::abs(sd2 * I));
    }
    return best;
}

}  // namespace

double kappa(const RashomonTarget& f, int grid_points) {
    if (f.d == 1) {
        PoissonSolve1D sol = poisson_solve_1d(f, grid_points);
        double best = 0.0;
        for (double g : sol.g) best = std::max(best, std::abs(g));
        return best;
    }
    if (f.kind == RashomonTarget::Kind::one_d)
        throw UnsupportedTargetError("kappa: 1D target with d > 1");
    return kappa_dd(f);
}

double target_l2_norm(const RashomonTarget& f, int quad_points) {
    const auto& [gx, gw] = gauss_legendre_nodes(quad_points);
    double acc = 0.0;
    if (f.d == 1) {
        for (int q = 0; q < quad_points; ++q) {
            const double v = f.eval1(gx[q]);
            acc += gw[q] * v * v;
        }
        return std::sqrt(acc);
    }
    if (f.kind == RashomonTarget::Kind::ridge_sine) {
        // Marginal over t = w0 . x with (d-1)-ball cross sections.
        const double cd1 = ball_volume(f.d - 1);
        for (int q = 0; q < quad_points; ++q) {
            const double t = gx[q];
            const double v = std::sin(f.nu * kPi * t);
            acc += gw[q] * v * v * cd1 * std::pow(std::max(0.0, 1.0 - t * t), 0.5 * (f.d - 1));
        }
        return std::sqrt(acc);
    }
    const double sd1 = sphere_area(f.d - 1);
    for (int q = 0; q < quad_points; ++q) {
        const double r = 0.5 * (gx[q] + 1.0);
        const double v = f.eval1(r);
        acc += 0.5 * gw[q] * sd1 * v * v * std::pow(r, f.d - 1);
    }
    return std::sqrt(acc);
}

double hoeffding_bound(const RashomonConfig& cfg, double kappa_value, double f_norm) {
    if (!(kappa_value > 0)) throw ArgError("hoeffding_bound: kappa must be positive");
    if (cfg.eps >= 1.0) return 1.0;
    const double f4 = f_norm * f_norm * f_norm * f_norm;
    const double gap = (1.0 - cfg.eps) * (1.0 - cfg.eps);
    double raw;
    if (cfg.subgaussian) {
        const double ell = 2.0;  // diam(D) for the interval and the unit ball
        const double th2 = cfg.subgaussian->theta * cfg.subgaussian->theta;
        raw = 2.0 * std::exp(-cfg.subgaussian->C * cfg.n * gap * f4 /
                             (4.0 * kappa_value * kappa_value * ell * ell * th2));
    } else {
        raw = std::exp(-cfg.n * gap * f4 / (2.0 * cfg.A * cfg.A * kappa_value * kappa_value));
    }
    return std::min(1.0, raw);
}

AffineFit affinity_correction(const RashomonTarget& f, int quad_points) {
    AffineFit fit;
    fit.v = Eigen::VectorXd::Zero(f.d);
    const auto& [gx, gw] = gauss_legendre_nodes(quad_points);
    const double nrm = target_l2_norm(f, quad_points);

    if (f.d == 1) {
        // {1, x} are orthogonal on (-1,1): <1,1> = 2, <x,x> = 2/3.
        double m0 = 0.0, m1 = 0.0;
        for (int q = 0; q < quad_points; ++q) {
            const double v = gw[q] * f.eval1(gx[q]);
            m0 += v;
            m1 += v * gx[q];
        }
        fit.c = m0 / 2.0;
        fit.v[0] = m1 / (2.0 / 3.0);
        const double res2 = nrm * nrm - fit.c * fit.c * 2.0 - fit.v[0] * fit.v[0] * (2.0 / 3.0);
        fit.residual_norm = std::sqrt(std::max(0.0, res2));
        return fit;
    }

    const double vd = ball_volume(f.d);
    const double x2 = vd / (f.d + 2);  // int_B x_i^2
    double m0 = 0.0, m1 = 0.0;
    if (f.kind == RashomonTarget::Kind::ridge_sine) {
        const double cd1 = ball_volume(f.d - 1);
        for (int q = 0; q < quad_points; ++q) {
            const double t = gx[q];
            const double cross = cd1 * std::pow(std::max(0.0, 1.0 - t * t), 0.5 * (f.d - 1));
            const double v = gw[q] * std::sin(f.nu * kPi * t) * cross;
            m0 += v;
            m1 += v * t;
        }
        fit.v = (m1 / x2) * f.w0;
    } else {
        const double sd1 = sphere_area(f.d - 1);
        for (int q = 0; q < quad_points; ++q) {
            const double r = 0.5 * (gx[q] + 1.0);
            m0 += 0.5 * gw[q] * sd1 * f.eval1(r) * std::pow(r, f.d - 1);
        }
        // odd moments vanish for radial targets
    }
    fit.c = m0 / vd;
    const double res2 = nrm * nrm - fit.c * fit.c * vd - fit.v.squaredNorm() * x2;
    fit.residual_norm = std::sqrt(std::max(0.0, res2));
    return fit;
}

std::pair<double, double> wilson_interval(long long hits, long long samples, double z) {
    if (samples < 1) throw ArgError("wilson_interval: empty sample");
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // The interval contains p by construction; rounding at hits = 0 or
    // hits = samples can leave an endpoint a few ulp on the wrong side.
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

namespace {

long long mc_count_1d(const RashomonConfig& cfg, double threshold2) {
    const auto& [gx, gw] = gauss_legendre_nodes(cfg.quad_points);
    const int Q = cfg.quad_points;
    std::vector<double> fv(Q);
    for (int q = 0; q < Q; ++q) fv[q] = cfg.target.eval1(gx[q]);
    const double sig = cfg.subgaussian ? cfg.subgaussian->theta * std::sqrt(3.0 / 8.0) : 0.0;
    const int n = cfg.n;
    const double inv_n = 1.0 / n;

    std::vector<std::uint8_t> hit(cfg.samples, 0);
    parallel_for(static_cast<int>(cfg.samples), [&](int i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        std::vector<double> net(Q, 0.0);
        for (int u = 0; u < n; ++u) {
            const double a = cfg.subgaussian ? sig * rng.normal() : rng.uniform(-cfg.A, cfg.A);
            const double w = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            const double b = rng.uniform(-1.0, 1.0);
            const double aw = a * inv_n;
            for (int q = 0; q < Q; ++q)
                net[q] += aw * act_eval<double>(cfg.act, w * gx[q] - b);
        }
        double r2 = 0.0, m0 = 0.0, m1 = 0.0;
        for (int q = 0; q < Q; ++q) {
            const double r = fv[q] - net[q];
            r2 += gw[q] * r * r;
            m0 += gw[q] * r;
            m1 += gw[q] * r * gx[q];
        }
        const double err2 = r2 - m0 * m0 / 2.0 - m1 * m1 / (2.0 / 3.0);
        hit[i] = err2 <= threshold2 ? 1 : 0;
    });
    return std::accumulate(hit.begin(), hit.end(), 0LL);
}

long long mc_count_dd(const RashomonConfig& cfg, double threshold2) {
    const int d = cfg.target.d, Q = cfg.mc_points, n = cfg.n;
    // Fixed point cloud, uniform in the unit ball: u^{1/d} z / |z|.
    RngStream cloud(cfg.seed, 0xBA11);
    Eigen::MatrixXd X(Q, d);
    Eigen::VectorXd fv(Q);
    Eigen::VectorXd z(d);
    for (int q = 0; q < Q; ++q) {
        double nz = 0.0;
        do {
            for (int j = 0; j < d; ++j) z[j] = cloud.normal();
            nz = z.norm();
        } while (!(nz > 0));
        const double r = std::pow(cloud.uniform01(), 1.0 / d);
        X.row(q) = (r / nz) * z.transpose();
        fv[q] = cfg.target.eval(X.row(q).transpose());
    }
    const double vd = ball_volume(d);

    // Affine design [1, x] on the cloud; its (d+1)x(d+1) Gram is shared.
    Eigen::MatrixXd M(Q, d + 1);
    M.col(0).setOnes();
    M.rightCols(d) = X;
    const Eigen::MatrixXd G = M.transpose() * M / Q;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw NumericalError("mc_measure: affine Gram factorization failed");

    const double sig = cfg.subgaussian ? cfg.subgaussian->theta * std::sqrt(3.0 / 8.0) : 0.0;
    const double inv_n = 1.0 / n;
    std::vector<std::uint8_t> hit(cfg.samples, 0);
    parallel_for(static_cast<int>(cfg.samples), [&](int i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        Eigen::VectorXd net = Eigen::VectorXd::Zero(Q);
        Eigen::VectorXd w(d);
        for (int u = 0; u < n; ++u) {
            const double a = cfg.subgaussian ? sig * rng.normal() : rng.uniform(-cfg.A, cfg.A);
            double nw = 0.0;
            do {
                for (int j = 0; j < d; ++j) w[j] = rng.normal();
                nw = w.norm();
            } while (!(nw > 0));
            w /= nw;
            const double b = rng.uniform(-1.0, 1.0);
            const Eigen::VectorXd t = X * w;
            for (int q = 0; q < Q; ++q)
                net[q] += inv_n * a * act_eval<double>(cfg.act, t[q] - b);
        }
        const Eigen::VectorXd r = fv - net;
        const Eigen::VectorXd rhs = M.transpose() * r / Q;
        const Eigen::VectorXd beta = llt.solve(rhs);
        const double err2 = vd * (r.squaredNorm() / Q - beta.dot(rhs));
        hit[i] = err2 <= threshold2 ? 1 : 0;
    });
    return std::accumulate(hit.begin(), hit.end(), 0LL);
}

}  // namespace

RashomonEstimate mc_measure(const RashomonConfig& cfg) {
    cfg.validate();
    const double fn = target_l2_norm(cfg.target, cfg.quad_points);
    if (!(fn > 0)) throw ArgError("mc_measure: target norm must be positive");
    const double kap = kappa(cfg.target);
    const double threshold2 = cfg.eps * cfg.eps * fn * fn;

    const long long hits = cfg.target.d == 1 ? mc_count_1d(cfg, threshold2)
                                             : mc_count_dd(cfg, threshold2);

    RashomonEstimate est;
    est.target = cfg.target.describe();
    est.n = cfg.n;
    est.A = cfg.subgaussian ? 0.0 : cfg.A;
    est.eps = cfg.eps;
    est.kappa = kap;
    est.f_norm = fn;
    est.samples = cfg.samples;
    est.seed = cfg.seed;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(cfg.samples);
    std::tie(est.wilson_lo, est.wilson_hi) = wilson_interval(hits, cfg.samples);
    est.hoeffding_bound = hoeffding_bound(cfg, kap, fn);
    return est;
}

void export_estimates_csv(const std::string& path, const std::vector<RashomonEstimate>& rows) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_estimates_csv: cannot open " + path);
    out << "target,n,A,eps,kappa,p_hat,wilson_lo,wilson_hi,bound,samples,seed\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (const auto& r : rows) {
        out << r.target << ',' << r.n;
        put(r.A);
        put(r.eps);
        put(r.kappa);
        put(r.p_hat);
        put(r.wilson_lo);
        put(r.wilson_hi);
        put(r.hoeffding_bound);
        out << ',' << r.samples << ',' << r.seed << '\n';
    }
}

}  // namespace gramlab
