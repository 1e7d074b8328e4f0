#include "gramlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gramlab/errors.hpp"

namespace gramlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

// ---------------------------------------------------------------------------
// TargetFunction

TargetFunction TargetFunction::arctan25() { return {Id::arctan25, 0}; }
TargetFunction TargetFunction::trig(int r) {
    if (r < 1) throw ArgError("TargetFunction::trig: r must be >= 1");
    return {Id::trig, r};
}
TargetFunction TargetFunction::lowtrig() { return {Id::lowtrig, 0}; }
TargetFunction TargetFunction::bump() { return {Id::bump, 0}; }
TargetFunction TargetFunction::sine(int k) {
    if (k < 1) throw ArgError("TargetFunction::sine: k must be >= 1");
    return {Id::sine, k};
}

double TargetFunction::operator()(double x) const {
    switch (id_) {
        case Id::arctan25: return std::atan(25.0 * x);
        case Id::trig: return std::cos(6.0 * kPi * p_ * x) - std::sin(2.0 * kPi * p_ * x);
        case Id::lowtrig: return std::cos(3.0 * kPi * x) - std::sin(kPi * x);
        case Id::bump: {
            const double d = x - 0.2;
            return 1.0 / (1.0 + 3600.0 * d * d);
        }
        case Id::sine: return std::sin(p_ * kPi * x);
    }
    throw ArgError("TargetFunction: bad id");
}

double TargetFunction::deriv(double x) const {
    switch (id_) {
        case Id::arctan25: return 25.0 / (1.0 + 625.0 * x * x);
        case Id::trig:
            return -6.0 * kPi * p_ * std::sin(6.0 * kPi * p_ * x) -
                   2.0 * kPi * p_ * std::cos(2.0 * kPi * p_ * x);
        case Id::lowtrig:
            return -3.0 * kPi * std::sin(3.0 * kPi * x) - kPi * std::cos(kPi * x);
        case Id::bump: {
            const double d = x - 0.2;
            const double q = 1.0 + 3600.0 * d * d;
            return -7200.0 * d / (q * q);
        }
        case Id::sine: return p_ * kPi * std::cos(p_ * kPi * x);
    }
    throw ArgError("TargetFunction: bad id");
}

std::string TargetFunction::name() const {
    switch (id_) {
        case Id::arctan25: return "arctan25";
        case Id::trig: return "trig" + std::to_string(p_);
        case Id::lowtrig: return "lowtrig";
        case Id::bump: return "bump";
        case Id::sine: return "sine" + std::to_string(p_);
    }
    return "?";
}

TargetFunction TargetFunction::parse(const std::string& name) {
    if (name == "arctan25") return arctan25();
    if (name == "lowtrig") return lowtrig();
    if (name == "bump") return bump();
    auto tail_int = [&](size_t prefix_len) {
        try {
            size_t used = 0;
            int v = std::stoi(name.substr(prefix_len), &used);
            if (used != name.size() - prefix_len) return -1;
            return v;
        } catch (const std::exception&) {
            return -1;
        }
    };
    if (name.rfind("trig", 0) == 0) {
        int r = tail_int(4);
        if (r >= 1) return trig(r);
    }
    if (name.rfind("sine", 0) == 0) {
        int k = tail_int(4);
        if (k >= 1) return sine(k);
    }
    throw ConfigError("unknown target function '" + name + "'");
}

// ---------------------------------------------------------------------------
// Basis1D

Basis1D Basis1D::nn_relu(BiasGrid g) {
    Basis1D b;
    b.kind = Kind::nn_relu;
    b.grid = std::move(g);
    return b;
}

Basis1D Basis1D::fem_hat(BiasGrid g) {
    if (g.b.size() < 2) throw ArgError("Basis1D::fem_hat: need at least 2 nodes");
    Basis1D b;
    b.kind = Kind::fem_hat;
    b.grid = std::move(g);
    return b;
}

Basis1D Basis1D::general(Activation act, Eigen::VectorXd w, Eigen::VectorXd b) {
    if (w.size() != b.size() || w.size() == 0)
        throw ShapeError("Basis1D::general: w and b must be nonempty, same length");
    Basis1D out;
    out.kind = Kind::general;
    out.act = act;
    out.w = std::move(w);
    out.b = std::move(b);
    return out;
}

int Basis1D::n() const {
    return kind == Kind::general ? static_cast<int>(w.size())
                                 : static_cast<int>(grid.b.size());
}

std::string Basis1D::describe() const {
    switch (kind) {
        case Kind::nn_relu: return "nn_relu/" + grid.describe();
        case Kind::fem_hat: return "fem_hat/" + grid.describe();
        case Kind::general: return "general/" + act.name() + "/n" + std::to_string(n());
    }
    return "?";
}

namespace {

template <class T>
T eval_basis_t(const Basis1D& basis, int i, T x) {
    switch (basis.kind) {
        case Basis1D::Kind::nn_relu: {
            T d = x - static_cast<T>(basis.grid.b[i]);
            return d > T(0) ? d : T(0);
        }
        case Basis1D::Kind::fem_hat: {
            const auto& b = basis.grid.b;
            const int n = static_cast<int>(b.size());
            const T bc = static_cast<T>(b[i]);
            if (i > 0) {
                const T bl = static_cast<T>(b[i - 1]);
                if (x >= bl && x <= bc) return bc > bl ? (x - bl) / (bc - bl) : T(1);
            }
            if (i < n - 1) {
                const T br = static_cast<T>(b[i + 1]);
                if (x > bc && x <= br) return br > bc ? (br - x) / (br - bc) : T(0);
            }
            if (i == 0 && x <= bc) return x == bc ? T(1) : T(0);
            return T(0);
        }
        case Basis1D::Kind::general:
            return act_eval<T>(basis.act,
                               static_cast<T>(basis.w[i]) * x + static_cast<T>(basis.b[i]));
    }
    return T(0);
}

}  // namespace

double Basis1D::eval_one(int i, double x) const {
    if (i < 0 || i >= n()) throw ArgError("Basis1D::eval_one: index out of range");
    return eval_basis_t<double>(*this, i, x);
}

double Basis1D::eval_sum(const Eigen::VectorXd& coef, double offset, double x) const {
    if (coef.size() != n()) throw ShapeError("Basis1D::eval_sum: coefficient size mismatch");
    double h = offset;
    if (kind == Kind::fem_hat) {
        // Only two hats are active at any x.
        const auto& b = grid.b;
        auto it = std::upper_bound(b.begin(), b.end(), x);
        int j = static_cast<int>(it - b.begin());
        for (int i = std::max(0, j - 1); i <= std::min(n() - 1, j); ++i)
            h += coef[i] * eval_basis_t<double>(*this, i, x);
        return h;
    }
    for (int i = 0; i < n(); ++i) h += coef[i] * eval_basis_t<double>(*this, i, x);
    return h;
}

Eigen::MatrixXd design_matrix(const Basis1D& basis, const std::vector<double>& samples,
                              Precision prec) {
    const int N = static_cast<int>(samples.size());
    const int n = basis.n();
    if (N == 0) throw ArgError("design_matrix: no samples");
    if (N < n)
        std::fprintf(stderr, "gramlab: design_matrix: N=%d samples < n=%d basis functions "
                             "(underdetermined system)\n", N, n);
    Eigen::MatrixXd out(N, n);
    parallel_for(N, [&](int j) {
        const double x = samples[j];
        if (prec == Precision::f32) {
            const float xf = static_cast<float>(x);
            for (int i = 0; i < n; ++i)
                out(j, i) = static_cast<double>(eval_basis_t<float>(basis, i, xf));
        } else {
            for (int i = 0; i < n; ++i) out(j, i) = eval_basis_t<double>(basis, i, x);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

struct MultiSolve {
    std::vector<Eigen::VectorXd> coef;
    std::vector<int> rank;
};

// Truncated least squares through the Gram system G = B^T B, the route the
// error tables are sensitive to: forming G squares the conditioning, so in
// f32 the deep modes drown in accumulated round-off exactly as a
// working-precision pipeline would.  One eigendecomposition is shared by all
// cutoff ratios (given on sigma(B) = sqrt(lambda(G))).
template <class Scalar>
MultiSolve pinv_multi(const Eigen::MatrixXd& B, const Eigen::VectorXd& y,
                      const std::vector<double>& sigma_ratios) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Mat Bs = B.cast<Scalar>();
    Vec ys = y.cast<Scalar>();
    Mat G = Bs.transpose() * Bs;
    Vec c = Bs.transpose() * ys;
    Eigen::SelfAdjointEigenSolver<Mat> eig(G);
    if (eig.info() != Eigen::Success)
        throw NumericalError("pinv_multi: Gram eigendecomposition failed");
    const auto& lam = eig.eigenvalues();  // ascending
    const int n = static_cast<int>(lam.size());
    const Scalar lmax = n ? lam(n - 1) : Scalar(0);
    Vec proj = eig.eigenvectors().transpose() * c;

    MultiSolve ms;
    for (double ratio : sigma_ratios) {
        const Scalar cut = static_cast<Scalar>(ratio * ratio) * lmax;
        Vec z = Vec::Zero(n);
        int rank = 0;
        for (int k = 0; k < n; ++k) {
            if (lam(k) > Scalar(0) && lam(k) >= cut) {
                z(k) = proj(k) / lam(k);
                ++rank;
            }
        }
        Vec a = eig.eigenvectors() * z;
        ms.coef.push_back(a.template cast<double>());
        ms.rank.push_back(rank);
    }
    return ms;
}

template <class Scalar>
Eigen::VectorXd adam_solve(const Eigen::MatrixXd& B, const Eigen::VectorXd& y,
                           const AdamOptions& ao) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (ao.iters < 1 || !(ao.lr > 0)) throw ArgError("adam_solve: bad options");
    Mat Bs = B.cast<Scalar>();
    Vec ys = y.cast<Scalar>();
    const int n = static_cast<int>(B.cols());
    const Scalar invN = Scalar(1) / static_cast<Scalar>(B.rows());
    Vec a = Vec::Zero(n), m = Vec::Zero(n), v = Vec::Zero(n);
    const Scalar b1 = static_cast<Scalar>(ao.beta1), b2 = static_cast<Scalar>(ao.beta2);
    const Scalar lr = static_cast<Scalar>(ao.lr), eps = static_cast<Scalar>(ao.eps);
    Scalar b1t = Scalar(1), b2t = Scalar(1);
    for (int t = 0; t < ao.iters; ++t) {
        Vec r = Bs * a - ys;
        Vec g = Scalar(2) * invN * (Bs.transpose() * r);
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
        b1t *= b1;
        b2t *= b2;
        Vec mhat = m / (Scalar(1) - b1t);
        Vec vhat = v / (Scalar(1) - b2t);
        a -= (lr * mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    }
    return a.template cast<double>();
}

std::vector<double> uniform_samples(int N) {
    if (N < 2) throw ArgError("uniform_samples: need N >= 2");
    std::vector<double> x(N);
    for (int j = 0; j < N; ++j) x[j] = -1.0 + 2.0 * j / (N - 1);
    return x;
}

// N equispaced points are sufficient for a uniform grid, but an adaptive or
// iid grid can pack nodes far tighter than 2/N, leaving basis functions no
// sample ever sees.  Those grids additionally get four stratified points in
// every grid gap.  The equispaced case (including the deliberately
// underdetermined overfitting runs) is left untouched.
std::vector<double> fit_samples(const Basis1D& basis, int N) {
    std::vector<double> x = uniform_samples(N);
    if (basis.kind == Basis1D::Kind::general ||
        basis.grid.scheme == BiasGrid::Scheme::equispaced)
        return x;
    const auto& b = basis.grid.b;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        const double lo = b[i], gap = b[i + 1] - b[i];
        for (int q = 0; q < 4; ++q) x.push_back(lo + gap * (2 * q + 1) / 8.0);
    }
    std::sort(x.begin(), x.end());
    return x;
}

}  // namespace

std::vector<FitReport> ls_fit_multi(const Basis1D& basis, const TargetFunction& f,
                                    FitOptions opt, const std::vector<double>& etas) {
    if (etas.empty()) throw ArgError("ls_fit_multi: no cutoff ratios supplied");
    const int n = basis.n();
    const std::vector<double> x = fit_samples(basis, opt.n_samples > 0 ? opt.n_samples : 4 * n);
    const int N = static_cast<int>(x.size());

    const double offset = basis.kind == Basis1D::Kind::nn_relu ? f(-1.0) : 0.0;
    Eigen::VectorXd y(N);
    for (int j = 0; j < N; ++j) y[j] = f(x[j]) - offset;
    if (opt.noise) {
        RngStream rng(opt.noise->seed, 0xF17);
        for (int j = 0; j < N; ++j) y[j] += rng.uniform(opt.noise->lo, opt.noise->hi);
    }

    Eigen::MatrixXd B = design_matrix(basis, x, opt.precision);

    MultiSolve ms;
    if (opt.method == FitMethod::adam) {
        if (etas.size() != 1)
            throw ArgError("ls_fit_multi: adam path solves a single configuration");
        Eigen::VectorXd a = opt.precision == Precision::f32
                                ? adam_solve<float>(B, y, opt.adam)
                                : adam_solve<double>(B, y, opt.adam);
        ms.coef.push_back(std::move(a));
        ms.rank.push_back(n);
    } else {
        std::vector<double> ratios;
        for (double eta : etas) {
            if (eta > 1.0) throw ArgError("ls_fit_multi: cutoff ratio above 1");
            // eta is a ratio on the Gram (B^T B) spectrum, so the
            // singular-value cutoff is sqrt(eta); eta = 0 falls back to the
            // machine epsilon of the working precision.
            ratios.push_back(std::sqrt(eta > 0 ? eta : machine_eps(opt.precision)));
        }
        ms = opt.precision == Precision::f32 ? pinv_multi<float>(B, y, ratios)
                                             : pinv_multi<double>(B, y, ratios);
    }

    std::vector<FitReport> reports;
    const int M = opt.eval_points >= 2 ? opt.eval_points : 10001;
    const std::vector<double> xe = uniform_samples(M);
    std::vector<double> fe(M);
    for (int j = 0; j < M; ++j) fe[j] = f(xe[j]);

    for (size_t r = 0; r < ms.coef.size(); ++r) {
        FitReport rep;
        rep.coef = ms.coef[r];
        rep.offset = offset;
        rep.rank = ms.rank[r];
        rep.rank_warning = (ms.rank[r] == 0);
        rep.precision = opt.precision;
        rep.basis_desc = basis.describe();
        rep.target_desc = f.name();
        rep.n_basis = n;
        rep.n_samples = N;
        rep.eta = opt.method == FitMethod::adam ? 0.0 : etas[r];
        rep.seed = opt.noise ? opt.noise->seed : 0;

        double mx = 0.0, se = 0.0;
        for (int j = 0; j < M; ++j) {
            const double e = basis.eval_sum(rep.coef, offset, xe[j]) - fe[j];
            mx = std::max(mx, std::abs(e));
            se += e * e;
        }
        rep.max_err = mx;
        rep.mse = se / M;
        reports.push_back(std::move(rep));
    }
    return reports;
}

FitReport ls_fit(const Basis1D& basis, const TargetFunction& f, const FitOptions& opt) {
    return ls_fit_multi(basis, f, opt, {opt.eta}).front();
}

FitReport noise_study(const Basis1D& basis, const TargetFunction& f,
                      std::uint64_t noise_seed, FitOptions opt) {
    opt.noise = NoiseSpec{-0.5, 0.5, noise_seed};
    if (opt.n_samples == 0) opt.n_samples = 1000;
    return ls_fit(basis, f, opt);
}

OverfitPair overfit_study(const TargetFunction& f, int n_samples, int n_basis,
                          FitOptions opt) {
    if (n_samples < 2 || n_basis < 2) throw ArgError("overfit_study: degenerate sizes");
    opt.n_samples = n_samples;
    OverfitPair pair;
    pair.fem = ls_fit(Basis1D::fem_hat(BiasGrid::equispaced(n_basis)), f, opt);
    pair.nn = ls_fit(Basis1D::nn_relu(BiasGrid::equispaced(n_basis)), f, opt);
    return pair;
}

FitReport scaled_family_fit(const Activation& act, int n, double s, const TargetFunction& f,
                            std::uint64_t seed, FitOptions opt) {
    if (n < 1) throw ArgError("scaled_family_fit: n must be >= 1");
    if (s < 0) throw ArgError("scaled_family_fit: scale must be >= 0");
    RngStream rng(seed, 0x5CA1ED);
    Eigen::VectorXd w(n), b(n);
    for (int i = 0; i < n; ++i) {
        w[i] = rng.uniform(-s, s);
        // h uses act(w_i (x + b_i)); fold the draw into act(w x + b) form.
        b[i] = w[i] * rng.uniform(-1.0, 1.0);
    }
    FitReport rep = ls_fit(Basis1D::general(act, std::move(w), std::move(b)), f, opt);
    rep.seed = seed;
    return rep;
}

std::vector<double> project_on_eigenmodes(const TargetFunction& f, const Spectrum& s,
                                          const BiasGrid& grid, int points_per_panel) {
    if (s.vectors.size() == 0)
        throw ArgError("project_on_eigenmodes: spectrum lacks eigenvectors");
    const int n = s.n();
    if (static_cast<int>(grid.b.size()) != n)
        throw ShapeError("project_on_eigenmodes: grid size does not match spectrum");
    if (points_per_panel < 1 || points_per_panel > 64)
        throw ArgError("project_on_eigenmodes: points_per_panel out of range");

    // Nodal weights W with int f * interp(v) dx = W . v, panel-by-panel Gauss.
    const auto& [gx, gw] = gauss_legendre_nodes(points_per_panel);
    Eigen::VectorXd W = Eigen::VectorXd::Zero(n);
    for (int i = 0; i + 1 < n; ++i) {
        const double lo = grid.b[i], hi = grid.b[i + 1];
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        if (!(half > 0)) continue;
        for (int q = 0; q < points_per_panel; ++q) {
            const double x = mid + half * gx[q];
            const double wq = half * gw[q] * f(x);
            const double t = (x - lo) / (hi - lo);
            W[i] += wq * (1.0 - t);
            W[i + 1] += wq * t;
        }
    }
    const double scale = std::sqrt(0.5 * n);
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = std::abs(scale * W.dot(s.vectors.col(k)));
    return out;
}

int modes_for_energy(const std::vector<double>& coeffs, double frac) {
    if (!(frac > 0.0) || frac > 1.0) throw ArgError("modes_for_energy: frac in (0,1]");
    double total = 0.0;
    for (double c : coeffs) total += c * c;
    if (total <= 0.0) return 0;
    double acc = 0.0;
    for (size_t k = 0; k < coeffs.size(); ++k) {
        acc += coeffs[k] * coeffs[k];
        if (acc >= frac * total) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(coeffs.size());
}

int resolvable_mode_count(Precision prec, int d) {
    if (d < 1) throw ArgError("resolvable_mode_count: d must be >= 1");
    const double bits = mantissa_bits(prec);
    return static_cast<int>(std::lround(std::pow(2.0, bits / (2.0 * d + 3.0))));
}

RegimePrediction error_regime(int n, int d, Precision prec, int p, double h2_norm,
                              double hp_norm) {
    if (n < 1 || d < 1 || p < 1) throw ArgError("error_regime: n, d, p must be >= 1");
    const double eps = machine_eps(prec);
    RegimePrediction rp;
    rp.n_threshold = std::pow(eps, -static_cast<double>(d) / (2.0 * d + 3.0));
    if (n < rp.n_threshold) {
        rp.regime = ErrorRegimeKind::discretization;
        rp.value = std::pow(n, -2.0 / d) * h2_norm;
    } else {
        rp.regime = ErrorRegimeKind::precision_floor;
        rp.value = std::pow(eps, static_cast<double>(p) / (2.0 * d + 3.0)) * hp_norm;
    }
    return rp;
}

void export_fit_csv(const std::string& path, const std::vector<FitReport>& rows) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_fit_csv: cannot open " + path);
    out << "basis,n,N,eta,precision,target,seed,rank,max_err,mse\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.basis_desc << ',' << r.n_basis << ',' << r.n_samples << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.eta);
        out << buf << ',' << precision_name(r.precision) << ',' << r.target_desc << ','
            << r.seed << ',' << r.rank << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.max_err);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.mse);
        out << buf << '\n';
    }
}

}  // namespace gramlab
