#include "gramlab/gram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace gramlab {

// ---------------------------------------------------------------------------
// BiasGrid

namespace {

// Enforce strict ordering: equal neighbours get nudged apart by 1e-12.
void sort_and_jitter(std::vector<double>& b) {
    std::sort(b.begin(), b.end());
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] <= b[i - 1]) b[i] = b[i - 1] + 1e-12;
}

std::string scheme_name(BiasGrid::Scheme s) {
    switch (s) {
        case BiasGrid::Scheme::equispaced: return "equispaced";
        case BiasGrid::Scheme::adaptive: return "adaptive";
        case BiasGrid::Scheme::iid: return "iid";
        case BiasGrid::Scheme::custom: return "custom";
    }
    return "?";
}

} // namespace

std::string BiasGrid::describe() const {
    return "n=" + std::to_string(n()) + " grid=" + scheme_name(scheme);
}

BiasGrid BiasGrid::equispaced(int n) {
    if (n < 2) throw ArgError("BiasGrid::equispaced: need n >= 2");
    BiasGrid g;
    g.scheme = Scheme::equispaced;
    g.b.resize(n);
    for (int i = 0; i < n; ++i) g.b[i] = -1.0 + 2.0 * i / (n - 1);
    return g;
}

BiasGrid BiasGrid::iid_uniform(int n, std::uint64_t seed) {
    if (n < 1) throw ArgError("BiasGrid::iid_uniform: need n >= 1");
    BiasGrid g;
    g.scheme = Scheme::iid;
    g.seed = seed;
    RngStream rng(seed, 0xb1a5ULL);
    g.b.resize(n);
    for (int i = 0; i < n; ++i) g.b[i] = rng.uniform(-1.0, 1.0);
    sort_and_jitter(g.b);
    return g;
}

BiasGrid BiasGrid::iid_density(int n, std::uint64_t seed,
                               const std::function<double(double)>& rho, double rho_max) {
    if (n < 1) throw ArgError("BiasGrid::iid_density: need n >= 1");
    if (!(rho_max > 0.0)) throw ArgError("BiasGrid::iid_density: rho_max must be positive");
    BiasGrid g;
    g.scheme = Scheme::iid;
    g.seed = seed;
    RngStream rng(seed, 0xb1a5d2ULL);
    g.b.reserve(n);
    long attempts = 0;
    while (static_cast<int>(g.b.size()) < n) {
        if (++attempts > 1000L * n + 1000L)
            throw NumericalError("BiasGrid::iid_density: acceptance rate too low");
        const double x = rng.uniform(-1.0, 1.0);
        const double r = rho(x);
        if (r > rho_max * (1.0 + 1e-12))
            throw ArgError("BiasGrid::iid_density: rho exceeds envelope rho_max");
        if (rng.uniform(0.0, rho_max) < r) g.b.push_back(x);
    }
    sort_and_jitter(g.b);
    return g;
}

BiasGrid BiasGrid::from_points(std::vector<double> pts, Scheme label) {
    if (pts.empty()) throw ArgError("BiasGrid::from_points: empty grid");
    for (double v : pts)
        if (!(v >= -1.0 && v <= 1.0)) throw DomainError("BiasGrid: bias outside [-1,1]");
    BiasGrid g;
    g.scheme = label;
    g.b = std::move(pts);
    sort_and_jitter(g.b);
    return g;
}

// ---------------------------------------------------------------------------
// adaptive grid

namespace {

// Dense prefix of integral |f'| over [-1,1]: breakpoints plus per-cell
// 16-point Gauss tails give F evaluations accurate far below the 1e-10
// placement tolerance.
struct CumulativeMass {
    std::vector<double> xs, prefix;
    std::function<double(double)> g;

    double eval(double x) const {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t j = it == xs.begin() ? 0 : (it - xs.begin() - 1);
        double acc = prefix[j];
        if (x > xs[j]) {
            const auto& [gx, gw] = gauss_legendre_nodes(16);
            const double mid = 0.5 * (xs[j] + x), half = 0.5 * (x - xs[j]);
            for (int q = 0; q < 16; ++q) acc += half * gw[q] * g(mid + half * gx[q]);
        }
        return acc;
    }
};

CumulativeMass build_mass(const std::function<double(double)>& absfp) {
    CumulativeMass m;
    m.g = absfp;
    const int cells = 4096;
    m.xs.resize(cells + 1);
    m.prefix.assign(cells + 1, 0.0);
    for (int j = 0; j <= cells; ++j) m.xs[j] = -1.0 + 2.0 * j / cells;
    const auto& [gx, gw] = gauss_legendre_nodes(16);
    for (int j = 0; j < cells; ++j) {
        const double mid = 0.5 * (m.xs[j] + m.xs[j + 1]), half = 0.5 * (m.xs[j + 1] - m.xs[j]);
        double acc = 0.0;
        for (int q = 0; q < 16; ++q) acc += gw[q] * absfp(mid + half * gx[q]);
        m.prefix[j + 1] = m.prefix[j] + half * acc;
    }
    return m;
}

BiasGrid adaptive_from_mass(const CumulativeMass& mass, int n) {
    const double total = mass.prefix.back();
    if (!(total > 1e-13)) throw ArgError("make_adaptive_grid: target has no derivative mass");
    BiasGrid g;
    g.scheme = BiasGrid::Scheme::adaptive;
    g.b.resize(n);
    g.b.front() = -1.0;
    g.b.back() = 1.0;
    for (int i = 1; i + 1 < n; ++i) {
        const double level = total * static_cast<double>(i) / (n - 1);
        const auto it = std::lower_bound(mass.prefix.begin(), mass.prefix.end(), level);
        std::size_t j = it - mass.prefix.begin();
        if (j > 0) --j;
        double lo = mass.xs[j], hi = mass.xs[std::min(j + 1, mass.xs.size() - 1)];
        // widen in the rare case the level sits on a flat stretch
        while (hi < 1.0 && mass.eval(hi) < level) hi = std::min(1.0, hi + (mass.xs[1] - mass.xs[0]));
        g.b[i] = bisect([&](double x) { return mass.eval(x) - level; }, lo, hi, 1e-15, 300);
    }
    sort_and_jitter(g.b);
    return g;
}

} // namespace

BiasGrid make_adaptive_grid(const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime, int n,
                            const QuadratureRule& quad) {
    (void)f;
    (void)quad;
    if (n < 2) throw ArgError("make_adaptive_grid: need n >= 2");
    const auto absfp = [fprime](double x) { return std::abs(fprime(x)); };
    return adaptive_from_mass(build_mass(absfp), n);
}

BiasGrid make_adaptive_grid(const std::function<double(double)>& f, int n,
                            const QuadratureRule& quad) {
    const double h = 1e-6;
    const auto fd = [f, h](double x) {
        const double a = std::max(-1.0, x - h), b = std::min(1.0, x + h);
        return (f(b) - f(a)) / (b - a);
    };
    return make_adaptive_grid(f, fd, n, quad);
}

// ---------------------------------------------------------------------------
// DirBiasGrid

DirBiasGrid DirBiasGrid::product_2d(int n_theta, int n_b) {
    if (n_theta < 1 || n_b < 2) throw ArgError("DirBiasGrid::product_2d: bad sizes");
    DirBiasGrid g;
    g.w.resize(n_theta * n_b, 2);
    g.b.resize(static_cast<std::size_t>(n_theta) * n_b);
    int r = 0;
    for (int j = 0; j < n_theta; ++j) {
        const double th = 2.0 * M_PI * j / n_theta;
        const double c = std::cos(th), s = std::sin(th);
        for (int i = 0; i < n_b; ++i, ++r) {
            g.w(r, 0) = c;
            g.w(r, 1) = s;
            g.b[r] = -1.0 + 2.0 * i / (n_b - 1);
        }
    }
    return g;
}

DirBiasGrid DirBiasGrid::iid(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 2) throw ArgError("DirBiasGrid::iid: need n >= 1, d >= 2");
    DirBiasGrid g;
    g.w.resize(n, d);
    g.b.resize(n);
    RngStream rng(seed, 0xd1cdULL);
    for (int i = 0; i < n; ++i) {
        double norm = 0.0;
        do {
            for (int k = 0; k < d; ++k) g.w(i, k) = rng.normal();
            norm = g.w.row(i).norm();
        } while (norm < 1e-12);
        g.w.row(i) /= norm;
        g.b[i] = rng.uniform(-1.0, 1.0);
    }
    return g;
}

// ---------------------------------------------------------------------------
// 1D kernels

double kernel_leaky_1d(double x, double y, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgError("kernel_leaky_1d: alpha must be in (0,1)");
    return kernel_leaky_1d_t<double>(x, y, alpha);
}

double kernel_block_pm1(double x, double y, int sign_x, int sign_y) {
    if (sign_x == 0 || sign_y == 0) throw ArgError("kernel_block_pm1: signs must be +-1");
    if (std::abs(x) > 1.0 || std::abs(y) > 1.0)
        throw DomainError("kernel_block_pm1: arguments must lie in [-1,1]");
    return kernel_block_pm1_t<double>(x, y, sign_x, sign_y);
}

double kernel_weighted(double x, double y, const std::function<double(double)>& rho) {
    const double rx = rho(x), ry = rho(y);
    if (!(rx > 0.0) || !(ry > 0.0)) throw ArgError("kernel_weighted: density must be positive");
    return std::sqrt(rx) * kernel_relu_1d(x, y) * std::sqrt(ry);
}

namespace {

template <class T>
T kernel_general_1d_t(const Activation& act, T w1, T b1, T w2, T b2, int per_piece,
                      QuadratureRule::Kind kind) {
    std::vector<double> splits;
    if (act.has_kink()) {
        if (w1 != T(0)) splits.push_back(static_cast<double>(-b1 / w1));
        if (w2 != T(0)) splits.push_back(static_cast<double>(-b2 / w2));
    }
    std::sort(splits.begin(), splits.end());
    std::vector<double> bk{-1.0};
    for (double s : splits)
        if (s > -1.0 && s < 1.0 && s > bk.back() + 1e-15) bk.push_back(s);
    bk.push_back(1.0);
    T acc = T(0);
    for (std::size_t j = 0; j + 1 < bk.size(); ++j) {
        QuadratureRule piece;
        piece.kind = kind;
        piece.points = per_piece;
        piece.lo = bk[j];
        piece.hi = bk[j + 1];
        acc += integrate_t<T>(
            [&](T x) { return act_eval<T>(act, w1 * x + b1) * act_eval<T>(act, w2 * x + b2); },
            piece);
    }
    return acc;
}

} // namespace

double kernel_general_1d(const Activation& act, double w1, double b1, double w2, double b2,
                         const QuadratureRule& rule) {
    if (rule.points < 32) throw ArgError("kernel_general_1d: need at least 32 points");
    return kernel_general_1d_t<double>(act, w1, b1, w2, b2, rule.points, rule.kind);
}

// ---------------------------------------------------------------------------
// d-dimensional ReLU kernel over the unit ball

namespace {

// volume of the unit ball in dimension p (c_0 = 1, c_1 = 2, c_2 = pi, ...)
double ball_volume(int p) {
    return std::pow(M_PI, 0.5 * p) / std::tgamma(0.5 * p + 1.0);
}

// integral of cos^p over [psi0, pi/2] by the stable downward recurrence
double cos_power_tail(int p, double psi0) {
    const double s = std::sin(psi0), c = std::cos(psi0);
    double even = M_PI / 2.0 - psi0; // p = 0
    double odd = 1.0 - s;            // p = 1
    if (p == 0) return even;
    if (p == 1) return odd;
    double cp = c; // c^(k-1) running power
    double result = 0.0;
    for (int k = 2; k <= p; ++k) {
        double& prev = (k % 2 == 0) ? even : odd;
        prev = (-cp * s + (k - 1) * prev) / k;
        cp *= c;
        result = prev;
    }
    return result;
}

// Directions parallel or antiparallel: single quadrature in u = w.x with the
// cross-section volume as weight; u = sin(phi) removes the endpoint cusp.
double kernel_dD_parallel(int d, double b1, double b2, int sign, int points) {
    double lo = b1, hi = 1.0;
    if (sign > 0) {
        lo = std::max(b1, b2);
    } else {
        hi = std::min(1.0, -b2);
    }
    lo = std::max(lo, -1.0);
    if (!(lo < hi)) return 0.0;
    const double cd1 = ball_volume(d - 1);
    QuadratureRule rule = QuadratureRule::gauss(points, std::asin(lo), std::asin(hi));
    return integrate_t<double>(
        [&](double phi) {
            const double u = std::sin(phi), c = std::cos(phi);
            return (u - b1) * (sign * u - b2) * cd1 * std::pow(c, d);
        },
        rule);
}

} // namespace

double kernel_relu_dD(const Eigen::VectorXd& w1, double b1, const Eigen::VectorXd& w2, double b2,
                      int outer_points) {
    const int d = static_cast<int>(w1.size());
    if (w2.size() != d) throw ShapeError("kernel_relu_dD: direction dimensions differ");
    if (d < 2) throw ArgError("kernel_relu_dD: dimension must be >= 2");
    if (std::abs(w1.norm() - 1.0) > 1e-12 || std::abs(w2.norm() - 1.0) > 1e-12)
        throw ArgError("kernel_relu_dD: directions must be unit vectors");
    if (std::abs(b1) > 1.0 || std::abs(b2) > 1.0)
        throw DomainError("kernel_relu_dD: biases must lie in [-1,1]");
    if (outer_points < 8) throw ArgError("kernel_relu_dD: need at least 8 outer points");

    const double t = std::clamp(w1.dot(w2), -1.0, 1.0);
    if (1.0 - std::abs(t) <= 1e-14)
        return kernel_dD_parallel(d, b1, b2, t > 0.0 ? 1 : -1, outer_points);

    const double s = std::sqrt(1.0 - t * t);
    const double cd2 = ball_volume(d - 2);

    // outer breakpoints: tangency of the line w2.x = b2 with circles u^2+v^2=1
    std::vector<double> bk{std::max(b1, -1.0)};
    const double root = s * std::sqrt(std::max(0.0, 1.0 - b2 * b2));
    for (double u : {b2 * t - root, b2 * t + root})
        if (u > bk.front() + 1e-15 && u < 1.0 - 1e-15) bk.push_back(u);
    std::sort(bk.begin() + 1, bk.end());
    bk.push_back(1.0);
    if (!(bk.front() < 1.0)) return 0.0;

    const auto& [gx, gw] = gauss_legendre_nodes(outer_points);
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < bk.size(); ++j) {
        const double plo = std::asin(bk[j]), phi_hi = std::asin(bk[j + 1]);
        const double mid = 0.5 * (plo + phi_hi), half = 0.5 * (phi_hi - plo);
        double piece = 0.0;
        for (int q = 0; q < outer_points; ++q) {
            const double phi = mid + half * gx[q];
            const double u = std::sin(phi), R = std::cos(phi);
            if (R <= 1e-300) continue;
            const double v0 = (b2 - t * u) / s;
            if (v0 >= R) continue; // cross-section misses the half-plane
            const double z = std::max(-1.0, v0 / R);
            const double psi0 = std::asin(z);
            const double inner =
                cd2 * std::pow(R, d - 1) *
                ((t * u - b2) * cos_power_tail(d - 1, psi0) +
                 s * R * std::pow(std::cos(psi0), d) / d);
            piece += gw[q] * (u - b1) * inner * R; // R = jacobian du/dphi
        }
        acc += half * piece;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// assembly

KernelSpec KernelSpec::leaky(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgError("KernelSpec::leaky: alpha must be in (0,1)");
    KernelSpec s;
    s.family = Family::leaky;
    s.alpha = alpha;
    return s;
}

KernelSpec KernelSpec::pm1_block(std::vector<int> signs) {
    KernelSpec s;
    s.family = Family::pm1_block;
    s.signs = std::move(signs);
    for (int v : s.signs)
        if (v != 1 && v != -1) throw ArgError("KernelSpec::pm1_block: signs must be +-1");
    return s;
}

KernelSpec KernelSpec::weighted(std::function<double(double)> rho, std::string label) {
    KernelSpec s;
    s.family = Family::weighted;
    s.rho = std::move(rho);
    s.rho_label = std::move(label);
    return s;
}

KernelSpec KernelSpec::general(Activation act, std::vector<double> weights, int quad_points) {
    if (quad_points < 32) throw ArgError("KernelSpec::general: need at least 32 points");
    KernelSpec s;
    s.family = Family::general;
    s.act = act;
    s.weights = std::move(weights);
    s.quad_points = quad_points;
    return s;
}

std::string KernelSpec::describe(const BiasGrid& grid) const {
    std::string head;
    switch (family) {
        case Family::relu: head = "relu_1d"; break;
        case Family::leaky: head = "leaky_1d alpha=" + std::to_string(alpha); break;
        case Family::pm1_block: head = "pm1_block"; break;
        case Family::weighted: head = "weighted rho=" + (rho_label.empty() ? "?" : rho_label); break;
        case Family::general: head = "general act=" + act.name(); break;
        case Family::fem_hat: head = "fem_hat"; break;
    }
    return head + " " + grid.describe();
}

namespace {

template <class T>
void fill_symmetric(Eigen::MatrixXd& out, int n, const std::function<T(int, int)>& entry) {
    parallel_for(n, [&](int i) {
        for (int j = i; j < n; ++j) {
            const double v = static_cast<double>(entry(i, j));
            out(i, j) = v;
            out(j, i) = v;
        }
    });
}

template <class T>
Eigen::MatrixXd assemble_entries(const KernelSpec& spec, const BiasGrid& grid) {
    const int n = grid.n();
    Eigen::MatrixXd m(n, n);
    const auto& b = grid.b;
    switch (spec.family) {
        case KernelSpec::Family::relu:
            fill_symmetric<T>(m, n, [&](int i, int j) {
                return kernel_relu_1d_t<T>(static_cast<T>(b[i]), static_cast<T>(b[j]));
            });
            break;
        case KernelSpec::Family::leaky:
            fill_symmetric<T>(m, n, [&](int i, int j) {
                return kernel_leaky_1d_t<T>(static_cast<T>(b[i]), static_cast<T>(b[j]),
                                            static_cast<T>(spec.alpha));
            });
            break;
        case KernelSpec::Family::pm1_block:
            if (static_cast<int>(spec.signs.size()) != n)
                throw ShapeError("assemble: pm1_block needs one sign per basis");
            fill_symmetric<T>(m, n, [&](int i, int j) {
                return kernel_block_pm1_t<T>(static_cast<T>(b[i]), static_cast<T>(b[j]),
                                             spec.signs[i], spec.signs[j]);
            });
            break;
        case KernelSpec::Family::weighted: {
            if (!spec.rho) throw ArgError("assemble: weighted spec lacks a density");
            std::vector<double> sq(n);
            for (int i = 0; i < n; ++i) {
                const double r = spec.rho(b[i]);
                if (!(r > 0.0)) throw ArgError("assemble: density must be positive");
                sq[i] = std::sqrt(r);
            }
            fill_symmetric<T>(m, n, [&](int i, int j) {
                return static_cast<T>(sq[i]) *
                       kernel_relu_1d_t<T>(static_cast<T>(b[i]), static_cast<T>(b[j])) *
                       static_cast<T>(sq[j]);
            });
            break;
        }
        case KernelSpec::Family::general: {
            std::vector<double> w = spec.weights;
            if (w.empty()) w.assign(n, 1.0);
            if (static_cast<int>(w.size()) != n)
                throw ShapeError("assemble: general spec weight count mismatch");
            fill_symmetric<T>(m, n, [&](int i, int j) {
                return kernel_general_1d_t<T>(spec.act, static_cast<T>(w[i]),
                                              static_cast<T>(b[i]), static_cast<T>(w[j]),
                                              static_cast<T>(b[j]), spec.quad_points,
                                              QuadratureRule::Kind::gauss_legendre);
            });
            break;
        }
        case KernelSpec::Family::fem_hat: {
            m.setZero();
            for (int i = 0; i + 1 < n; ++i) {
                const double h = b[i + 1] - b[i];
                if (!(h > 0.0)) throw ArgError("assemble: fem_hat needs strictly sorted nodes");
                m(i, i) += h / 3.0;
                m(i + 1, i + 1) += h / 3.0;
                m(i, i + 1) = m(i + 1, i) = h / 6.0;
            }
            if (std::is_same_v<T, float>)
                m = m.cast<float>().template cast<double>();
            break;
        }
    }
    return m;
}

} // namespace

GramMatrix assemble(const KernelSpec& spec, const BiasGrid& grid, Precision prec) {
    const int n = grid.n();
    if (n < 1) throw ArgError("assemble: empty grid");
    if (n > kMaxDenseOrder)
        throw CapacityError("assemble: n = " + std::to_string(n) + " exceeds cap " +
                            std::to_string(kMaxDenseOrder));
    GramMatrix gm;
    gm.precision = prec;
    gm.basis_desc = spec.describe(grid);
    gm.entries = prec == Precision::f32 ? assemble_entries<float>(spec, grid)
                                        : assemble_entries<double>(spec, grid);
    return gm;
}

GramMatrix assemble_dD(const DirBiasGrid& grid, Precision prec, int outer_points) {
    const int n = grid.n();
    if (n < 1) throw ArgError("assemble_dD: empty grid");
    if (n > kMaxDenseOrder)
        throw CapacityError("assemble_dD: n = " + std::to_string(n) + " exceeds cap " +
                            std::to_string(kMaxDenseOrder));
    GramMatrix gm;
    gm.precision = prec;
    gm.basis_desc = "relu_" + std::to_string(grid.dim()) + "d n=" + std::to_string(n);
    gm.entries.resize(n, n);
    parallel_for(n, [&](int i) {
        for (int j = i; j < n; ++j) {
            double v = kernel_relu_dD(grid.w.row(i), grid.b[i], grid.w.row(j), grid.b[j],
                                      outer_points);
            if (prec == Precision::f32) v = static_cast<float>(v);
            gm.entries(i, j) = v;
            gm.entries(j, i) = v;
        }
    });
    return gm;
}

void export_gram_csv(const GramMatrix& gm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_gram_csv: cannot open " + path);
    out << "# gram n=" << gm.n() << " basis=" << gm.basis_desc << "\n";
    char buf[32];
    for (int i = 0; i < gm.n(); ++i) {
        for (int j = 0; j < gm.n(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", gm.entries(i, j));
            out << buf << (j + 1 == gm.n() ? '\n' : ',');
        }
    }
}

} // namespace gramlab
