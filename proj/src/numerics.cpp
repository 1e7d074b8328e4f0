#include "gramlab/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace gramlab {

Precision parse_precision(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    throw ConfigError("unknown precision '" + s + "' (expected f32 or f64)");
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes

namespace {

std::pair<std::vector<double>, std::vector<double>> compute_gauss_legendre(int p) {
    std::vector<double> x(p), w(p);
    const int m = (p + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_p.
        double z = std::cos(M_PI * (i + 0.75) / (p + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < p; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = p * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[p - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[p - 1 - i] = w[i];
    }
    if (p % 2 == 1) x[p / 2] = 0.0;
    return {std::move(x), std::move(w)};
}

} // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_nodes(int p) {
    if (p < 1 || p > 100000) throw ArgError("gauss_legendre_nodes: points must be in [1, 1e5]");
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, compute_gauss_legendre(p)).first;
    return it->second;
}

namespace detail {
void check_rule(const QuadratureRule& r) {
    if (!(r.lo < r.hi)) throw ArgError("quadrature: empty interval");
    const int min_pts = r.kind == QuadratureRule::Kind::trapezoid ? 2 : 1;
    if (r.points < min_pts) throw ArgError("quadrature: too few points");
}
} // namespace detail

// ---------------------------------------------------------------------------
// composite quadrature

CompositeGrid composite_grid(double lo, double hi, std::vector<double> splits,
                             int points_per_piece) {
    if (!(lo < hi)) throw ArgError("composite_grid: empty interval");
    if (points_per_piece < 1) throw ArgError("composite_grid: points_per_piece < 1");
    std::vector<double> bk;
    bk.push_back(lo);
    std::sort(splits.begin(), splits.end());
    for (double s : splits)
        if (s > lo && s < hi && (bk.empty() || s > bk.back() + 1e-15)) bk.push_back(s);
    bk.push_back(hi);

    CompositeGrid g;
    g.breaks = bk;
    const auto& [xs, ws] = gauss_legendre_nodes(points_per_piece);
    for (std::size_t j = 0; j + 1 < bk.size(); ++j) {
        g.piece_start.push_back(g.x.size());
        const double mid = 0.5 * (bk[j] + bk[j + 1]);
        const double half = 0.5 * (bk[j + 1] - bk[j]);
        for (int i = 0; i < points_per_piece; ++i) {
            g.x.push_back(mid + half * xs[i]);
            g.w.push_back(half * ws[i]);
        }
    }
    return g;
}

double integrate_composite(const std::function<double(double)>& f, double lo, double hi,
                           std::vector<double> splits, int points_per_piece) {
    const CompositeGrid g = composite_grid(lo, hi, std::move(splits), points_per_piece);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * f(g.x[i]);
    return acc;
}

// ---------------------------------------------------------------------------
// bisection

double bisect(const std::function<double(double)>& g, double lo, double hi, double tol,
              int max_iter) {
    if (!(lo < hi)) throw ArgError("bisect: empty interval");
    double flo = g(lo), fhi = g(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw BracketError("bisect: no sign change over [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at floating point resolution
        const double fm = g(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// symmetric eigenproblems

EigResult sym_eig(const Eigen::MatrixXd& a, bool want_vectors, Precision prec) {
    if (a.rows() != a.cols()) throw ShapeError("sym_eig: matrix is not square");
    const int n = static_cast<int>(a.rows());
    if (n == 0) throw ShapeError("sym_eig: empty matrix");
    if (n > kMaxDenseOrder)
        throw CapacityError("sym_eig: order " + std::to_string(n) + " exceeds cap " +
                            std::to_string(kMaxDenseOrder));
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double sym_tol = (prec == Precision::f32 ? 1e-4 : 1e-10) * scale;
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol)
        throw ShapeError("sym_eig: matrix asymmetry " + std::to_string(asym) +
                         " above tolerance");

    EigResult out;
    const auto decompose = [&](auto mat) {
        using Mat = decltype(mat);
        Eigen::SelfAdjointEigenSolver<Mat> solver(
            mat, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw EigError("sym_eig: solver did not converge");
        out.values = solver.eigenvalues().template cast<double>().reverse();
        if (want_vectors)
            out.vectors = solver.eigenvectors().template cast<double>().rowwise().reverse();
    };
    if (prec == Precision::f32) {
        decompose(Eigen::MatrixXf(((a + a.transpose()) / 2.0).cast<float>()));
    } else {
        decompose(Eigen::MatrixXd((a + a.transpose()) / 2.0));
    }
    return out;
}

PinvSolution svd_pinv_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& y, double eta,
                            Precision prec) {
    if (b.rows() != y.size()) throw ShapeError("svd_pinv_solve: rhs length mismatch");
    if (b.rows() == 0 || b.cols() == 0) throw ShapeError("svd_pinv_solve: empty matrix");
    if (eta < 0.0) throw ArgError("svd_pinv_solve: eta must be >= 0");

    PinvSolution out;
    const auto solve = [&](auto mat, auto rhs) {
        using Mat = decltype(mat);
        using Vec = decltype(rhs);
        using Scalar = typename Mat::Scalar;
        Eigen::BDCSVD<Mat> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() ? static_cast<double>(sv(0)) : 0.0;
        const double eps = machine_eps(prec);
        const double cut = (eta > 0.0 ? eta : static_cast<double>(mat.rows()) * eps) * smax;
        Vec c = svd.matrixU().transpose() * rhs;
        Vec z = Vec::Zero(sv.size());
        int rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (static_cast<double>(sv(k)) > cut && sv(k) > Scalar(0)) {
                z(k) = c(k) / sv(k);
                ++rank;
            }
        }
        out.x = (svd.matrixV() * z).template cast<double>();
        out.rank = rank;
        out.rank_warning = (rank == 0);
        out.sigma_max = smax;
        out.cutoff = cut;
    };
    if (prec == Precision::f32) {
        solve(Eigen::MatrixXf(b.cast<float>()), Eigen::VectorXf(y.cast<float>()));
    } else {
        solve(b, y);
    }
    return out;
}

// ---------------------------------------------------------------------------
// log-log slope

SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                          int i_lo, int i_hi) {
    if (xs.size() != ys.size()) throw ShapeError("fit_loglog_slope: length mismatch");
    if (i_lo < 0 || i_hi >= static_cast<int>(xs.size()) || i_hi - i_lo + 1 < 2)
        throw ArgError("fit_loglog_slope: window must hold at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const int m = i_hi - i_lo + 1;
    for (int i = i_lo; i <= i_hi; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw ArgError("fit_loglog_slope: nonpositive value at index " + std::to_string(i));
        const double lx = std::log10(xs[i]), ly = std::log10(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double det = m * sxx - sx * sx;
    if (det <= 0.0) throw NumericalError("fit_loglog_slope: degenerate abscissae");
    SlopeFit fit;
    fit.count = m;
    fit.slope = (m * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / m;
    const double ss_tot = syy - sy * sy / m;
    double ss_res = 0.0;
    for (int i = i_lo; i <= i_hi; ++i) {
        const double r = std::log10(ys[i]) - (fit.intercept + fit.slope * std::log10(xs[i]));
        ss_res += r * r;
    }
    fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------
// random streams

namespace {
std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t s = seed ^ 0x6a09e667f3bcc908ULL;
    const std::uint64_t a = splitmix64(s);
    s ^= stream_id * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
    const std::uint64_t b = splitmix64(s);
    eng_.seed(a ^ (b << 1 | b >> 63));
}

std::uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform01(); }

double RngStream::normal(double mean, double sd) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + sd * spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + sd * u * f;
}

int RngStream::uniform_int(int lo, int hi) {
    if (hi < lo) throw ArgError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
}

RngStream RngStream::substream(std::uint64_t id) const {
    return RngStream(seed_, stream_id_ * 0x100000001b3ULL + id + 1);
}

// ---------------------------------------------------------------------------
// threading

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRAMLAB_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) hw = t;
    }
    const int threads = std::max(1, std::min({hw, n, 64}));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr err;
    std::mutex err_mtx;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mtx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace gramlab
