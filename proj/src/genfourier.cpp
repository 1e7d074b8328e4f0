#include "gramlab/genfourier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace gramlab {

namespace {

// Pole-free form of tan(c) tanh(c) = s: g(c) = sin(c) tanh(c) - s cos(c).
double root_fn(double c, int s) { return std::sin(c) * std::tanh(c) - s * std::cos(c); }

// For large k the root is within e^{-2c} of a bracket endpoint, closer than
// double precision can separate; the endpoint is then the root to full
// working accuracy.
double find_root(double lo, double hi, int s) {
    const double flo = root_fn(lo, s), fhi = root_fn(hi, s);
    if ((flo > 0.0) == (fhi > 0.0)) return s > 0 ? lo : hi;
    return bisect([s](double c) { return root_fn(c, s); }, lo, hi, 1e-15, 200);
}

struct HypRatios {
    double cosh_ratio; // cosh(c x)/cosh(c) or /sinh(c)
    double sinh_ratio; // sinh(c x)/cosh(c) or /sinh(c)
};

// e^{-c(1-x)} and e^{-c(1+x)} stay in [0,1] on the domain, so these ratios
// never overflow no matter how large c grows.
HypRatios ratios_over_cosh(double c, double x) {
    const double e1 = std::exp(-c * (1.0 - x)), e2 = std::exp(-c * (1.0 + x));
    const double den = 1.0 + std::exp(-2.0 * c);
    return {(e1 + e2) / den, (e1 - e2) / den};
}

HypRatios ratios_over_sinh(double c, double x) {
    const double e1 = std::exp(-c * (1.0 - x)), e2 = std::exp(-c * (1.0 + x));
    const double den = 1.0 - std::exp(-2.0 * c);
    return {(e1 + e2) / den, (e1 - e2) / den};
}

} // namespace

GenFourierMode gf_mode(int k) {
    if (k < 1) throw ArgError("gf_mode: k must be >= 1");
    GenFourierMode m;
    m.k = k;
    const int j = (k - 1) / 2;
    if (k % 2 == 1) {
        m.branch = ModeBranch::sin_like;
        m.c = find_root((j + 0.25) * M_PI, (j + 0.5) * M_PI, +1);
        m.trig_coef = -std::sin(m.c);
        const double c = m.c;
        const double sech = 1.0 / std::cosh(std::min(c, 700.0));
        const double sech2 = c > 700.0 ? 0.0 : sech * sech;
        const double nsq = 1.0 - std::sin(2.0 * c) / (2.0 * c) +
                           std::sin(c) * std::sin(c) * (std::tanh(c) / c + sech2);
        m.norm = 1.0 / std::sqrt(nsq);
    } else {
        m.branch = ModeBranch::cos_like;
        m.c = find_root((j + 0.5) * M_PI, (j + 0.75) * M_PI, -1);
        m.trig_coef = -std::cos(m.c);
        const double c = m.c;
        const double csch = c > 700.0 ? 0.0 : 1.0 / std::sinh(c);
        const double nsq = 1.0 + std::sin(2.0 * c) / (2.0 * c) +
                           std::cos(c) * std::cos(c) * (1.0 / (std::tanh(c) * c) - csch * csch);
        m.norm = 1.0 / std::sqrt(nsq);
    }
    return m;
}

double eval_mode(const GenFourierMode& m, double x, int deriv) {
    if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12)
        throw DomainError("eval_mode: x must lie in [-1,1]");
    if (deriv < 0 || deriv > 2) throw ArgError("eval_mode: deriv must be 0, 1 or 2");
    const double c = m.c, cx = c * x;
    if (m.branch == ModeBranch::sin_like) {
        // N [ sin(cx) - sin(c) cosh(cx)/cosh(c) ]
        const HypRatios h = ratios_over_cosh(c, x);
        switch (deriv) {
            case 0: return m.norm * (std::sin(cx) + m.trig_coef * h.cosh_ratio);
            case 1: return m.norm * c * (std::cos(cx) + m.trig_coef * h.sinh_ratio);
            default: return m.norm * c * c * (-std::sin(cx) + m.trig_coef * h.cosh_ratio);
        }
    }
    // N [ cos(cx) - cos(c) sinh(cx)/sinh(c) ]
    const HypRatios h = ratios_over_sinh(c, x);
    switch (deriv) {
        case 0: return m.norm * (std::cos(cx) + m.trig_coef * h.sinh_ratio);
        case 1: return m.norm * c * (-std::sin(cx) + m.trig_coef * h.cosh_ratio);
        default: return m.norm * c * c * (-std::cos(cx) + m.trig_coef * h.sinh_ratio);
    }
}

std::vector<double> continuous_eigenvalues(int k_max) {
    if (k_max < 1) throw ArgError("continuous_eigenvalues: k_max must be >= 1");
    std::vector<double> mu(k_max);
    for (int k = 1; k <= k_max; ++k) mu[k - 1] = gf_mode(k).mu();
    return mu;
}

std::vector<double> gft(const std::function<double(double)>& g, int m_max,
                        const QuadratureRule& rule) {
    if (m_max < 1) throw ArgError("gft: m_max must be >= 1");
    const GenFourierMode top = gf_mode(m_max);
    const int required = static_cast<int>(std::ceil(8.0 * top.c / M_PI));
    if (rule.points < required)
        throw ResolutionError("gft: mode " + std::to_string(m_max) + " needs at least " +
                              std::to_string(required) + " quadrature points, got " +
                              std::to_string(rule.points));
    std::vector<double> coef(m_max);
    for (int m = 1; m <= m_max; ++m) {
        const GenFourierMode mode_m = (m == m_max) ? top : gf_mode(m);
        coef[m - 1] = integrate(
            [&](double x) { return g(x) * eval_mode(mode_m, x, 0); }, rule);
    }
    return coef;
}

std::pair<double, double> leaky_leading_eigenvalue_bounds(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ArgError("leaky_leading_eigenvalue_bounds: alpha must lie in [0,1]");
    const double a = alpha;
    const double poly =
        728.0 - 323.0 * a + 450.0 * a * a - 323.0 * a * a * a + 728.0 * a * a * a * a;
    const double lower = 2.0 * std::sqrt(poly / 2835.0);

    static const double ups[9] = {1370738.0, -172283.0, 394834.0, -98757.0, 164086.0,
                                  -98757.0,  394834.0,  -172283.0, 1370738.0};
    double acc = 0.0, p = 1.0;
    for (int i = 0; i < 9; ++i, p *= a) acc += ups[i] * p;
    const double upper = std::sqrt(512.0 / 212837625.0 * acc);
    return {lower, upper};
}

void export_mode_table_csv(const std::string& path, int k_max) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_mode_table_csv: cannot open " + path);
    out << "k,c_k,mu_k,branch\n";
    char buf[64];
    for (int k = 1; k <= k_max; ++k) {
        const GenFourierMode m = gf_mode(k);
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%s\n", k, m.c, m.mu(),
                      m.branch == ModeBranch::sin_like ? "sin_like" : "cos_like");
        out << buf;
    }
}

} // namespace gramlab
