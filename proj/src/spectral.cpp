#include "gramlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gramlab/errors.hpp"

namespace gramlab {

Spectrum spectrum(const GramMatrix& gm, bool want_vectors) {
    EigResult er = sym_eig(gm.entries, want_vectors, gm.precision);
    Spectrum s;
    s.values.assign(er.values.data(), er.values.data() + er.values.size());
    s.vectors = std::move(er.vectors);
    s.source = gm.basis_desc;
    s.precision = gm.precision;
    return s;
}

ContinuumComparison compare_to_continuum(const Spectrum& s,
                                         const std::vector<double>& mu,
                                         int n_basis, int K) {
    if (K < 1) throw ArgError("compare_to_continuum: K must be >= 1");
    if (K > s.n() || K > static_cast<int>(mu.size()))
        throw ArgError("compare_to_continuum: K exceeds available eigenvalues (" +
                       std::to_string(s.n()) + " discrete, " +
                       std::to_string(mu.size()) + " continuum)");
    ContinuumComparison cc;
    cc.per_k.resize(K);
    cc.ratio.resize(K);
    const double half_n = 0.5 * n_basis;
    for (int k = 0; k < K; ++k) {
        const double target = half_n * mu[k];
        cc.per_k[k] = std::abs(s.values[k] - target);
        cc.ratio[k] = s.values[k] / target;
        cc.max_dev = std::max(cc.max_dev, cc.per_k[k]);
    }
    return cc;
}

ConditionGrowth condition_growth(const std::vector<int>& ns, const KernelSpec& spec) {
    if (ns.size() < 2) throw ArgError("condition_growth: need at least two sizes");
    for (size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1]) throw ArgError("condition_growth: sizes must be ascending");

    ConditionGrowth cg;
    const double eps = machine_eps(Precision::f64);
    for (int n : ns) {
        BiasGrid grid = BiasGrid::equispaced(n);
        GramMatrix gm = assemble(spec, grid, Precision::f64);
        // An inclusive grid can carry structurally void basis functions
        // (relu(z - 1) vanishes identically on [-1,1]), whose Gram columns
        // are exactly zero.  kappa is the condition number of the span of
        // the remaining ones; a zero diagonal identifies a void column in a
        // PSD matrix.
        std::vector<int> keep;
        for (int i = 0; i < gm.n(); ++i)
            if (gm.entries(i, i) > 0.0) keep.push_back(i);
        const int m = static_cast<int>(keep.size());
        Eigen::MatrixXd sub(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) sub(i, j) = gm.entries(keep[i], keep[j]);
        EigResult er = sym_eig(sub, false, Precision::f64);
        const double l1 = er.values[0];
        const double ln = er.values[m - 1];
        if (!(ln > 10.0 * eps * l1)) {
            cg.ns_floored.push_back(n);
            continue;
        }
        cg.ns_used.push_back(n);
        cg.kappas.push_back(l1 / ln);
    }
    if (cg.ns_used.size() < 2)
        throw PrecisionFloorError(
            "condition_growth: fewer than two sizes above the precision floor");
    std::vector<double> xs(cg.ns_used.begin(), cg.ns_used.end());
    SlopeFit fit = fit_loglog_slope(xs, cg.kappas, 0, static_cast<int>(xs.size()) - 1);
    cg.exponent = fit.slope;
    cg.r2 = fit.r2;
    return cg;
}

EigenmodeSamples eigenmode_function(const Spectrum& s, int k, const BiasGrid& grid) {
    if (s.vectors.size() == 0)
        throw ArgError("eigenmode_function: spectrum was computed without vectors");
    if (k < 1 || k > s.n())
        throw ArgError("eigenmode_function: mode index " + std::to_string(k) +
                       " outside [1," + std::to_string(s.n()) + "]");
    const int n = s.n();
    if (static_cast<int>(grid.b.size()) != n)
        throw ShapeError("eigenmode_function: grid size does not match spectrum");

    Eigen::VectorXd v = s.vectors.col(k - 1);
    double vmax = v.cwiseAbs().maxCoeff();
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 0.1 * vmax) {
            sign = (v[i] >= 0.0) ? 1.0 : -1.0;
            break;
        }
    }
    const double scale = sign * std::sqrt(0.5 * n);

    EigenmodeSamples em;
    em.k = k;
    em.b.resize(n);
    em.value.resize(n);
    for (int i = 0; i < n; ++i) {
        em.b[i] = grid.b[i];
        em.value[i] = scale * v[i];
    }
    // Count strict sign changes, ignoring entries indistinguishable from 0 at
    // the eigensolver's accuracy (they would otherwise inject spurious flips).
    const double floor = 1e-8 * vmax * std::sqrt(0.5 * n);
    int last_sign = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(em.value[i]) <= floor) continue;
        int cur = em.value[i] > 0.0 ? 1 : -1;
        if (last_sign != 0 && cur != last_sign) ++em.sign_changes;
        last_sign = cur;
    }
    return em;
}

DecayFit fit_decay(const Spectrum& s, int k_lo, int k_hi) {
    if (k_lo < 1 || k_hi > s.n() || k_lo >= k_hi)
        throw ArgError("fit_decay: bad window [" + std::to_string(k_lo) + "," +
                       std::to_string(k_hi) + "] for n=" + std::to_string(s.n()));
    const double floor = 100.0 * machine_eps(s.precision) * s.values.front();
    int hi = k_hi;
    while (hi >= k_lo && s.values[hi - 1] < floor) --hi;
    if (hi - k_lo < 1)
        throw PrecisionFloorError(
            "fit_decay: window collapsed below the resolvable eigenvalue floor");

    std::vector<double> ks, ls;
    ks.reserve(hi - k_lo + 1);
    for (int k = k_lo; k <= hi; ++k) {
        ks.push_back(k);
        ls.push_back(s.values[k - 1]);
    }
    SlopeFit fit = fit_loglog_slope(ks, ls, 0, static_cast<int>(ks.size()) - 1);
    DecayFit df;
    df.slope = fit.slope;
    df.intercept = fit.intercept;
    df.r2 = fit.r2;
    df.k_lo = k_lo;
    df.k_hi = hi;
    return df;
}

DecayFit slope_for_family(const KernelSpec& spec, int n, int k_lo, int k_hi,
                          Precision prec) {
    BiasGrid grid = BiasGrid::equispaced(n);
    GramMatrix gm = assemble(spec, grid, prec);
    Spectrum s = spectrum(gm, false);
    return fit_decay(s, k_lo, k_hi);
}

void export_spectrum_csv(const std::string& path, const Spectrum& s) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_spectrum_csv: cannot open " + path);
    out << "k,lambda_k\n";
    char buf[64];
    for (int k = 0; k < s.n(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.values[k]);
        out << (k + 1) << ',' << buf << '\n';
    }
}

void export_eigenmode_csv(const std::string& path, const EigenmodeSamples& em) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_eigenmode_csv: cannot open " + path);
    out << "b,value\n";
    char buf[64];
    for (size_t i = 0; i < em.b.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", em.b[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", em.value[i]);
        out << buf << '\n';
    }
}

}  // namespace gramlab
