#include "gramlab/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gramlab/approx.hpp"
#include "gramlab/dynamics.hpp"
#include "gramlab/errors.hpp"
#include "gramlab/genfourier.hpp"
#include "gramlab/gram.hpp"
#include "gramlab/rashomon.hpp"
#include "gramlab/report.hpp"
#include "gramlab/spectral.hpp"

namespace gramlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

std::string g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ArgError("cannot open output file " + path);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string RecipeContext::str(const std::string& key, const std::string& def) const {
    auto it = params.find(key);
    return it == params.end() ? def : it->second;
}

long long RecipeContext::i64(const std::string& key, long long def) const {
    auto it = params.find(key);
    if (it == params.end()) return def;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

double RecipeContext::dbl(const std::string& key, double def) const {
    auto it = params.find(key);
    if (it == params.end()) return def;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected number, got '" + it->second + "'");
    }
}

std::vector<long long> RecipeContext::i64_list(const std::string& key,
                                               const std::string& def) const {
    const std::string raw = str(key, def);
    std::vector<long long> out;
    for (const std::string& tok : split_list(raw)) {
        try {
            out.push_back(std::stoll(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected integer list, got '" + raw + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::vector<double> RecipeContext::dbl_list(const std::string& key,
                                            const std::string& def) const {
    const std::string raw = str(key, def);
    std::vector<double> out;
    for (const std::string& tok : split_list(raw)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected number list, got '" + raw + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::string RecipeContext::path(const std::string& file) const {
    if (out_dir.empty() || out_dir == ".") return file;
    return out_dir + "/" + file;
}

// ---------------------------------------------------------------------------
// shared pieces

namespace {

BiasGrid build_grid(const RecipeContext& ctx, int n, const std::string& kind,
                    const std::string& adapt_target) {
    if (kind == "equispaced" || kind == "uniform") return BiasGrid::equispaced(n);
    if (kind == "adaptive") {
        const TargetFunction f = TargetFunction::parse(adapt_target);
        return make_adaptive_grid([f](double x) { return f(x); },
                                  [f](double x) { return f.deriv(x); }, n,
                                  QuadratureRule::gauss(2048));
    }
    if (kind == "iid") return BiasGrid::iid_uniform(n, ctx.seed);
    throw ConfigError("grid must be equispaced, adaptive or iid (got '" + kind + "')");
}

KernelSpec build_kernel(const RecipeContext& ctx) {
    const std::string act = ctx.str("act", "relu");
    if (act == "relu") return KernelSpec::relu();
    if (act == "fem") return KernelSpec::fem_hat();
    if (act.rfind("leaky", 0) == 0) return KernelSpec::leaky(ctx.dbl("alpha", 0.1));
    // Everything else goes through the quadrature kernel.
    return KernelSpec::general(Activation::parse(act), {},
                               static_cast<int>(ctx.i64("quad_points", 64)));
}

void maybe_plot(const RecipeContext& ctx, const std::string& csv, const std::string& svg,
                PlotKind kind) {
    if (!ctx.plots) return;
    emit_plot(ctx.path(csv), ctx.path(svg), kind);
}

void write_decay_fit(const RecipeContext& ctx, const std::string& file, const DecayFit& fit) {
    auto out = open_out(ctx.path(file));
    out << "slope,intercept,r2,k_lo,k_hi\n";
    out << g17(fit.slope) << ',' << g17(fit.intercept) << ',' << g17(fit.r2) << ','
        << fit.k_lo << ',' << fit.k_hi << '\n';
}

TargetFunction target_of(const RecipeContext& ctx, const std::string& key,
                         const std::string& def) {
    return TargetFunction::parse(ctx.str(key, def));
}

std::function<double(double)> as_fn(const TargetFunction& f) {
    return [f](double x) { return f(x); };
}

// ---------------------------------------------------------------------------
// spectra

void recipe_spectrum1d(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 1000));
    const BiasGrid grid =
        build_grid(ctx, n, ctx.str("grid", "equispaced"), ctx.str("adapt_target", "arctan25"));
    const KernelSpec spec = build_kernel(ctx);
    const GramMatrix gm = assemble(spec, grid, ctx.precision);
    const Spectrum s = spectrum(gm);
    export_spectrum_csv(ctx.path("spectrum.csv"), s);
    const DecayFit fit = fit_decay(s, static_cast<int>(ctx.i64("k_lo", 5)),
                                   static_cast<int>(ctx.i64("k_hi", 100)));
    write_decay_fit(ctx, "fit.csv", fit);
    maybe_plot(ctx, "spectrum.csv", "spectrum.svg", PlotKind::loglog);
}

void recipe_spectrum2d(const RecipeContext& ctx) {
    const int nt = static_cast<int>(ctx.i64("n_theta", 40));
    const int nb = static_cast<int>(ctx.i64("n_b", 40));
    const DirBiasGrid grid = DirBiasGrid::product_2d(nt, nb);
    const GramMatrix gm =
        assemble_dD(grid, ctx.precision, static_cast<int>(ctx.i64("outer_points", 64)));
    const Spectrum s = spectrum(gm);
    export_spectrum_csv(ctx.path("spectrum.csv"), s);
    const DecayFit fit = fit_decay(s, static_cast<int>(ctx.i64("k_lo", 10)),
                                   static_cast<int>(ctx.i64("k_hi", 200)));
    write_decay_fit(ctx, "fit.csv", fit);
    maybe_plot(ctx, "spectrum.csv", "spectrum.svg", PlotKind::loglog);
}

void recipe_eigenmodes1d(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 1000));
    const BiasGrid grid =
        build_grid(ctx, n, ctx.str("grid", "equispaced"), ctx.str("adapt_target", "arctan25"));
    const GramMatrix gm = assemble(build_kernel(ctx), grid, ctx.precision);
    const Spectrum s = spectrum(gm, true);
    const std::vector<long long> ks = ctx.i64_list("modes", "1,2,3,11");

    std::vector<EigenmodeSamples> ems;
    for (long long k : ks) ems.push_back(eigenmode_function(s, static_cast<int>(k), grid));

    auto out = open_out(ctx.path("eigenmodes.csv"));
    out << "# eigenvectors as functions of the bias grid (scaled by sqrt(n/2))\n";
    out << "b";
    for (long long k : ks) out << ",mode_" << k;
    out << '\n';
    for (std::size_t i = 0; i < ems.front().b.size(); ++i) {
        out << g17(ems.front().b[i]);
        for (const auto& em : ems) out << ',' << g17(em.value[i]);
        out << '\n';
    }
    out.close();

    auto sm = open_out(ctx.path("sign_changes.csv"));
    sm << "k,sign_changes\n";
    for (const auto& em : ems) sm << em.k << ',' << em.sign_changes << '\n';
    sm.close();
    maybe_plot(ctx, "eigenmodes.csv", "eigenmodes.svg", PlotKind::line);
}

void recipe_eigenmodes2d(const RecipeContext& ctx) {
    const int nt = static_cast<int>(ctx.i64("n_theta", 24));
    const int nb = static_cast<int>(ctx.i64("n_b", 24));
    const DirBiasGrid grid = DirBiasGrid::product_2d(nt, nb);
    const GramMatrix gm =
        assemble_dD(grid, ctx.precision, static_cast<int>(ctx.i64("outer_points", 64)));
    const Spectrum s = spectrum(gm, true);
    const std::vector<long long> ks = ctx.i64_list("modes", "1,2,3,4");
    for (long long k : ks)
        if (k < 1 || k > s.n()) throw ConfigError("modes: index out of range");

    auto out = open_out(ctx.path("eigenmodes2d.csv"));
    out << "theta,b";
    for (long long k : ks) out << ",mode_" << k;
    out << '\n';
    const int n = s.n();
    for (int i = 0; i < n; ++i) {
        const double theta = std::atan2(grid.w(i, 1), grid.w(i, 0));
        out << g17(theta) << ',' << g17(grid.b[i]);
        for (long long k : ks) out << ',' << g17(s.vectors(i, static_cast<int>(k) - 1));
        out << '\n';
    }
}

void recipe_continuum_compare(const RecipeContext& ctx) {
    const std::vector<long long> ns = ctx.i64_list("ns", "250,500,1000");
    const int K = static_cast<int>(ctx.i64("k_max", 20));
    const std::vector<double> mu = continuous_eigenvalues(K);

    auto out = open_out(ctx.path("continuum.csv"));
    out << "n,max_dev\n";
    std::vector<double> last_lambda;
    int last_n = 0;
    for (long long n : ns) {
        const BiasGrid grid = BiasGrid::equispaced(static_cast<int>(n));
        const Spectrum s = spectrum(assemble(KernelSpec::relu(), grid, ctx.precision));
        const ContinuumComparison cc = compare_to_continuum(s, mu, static_cast<int>(n), K);
        out << n << ',' << g17(cc.max_dev) << '\n';
        last_lambda.assign(s.values.begin(), s.values.begin() + K);
        last_n = static_cast<int>(n);
    }
    out.close();

    auto pk = open_out(ctx.path("per_k.csv"));
    pk << "k,lambda,half_n_mu\n";
    for (int k = 0; k < K; ++k)
        pk << k + 1 << ',' << g17(last_lambda[k]) << ',' << g17(0.5 * last_n * mu[k]) << '\n';
}

void recipe_condition_growth(const RecipeContext& ctx) {
    const std::vector<long long> ns64 = ctx.i64_list("ns", "50,100,200,400");
    std::vector<int> ns(ns64.begin(), ns64.end());
    const std::string basis = ctx.str("basis", "relu");
    const KernelSpec spec = basis == "fem" ? KernelSpec::fem_hat() : KernelSpec::relu();
    const ConditionGrowth cg = condition_growth(ns, spec);

    auto out = open_out(ctx.path("kappa.csv"));
    out << "# condition number growth, basis=" << basis << "\n";
    out << "n,kappa\n";
    for (std::size_t i = 0; i < cg.ns_used.size(); ++i)
        out << cg.ns_used[i] << ',' << g17(cg.kappas[i]) << '\n';
    out.close();

    auto fit = open_out(ctx.path("growth.csv"));
    fit << "exponent,r2,sizes_used,sizes_floored\n";
    fit << g17(cg.exponent) << ',' << g17(cg.r2) << ',' << cg.ns_used.size() << ','
        << cg.ns_floored.size() << '\n';
    fit.close();
    maybe_plot(ctx, "kappa.csv", "kappa.svg", PlotKind::loglog);
}

void recipe_genfourier_table(const RecipeContext& ctx) {
    export_mode_table_csv(ctx.path("modes.csv"), static_cast<int>(ctx.i64("k_max", 30)));
}

void recipe_projections(const RecipeContext& ctx) {
    const TargetFunction f = target_of(ctx, "target", "arctan25");
    const int n = static_cast<int>(ctx.i64("n", 1000));
    const BiasGrid grid =
        build_grid(ctx, n, ctx.str("grid", "equispaced"), ctx.str("adapt_target", "arctan25"));
    const Spectrum s = spectrum(assemble(KernelSpec::relu(), grid, ctx.precision), true);
    const std::vector<double> coeffs = project_on_eigenmodes(f, s, grid);

    auto out = open_out(ctx.path("projections.csv"));
    out << "# |<f, phi_k>| on the eigenmode basis, target=" << f.name() << "\n";
    out << "k,coeff\n";
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        out << k + 1 << ',' << g17(coeffs[k]) << '\n';
    out.close();

    const double frac = ctx.dbl("energy_frac", 0.99);
    auto sm = open_out(ctx.path("summary.csv"));
    sm << "energy_frac,modes_needed,resolvable_f32,resolvable_f64\n";
    sm << g17(frac) << ',' << modes_for_energy(coeffs, frac) << ','
       << resolvable_mode_count(Precision::f32, 1) << ','
       << resolvable_mode_count(Precision::f64, 1) << '\n';
    sm.close();
    maybe_plot(ctx, "projections.csv", "projections.svg", PlotKind::loglog);
}

// ---------------------------------------------------------------------------
// approximation tables

void recipe_table1(const RecipeContext& ctx) {
    const TargetFunction f = TargetFunction::arctan25();
    const std::vector<long long> ns = ctx.i64_list("ns", "100,1000");

    auto out = open_out(ctx.path("table1.csv"));
    out << "# sampled least squares on arctan(25x), N = 4n equispaced samples\n";
    out << "precision,basis,grid,n,max_err,mse,rank\n";
    for (Precision prec : {Precision::f32, Precision::f64}) {
        for (const char* basis_kind : {"nn", "fem"}) {
            for (const char* grid_kind : {"uniform", "adaptive"}) {
                for (long long n : ns) {
                    const BiasGrid grid =
                        build_grid(ctx, static_cast<int>(n), grid_kind, "arctan25");
                    const Basis1D basis = std::string(basis_kind) == "nn"
                                              ? Basis1D::nn_relu(grid)
                                              : Basis1D::fem_hat(grid);
                    FitOptions opt;
                    opt.precision = prec;
                    const FitReport rep = ls_fit(basis, f, opt);
                    out << precision_name(prec) << ',' << basis_kind << ',' << grid_kind
                        << ',' << n << ',' << g17(rep.max_err) << ',' << g17(rep.mse) << ','
                        << rep.rank << '\n';
                }
            }
        }
    }
}

void recipe_table2(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 2000));
    const std::vector<double> etas = ctx.dbl_list("etas", "1e-3,1e-6,1e-9");
    const std::vector<std::string> names = split_list(ctx.str("targets", "trig1,trig3,trig9"));
    const BiasGrid grid = BiasGrid::equispaced(n);

    auto out = open_out(ctx.path("table2.csv"));
    out << "# truncated least squares at N = n = " << n << " samples\n";
    out << "basis,eta,target,max_err,mse,rank\n";
    for (const std::string& tn : names) {
        const TargetFunction f = TargetFunction::parse(tn);
        FitOptions opt;
        opt.n_samples = n;
        opt.precision = ctx.precision;

        const FitReport fem = ls_fit(Basis1D::fem_hat(grid), f, opt);
        out << "fem," << g17(fem.eta) << ',' << tn << ',' << g17(fem.max_err) << ','
            << g17(fem.mse) << ',' << fem.rank << '\n';

        for (const FitReport& rep : ls_fit_multi(Basis1D::nn_relu(grid), f, opt, etas)) {
            out << "nn," << g17(rep.eta) << ',' << tn << ',' << g17(rep.max_err) << ','
                << g17(rep.mse) << ',' << rep.rank << '\n';
        }
    }
}

void recipe_table3(const RecipeContext& ctx) {
    const TargetFunction f = TargetFunction::lowtrig();
    const int n = static_cast<int>(ctx.i64("n", 1000));
    const std::vector<double> etas = ctx.dbl_list("etas", "1e-3,1e-6,1e-9");
    const BiasGrid grid = BiasGrid::equispaced(n);

    NoiseSpec noise;
    noise.lo = ctx.dbl("noise_lo", -0.5);
    noise.hi = ctx.dbl("noise_hi", 0.5);
    noise.seed = ctx.seed;

    FitOptions opt;
    opt.n_samples = n;
    opt.noise = noise;

    auto out = open_out(ctx.path("table3.csv"));
    out << "# noisy samples: f + U(" << g17(noise.lo) << ',' << g17(noise.hi)
        << "), N = n = " << n << "\n";
    out << "method,eta,precision,max_err,mse,rank\n";

    const FitReport fem = ls_fit(Basis1D::fem_hat(grid), f, opt);
    out << "fem_svd," << g17(fem.eta) << ",f64," << g17(fem.max_err) << ',' << g17(fem.mse)
        << ',' << fem.rank << '\n';

    for (const FitReport& rep : ls_fit_multi(Basis1D::nn_relu(grid), f, opt, etas)) {
        out << "nn_svd," << g17(rep.eta) << ",f64," << g17(rep.max_err) << ',' << g17(rep.mse)
            << ',' << rep.rank << '\n';
    }

    FitOptions aopt = opt;
    aopt.method = FitMethod::adam;
    aopt.adam.iters = static_cast<int>(ctx.i64("adam_iters", 20000));
    aopt.adam.lr = ctx.dbl("adam_lr", 1e-3);
    for (Precision prec : {Precision::f32, Precision::f64}) {
        aopt.precision = prec;
        const FitReport rep = ls_fit(Basis1D::nn_relu(grid), f, aopt);
        out << "nn_adam,0," << precision_name(prec) << ',' << g17(rep.max_err) << ','
            << g17(rep.mse) << ',' << rep.rank << '\n';
    }
}

void recipe_overfit(const RecipeContext& ctx) {
    const TargetFunction f = target_of(ctx, "target", "lowtrig");
    const int N = static_cast<int>(ctx.i64("n_samples", 1000));
    const int n = static_cast<int>(ctx.i64("n_basis", 1500));
    FitOptions opt;
    opt.precision = ctx.precision;
    if (ctx.i64("noise", 0) != 0) {
        NoiseSpec ns;
        ns.seed = ctx.seed;
        opt.noise = ns;
    }
    const OverfitPair pair = overfit_study(f, N, n, opt);

    auto out = open_out(ctx.path("overfit.csv"));
    out << "# underdetermined fits: N=" << N << " samples, n=" << n << " basis functions\n";
    out << "basis,max_err,mse,rank\n";
    out << "fem," << g17(pair.fem.max_err) << ',' << g17(pair.fem.mse) << ',' << pair.fem.rank
        << '\n';
    out << "nn," << g17(pair.nn.max_err) << ',' << g17(pair.nn.mse) << ',' << pair.nn.rank
        << '\n';
    out.close();

    const BiasGrid grid = BiasGrid::equispaced(n);
    const Basis1D fem = Basis1D::fem_hat(grid), nn = Basis1D::nn_relu(grid);
    const int M = static_cast<int>(ctx.i64("curve_points", 1001));
    auto cv = open_out(ctx.path("curves.csv"));
    cv << "x,target,fem,nn\n";
    for (int j = 0; j < M; ++j) {
        const double x = -1.0 + 2.0 * j / (M - 1);
        cv << g17(x) << ',' << g17(f(x)) << ','
           << g17(fem.eval_sum(pair.fem.coef, pair.fem.offset, x)) << ','
           << g17(nn.eval_sum(pair.nn.coef, pair.nn.offset, x)) << '\n';
    }
    cv.close();
    maybe_plot(ctx, "curves.csv", "curves.svg", PlotKind::line);
}

void recipe_scaled_activations(const RecipeContext& ctx) {
    const TargetFunction f = target_of(ctx, "target", "lowtrig");
    const Activation act = Activation::parse(ctx.str("act", "tanh"));
    const int n = static_cast<int>(ctx.i64("n", 200));
    const std::vector<double> scales = ctx.dbl_list("scales", "1,2,4,8,16");
    FitOptions opt;
    opt.precision = ctx.precision;

    auto out = open_out(ctx.path("scaled.csv"));
    out << "# random-feature fits with " << act.name() << "(w (x + b)), w ~ U(-s,s)\n";
    out << "s,max_err,mse,rank\n";
    for (double s : scales) {
        const FitReport rep = scaled_family_fit(act, n, s, f, ctx.seed, opt);
        out << g17(s) << ',' << g17(rep.max_err) << ',' << g17(rep.mse) << ',' << rep.rank
            << '\n';
    }
    out.close();
    maybe_plot(ctx, "scaled.csv", "scaled.svg", PlotKind::loglog);
}

// ---------------------------------------------------------------------------
// dynamics

NetworkParams init_params(const RecipeContext& ctx, int n, const Activation& act) {
    const std::string init = ctx.str("init", "alternating");
    if (init == "alternating") return NetworkParams::init_alternating(n, act);
    if (init == "cosine") return NetworkParams::init_cosine(n, act);
    throw ConfigError("init must be alternating or cosine (got '" + init + "')");
}

void recipe_dynamics_modes(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 100));
    const Activation act = Activation::parse(ctx.str("act", "relu"));
    NetworkParams params = init_params(ctx, n, act);
    const TargetFunction f = target_of(ctx, "target", "sine3");

    TrainConfig cfg;
    cfg.steps = ctx.i64("steps", 200000);
    cfg.step = ctx.dbl("step", 0.0);
    cfg.quad_total = static_cast<int>(ctx.i64("quad_total", 4096));
    cfg.loss_samples = static_cast<int>(ctx.i64("loss_samples", 0));
    cfg.stride = ctx.i64("stride", 0);
    cfg.train_biases = ctx.i64("train_biases", 1) != 0;
    cfg.bias_jitter = ctx.dbl("bias_jitter", 0.0);
    cfg.seed = ctx.seed;
    cfg.record_biases = ctx.i64("record_biases", 0) != 0;
    if (ctx.str("optimizer", "gd") == "adam") {
        cfg.optimizer = TrainConfig::Optimizer::adam;
        cfg.adam.lr = ctx.dbl("adam_lr", 1e-3);
    }
    for (long long k : ctx.i64_list("track", "1,3,5"))
        cfg.track_modes.push_back(static_cast<int>(k));

    const TrainTrace trace = train(params, as_fn(f), cfg);
    export_trace_csv(ctx.path("trace.csv"), trace);

    auto sm = open_out(ctx.path("summary.csv"));
    sm << "k,half_steps,confinement_ok,loss_increases\n";
    for (int k : trace.tracked_modes)
        sm << k << ',' << half_reduction_time(trace, k) << ',' << (trace.confinement_ok ? 1 : 0)
           << ',' << trace.loss_increases << '\n';
    sm.close();
    maybe_plot(ctx, "trace.csv", "trace.svg", PlotKind::line);
}

void recipe_dynamics_scaling(const RecipeContext& ctx) {
    const std::vector<long long> ks = ctx.i64_list("ks", "5,7,9");
    const int beta = static_cast<int>(ctx.i64("beta", 3));
    const std::vector<long long> seeds = ctx.i64_list("seeds", "0,1,2");
    const long long max_steps = ctx.i64("max_steps", 3000000);
    const double jitter = ctx.dbl("bias_jitter", 1e-3);

    auto out = open_out(ctx.path("scaling.csv"));
    out << "seed,k,n,half_steps,half_time\n";
    auto ex = open_out(ctx.path("exponents.csv"));
    ex << "seed,exponent,r2,monotone\n";

    for (long long seed : seeds) {
        std::vector<double> xs, ys;
        bool monotone = true;
        long long prev = -1;
        for (long long k : ks) {
            int n = 1;
            for (int i = 0; i < beta; ++i) n *= static_cast<int>(k);
            NetworkParams params = init_params(ctx, n, Activation::relu());
            TrainConfig cfg;
            cfg.steps = max_steps;
            cfg.quad_total = static_cast<int>(ctx.i64("quad_total", 4096));
            cfg.stride = ctx.i64("stride", 50);
            cfg.track_modes = {static_cast<int>(k)};
            cfg.stop_at_fraction = 0.5;
            cfg.bias_jitter = jitter;
            cfg.seed = static_cast<std::uint64_t>(seed);
            const double kpi = static_cast<double>(k) * kPi;
            const TrainTrace trace =
                train(params, [kpi](double x) { return std::sin(kpi * x); }, cfg);
            const long long half = half_reduction_time(trace, static_cast<int>(k));
            out << seed << ',' << k << ',' << n << ',' << half << ','
                << g17(half >= 0 ? half * trace.gd_step : -1.0) << '\n';
            if (half >= 0) {
                xs.push_back(static_cast<double>(k));
                ys.push_back(static_cast<double>(half));
                if (prev >= 0 && half <= prev) monotone = false;
                prev = half;
            } else {
                monotone = false;
            }
        }
        if (xs.size() >= 2) {
            const SlopeFit fit =
                fit_loglog_slope(xs, ys, 0, static_cast<int>(xs.size()) - 1);
            ex << seed << ',' << g17(fit.slope) << ',' << g17(fit.r2) << ','
               << (monotone ? 1 : 0) << '\n';
        } else {
            ex << seed << ",nan,nan,0\n";
        }
    }
}

void recipe_ls_flow(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 100));
    const int k_ref = static_cast<int>(ctx.i64("k_ref", 10));
    const double mult = ctx.dbl("horizon_mult", 5.0);
    const double dt = ctx.dbl("dt", 1e-3);
    const int checkpoints = static_cast<int>(ctx.i64("checkpoints", 11));
    const TargetFunction f = target_of(ctx, "target", "sine1");

    const BiasGrid grid = BiasGrid::equispaced(n);
    const GramMatrix gm = assemble(KernelSpec::relu(), grid);
    const Eigen::VectorXd F = load_vector(grid, as_fn(f));
    const Eigen::VectorXd a0 = NetworkParams::init_alternating(n).a;

    const Spectrum s = spectrum(gm);
    if (k_ref < 1 || k_ref > s.n()) throw ConfigError("k_ref out of range");
    const double t_final = mult / s.values[k_ref - 1];
    const long long steps = static_cast<long long>(std::ceil(t_final / dt));

    const ModeDecay md = ls_mode_decay(gm, F, a0, t_final, steps, checkpoints);

    auto out = open_out(ctx.path("decay.csv"));
    out << "t,k,analytic,euler,abs_dev\n";
    double max_dev = 0.0;
    for (std::size_t cp = 0; cp < md.times.size(); ++cp) {
        for (int k = 0; k < n; ++k) {
            const double dev = std::abs(md.analytic(cp, k) - md.euler(cp, k));
            max_dev = std::max(max_dev, dev);
            if (k < k_ref)
                out << g17(md.times[cp]) << ',' << k + 1 << ',' << g17(md.analytic(cp, k))
                    << ',' << g17(md.euler(cp, k)) << ',' << g17(dev) << '\n';
        }
    }
    out.close();

    auto sm = open_out(ctx.path("summary.csv"));
    sm << "n,t_final,dt,steps,lambda_1,lambda_ref,max_dev\n";
    sm << n << ',' << g17(t_final) << ',' << g17(md.dt) << ',' << steps << ','
       << g17(md.lambda.front()) << ',' << g17(s.values[k_ref - 1]) << ',' << g17(max_dev)
       << '\n';
}

void recipe_relu_pow_dynamics(const RecipeContext& ctx) {
    const int m = static_cast<int>(ctx.i64("m", 2));
    const std::vector<long long> ks64 = ctx.i64_list("ks", "1,2,3,4,5");
    std::vector<int> ks(ks64.begin(), ks64.end());
    const int n = static_cast<int>(ctx.i64("n", 125));

    TrainConfig cfg;
    cfg.steps = ctx.i64("max_steps", 2000000);
    cfg.quad_total = static_cast<int>(ctx.i64("quad_total", 4096));
    cfg.stride = ctx.i64("stride", 50);
    cfg.seed = ctx.seed;
    const PowComparison pc =
        relu_pow_comparison(m, ks, n, cfg, ctx.dbl("drop_fraction", 0.5));

    auto out = open_out(ctx.path("pow.csv"));
    out << "k,tau\n";
    for (std::size_t i = 0; i < pc.ks.size(); ++i)
        out << pc.ks[i] << ',' << g17(pc.tau[i]) << '\n';
    out.close();

    auto sm = open_out(ctx.path("summary.csv"));
    sm << "m,gamma,r2\n";
    sm << m << ',' << g17(pc.gamma) << ',' << g17(pc.r2) << '\n';
}

void recipe_auxiliary_w(const RecipeContext& ctx) {
    const int n = static_cast<int>(ctx.i64("n", 100));
    const TargetFunction f = target_of(ctx, "target", "sine3");
    NetworkParams params = init_params(ctx, n, Activation::relu());
    const long long steps = ctx.i64("steps", 0);
    if (steps > 0) {
        TrainConfig cfg;
        cfg.steps = steps;
        cfg.quad_total = static_cast<int>(ctx.i64("quad_total", 4096));
        cfg.seed = ctx.seed;
        params = train(params, as_fn(f), cfg).final_params;
    }
    const AuxiliaryW aux =
        auxiliary_w(params, as_fn(f), static_cast<int>(ctx.i64("output_points", 1001)));
    auto out = open_out(ctx.path("w.csv"));
    out << "# w(b) = int_b^1 (x - b) (h - f)(x) dx after " << steps << " steps\n";
    out << "b,w,dw\n";
    for (std::size_t j = 0; j < aux.b.size(); ++j)
        out << g17(aux.b[j]) << ',' << g17(aux.w[j]) << ',' << g17(aux.dw[j]) << '\n';
    out.close();
    maybe_plot(ctx, "w.csv", "w.svg", PlotKind::line);
}

// ---------------------------------------------------------------------------
// rashomon

void recipe_rashomon_sweep(const RecipeContext& ctx) {
    const std::vector<long long> ms = ctx.i64_list("ms", "1,3,9");
    std::vector<RashomonEstimate> rows;
    for (long long m : ms) {
        RashomonConfig cfg;
        cfg.target = RashomonTarget::one_d(TargetFunction::sine(static_cast<int>(m)));
        cfg.n = static_cast<int>(ctx.i64("n", 100));
        cfg.A = ctx.dbl("A", 1.0);
        cfg.eps = ctx.dbl("eps", 0.5);
        cfg.samples = ctx.i64("samples", 10000);
        cfg.seed = ctx.seed;
        cfg.act = Activation::parse(ctx.str("act", "relu"));
        cfg.quad_points = static_cast<int>(ctx.i64("quad_points", 2048));
        const double theta = ctx.dbl("subg_theta", 0.0);
        if (theta > 0) cfg.subgaussian = SubGaussian{theta, ctx.dbl("subg_C", 1.0)};
        rows.push_back(mc_measure(cfg));
    }
    export_estimates_csv(ctx.path("estimates.csv"), rows);
}

}  // namespace

// ---------------------------------------------------------------------------
// registry

const std::vector<Recipe>& recipes() {
    static const std::vector<Recipe> reg = {
        {"spectrum1d", "1D Gram spectrum and its decay-law fit",
         {"n", "grid", "adapt_target", "act", "alpha", "quad_points", "k_lo", "k_hi"},
         recipe_spectrum1d},
        {"spectrum2d", "ridge Gram spectrum on S^1 x [-1,1] and its decay fit",
         {"n_theta", "n_b", "outer_points", "k_lo", "k_hi"}, recipe_spectrum2d},
        {"eigenmodes1d", "leading eigenvectors as functions of the bias grid",
         {"n", "grid", "adapt_target", "act", "alpha", "quad_points", "modes"},
         recipe_eigenmodes1d},
        {"eigenmodes2d", "2D eigenvectors over the (direction, bias) grid",
         {"n_theta", "n_b", "outer_points", "modes"}, recipe_eigenmodes2d},
        {"continuum-compare", "discrete eigenvalues against (n/2) mu_k across sizes",
         {"ns", "k_max"}, recipe_continuum_compare},
        {"condition-growth", "condition number growth over grid sizes",
         {"ns", "basis"}, recipe_condition_growth},
        {"genfourier-table", "mode constants c_k, mu_k and branch labels",
         {"k_max"}, recipe_genfourier_table},
        {"projections", "target energy across the eigenmode basis",
         {"target", "n", "grid", "adapt_target", "energy_frac"}, recipe_projections},
        {"table1", "uniform/adaptive NN and FEM fits of arctan(25x)",
         {"ns"}, recipe_table1},
        {"table2", "cutoff study on the scaled trig family",
         {"n", "etas", "targets"}, recipe_table2},
        {"table3", "noisy-sample fits: SVD cutoffs and Adam",
         {"n", "etas", "noise_lo", "noise_hi", "adam_iters", "adam_lr"}, recipe_table3},
        {"overfit", "underdetermined NN vs FEM interpolation",
         {"target", "n_samples", "n_basis", "noise", "curve_points"}, recipe_overfit},
        {"scaled-activations", "random-feature fits with scaled smooth activations",
         {"target", "act", "n", "scales"}, recipe_scaled_activations},
        {"dynamics-modes", "gradient-descent training trace with mode tracking",
         {"n", "act", "init", "target", "track", "steps", "step", "optimizer", "adam_lr",
          "quad_total", "loss_samples", "stride", "train_biases", "bias_jitter",
          "record_biases"},
         recipe_dynamics_modes},
        {"dynamics-scaling", "half-reduction step scaling over frequencies",
         {"ks", "beta", "seeds", "max_steps", "quad_total", "stride", "bias_jitter", "init"},
         recipe_dynamics_scaling},
        {"ls-flow", "frozen-bias least-squares flow: Euler vs closed form",
         {"n", "k_ref", "horizon_mult", "dt", "checkpoints", "target"}, recipe_ls_flow},
        {"relu-pow-dynamics", "mode half-reduction growth for relu^m units",
         {"m", "ks", "n", "max_steps", "quad_total", "stride", "drop_fraction"},
         recipe_relu_pow_dynamics},
        {"auxiliary-w", "double residual integral w(b) along training",
         {"n", "target", "init", "steps", "quad_total", "output_points"},
         recipe_auxiliary_w},
        {"rashomon-sweep", "Rashomon measures and bounds across frequencies",
         {"ms", "n", "A", "eps", "samples", "act", "quad_points", "subg_theta", "subg_C"},
         recipe_rashomon_sweep},
    };
    return reg;
}

const Recipe* find_recipe(const std::string& name) {
    for (const Recipe& r : recipes())
        if (r.name == name) return &r;
    return nullptr;
}

void run_recipe(const std::string& name, const RecipeContext& ctx) {
    const Recipe* r = find_recipe(name);
    if (!r) throw ConfigError("unknown recipe '" + name + "'");
    for (const auto& [key, value] : ctx.params) {
        (void)value;
        if (key == "seed" || key == "precision" || key == "plots") continue;
        if (std::find(r->keys.begin(), r->keys.end(), key) == r->keys.end())
            throw ConfigError("unknown config key '" + key + "' for recipe " + name);
    }
    r->run(ctx);
}

void write_config_echo(const std::string& file, const std::string& recipe,
                       const RecipeContext& ctx) {
    auto out = open_out(file);
    out << "# gramlab config echo\n";
    out << "version = " << GRAMLAB_VERSION << "\n";
    out << "recipe = " << recipe << "\n";
    out << "seed = " << ctx.seed << "\n";
    out << "precision = " << precision_name(ctx.precision) << "\n";
    out << "plots = " << (ctx.plots ? 1 : 0) << "\n";
    for (const auto& [key, value] : ctx.params) {
        if (key == "seed" || key == "precision" || key == "plots") continue;
        out << key << " = " << value << "\n";
    }
}

std::map<std::string, std::string> read_config_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = value;
    }
    return out;
}

}  // namespace gramlab
