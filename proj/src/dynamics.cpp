#include "gramlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gramlab/errors.hpp"

namespace gramlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double NetworkParams::eval(double x) const {
    double h = c;
    for (int i = 0; i < n(); ++i) {
        const double ci = chi(b[i]);
        if (ci == 0.0) continue;
        h += a[i] * ci * act_eval<double>(act, x - b[i]);
    }
    return h;
}

static Eigen::VectorXd equispaced_biases(int n) {
    Eigen::VectorXd b(n);
    if (n == 1) {
        b[0] = 0.0;
        return b;
    }
    for (int i = 0; i < n; ++i) b[i] = -1.0 + 2.0 * i / (n - 1);
    return b;
}

NetworkParams NetworkParams::init_alternating(int n, Activation act, bool mollified) {
    if (n < 1) throw ArgError("init_alternating: n must be >= 1");
    NetworkParams p;
    p.act = act;
    p.b = equispaced_biases(n);
    p.a.resize(n);
    for (int i = 0; i < n; ++i) p.a[i] = (i % 2 == 0) ? -0.5 : 0.5;  // (-1)^i/2, i = 1..n
    if (mollified) p.moll = Mollifier{};
    return p;
}

NetworkParams NetworkParams::init_cosine(int n, Activation act, bool mollified) {
    if (n < 1) throw ArgError("init_cosine: n must be >= 1");
    NetworkParams p;
    p.act = act;
    p.b = equispaced_biases(n);
    p.a.resize(n);
    for (int i = 0; i < n; ++i) p.a[i] = 0.5 * std::cos(static_cast<double>(i + 1));
    if (mollified) p.moll = Mollifier{};
    return p;
}

// ---------------------------------------------------------------------------
// per-step state evaluation

namespace {

// Quadrature nodes, residual values and the weighted residual wr = w .* r for
// the current parameters; reused by loss, gradient and E_k in a single pass.
struct StepState {
    std::vector<double> x, w, r, wr;
    double loss = 0.0;
};

int pieces_order(int quad_total, std::size_t pieces) {
    const int p = static_cast<int>(
        std::lround(static_cast<double>(quad_total) / static_cast<double>(pieces)));
    return std::min(32, std::max(4, p));
}

void build_nodes(const NetworkParams& p, int quad_total, int loss_samples, StepState& st) {
    if (loss_samples > 0) {
        const int N = loss_samples;
        st.x.resize(N);
        st.w.assign(N, 2.0 / N);
        for (int j = 0; j < N; ++j)
            st.x[j] = N == 1 ? 0.0 : -1.0 + 2.0 * j / (N - 1);
        return;
    }
    std::vector<double> splits;
    if (p.act.has_kink()) {
        splits.reserve(p.n());
        for (int i = 0; i < p.n(); ++i)
            if (p.b[i] > -1.0 && p.b[i] < 1.0) splits.push_back(p.b[i]);
    }
    const int order = pieces_order(quad_total, splits.size() + 1);
    CompositeGrid g = composite_grid(-1.0, 1.0, std::move(splits), order);
    st.x = std::move(g.x);
    st.w = std::move(g.w);
}

bool fast_kind(const Activation& act, int& m_out) {
    if (act.kind == ActKind::relu) {
        m_out = 1;
        return true;
    }
    if (act.kind == ActKind::relu_pow && (act.m == 1 || act.m == 2)) {
        m_out = act.m;
        return true;
    }
    return false;
}

// h at the (ascending) nodes for sigma = relu^m/m!, m in {1,2}, via prefix
// sums over kinks sorted ascending.
void eval_h_fast(const NetworkParams& p, int m, const std::vector<int>& order,
                 const std::vector<double>& x, std::vector<double>& h) {
    const int n = p.n();
    const int Q = static_cast<int>(x.size());
    h.assign(Q, p.c);
    double Sa = 0.0, Sab = 0.0, Sab2 = 0.0;
    int j = 0;
    for (int q = 0; q < Q; ++q) {
        while (j < n && p.b[order[j]] <= x[q]) {
            const int i = order[j];
            const double alpha = p.a[i] * p.chi(p.b[i]);
            Sa += alpha;
            Sab += alpha * p.b[i];
            if (m == 2) Sab2 += alpha * p.b[i] * p.b[i];
            ++j;
        }
        if (m == 1) {
            h[q] += x[q] * Sa - Sab;
        } else {
            h[q] += 0.5 * (x[q] * x[q] * Sa - 2.0 * x[q] * Sab + Sab2);
        }
    }
}

void eval_h_general(const NetworkParams& p, const std::vector<double>& x,
                    std::vector<double>& h) {
    const int Q = static_cast<int>(x.size());
    h.assign(Q, p.c);
    for (int i = 0; i < p.n(); ++i) {
        const double alpha = p.a[i] * p.chi(p.b[i]);
        if (alpha == 0.0 && p.dchi(p.b[i]) == 0.0) continue;
        for (int q = 0; q < Q; ++q)
            h[q] += alpha * act_eval<double>(p.act, x[q] - p.b[i]);
    }
}

void finish_state(const std::function<double(double)>& f, const std::vector<double>& h,
                  StepState& st) {
    const int Q = static_cast<int>(st.x.size());
    st.r.resize(Q);
    st.wr.resize(Q);
    double loss = 0.0;
    for (int q = 0; q < Q; ++q) {
        st.r[q] = h[q] - f(st.x[q]);
        st.wr[q] = st.w[q] * st.r[q];
        loss += st.wr[q] * st.r[q];
    }
    st.loss = 0.5 * loss;
}

// Gradient for the fast kinds from suffix moments T_j(b) = sum_{x_q > b}
// wr_q x_q^j, walked once over kinks sorted descending.
void gradient_fast(const NetworkParams& p, int m, const std::vector<int>& order,
                   const StepState& st, Eigen::VectorXd& da, Eigen::VectorXd& db) {
    const int n = p.n();
    const int Q = static_cast<int>(st.x.size());
    da.setZero(n);
    db.setZero(n);
    double T0 = 0.0, T1 = 0.0, T2 = 0.0;
    int q = Q - 1;
    for (int j = n - 1; j >= 0; --j) {
        const int i = order[j];
        while (q >= 0 && st.x[q] > p.b[i]) {
            T0 += st.wr[q];
            T1 += st.wr[q] * st.x[q];
            if (m == 2) T2 += st.wr[q] * st.x[q] * st.x[q];
            --q;
        }
        const double ci = p.chi(p.b[i]);
        const double dci = p.dchi(p.b[i]);
        if (m == 1) {
            const double I = T1 - p.b[i] * T0;  // int (x-b)_+ r
            da[i] = ci * I;
            db[i] = p.a[i] * (dci * I - ci * T0);
        } else {
            const double I = 0.5 * (T2 - 2.0 * p.b[i] * T1 + p.b[i] * p.b[i] * T0);
            const double I1 = T1 - p.b[i] * T0;
            da[i] = ci * I;
            db[i] = p.a[i] * (dci * I - ci * I1);
        }
    }
}

void gradient_general(const NetworkParams& p, const StepState& st, Eigen::VectorXd& da,
                      Eigen::VectorXd& db) {
    const int n = p.n();
    const int Q = static_cast<int>(st.x.size());
    da.setZero(n);
    db.setZero(n);
    for (int i = 0; i < n; ++i) {
        const double ci = p.chi(p.b[i]);
        const double dci = p.dchi(p.b[i]);
        if (ci == 0.0 && dci == 0.0) continue;
        double s = 0.0, s1 = 0.0;
        for (int q = 0; q < Q; ++q) {
            const double z = st.x[q] - p.b[i];
            s += st.wr[q] * act_eval<double>(p.act, z);
            s1 += st.wr[q] * act_eval_d1<double>(p.act, z);
        }
        da[i] = ci * s;
        db[i] = p.a[i] * (dci * s - ci * s1);
    }
}

std::vector<int> bias_order(const NetworkParams& p) {
    std::vector<int> order(p.n());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int lhs, int rhs) { return p.b[lhs] < p.b[rhs]; });
    return order;
}

}  // namespace

double training_loss(const NetworkParams& p, const std::function<double(double)>& f,
                     int quad_total) {
    StepState st;
    build_nodes(p, quad_total, 0, st);
    std::vector<double> h;
    int m = 0;
    if (fast_kind(p.act, m)) {
        eval_h_fast(p, m, bias_order(p), st.x, h);
    } else {
        eval_h_general(p, st.x, h);
    }
    finish_state(f, h, st);
    return st.loss;
}

Gradient gradient(const NetworkParams& p, const std::function<double(double)>& f,
                  int quad_total) {
    StepState st;
    build_nodes(p, quad_total, 0, st);
    std::vector<double> h;
    Gradient g;
    int m = 0;
    if (fast_kind(p.act, m)) {
        const std::vector<int> order = bias_order(p);
        eval_h_fast(p, m, order, st.x, h);
        finish_state(f, h, st);
        gradient_fast(p, m, order, st, g.da, g.db);
    } else {
        eval_h_general(p, st.x, h);
        finish_state(f, h, st);
        gradient_general(p, st, g.da, g.db);
    }
    g.dc = std::accumulate(st.wr.begin(), st.wr.end(), 0.0);
    return g;
}

TrainTrace train(NetworkParams params, const std::function<double(double)>& f,
                 const TrainConfig& cfg) {
    const int n = params.n();
    if (n < 1) throw ArgError("train: empty network");
    if (cfg.steps < 0) throw ArgError("train: negative step count");
    if (cfg.optimizer == TrainConfig::Optimizer::gd && cfg.step < 0)
        throw ArgError("train: negative gd step");

    if (cfg.bias_jitter > 0.0) {
        RngStream rng(cfg.seed, 0xB1A5);
        for (int i = 0; i < n; ++i) {
            params.b[i] = std::clamp(params.b[i] + rng.uniform(-cfg.bias_jitter, cfg.bias_jitter),
                                     -1.0, 1.0);
        }
    }

    const double step = cfg.step > 0 ? cfg.step : 1.0 / n;
    const long long stride = cfg.stride > 0 ? cfg.stride : std::max<long long>(1, cfg.steps / 10000);

    int m = 0;
    const bool fast = fast_kind(params.act, m);

    TrainTrace trace;
    trace.tracked_modes = cfg.track_modes;
    trace.gd_step = step;
    const int nmodes = static_cast<int>(cfg.track_modes.size());
    std::vector<long long> rec_steps;
    std::vector<double> rec_loss, rec_tv, rec_sup, rec_E;
    std::vector<double> rec_bias;

    StepState st;
    std::vector<double> h;
    Eigen::VectorXd da(n), db(n);
    Eigen::VectorXd ma, va, mb, vb;
    double b1t = 1.0, b2t = 1.0;
    if (cfg.optimizer == TrainConfig::Optimizer::adam) {
        ma = va = mb = vb = Eigen::VectorXd::Zero(n);
    }

    double loss0 = -1.0, last_rec_loss = -1.0, E0_stop = -1.0;
    bool stopped = false;

    auto record = [&](long long s) {
        rec_steps.push_back(s);
        rec_loss.push_back(st.loss);
        if (last_rec_loss >= 0.0 && st.loss > last_rec_loss * (1.0 + 1e-12))
            ++trace.loss_increases;
        last_rec_loss = st.loss;
        double tvv = total_variation(params.a);
        rec_tv.push_back(tvv);
        rec_sup.push_back(params.a.size() ? params.a.cwiseAbs2().maxCoeff() : 0.0);
        for (int mi = 0; mi < nmodes; ++mi) {
            const double k = cfg.track_modes[mi];
            double e = 0.0;
            for (std::size_t q = 0; q < st.x.size(); ++q)
                e += st.wr[q] * std::sin(k * kPi * st.x[q]);
            rec_E.push_back(std::abs(e));
            if (mi == 0) {
                if (E0_stop < 0.0) E0_stop = std::abs(e);
                else if (cfg.stop_at_fraction > 0.0 && std::abs(e) <= cfg.stop_at_fraction * E0_stop)
                    stopped = true;
            }
        }
        if (params.moll) {
            const double lo = -1.0 - params.moll->epsilon - 1e-12;
            for (int i = 0; i < n; ++i)
                if (params.b[i] < lo || params.b[i] > 1.0 + 1e-12) trace.confinement_ok = false;
        }
        if (cfg.record_biases)
            rec_bias.insert(rec_bias.end(), params.b.data(), params.b.data() + n);
    };

    for (long long s = 0; s <= cfg.steps; ++s) {
        build_nodes(params, cfg.quad_total, cfg.loss_samples, st);
        std::vector<int> order;
        if (fast) {
            order = bias_order(params);
            eval_h_fast(params, m, order, st.x, h);
        } else {
            eval_h_general(params, st.x, h);
        }
        finish_state(f, h, st);

        if (loss0 < 0.0) loss0 = st.loss;
        if (!std::isfinite(st.loss) || st.loss > 1e6 * (loss0 + 1e-300))
            throw DivergenceError("train: loss diverged at step " + std::to_string(s));

        const bool due = (s % stride == 0) || s == cfg.steps;
        if (due) record(s);
        if (stopped || s == cfg.steps) break;

        if (fast) {
            gradient_fast(params, m, order, st, da, db);
        } else {
            gradient_general(params, st, da, db);
        }

        if (cfg.optimizer == TrainConfig::Optimizer::gd) {
            params.a -= step * da;
            if (cfg.train_biases) params.b -= step * db;
        } else {
            const auto& ao = cfg.adam;
            b1t *= ao.beta1;
            b2t *= ao.beta2;
            ma = ao.beta1 * ma + (1.0 - ao.beta1) * da;
            va = ao.beta2 * va + (1.0 - ao.beta2) * da.cwiseProduct(da);
            params.a -= (ao.lr * (ma / (1.0 - b1t)).array() /
                         ((va / (1.0 - b2t)).array().sqrt() + ao.eps))
                            .matrix();
            if (cfg.train_biases) {
                mb = ao.beta1 * mb + (1.0 - ao.beta1) * db;
                vb = ao.beta2 * vb + (1.0 - ao.beta2) * db.cwiseProduct(db);
                params.b -= (ao.lr * (mb / (1.0 - b1t)).array() /
                             ((vb / (1.0 - b2t)).array().sqrt() + ao.eps))
                                .matrix();
            }
        }
    }

    const int R = static_cast<int>(rec_steps.size());
    trace.steps = std::move(rec_steps);
    trace.times.resize(R);
    for (int r = 0; r < R; ++r) trace.times[r] = trace.steps[r] * step;
    trace.loss = std::move(rec_loss);
    trace.tv = std::move(rec_tv);
    trace.sup_a2 = std::move(rec_sup);
    trace.E.resize(R, nmodes);
    for (int r = 0; r < R; ++r)
        for (int mi = 0; mi < nmodes; ++mi) trace.E(r, mi) = rec_E[r * nmodes + mi];
    if (cfg.record_biases) {
        trace.bias_snapshots.resize(R, n);
        for (int r = 0; r < R; ++r)
            for (int i = 0; i < n; ++i) trace.bias_snapshots(r, i) = rec_bias[r * n + i];
    }
    trace.final_params = std::move(params);
    return trace;
}

long long half_reduction_time(const TrainTrace& trace, int k) {
    auto it = std::find(trace.tracked_modes.begin(), trace.tracked_modes.end(), k);
    if (it == trace.tracked_modes.end())
        throw ArgError("half_reduction_time: mode " + std::to_string(k) + " was not tracked");
    const int col = static_cast<int>(it - trace.tracked_modes.begin());
    if (trace.E.rows() == 0) throw ArgError("half_reduction_time: empty trace");
    const double E0 = trace.E(0, col);
    if (!(E0 > 0.0)) throw ArgError("half_reduction_time: E_k(0) must be positive");
    for (int r = 0; r < trace.E.rows(); ++r)
        if (trace.E(r, col) <= 0.5 * E0) return trace.steps[r];
    return -1;
}

double total_variation(const Eigen::VectorXd& a) {
    const int n = static_cast<int>(a.size());
    if (n < 1) throw ArgError("total_variation: empty weight vector");
    double v = a[0] * a[0] + a[n - 1] * a[n - 1];
    for (int i = 0; i + 1 < n; ++i) v += std::abs(a[i] * a[i] - a[i + 1] * a[i + 1]);
    return v;
}

Eigen::VectorXd load_vector(const BiasGrid& grid, const std::function<double(double)>& f,
                            const Activation& act, int quad_total) {
    const int n = static_cast<int>(grid.b.size());
    const int order = std::min(2048, std::max(16, quad_total / 2));
    Eigen::VectorXd F(n);
    for (int i = 0; i < n; ++i) {
        const double bi = grid.b[i];
        std::vector<double> splits;
        if (act.has_kink() && bi > -1.0 && bi < 1.0) splits.push_back(bi);
        F[i] = integrate_composite(
            [&](double x) { return f(x) * act_eval<double>(act, x - bi); }, -1.0, 1.0,
            std::move(splits), order);
    }
    return F;
}

ModeDecay ls_mode_decay(const GramMatrix& gm, const Eigen::VectorXd& F,
                        const Eigen::VectorXd& a0, double t_final, long long steps,
                        int checkpoints) {
    const int n = gm.n();
    if (F.size() != n || a0.size() != n)
        throw ShapeError("ls_mode_decay: F and a0 must match the Gram order");
    if (!(t_final > 0) || steps < 1) throw ArgError("ls_mode_decay: bad horizon");
    if (checkpoints < 2) throw ArgError("ls_mode_decay: need at least 2 checkpoints");

    EigResult er = sym_eig(gm.entries, true, Precision::f64);
    ModeDecay md;
    md.lambda.assign(er.values.data(), er.values.data() + er.values.size());
    md.fhat = er.vectors.transpose() * F;
    md.ahat0 = er.vectors.transpose() * a0;
    md.dt = t_final / static_cast<double>(steps);
    md.steps = steps;
    if (md.dt * md.lambda.front() > 2.0)
        throw StabilityError("ls_mode_decay: Euler step " + std::to_string(md.dt) +
                             " exceeds 2/lambda_1");

    std::vector<long long> cps(checkpoints);
    for (int j = 0; j < checkpoints; ++j)
        cps[j] = std::llround(static_cast<double>(steps) * j / (checkpoints - 1));
    cps.back() = steps;
    md.times.resize(checkpoints);
    md.analytic.resize(checkpoints, n);
    md.euler.resize(checkpoints, n);

    auto analytic_at = [&](double t, int k) {
        const double lam = md.lambda[k];
        if (lam > 1e-300)
            return md.ahat0[k] * std::exp(-lam * t) - md.fhat[k] * std::expm1(-lam * t) / lam;
        return md.ahat0[k] + md.fhat[k] * t;
    };

    Eigen::VectorXd u = md.ahat0;
    const Eigen::Map<const Eigen::VectorXd> lam(md.lambda.data(), n);
    int cp = 0;
    for (long long s = 0; s <= steps; ++s) {
        while (cp < checkpoints && cps[cp] == s) {
            const double t = md.dt * static_cast<double>(s);
            md.times[cp] = t;
            md.euler.row(cp) = u.transpose();
            for (int k = 0; k < n; ++k) md.analytic(cp, k) = analytic_at(t, k);
            ++cp;
        }
        if (s == steps) break;
        u -= md.dt * (lam.cwiseProduct(u) - md.fhat);
    }
    return md;
}

AuxiliaryW auxiliary_w(const NetworkParams& p, const std::function<double(double)>& f,
                       int output_points, int points_per_panel) {
    if (output_points < 2) throw ArgError("auxiliary_w: need at least 2 output points");
    std::vector<double> outb(output_points);
    for (int j = 0; j < output_points; ++j)
        outb[j] = -1.0 + 2.0 * j / (output_points - 1);

    std::vector<double> splits(outb.begin() + 1, outb.end() - 1);
    if (p.act.has_kink()) {
        for (int i = 0; i < p.n(); ++i)
            if (p.b[i] > -1.0 && p.b[i] < 1.0) splits.push_back(p.b[i]);
    }
    CompositeGrid g = composite_grid(-1.0, 1.0, std::move(splits), points_per_panel);

    const std::size_t Q = g.x.size();
    std::vector<double> wr(Q);
    for (std::size_t q = 0; q < Q; ++q)
        wr[q] = g.w[q] * (p.eval(g.x[q]) - f(g.x[q]));

    // Suffix moments over whole panels; every output point is a panel break.
    const std::size_t P = g.piece_start.size();
    std::vector<double> s0(P + 1, 0.0), s1(P + 1, 0.0);
    for (std::size_t pi = P; pi-- > 0;) {
        const std::size_t lo = g.piece_start[pi];
        const std::size_t hi = pi + 1 < P ? g.piece_start[pi + 1] : Q;
        double a0 = 0.0, a1 = 0.0;
        for (std::size_t q = lo; q < hi; ++q) {
            a0 += wr[q];
            a1 += wr[q] * g.x[q];
        }
        s0[pi] = s0[pi + 1] + a0;
        s1[pi] = s1[pi + 1] + a1;
    }

    AuxiliaryW aux;
    aux.b = outb;
    aux.w.resize(output_points);
    aux.dw.resize(output_points);
    for (int j = 0; j < output_points; ++j) {
        const auto it = std::lower_bound(g.breaks.begin(), g.breaks.end(), outb[j] - 1e-12);
        const std::size_t pi = static_cast<std::size_t>(it - g.breaks.begin());
        const double T0 = pi < P ? s0[pi] : 0.0;
        const double T1 = pi < P ? s1[pi] : 0.0;
        aux.w[j] = T1 - outb[j] * T0;
        aux.dw[j] = -T0;
    }
    return aux;
}

PowComparison relu_pow_comparison(int m, const std::vector<int>& ks, int n, TrainConfig cfg,
                                  double drop_fraction) {
    if (m < 1 || m > 2) throw ArgError("relu_pow_comparison: m must be 1 or 2");
    if (ks.size() < 2) throw ArgError("relu_pow_comparison: need at least two frequencies");
    if (!(drop_fraction > 0.0) || drop_fraction >= 1.0)
        throw ArgError("relu_pow_comparison: drop fraction in (0,1)");

    PowComparison pc;
    pc.ks = ks;
    const Activation act = m == 1 ? Activation::relu() : Activation::relu_pow(2);
    for (int k : ks) {
        NetworkParams params = NetworkParams::init_alternating(n, act);
        TrainConfig c = cfg;
        c.track_modes = {k};
        c.stop_at_fraction = drop_fraction;
        const double kpi = k * kPi;
        TrainTrace tr = train(params, [kpi](double x) { return std::sin(kpi * x); }, c);
        const double E0 = tr.E(0, 0);
        double tau = -1.0;
        for (int r = 0; r < tr.E.rows(); ++r) {
            if (tr.E(r, 0) <= drop_fraction * E0) {
                tau = tr.times[r];
                break;
            }
        }
        pc.tau.push_back(tau);
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (pc.tau[i] > 0.0) {
            xs.push_back(ks[i]);
            ys.push_back(pc.tau[i]);
        }
    }
    if (xs.size() >= 2) {
        SlopeFit fit = fit_loglog_slope(xs, ys, 0, static_cast<int>(xs.size()) - 1);
        pc.gamma = fit.slope;
        pc.r2 = fit.r2;
    }
    return pc;
}

void export_trace_csv(const std::string& path, const TrainTrace& trace) {
    std::ofstream out(path);
    if (!out) throw ArgError("export_trace_csv: cannot open " + path);
    out << "# gd_step=" << trace.gd_step << " records=" << trace.steps.size()
        << " confinement_ok=" << (trace.confinement_ok ? 1 : 0)
        << " loss_increases=" << trace.loss_increases << '\n';
    out << "step,t,loss";
    for (int k : trace.tracked_modes) out << ",E_" << k;
    out << ",tv,sup_a2\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (std::size_t r = 0; r < trace.steps.size(); ++r) {
        out << trace.steps[r];
        put(trace.times[r]);
        put(trace.loss[r]);
        for (int mi = 0; mi < trace.E.cols(); ++mi) put(trace.E(static_cast<int>(r), mi));
        put(trace.tv[r]);
        put(trace.sup_a2[r]);
        out << '\n';
    }
}

}  // namespace gramlab
