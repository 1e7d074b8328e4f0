#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gramlab/numerics.hpp"

using namespace gramlab;

TEST_CASE("precision helpers") {
    CHECK(machine_eps(Precision::f32) == doctest::Approx(1.1920928955078125e-7).epsilon(1e-12));
    CHECK(machine_eps(Precision::f64) == doctest::Approx(2.220446049250313e-16).epsilon(1e-12));
    CHECK(mantissa_bits(Precision::f32) == 23);
    CHECK(mantissa_bits(Precision::f64) == 52);
    CHECK(parse_precision("f32") == Precision::f32);
    CHECK(parse_precision("f64") == Precision::f64);
    CHECK_THROWS_AS(parse_precision("fp16"), ConfigError);
    CHECK(precision_name(Precision::f32) == "f32");
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    for (int p : {2, 5, 16, 64}) {
        const auto& [xs, ws] = gauss_legendre_nodes(p);
        REQUIRE(static_cast<int>(xs.size()) == p);
        // weights sum to the interval length
        CHECK(std::accumulate(ws.begin(), ws.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
        // nodes are symmetric about zero
        for (int i = 0; i < p; ++i)
            CHECK(xs[i] == doctest::Approx(-xs[p - 1 - i]).epsilon(1e-14));
        // exact up to degree 2p-1: moments of x^d are 2/(d+1) for even d
        for (int d = 0; d <= 2 * p - 1; ++d) {
            double acc = 0.0;
            for (int i = 0; i < p; ++i) acc += ws[i] * std::pow(xs[i], d);
            const double exact = d % 2 == 0 ? 2.0 / (d + 1) : 0.0;
            CHECK(acc == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("integrate: smooth integrands") {
    // int_{-1}^{1} e^x dx = e - 1/e
    const double exact = std::exp(1.0) - std::exp(-1.0);
    CHECK(integrate([](double x) { return std::exp(x); }, QuadratureRule::gauss(24)) ==
          doctest::Approx(exact).epsilon(1e-14));
    // trapezoid converges at second order
    const double t1 = integrate([](double x) { return std::exp(x); },
                                QuadratureRule::trapezoid(101));
    const double t2 = integrate([](double x) { return std::exp(x); },
                                QuadratureRule::trapezoid(201));
    CHECK(std::abs(t2 - exact) < 0.3 * std::abs(t1 - exact));
    // shifted interval: int_0^pi sin = 2
    CHECK(integrate([](double x) { return std::sin(x); },
                    QuadratureRule::gauss(32, 0.0, M_PI)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("integrate_t accumulates in the requested scalar type") {
    // A float accumulation of a constant over many trapezoid panels drifts
    // away from the double result by more than double rounding would.
    const auto f64 = integrate_t<double>([](double) { return 1.0 / 3.0; },
                                         QuadratureRule::trapezoid(20001));
    const auto f32 = integrate_t<float>([](float) { return 1.0f / 3.0f; },
                                        QuadratureRule::trapezoid(20001));
    CHECK(std::abs(f64 - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(static_cast<double>(f32) - 2.0 / 3.0) > 1e-12);
    CHECK(std::abs(static_cast<double>(f32) - 2.0 / 3.0) < 1e-3);
}

TEST_CASE("integrate rejects malformed rules") {
    CHECK_THROWS_AS(integrate([](double) { return 0.0; }, QuadratureRule::gauss(0)),
                    ArgError);
    CHECK_THROWS_AS(integrate([](double) { return 0.0; }, QuadratureRule::trapezoid(1)),
                    ArgError);
    QuadratureRule r = QuadratureRule::gauss(8);
    r.lo = 1.0;
    r.hi = -1.0;
    CHECK_THROWS_AS(integrate([](double) { return 0.0; }, r), ArgError);
}

TEST_CASE("integrate_composite splits kinks exactly") {
    // int_{-1}^{1} |x| dx = 1; a split at 0 restores spectral accuracy.
    const double v = integrate_composite([](double x) { return std::abs(x); }, -1.0, 1.0,
                                         {0.0}, 16);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    // splits outside the interval are ignored, duplicates merged
    const double w = integrate_composite([](double x) { return std::abs(x); }, -1.0, 1.0,
                                         {0.0, 0.0, 5.0, -3.0}, 16);
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("composite_grid layout") {
    CompositeGrid g = composite_grid(-1.0, 1.0, {-0.25, 0.5}, 8);
    REQUIRE(g.breaks.size() == 4);
    CHECK(g.breaks.front() == -1.0);
    CHECK(g.breaks.back() == 1.0);
    REQUIRE(g.piece_start.size() == 3);
    CHECK(g.x.size() == 24);
    CHECK(std::accumulate(g.w.begin(), g.w.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::is_sorted(g.x.begin(), g.x.end()));
    // every node sits inside its piece
    for (std::size_t p = 0; p + 1 < g.breaks.size(); ++p)
        for (std::size_t i = g.piece_start[p];
             i < (p + 2 < g.breaks.size() ? g.piece_start[p + 1] : g.x.size()); ++i) {
            CHECK(g.x[i] >= g.breaks[p]);
            CHECK(g.x[i] <= g.breaks[p + 1]);
        }
}

TEST_CASE("bisect finds bracketed roots") {
    const double r = bisect([](double x) { return std::cos(x); }, 1.0, 2.0);
    CHECK(r == doctest::Approx(M_PI / 2).epsilon(1e-13));
    CHECK_THROWS_AS(bisect([](double x) { return 1.0 + x * x; }, -1.0, 1.0), BracketError);
    // a zero endpoint is accepted
    CHECK(bisect([](double x) { return x; }, 0.0, 1.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("sym_eig on a known 2x2") {
    Eigen::MatrixXd a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    EigResult r = sym_eig(a, true);
    REQUIRE(r.values.size() == 2);
    CHECK(r.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    // vectors orthonormal and actual eigenvectors
    Eigen::MatrixXd vtv = r.vectors.transpose() * r.vectors;
    CHECK((vtv - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd res = a * r.vectors.col(k) - r.values[k] * r.vectors.col(k);
        CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sym_eig input validation") {
    Eigen::MatrixXd ns(2, 3);
    ns.setZero();
    CHECK_THROWS_AS(sym_eig(ns, false), ShapeError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(sym_eig(asym, false), ShapeError);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(kMaxDenseOrder + 1, kMaxDenseOrder + 1);
    CHECK_THROWS_AS(sym_eig(big, false), CapacityError);
}

TEST_CASE("sym_eig f32 mode loses the deep spectrum") {
    // Rotate a log-spaced diagonal into a dense SPD matrix; the f32
    // factorization then carries a noise floor of order eps_f32 * lambda_1,
    // which swamps the 1e-13 tail while f64 still resolves it.
    const int n = 40;
    RngStream rng(2024, 0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = std::pow(10.0, -i / 3.0);
    Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());
    EigResult r64 = sym_eig(a, false, Precision::f64);
    EigResult r32 = sym_eig(a, false, Precision::f32);
    CHECK(std::abs(r64.values[0] - 1.0) < 1e-12);
    CHECK(std::abs(r32.values[0] - 1.0) < 1e-5);
    const double tail_true = d[n - 1]; // 1e-13
    CHECK(std::abs(r64.values[n - 1] - tail_true) < 1e-3 * tail_true + 1e-14);
    // f32 tail is pure rounding noise, orders of magnitude off
    CHECK(std::abs(r32.values[n - 1] - tail_true) > 100.0 * tail_true);
}

TEST_CASE("svd_pinv_solve recovers well-posed systems") {
    Eigen::MatrixXd b(4, 2);
    b << 1, 0, 0, 1, 1, 1, 1, -1;
    Eigen::VectorXd x_true(2);
    x_true << 2.0, -3.0;
    Eigen::VectorXd y = b * x_true;
    PinvSolution s = svd_pinv_solve(b, y, 0.0);
    CHECK(s.rank == 2);
    CHECK_FALSE(s.rank_warning);
    CHECK((s.x - x_true).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.sigma_max > 0.0);
}

TEST_CASE("svd_pinv_solve truncates by eta and flags empty rank") {
    // column 2 = 1e-8 * column 1 + tiny: second singular value ~ 1e-8
    Eigen::MatrixXd b(3, 2);
    b << 1, 1e-8, 1, 1e-8, 1, 2e-8;
    Eigen::VectorXd y(3);
    y << 1, 1, 1;
    PinvSolution strict = svd_pinv_solve(b, y, 1e-4);
    CHECK(strict.rank == 1);
    PinvSolution loose = svd_pinv_solve(b, y, 1e-12);
    CHECK(loose.rank == 2);
    PinvSolution empty = svd_pinv_solve(b, y, 1.0 + 1e-9);
    CHECK(empty.rank == 0);
    CHECK(empty.rank_warning);
    CHECK(empty.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("svd_pinv_solve default cutoff follows the precision mode") {
    // sigma_2/sigma_1 = 1e-9 sits between the f32 and f64 machine defaults
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 1e-9;
    Eigen::VectorXd y(2);
    y << 1.0, 1.0;
    CHECK(svd_pinv_solve(b, y, 0.0, Precision::f64).rank == 2);
    CHECK(svd_pinv_solve(b, y, 0.0, Precision::f32).rank == 1);
}

TEST_CASE("fit_loglog_slope recovers power laws") {
    std::vector<double> xs, ys;
    for (int k = 1; k <= 40; ++k) {
        xs.push_back(k);
        ys.push_back(3.0 * std::pow(k, -2.0));
    }
    SlopeFit f = fit_loglog_slope(xs, ys, 4, 30);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log10(3.0)).epsilon(1e-10));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.count == 27);
    ys[10] = -1.0;
    CHECK_THROWS_AS(fit_loglog_slope(xs, ys, 4, 30), ArgError);
    CHECK_THROWS_AS(fit_loglog_slope(xs, ys, 30, 4), ArgError);
}

TEST_CASE("rng streams are reproducible and decorrelated") {
    RngStream a(1234, 7), b(1234, 7), c(1234, 8);
    std::vector<std::uint64_t> seq_a, seq_b, seq_c;
    for (int i = 0; i < 64; ++i) {
        seq_a.push_back(a.next_u64());
        seq_b.push_back(b.next_u64());
        seq_c.push_back(c.next_u64());
    }
    CHECK(seq_a == seq_b);
    CHECK(seq_a != seq_c);
    RngStream sub = a.substream(3);
    CHECK(sub.seed() == a.seed());
}

TEST_CASE("rng distributions honour their ranges") {
    RngStream r(99, 0);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    CHECK(mean / 10000 == doctest::Approx(0.5).epsilon(0.05));
    std::set<int> seen;
    for (int i = 0; i < 2000; ++i) {
        const int v = r.uniform_int(-2, 2);
        CHECK(v >= -2);
        CHECK(v <= 2);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
    double nm = 0.0, nv = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const double g = r.normal(1.0, 2.0);
        nm += g;
        nv += g * g;
    }
    nm /= draws;
    nv = nv / draws - nm * nm;
    CHECK(nm == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::sqrt(nv) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(r.uniform(3.0, 5.0) >= 3.0);
}

TEST_CASE("parallel_for covers the index range exactly once") {
    const int n = 4097;
    std::vector<int> hits(n, 0);
    parallel_for(n, [&](int i) { hits[i] += i + 1; });
    for (int i = 0; i < n; ++i) CHECK(hits[i] == i + 1);
    parallel_for(0, [&](int) { CHECK(false); });
}
