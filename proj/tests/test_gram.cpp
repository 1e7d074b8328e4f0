#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "gramlab/gram.hpp"
#include "gramlab/report.hpp"

using namespace gramlab;

namespace {

// Quadrature route for the 1-D kernels: the integrand has kinks at x and y,
// so two splits restore spectral accuracy.  Deliberately does not share any
// code with the closed forms under test.
double kernel_by_quadrature(const Activation& act, double x, double y) {
    return integrate_composite(
        [&](double z) {
            return act_eval<double>(act, z - x) * act_eval<double>(act, z - y);
        },
        -1.0, 1.0, {x, y}, 48);
}

} // namespace

TEST_CASE("relu kernel closed form: pinned values") {
    CHECK(kernel_relu_1d(0.0, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(kernel_relu_1d(-1.0, -1.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK(kernel_relu_1d(1.0, 1.0) == 0.0);
    CHECK(kernel_relu_1d(-1.0, 1.0) == 0.0);
    // symmetry (up to the non-associativity of the 2 - x - y sum)
    CHECK(kernel_relu_1d(-0.3, 0.7) ==
          doctest::Approx(kernel_relu_1d(0.7, -0.3)).epsilon(1e-15));
    CHECK_THROWS_AS(kernel_relu_1d(1.2, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_relu_1d(0.0, -1.01), DomainError);
}

TEST_CASE("relu kernel closed form matches quadrature on a grid") {
    const Activation relu = Activation::relu();
    for (int i = 0; i <= 10; ++i) {
        for (int j = i; j <= 10; ++j) {
            const double x = -1.0 + 0.2 * i, y = -1.0 + 0.2 * j;
            const double closed = kernel_relu_1d(x, y);
            const double quad = kernel_by_quadrature(relu, x, y);
            CHECK(closed == doctest::Approx(quad).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("leaky kernel: pinned value and quadrature match") {
    // at (0,0): (1 + alpha^2) / 3, the cross term vanishes
    for (double alpha : {0.1, 0.351, 0.9}) {
        CHECK(kernel_leaky_1d(0.0, 0.0, alpha) ==
              doctest::Approx((1.0 + alpha * alpha) / 3.0).epsilon(1e-15));
        const Activation leaky = Activation::leaky(alpha);
        for (double x : {-0.9, -0.2, 0.5})
            for (double y : {-0.6, 0.1, 0.8}) {
                CHECK(kernel_leaky_1d(x, y, alpha) ==
                      doctest::Approx(kernel_by_quadrature(leaky, x, y))
                          .epsilon(1e-12)
                          .scale(1.0));
            }
    }
    CHECK_THROWS_AS(kernel_leaky_1d(0.0, 0.0, 0.0), ArgError);
    CHECK_THROWS_AS(kernel_leaky_1d(0.0, 0.0, 1.0), ArgError);
}

TEST_CASE("pm1 block kernel") {
    // (+,+) reduces to the plain kernel
    CHECK(kernel_block_pm1(-0.4, 0.3, 1, 1) ==
          doctest::Approx(kernel_relu_1d(-0.4, 0.3)).epsilon(1e-15));
    // (-,-) is the plain kernel mirrored
    CHECK(kernel_block_pm1(-0.4, 0.3, -1, -1) ==
          doctest::Approx(kernel_relu_1d(0.4, -0.3)).epsilon(1e-15));
    // (+,-) overlap [x, y]: int_x^y (z-x)(y-z) dz = (y-x)^3 / 6
    CHECK(kernel_block_pm1(-0.5, 0.5, 1, -1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(kernel_block_pm1(0.5, -0.5, 1, -1) == 0.0); // empty overlap
    // quadrature route for the mixed block
    const double q = integrate_composite(
        [](double z) {
            return std::max(z + 0.2, 0.0) * std::max(0.6 - z, 0.0);
        },
        -1.0, 1.0, {-0.2, 0.6}, 48);
    CHECK(kernel_block_pm1(-0.2, 0.6, 1, -1) == doctest::Approx(q).epsilon(1e-13));
}

TEST_CASE("weighted kernel is a plain product scaling") {
    auto rho = [](double x) { return 1.0 + x * x; };
    for (double x : {-0.7, 0.0, 0.4})
        for (double y : {-0.3, 0.6}) {
            const double expect = std::sqrt(rho(x)) * kernel_relu_1d(x, y) * std::sqrt(rho(y));
            CHECK(kernel_weighted(x, y, rho) == doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("general quadrature kernel: heaviside closed form") {
    // The general kernel integrates sigma(w z + b), kink at -b/w, so
    // int step(z + b1) step(z + b2) dz over [-1,1] = 1 + min(b1, b2).
    const Activation h = Activation::heaviside();
    const QuadratureRule rule = QuadratureRule::gauss(64);
    CHECK(kernel_general_1d(h, 1.0, -0.3, 1.0, 0.4, rule) ==
          doctest::Approx(0.7).epsilon(1e-13));
    CHECK(kernel_general_1d(h, 1.0, 1.0, 1.0, 1.0, rule) ==
          doctest::Approx(2.0).epsilon(1e-13));
    // relu through the general path agrees with the closed form at b -> -b
    const Activation relu = Activation::relu();
    CHECK(kernel_general_1d(relu, 1.0, 0.25, 1.0, -0.5, rule) ==
          doctest::Approx(kernel_relu_1d(-0.25, 0.5)).epsilon(1e-13));
}

TEST_CASE("ridge kernel in d dimensions: ball closed forms") {
    // same direction, zero bias, d=2: int_{B_2, x1 > 0} x1^2 = pi/8
    Eigen::VectorXd e1(2), e2(2);
    e1 << 1.0, 0.0;
    e2 << 0.0, 1.0;
    CHECK(kernel_relu_dD(e1, 0.0, e1, 0.0) == doctest::Approx(M_PI / 8).epsilon(1e-10));
    // orthogonal directions, zero bias: int_{quadrant} x1 x2 = 1/8
    CHECK(kernel_relu_dD(e1, 0.0, e2, 0.0) == doctest::Approx(1.0 / 8).epsilon(1e-10));
    // generic pair, frozen from an adaptive 2-D quadrature of
    // relu(x1 - 0.2) relu(cos(1) x1 + sin(1) x2 + 0.1) over the unit disk
    Eigen::VectorXd w2(2);
    w2 << std::cos(1.0), std::sin(1.0);
    CHECK(kernel_relu_dD(e1, 0.2, w2, -0.1) ==
          doctest::Approx(0.189389796177).epsilon(5e-5));
    // d=3, same direction: int_{B_3, x1 > 0} x1^2 = 2 pi / 15
    Eigen::VectorXd f1(3);
    f1 << 1.0, 0.0, 0.0;
    CHECK(kernel_relu_dD(f1, 0.0, f1, 0.0) == doctest::Approx(2.0 * M_PI / 15).epsilon(1e-9));
    // generic d=3 pair, frozen from two independent evaluations of the
    // one-variable reduction (exact inner integral, 200-digit outer rule)
    Eigen::VectorXd w3(3);
    w3 << 0.0, 0.6, 0.8;
    CHECK(kernel_relu_dD(f1, 0.1, w3, -0.2) ==
          doctest::Approx(0.16683152698859757).epsilon(1e-9));
    // symmetry in the argument pair
    CHECK(kernel_relu_dD(f1, 0.1, w3, -0.2) ==
          doctest::Approx(kernel_relu_dD(w3, -0.2, f1, 0.1)).epsilon(1e-12));
}

TEST_CASE("bias grids") {
    BiasGrid g = BiasGrid::equispaced(5);
    REQUIRE(g.n() == 5);
    CHECK(g.b.front() == -1.0);
    CHECK(g.b.back() == 1.0);
    CHECK(g.b[2] == doctest::Approx(0.0).scale(1.0));
    CHECK(g.scheme == BiasGrid::Scheme::equispaced);
    CHECK(std::is_sorted(g.b.begin(), g.b.end()));

    BiasGrid r1 = BiasGrid::iid_uniform(64, 7);
    BiasGrid r2 = BiasGrid::iid_uniform(64, 7);
    BiasGrid r3 = BiasGrid::iid_uniform(64, 8);
    CHECK(r1.b == r2.b);
    CHECK(r1.b != r3.b);
    CHECK(std::is_sorted(r1.b.begin(), r1.b.end()));
    for (double b : r1.b) {
        CHECK(b >= -1.0);
        CHECK(b <= 1.0);
    }
}

TEST_CASE("adaptive grid equidistributes |f'| mass: closed form for x^2") {
    // |f'| = 2|x|, so F(b) = (1 - b^2)/2 for b < 0 and (1 + b^2)/2 above;
    // solving F(b_i) = (i-1)/(n-1) for n = 5 gives +-sqrt(1/2) interior nodes.
    auto f = [](double x) { return x * x; };
    auto fp = [](double x) { return 2.0 * x; };
    BiasGrid g = make_adaptive_grid(f, fp, 5, QuadratureRule::gauss(64));
    REQUIRE(g.n() == 5);
    const double s = std::sqrt(0.5);
    const std::vector<double> expect{-1.0, -s, 0.0, s, 1.0};
    for (int i = 0; i < 5; ++i)
        CHECK(g.b[i] == doctest::Approx(expect[i]).epsilon(1e-8).scale(1.0));
    // difference route (no analytic derivative) lands on the same nodes
    BiasGrid gd = make_adaptive_grid(f, 5, QuadratureRule::gauss(64));
    for (int i = 0; i < 5; ++i)
        CHECK(gd.b[i] == doctest::Approx(g.b[i]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("direction-bias grids") {
    DirBiasGrid p = DirBiasGrid::product_2d(8, 5);
    CHECK(p.n() == 40);
    CHECK(p.dim() == 2);
    for (int i = 0; i < p.n(); ++i)
        CHECK(p.w.row(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
    DirBiasGrid r = DirBiasGrid::iid(16, 3, 5);
    CHECK(r.n() == 16);
    CHECK(r.dim() == 3);
    for (int i = 0; i < r.n(); ++i)
        CHECK(r.w.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("assemble mirrors the kernel pointwise") {
    BiasGrid g = BiasGrid::equispaced(7);
    GramMatrix gm = assemble(KernelSpec::relu(), g);
    REQUIRE(gm.n() == 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            CHECK(gm.entries(i, j) ==
                  doctest::Approx(kernel_relu_1d(g.b[i], g.b[j])).epsilon(1e-15));
    CHECK((gm.entries - gm.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(gm.basis_desc.empty());
}

TEST_CASE("assemble rounds entries in f32 mode") {
    BiasGrid g = BiasGrid::equispaced(6);
    GramMatrix g64 = assemble(KernelSpec::relu(), g, Precision::f64);
    GramMatrix g32 = assemble(KernelSpec::relu(), g, Precision::f32);
    bool any_rounded = false;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const float f = static_cast<float>(g32.entries(i, j));
            CHECK(static_cast<double>(f) == g32.entries(i, j)); // exactly a float
            if (g32.entries(i, j) != g64.entries(i, j)) any_rounded = true;
        }
    CHECK(any_rounded);
}

TEST_CASE("assemble fem_hat produces the pinned mass matrix") {
    // spacing h = 1/2: interior diagonal 2h/3 = 1/3, boundary h/3 = 1/6,
    // off-diagonal h/6 = 1/12, zero beyond the first band.
    BiasGrid g = BiasGrid::equispaced(5);
    GramMatrix gm = assemble(KernelSpec::fem_hat(), g);
    CHECK(gm.entries(0, 0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(gm.entries(2, 2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(gm.entries(4, 4) == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(gm.entries(1, 2) == doctest::Approx(1.0 / 12).epsilon(1e-15));
    CHECK(gm.entries(0, 2) == 0.0);
    CHECK(gm.entries(0, 4) == 0.0);
}

TEST_CASE("assemble kernel family dispatch") {
    BiasGrid g = BiasGrid::equispaced(4);
    GramMatrix leaky = assemble(KernelSpec::leaky(0.3), g);
    CHECK(leaky.entries(1, 2) ==
          doctest::Approx(kernel_leaky_1d(g.b[1], g.b[2], 0.3)).epsilon(1e-15));
    GramMatrix blk = assemble(KernelSpec::pm1_block({1, -1, 1, -1}), g);
    CHECK(blk.entries(0, 1) ==
          doctest::Approx(kernel_block_pm1(g.b[0], g.b[1], 1, -1)).epsilon(1e-15));
    // general family integrates sigma(z + b), so its diagonal matches the
    // closed form evaluated at the mirrored bias
    GramMatrix gen = assemble(KernelSpec::general(Activation::relu(), {}, 48), g);
    for (int i = 0; i < 4; ++i)
        CHECK(gen.entries(i, i) ==
              doctest::Approx(kernel_relu_1d(-g.b[i], -g.b[i])).epsilon(1e-10).scale(1.0));
}

TEST_CASE("assemble capacity cap") {
    BiasGrid g = BiasGrid::equispaced(kMaxDenseOrder + 1);
    CHECK_THROWS_AS(assemble(KernelSpec::relu(), g), CapacityError);
    BiasGrid empty;
    CHECK_THROWS_AS(assemble(KernelSpec::relu(), empty), ArgError);
}

TEST_CASE("assemble_dD matches the ridge kernel pointwise") {
    DirBiasGrid g = DirBiasGrid::product_2d(4, 3);
    GramMatrix gm = assemble_dD(g);
    REQUIRE(gm.n() == 12);
    for (int i = 0; i < gm.n(); i += 5)
        for (int j = i; j < gm.n(); j += 3) {
            const double k =
                kernel_relu_dD(g.w.row(i).transpose(), g.b[i], g.w.row(j).transpose(), g.b[j]);
            CHECK(gm.entries(i, j) == doctest::Approx(k).epsilon(1e-12).scale(1.0));
        }
    CHECK((gm.entries - gm.entries.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gram csv export round trips through the reader") {
    BiasGrid g = BiasGrid::equispaced(4);
    GramMatrix gm = assemble(KernelSpec::relu(), g);
    const std::string path = (std::filesystem::temp_directory_path() / "gram_rt.csv").string();
    export_gram_csv(gm, path);
    CsvTable t = read_csv(path);
    REQUIRE(t.n_rows() == 4);
    REQUIRE(t.columns.size() == 4);
    CHECK(t.cells[1][2] == doctest::Approx(gm.entries(1, 2)).epsilon(1e-12));
    REQUIRE_FALSE(t.comments.empty());
    CHECK(t.comments[0].find("gram") != std::string::npos);
    std::filesystem::remove(path);
}
