#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gramlab/activations.hpp"
#include "gramlab/numerics.hpp"

using namespace gramlab;

TEST_CASE("relu and its kink convention") {
    const Activation a = Activation::relu();
    CHECK(act_eval(a, 2.5) == 2.5);
    CHECK(act_eval(a, -0.5) == 0.0);
    CHECK(act_eval(a, 0.0) == 0.0);
    // right-continuous branch at the kink
    CHECK(act_eval_d1(a, 0.0) == 1.0);
    CHECK(act_eval_d1(a, -1e-12) == 0.0);
    CHECK(a.has_kink());
    CHECK(act_kinks(a) == std::vector<double>{0.0});
}

TEST_CASE("normalized power units step down under differentiation") {
    // sigma_m(x) = x_+^m / m!, so sigma_m' = sigma_{m-1}
    const Activation m3 = Activation::relu_pow(3);
    CHECK(act_eval(m3, 2.0) == doctest::Approx(8.0 / 6.0).epsilon(1e-15));
    CHECK(act_eval(m3, -2.0) == 0.0);
    for (int m = 2; m <= 5; ++m) {
        const Activation hi = Activation::relu_pow(m);
        const Activation lo = Activation::relu_pow(m - 1);
        for (double x : {0.3, 1.0, 1.7}) {
            CHECK(act_eval_d1(hi, x) == doctest::Approx(act_eval(lo, x)).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(Activation::relu_pow(0), ArgError);
}

TEST_CASE("leaky relu slope handling") {
    const Activation l = Activation::leaky(0.25);
    CHECK(act_eval(l, 2.0) == 2.0);
    CHECK(act_eval(l, -2.0) == -0.5);
    CHECK(act_eval_d1(l, -1.0) == 0.25);
    CHECK(act_eval_d1(l, 1.0) == 1.0);
    CHECK_THROWS_AS(Activation::leaky(-0.1), ArgError);
    CHECK_THROWS_AS(Activation::leaky(1.5), ArgError);
}

TEST_CASE("heaviside takes the right-continuous branch") {
    const Activation h = Activation::heaviside();
    CHECK(act_eval(h, 0.0) == 1.0);
    CHECK(act_eval(h, -1e-9) == 0.0);
    CHECK(act_eval(h, 3.0) == 1.0);
    CHECK(act_eval_d1(h, 0.5) == 0.0);
}

TEST_CASE("smooth activations match central differences") {
    const double hstep = 1e-6;
    for (const Activation& a : {Activation::tanh(), Activation::tanh_d1(),
                                Activation::tanh_d2(), Activation::sigmoid(),
                                Activation::sine()}) {
        for (double x : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
            const double fd =
                (act_eval(a, x + hstep) - act_eval(a, x - hstep)) / (2.0 * hstep);
            CHECK(act_eval_d1(a, x) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
        CHECK_FALSE(a.has_kink());
        CHECK(act_kinks(a).empty());
    }
}

TEST_CASE("tanh derivative family closed forms") {
    for (double x : {-0.8, 0.0, 1.2}) {
        const double t = std::tanh(x);
        CHECK(act_eval(Activation::tanh_d1(), x) ==
              doctest::Approx(1.0 - t * t).epsilon(1e-15));
        CHECK(act_eval(Activation::tanh_d2(), x) ==
              doctest::Approx(-2.0 * t * (1.0 - t * t)).epsilon(1e-15));
    }
}

TEST_CASE("slope suprema") {
    CHECK(act_sup_d1(Activation::relu()) == 1.0);
    CHECK(act_sup_d1(Activation::leaky(0.3)) == 1.0);
    CHECK(act_sup_d1(Activation::tanh()) == 1.0);
    CHECK(act_sup_d1(Activation::sine()) == 1.0);
    CHECK(act_sup_d1(Activation::sigmoid()) == 0.25);
    // max |tanh''| = 4 / (3 sqrt 3), attained where tanh = 1/sqrt(3)
    CHECK(act_sup_d1(Activation::tanh_d1()) ==
          doctest::Approx(4.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-15));
    // max |tanh'''| = 2 at the origin
    CHECK(act_sup_d1(Activation::tanh_d2()) == 2.0);
    CHECK_THROWS_AS(act_sup_d1(Activation::relu_pow(2)), DomainError);
}

TEST_CASE("supremum bounds actually hold on a scan") {
    for (const Activation& a : {Activation::tanh_d1(), Activation::tanh_d2(),
                                Activation::sigmoid()}) {
        const double sup = act_sup_d1(a);
        double seen = 0.0;
        for (int i = -4000; i <= 4000; ++i) {
            const double x = i * 2.5e-3;
            seen = std::max(seen, std::abs(act_eval_d1(a, x)));
        }
        CHECK(seen <= sup + 1e-12);
        CHECK(seen > 0.95 * sup); // the bound is attained, not just valid
    }
}

TEST_CASE("parse round trips") {
    for (const char* name : {"relu", "heaviside", "tanh", "tanh_d1", "tanh_d2", "sigmoid",
                             "sine", "relu_pow2", "relu_pow7"}) {
        CHECK(Activation::parse(name).name() == name);
    }
    const Activation l = Activation::parse("leaky_relu0.25");
    CHECK(l.kind == ActKind::leaky_relu);
    CHECK(l.alpha == 0.25);
    CHECK(Activation::parse("leaky_relu").alpha == 0.1);
    CHECK_THROWS_AS(Activation::parse("gelu"), ConfigError);
    CHECK_THROWS_AS(Activation::parse(""), ConfigError);
}

TEST_CASE("float instantiation stays close to double") {
    for (const Activation& a : {Activation::relu(), Activation::relu_pow(2),
                                Activation::tanh(), Activation::sigmoid()}) {
        for (double x : {-1.1, 0.4, 2.2}) {
            const double d = act_eval(a, x);
            const float f = act_eval(a, static_cast<float>(x));
            CHECK(std::abs(d - static_cast<double>(f)) < 1e-6);
        }
    }
}
