#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gramlab/errors.hpp"

namespace gramlab {

// Scalar activations used to build basis functions sigma(w x + b).  The
// normalized power unit uses x_+^m / m! so that repeated differentiation
// steps down the family without extra constants.  All kinked activations
// take the right-continuous branch at the kink: relu'(0) = 1, step(0) = 1.
enum class ActKind {
    relu,
    relu_pow,
    leaky_relu,
    heaviside,
    tanh_fn,
    tanh_d1,
    tanh_d2,
    sigmoid,
    sine,
};

struct Activation {
    ActKind kind = ActKind::relu;
    int m = 1;          // relu_pow exponent
    double alpha = 0.1; // leaky_relu negative slope

    static Activation relu() { return {ActKind::relu, 1, 0.0}; }
    static Activation relu_pow(int m) {
        if (m < 1) throw ArgError("relu_pow: exponent must be >= 1");
        return {ActKind::relu_pow, m, 0.0};
    }
    static Activation leaky(double alpha) {
        if (!(alpha >= 0.0) || !(alpha <= 1.0))
            throw ArgError("leaky_relu: slope must lie in [0, 1]");
        return {ActKind::leaky_relu, 1, alpha};
    }
    static Activation heaviside() { return {ActKind::heaviside, 1, 0.0}; }
    static Activation tanh() { return {ActKind::tanh_fn, 1, 0.0}; }
    static Activation tanh_d1() { return {ActKind::tanh_d1, 1, 0.0}; }
    static Activation tanh_d2() { return {ActKind::tanh_d2, 1, 0.0}; }
    static Activation sigmoid() { return {ActKind::sigmoid, 1, 0.0}; }
    static Activation sine() { return {ActKind::sine, 1, 0.0}; }

    bool has_kink() const {
        switch (kind) {
            case ActKind::relu:
            case ActKind::relu_pow:
            case ActKind::leaky_relu:
            case ActKind::heaviside:
                return true;
            default:
                return false;
        }
    }

    std::string name() const {
        switch (kind) {
            case ActKind::relu: return "relu";
            case ActKind::relu_pow: return "relu_pow" + std::to_string(m);
            case ActKind::leaky_relu: return "leaky_relu";
            case ActKind::heaviside: return "heaviside";
            case ActKind::tanh_fn: return "tanh";
            case ActKind::tanh_d1: return "tanh_d1";
            case ActKind::tanh_d2: return "tanh_d2";
            case ActKind::sigmoid: return "sigmoid";
            case ActKind::sine: return "sine";
        }
        return "?";
    }

    static Activation parse(const std::string& s) {
        if (s == "relu") return relu();
        if (s == "heaviside") return heaviside();
        if (s == "tanh") return tanh();
        if (s == "tanh_d1") return tanh_d1();
        if (s == "tanh_d2") return tanh_d2();
        if (s == "sigmoid") return sigmoid();
        if (s == "sine") return sine();
        if (s.rfind("relu_pow", 0) == 0 && s.size() > 8) return relu_pow(std::stoi(s.substr(8)));
        if (s.rfind("leaky_relu", 0) == 0) {
            if (s.size() == 10) return leaky(0.1);
            return leaky(std::stod(s.substr(10)));
        }
        throw ConfigError("unknown activation '" + s + "'");
    }
};

namespace detail {
template <class T>
T factorial_t(int m) {
    T f = static_cast<T>(1);
    for (int i = 2; i <= m; ++i) f *= static_cast<T>(i);
    return f;
}
} // namespace detail

template <class T>
T act_eval(const Activation& a, T x) {
    switch (a.kind) {
        case ActKind::relu:
            return x > T(0) ? x : T(0);
        case ActKind::relu_pow: {
            if (x <= T(0)) return T(0);
            T p = x;
            for (int i = 1; i < a.m; ++i) p *= x;
            return p / detail::factorial_t<T>(a.m);
        }
        case ActKind::leaky_relu:
            return x >= T(0) ? x : static_cast<T>(a.alpha) * x;
        case ActKind::heaviside:
            return x >= T(0) ? T(1) : T(0);
        case ActKind::tanh_fn:
            return std::tanh(x);
        case ActKind::tanh_d1: {
            const T t = std::tanh(x);
            return T(1) - t * t;
        }
        case ActKind::tanh_d2: {
            const T t = std::tanh(x);
            return T(-2) * t * (T(1) - t * t);
        }
        case ActKind::sigmoid:
            return T(1) / (T(1) + std::exp(-x));
        case ActKind::sine:
            return std::sin(x);
    }
    return T(0);
}

template <class T>
T act_eval_d1(const Activation& a, T x) {
    switch (a.kind) {
        case ActKind::relu:
            return x >= T(0) ? T(1) : T(0);
        case ActKind::relu_pow: {
            if (a.m == 1) return x >= T(0) ? T(1) : T(0);
            if (x <= T(0)) return T(0);
            T p = x;
            for (int i = 1; i < a.m - 1; ++i) p *= x;
            return p / detail::factorial_t<T>(a.m - 1);
        }
        case ActKind::leaky_relu:
            return x >= T(0) ? T(1) : static_cast<T>(a.alpha);
        case ActKind::heaviside:
            return T(0); // derivative almost everywhere
        case ActKind::tanh_fn: {
            const T t = std::tanh(x);
            return T(1) - t * t;
        }
        case ActKind::tanh_d1: {
            const T t = std::tanh(x);
            return T(-2) * t * (T(1) - t * t);
        }
        case ActKind::tanh_d2: {
            const T t = std::tanh(x);
            const T s = T(1) - t * t; // sech^2
            return s * (T(6) * t * t - T(2));
        }
        case ActKind::sigmoid: {
            const T s = T(1) / (T(1) + std::exp(-x));
            return s * (T(1) - s);
        }
        case ActKind::sine:
            return std::cos(x);
    }
    return T(0);
}

// Supremum of |sigma'| over the real line; DomainError when unbounded.
inline double act_sup_d1(const Activation& a) {
    switch (a.kind) {
        case ActKind::relu:
            return 1.0;
        case ActKind::relu_pow:
            if (a.m == 1) return 1.0;
            throw DomainError("act_sup_d1: relu_pow with m >= 2 has unbounded slope");
        case ActKind::leaky_relu:
            return 1.0;
        case ActKind::heaviside:
            return 0.0; // almost-everywhere derivative
        case ActKind::tanh_fn:
            return 1.0;
        case ActKind::tanh_d1:
            return 4.0 / (3.0 * std::sqrt(3.0)); // max |tanh''|
        case ActKind::tanh_d2:
            return 2.0; // max |tanh'''|, attained at the origin
        case ActKind::sigmoid:
            return 0.25;
        case ActKind::sine:
            return 1.0;
    }
    return 0.0;
}

// Kink locations of x -> sigma(x) (empty for smooth activations).
inline std::vector<double> act_kinks(const Activation& a) {
    return a.has_kink() ? std::vector<double>{0.0} : std::vector<double>{};
}

} // namespace gramlab
