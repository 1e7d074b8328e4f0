// Python bindings for the core operations: kernels and Gram assembly,
// spectra, generalized Fourier modes, least-squares fits, training dynamics
// and Rashomon-set estimates.  Heavy loops stay in C++; targets are passed
// as TargetFunction objects rather than Python callables so training does
// not bounce through the interpreter.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gramlab/approx.hpp"
#include "gramlab/dynamics.hpp"
#include "gramlab/errors.hpp"
#include "gramlab/genfourier.hpp"
#include "gramlab/gram.hpp"
#include "gramlab/rashomon.hpp"
#include "gramlab/spectral.hpp"

namespace py = pybind11;
using namespace gramlab;

PYBIND11_MODULE(_gramlab, m) {
    m.doc() = "shallow-network Gram spectra, fits, dynamics and Rashomon sets";
    m.attr("__version__") = GRAMLAB_VERSION;

    py::register_exception<Error>(m, "GramlabError");

    py::enum_<Precision>(m, "Precision")
        .value("f32", Precision::f32)
        .value("f64", Precision::f64);

    py::class_<Activation>(m, "Activation")
        .def_static("parse", &Activation::parse, py::arg("name"))
        .def_static("relu", &Activation::relu)
        .def_static("relu_pow", &Activation::relu_pow, py::arg("m"))
        .def_static("leaky", &Activation::leaky, py::arg("alpha"))
        .def_static("tanh", &Activation::tanh)
        .def_static("sigmoid", &Activation::sigmoid)
        .def("name", &Activation::name)
        .def("__call__", [](const Activation& a, double z) { return act_eval(a, z); })
        .def("__repr__", [](const Activation& a) { return "Activation(" + a.name() + ")"; });

    py::class_<TargetFunction>(m, "TargetFunction")
        .def_static("parse", &TargetFunction::parse, py::arg("name"))
        .def_static("arctan25", &TargetFunction::arctan25)
        .def_static("trig", &TargetFunction::trig, py::arg("r"))
        .def_static("lowtrig", &TargetFunction::lowtrig)
        .def_static("bump", &TargetFunction::bump)
        .def_static("sine", &TargetFunction::sine, py::arg("k"))
        .def("name", &TargetFunction::name)
        .def("deriv", &TargetFunction::deriv, py::arg("x"))
        .def("__call__", [](const TargetFunction& f, double x) { return f(x); })
        .def("__repr__",
             [](const TargetFunction& f) { return "TargetFunction(" + f.name() + ")"; });

    py::class_<BiasGrid>(m, "BiasGrid")
        .def_static("equispaced", &BiasGrid::equispaced, py::arg("n"))
        .def_static("iid_uniform", &BiasGrid::iid_uniform, py::arg("n"), py::arg("seed"))
        .def_static("from_points",
                    [](std::vector<double> pts) { return BiasGrid::from_points(std::move(pts)); },
                    py::arg("points"))
        .def_readonly("b", &BiasGrid::b)
        .def("n", &BiasGrid::n);

    m.def(
        "adaptive_grid",
        [](const TargetFunction& f, int n, int quad_points) {
            return make_adaptive_grid([f](double x) { return f(x); },
                                      [f](double x) { return f.deriv(x); }, n,
                                      QuadratureRule::gauss(quad_points));
        },
        py::arg("target"), py::arg("n"), py::arg("quad_points") = 2048,
        "Bias grid equidistributing the arc-length density of the target");

    py::class_<DirBiasGrid>(m, "DirBiasGrid")
        .def_static("product_2d", &DirBiasGrid::product_2d, py::arg("n_theta"), py::arg("n_b"))
        .def_static("iid", &DirBiasGrid::iid, py::arg("n"), py::arg("d"), py::arg("seed"))
        .def_readonly("w", &DirBiasGrid::w)
        .def_readonly("b", &DirBiasGrid::b)
        .def("n", &DirBiasGrid::n)
        .def("dim", &DirBiasGrid::dim);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("relu", &KernelSpec::relu)
        .def_static("leaky", &KernelSpec::leaky, py::arg("alpha"))
        .def_static("fem_hat", &KernelSpec::fem_hat)
        .def_static(
            "general",
            [](const Activation& act, int quad_points) {
                return KernelSpec::general(act, {}, quad_points);
            },
            py::arg("act"), py::arg("quad_points") = 64);

    py::class_<GramMatrix>(m, "GramMatrix")
        .def_readonly("entries", &GramMatrix::entries)
        .def_readonly("basis_desc", &GramMatrix::basis_desc)
        .def("n", &GramMatrix::n);

    m.def("kernel_relu_1d", &kernel_relu_1d, py::arg("x"), py::arg("y"));
    m.def("kernel_leaky_1d", &kernel_leaky_1d, py::arg("x"), py::arg("y"), py::arg("alpha"));
    m.def("assemble", &assemble, py::arg("spec"), py::arg("grid"),
          py::arg("precision") = Precision::f64);
    m.def("assemble_dd", &assemble_dD, py::arg("grid"),
          py::arg("precision") = Precision::f64, py::arg("outer_points") = 64);

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("values", &Spectrum::values)
        .def_readonly("vectors", &Spectrum::vectors)
        .def_readonly("source", &Spectrum::source)
        .def("n", &Spectrum::n);

    m.def("spectrum", &spectrum, py::arg("gram"), py::arg("want_vectors") = false);

    py::class_<DecayFit>(m, "DecayFit")
        .def_readonly("slope", &DecayFit::slope)
        .def_readonly("intercept", &DecayFit::intercept)
        .def_readonly("r2", &DecayFit::r2)
        .def_readonly("k_lo", &DecayFit::k_lo)
        .def_readonly("k_hi", &DecayFit::k_hi);

    m.def("fit_decay", &fit_decay, py::arg("spectrum"), py::arg("k_lo"), py::arg("k_hi"));

    py::class_<GenFourierMode>(m, "GenFourierMode")
        .def_readonly("k", &GenFourierMode::k)
        .def_readonly("c", &GenFourierMode::c)
        .def("mu", &GenFourierMode::mu);

    m.def("gf_mode", &gf_mode, py::arg("k"));
    m.def("eval_mode", &eval_mode, py::arg("mode"), py::arg("x"), py::arg("deriv") = 0);
    m.def("continuous_eigenvalues", &continuous_eigenvalues, py::arg("k_max"));

    py::class_<Basis1D>(m, "Basis1D")
        .def_static("nn_relu", &Basis1D::nn_relu, py::arg("grid"))
        .def_static("fem_hat", &Basis1D::fem_hat, py::arg("grid"))
        .def("n", &Basis1D::n)
        .def("describe", &Basis1D::describe);

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("coef", &FitReport::coef)
        .def_readonly("offset", &FitReport::offset)
        .def_readonly("max_err", &FitReport::max_err)
        .def_readonly("mse", &FitReport::mse)
        .def_readonly("rank", &FitReport::rank)
        .def_readonly("eta", &FitReport::eta)
        .def_readonly("n_basis", &FitReport::n_basis)
        .def_readonly("n_samples", &FitReport::n_samples);

    m.def(
        "ls_fit",
        [](const Basis1D& basis, const TargetFunction& f, int n_samples, double eta,
           Precision precision) {
            FitOptions opt;
            opt.n_samples = n_samples;
            opt.eta = eta;
            opt.precision = precision;
            return ls_fit(basis, f, opt);
        },
        py::arg("basis"), py::arg("target"), py::arg("n_samples") = 0, py::arg("eta") = 0.0,
        py::arg("precision") = Precision::f64,
        "Truncated-SVD least squares on equispaced samples");

    m.def("resolvable_mode_count", &resolvable_mode_count, py::arg("precision"), py::arg("d"));

    py::class_<NetworkParams>(m, "NetworkParams")
        .def_static("init_alternating",
                    [](int n) { return NetworkParams::init_alternating(n); }, py::arg("n"))
        .def_static("init_cosine", [](int n) { return NetworkParams::init_cosine(n); },
                    py::arg("n"))
        .def_readwrite("a", &NetworkParams::a)
        .def_readwrite("b", &NetworkParams::b)
        .def_readwrite("c", &NetworkParams::c)
        .def("n", &NetworkParams::n)
        .def("eval", &NetworkParams::eval, py::arg("x"));

    py::class_<TrainTrace>(m, "TrainTrace")
        .def_readonly("steps", &TrainTrace::steps)
        .def_readonly("times", &TrainTrace::times)
        .def_readonly("loss", &TrainTrace::loss)
        .def_readonly("tracked_modes", &TrainTrace::tracked_modes)
        .def_readonly("E", &TrainTrace::E)
        .def_readonly("tv", &TrainTrace::tv)
        .def_readonly("sup_a2", &TrainTrace::sup_a2)
        .def_readonly("loss_increases", &TrainTrace::loss_increases)
        .def_readonly("confinement_ok", &TrainTrace::confinement_ok)
        .def_readonly("gd_step", &TrainTrace::gd_step)
        .def_readonly("final_params", &TrainTrace::final_params);

    m.def(
        "train",
        [](NetworkParams params, const TargetFunction& f, long long steps, double step,
           std::vector<int> track, long long stride, int quad_total, double bias_jitter,
           std::uint64_t seed) {
            TrainConfig cfg;
            cfg.steps = steps;
            cfg.step = step;
            cfg.track_modes = std::move(track);
            cfg.stride = stride;
            cfg.quad_total = quad_total;
            cfg.bias_jitter = bias_jitter;
            cfg.seed = seed;
            return train(std::move(params), [f](double x) { return f(x); }, cfg);
        },
        py::arg("params"), py::arg("target"), py::arg("steps"), py::arg("step") = 0.0,
        py::arg("track") = std::vector<int>{}, py::arg("stride") = 0,
        py::arg("quad_total") = 4096, py::arg("bias_jitter") = 0.0, py::arg("seed") = 0,
        "Full-batch gradient descent on the L2 loss (step 0 means 1/n)");

    m.def(
        "half_reduction_time",
        [](const TrainTrace& t, int k) { return half_reduction_time(t, k); }, py::arg("trace"),
        py::arg("k"));

    py::class_<RashomonEstimate>(m, "RashomonEstimate")
        .def_readonly("target", &RashomonEstimate::target)
        .def_readonly("n", &RashomonEstimate::n)
        .def_readonly("A", &RashomonEstimate::A)
        .def_readonly("eps", &RashomonEstimate::eps)
        .def_readonly("kappa", &RashomonEstimate::kappa)
        .def_readonly("f_norm", &RashomonEstimate::f_norm)
        .def_readonly("p_hat", &RashomonEstimate::p_hat)
        .def_readonly("wilson_lo", &RashomonEstimate::wilson_lo)
        .def_readonly("wilson_hi", &RashomonEstimate::wilson_hi)
        .def_readonly("hoeffding_bound", &RashomonEstimate::hoeffding_bound)
        .def_readonly("samples", &RashomonEstimate::samples)
        .def_readonly("seed", &RashomonEstimate::seed);

    m.def(
        "kappa_1d",
        [](const TargetFunction& f, int grid_points) {
            return kappa(RashomonTarget::one_d(f), grid_points);
        },
        py::arg("target"), py::arg("grid_points") = 2001,
        "Rashomon constant: sup_b |int_b^1 g| with g'' = f, g(1) = g'(1) = 0");

    m.def(
        "rashomon_measure",
        [](const TargetFunction& f, int n, double A, double eps, long long samples,
           std::uint64_t seed, int quad_points) {
            RashomonConfig cfg;
            cfg.target = RashomonTarget::one_d(f);
            cfg.n = n;
            cfg.A = A;
            cfg.eps = eps;
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.quad_points = quad_points;
            return mc_measure(cfg);
        },
        py::arg("target"), py::arg("n") = 100, py::arg("A") = 1.0, py::arg("eps") = 0.5,
        py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("quad_points") = 2048,
        "Monte Carlo Rashomon-set probability with its Hoeffding bound");
}
