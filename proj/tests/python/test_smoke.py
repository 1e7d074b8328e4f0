import math

import pytest

import gramlab as gl


def test_version_present():
    assert gl.__version__.count(".") == 2


def test_kernel_closed_forms():
    assert gl.kernel_relu_1d(0.0, 0.0) == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert gl.kernel_relu_1d(-1.0, -1.0) == pytest.approx(8.0 / 3.0, rel=1e-14)
    assert gl.kernel_relu_1d(1.0, 1.0) == 0.0


def test_spectrum_decay():
    gram = gl.assemble(gl.KernelSpec.relu(), gl.BiasGrid.equispaced(300))
    spec = gl.spectrum(gram)
    vals = spec.values
    assert vals[0] > 0
    assert all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1))
    fit = gl.fit_decay(spec, 5, 60)
    assert -4.5 < fit.slope < -3.5


def test_continuum_eigenvalues():
    mode = gl.gf_mode(1)
    assert mode.c == pytest.approx(0.9375520344, abs=1e-9)
    mu = gl.continuous_eigenvalues(3)
    assert mu[0] == pytest.approx(mode.c ** -4, rel=1e-12)
    assert mu[0] > mu[1] > mu[2] > 0


def test_fem_fit_resolves_low_frequency():
    grid = gl.BiasGrid.equispaced(200)
    rep = gl.ls_fit(gl.Basis1D.fem_hat(grid), gl.TargetFunction.lowtrig())
    assert rep.mse < 1e-4
    assert rep.max_err < 0.05


def test_training_reduces_loss():
    params = gl.NetworkParams.init_alternating(50)
    trace = gl.train(params, gl.TargetFunction.sine(1), steps=200, track=[1])
    assert trace.loss[-1] < trace.loss[0]
    assert trace.confinement_ok


def test_kappa_matches_closed_form():
    k = gl.kappa_1d(gl.TargetFunction.sine(3))
    assert k == pytest.approx(1.0 / (3.0 * math.pi) ** 2, rel=1e-5)


def test_rashomon_measure_reproducible():
    f = gl.TargetFunction.sine(1)
    a = gl.rashomon_measure(f, samples=500, seed=7, quad_points=512)
    b = gl.rashomon_measure(f, samples=500, seed=7, quad_points=512)
    assert a.p_hat == b.p_hat
    assert 0.0 <= a.p_hat <= 1.0
    assert a.wilson_lo <= a.p_hat <= a.wilson_hi


def test_errors_surface_as_python_exceptions():
    with pytest.raises(Exception) as exc_info:
        gl.kernel_relu_1d(2.0, 0.0)
    assert "kernel_relu_1d" in str(exc_info.value)
