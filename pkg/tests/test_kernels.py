"""Kernel backend tests: NumPy reference correctness and backend parity."""

import numpy as np
import pytest

from jamsense import kernels
from jamsense.kernels import available_backends, numpy_backend


def test_identity_kernel():
    x = np.array([[[1.0, 2.0, 3.0, 4.0]]])
    w = np.array([[[1.0]]])
    b = np.zeros(1)
    y = numpy_backend.conv1d_forward(x, w, b, stride=1)
    assert np.array_equal(y, x)


def test_hand_convolution():
    # [1,2,3,4] * [1,1], stride 2 -> [1+2, 3+4]
    x = np.array([[[1.0, 2.0, 3.0, 4.0]]])
    w = np.array([[[1.0, 1.0]]])
    y = numpy_backend.conv1d_forward(x, w, np.zeros(1), stride=2)
    assert np.array_equal(y, np.array([[[3.0, 7.0]]]))


def test_output_length():
    x = np.zeros((1, 1, 300))
    w = np.zeros((8, 1, 8))
    y = numpy_backend.conv1d_forward(x, w, np.zeros(8), stride=2)
    assert y.shape == (1, 8, 147)


def test_backward_matches_finite_differences(rng):
    x = rng.normal(size=(2, 3, 17))
    w = rng.normal(size=(4, 3, 5))
    b = rng.normal(size=4)
    dy = rng.normal(size=(2, 4, 7))
    dx, dw, db = numpy_backend.conv1d_backward(x, w, dy, stride=2)
    eps = 1e-6

    def obj():
        return float((numpy_backend.conv1d_forward(x, w, b, 2) * dy).sum())

    for arr, grad in ((x, dx), (w, dw), (b, db)):
        for _ in range(20):
            i = rng.integers(arr.size)
            orig = arr.flat[i]
            arr.flat[i] = orig + eps
            up = obj()
            arr.flat[i] = orig - eps
            down = obj()
            arr.flat[i] = orig
            assert grad.flat[i] == pytest.approx((up - down) / (2 * eps), abs=1e-5)


def test_fading_series_single_ray():
    amps = np.array([2.0])
    phases = np.array([0.0])
    dopplers = np.array([0.0])
    t = np.linspace(0.0, 1.0, 5)
    g = numpy_backend.fading_series(amps, phases, dopplers, t)
    assert np.allclose(g, 2.0 + 0.0j)


def test_fading_series_doppler_rotation():
    # one unit ray at 1 Hz Doppler: g(0.25) = exp(j*pi/2) = j
    g = numpy_backend.fading_series(
        np.array([1.0]), np.array([0.0]), np.array([1.0]), np.array([0.25])
    )
    assert g[0] == pytest.approx(1j, abs=1e-12)


def test_backend_parity(rng):
    backends = available_backends()
    if "cython" not in backends:
        pytest.skip("compiled extension not built")
    cy = backends["cython"]
    x = rng.normal(size=(3, 4, 33))
    w = rng.normal(size=(6, 4, 7))
    b = rng.normal(size=6)
    dy = rng.normal(size=(3, 6, 14))
    y_np = numpy_backend.conv1d_forward(x, w, b, 2)
    y_cy = cy.conv1d_forward(x, w, b, 2)
    assert np.allclose(y_np, y_cy, atol=1e-12)
    for a, b2 in zip(
        numpy_backend.conv1d_backward(x, w, dy, 2), cy.conv1d_backward(x, w, dy, 2)
    ):
        assert np.allclose(a, b2, atol=1e-12)
    amps = rng.uniform(0.1, 1.0, 40)
    phases = rng.uniform(0, 2 * np.pi, 40)
    dops = rng.normal(0, 50, 40)
    t = np.linspace(0, 2, 500)
    assert np.allclose(
        numpy_backend.fading_series(amps, phases, dops, t),
        cy.fading_series(amps, phases, dops, t),
        atol=1e-10,
    )


def test_active_backend_exports():
    assert kernels.backend_name() in available_backends()
    assert callable(kernels.conv1d_forward)
