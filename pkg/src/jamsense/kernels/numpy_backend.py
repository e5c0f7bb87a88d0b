"""Pure-NumPy implementations of the hot kernels.

These are the reference implementations; the compiled extension in
``_ckernels.pyx`` must match them numerically.
"""

import numpy as np

NAME = "numpy"


def conv1d_forward(x, w, b, stride):
    """Strided 1-D cross-correlation.

    x: (B, C_in, L), w: (C_out, C_in, K), b: (C_out,) -> (B, C_out, L_out)
    """
    k = w.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)
    windows = windows[:, :, ::stride, :]  # (B, C_in, L_out, K)
    y = np.einsum("bilk,oik->bol", windows, w, optimize=True)
    return y + b[None, :, None]


def conv1d_backward(x, w, dy, stride):
    """Gradients of conv1d_forward w.r.t. input, weights, and bias."""
    k = w.shape[2]
    l_out = dy.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)
    windows = windows[:, :, ::stride, :]
    dw = np.einsum("bol,bilk->oik", dy, windows, optimize=True)
    db = dy.sum(axis=(0, 2))
    dx = np.zeros_like(x)
    for j in range(k):
        # output position l reads input position l*stride + j
        contrib = np.einsum("bol,oi->bil", dy, w[:, :, j], optimize=True)
        dx[:, :, j : j + stride * l_out : stride] += contrib
    return dx, dw, db


def fading_series(amps, phases, dopplers, t):
    """Sum-of-rays narrowband channel gain over a time grid.

    g(t) = sum_r amps[r] * exp(j * (phases[r] + 2*pi*dopplers[r]*t))
    Returns a complex128 array of len(t).
    """
    arg = phases[:, None] + 2.0 * np.pi * dopplers[:, None] * t[None, :]
    return (amps[:, None] * np.exp(1j * arg)).sum(axis=0)
