"""Layer primitives with forward and exact reverse-mode backward passes.

Everything runs in float64 on NumPy arrays. Each layer caches whatever its
backward pass needs during forward; backward returns the input gradient and
accumulates parameter gradients in ``grads``.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DomainError, ShapeError


def softmax(x, axis=-1):
    """Shift-invariant softmax over the given axis."""
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


class Layer:
    def __init__(self):
        self.params = {}
        self.grads = {}
        self._cache = None

    def zero_grads(self):
        for k in self.grads:
            self.grads[k][...] = 0.0

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError


def _init_uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, shape)


# Small positive bias for layers feeding a rectifier: keeps pre-activations
# away from the kink, where finite-difference gradient checks are invalid.
RELU_BIAS_INIT = 0.01


class Conv1D(Layer):
    """Strided valid cross-correlation over the temporal axis."""

    def __init__(self, c_in, c_out, kernel, stride, rng):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride = kernel, stride
        self.params = {
            "W": _init_uniform(rng, (c_out, c_in, kernel), c_in * kernel),
            "b": np.full(c_out, RELU_BIAS_INIT),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def out_length(self, l_in):
        if l_in < self.kernel:
            raise ShapeError(f"input length {l_in} < kernel {self.kernel}")
        return (l_in - self.kernel) // self.stride + 1

    def forward(self, x, training=False, rng=None):
        if x.shape[1] != self.c_in:
            raise ShapeError(f"expected {self.c_in} channels, got {x.shape[1]}")
        self.out_length(x.shape[2])
        self._cache = x
        return kernels.conv1d_forward(x, self.params["W"], self.params["b"], self.stride)

    def backward(self, dy):
        x = self._cache
        dx, dw, db = kernels.conv1d_backward(x, self.params["W"], dy, self.stride)
        self.grads["W"] += dw
        self.grads["b"] += db
        return dx


class ReLU(Layer):
    def forward(self, x, training=False, rng=None):
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, dy):
        return dy * self._cache


class ToSequence(Layer):
    """(B, C, L) -> (B, L, C)."""

    def forward(self, x, training=False, rng=None):
        return np.transpose(x, (0, 2, 1))

    def backward(self, dy):
        return np.transpose(dy, (0, 2, 1))


class MultiHeadSelfAttention(Layer):
    """Scaled dot-product self-attention with per-head Q/K/V projections.

    The H*d_key head concatenation is projected to d_out so the output
    width is independent of the head geometry. The key projection carries
    no bias: a constant key shift cancels in the row softmax, so such a
    bias would be inert (zero gradient by construction).
    """

    def __init__(self, d_in, heads, d_key, d_out, rng):
        super().__init__()
        self.d_in, self.heads, self.d_key, self.d_out = d_in, heads, d_key, d_out
        self.params = {
            "Wq": _init_uniform(rng, (heads, d_in, d_key), d_in),
            "Wk": _init_uniform(rng, (heads, d_in, d_key), d_in),
            "Wv": _init_uniform(rng, (heads, d_in, d_key), d_in),
            "bq": np.zeros((heads, d_key)),
            "bv": np.zeros((heads, d_key)),
            "Wo": _init_uniform(rng, (heads * d_key, d_out), heads * d_key),
            "bo": np.zeros(d_out),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def forward(self, x, training=False, rng=None):
        if x.ndim != 3 or x.shape[2] != self.d_in:
            raise ShapeError(f"expected (B, L, {self.d_in}), got {x.shape}")
        if x.shape[1] == 0:
            raise ShapeError("empty sequence")
        p = self.params
        q = np.einsum("bld,hdk->bhlk", x, p["Wq"], optimize=True) + p["bq"][None, :, None, :]
        k = np.einsum("bld,hdk->bhlk", x, p["Wk"], optimize=True)
        v = np.einsum("bld,hdk->bhlk", x, p["Wv"], optimize=True) + p["bv"][None, :, None, :]
        logits = np.einsum("bhik,bhjk->bhij", q, k, optimize=True) / np.sqrt(self.d_key)
        attn = softmax(logits, axis=-1)
        heads_out = np.einsum("bhij,bhjk->bhik", attn, v, optimize=True)
        b, h, l, dk = heads_out.shape
        concat = np.transpose(heads_out, (0, 2, 1, 3)).reshape(b, l, h * dk)
        y = concat @ p["Wo"] + p["bo"]
        self._cache = (x, q, k, v, attn, concat)
        self.last_heads_out = heads_out  # inspection hook for tests
        return y

    def backward(self, dy):
        x, q, k, v, attn, concat = self._cache
        p = self.params
        b, l, _ = x.shape
        h, dk = self.heads, self.d_key
        self.grads["Wo"] += np.einsum("blc,blo->co", concat, dy, optimize=True)
        self.grads["bo"] += dy.sum(axis=(0, 1))
        dconcat = dy @ p["Wo"].T
        dheads = np.transpose(dconcat.reshape(b, l, h, dk), (0, 2, 1, 3))
        dattn = np.einsum("bhik,bhjk->bhij", dheads, v, optimize=True)
        dv = np.einsum("bhij,bhik->bhjk", attn, dheads, optimize=True)
        # softmax jacobian on the last axis
        dlogits = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dlogits /= np.sqrt(self.d_key)
        dq = np.einsum("bhij,bhjk->bhik", dlogits, k, optimize=True)
        dk_ = np.einsum("bhij,bhik->bhjk", dlogits, q, optimize=True)
        dx = np.zeros_like(x)
        for name, dproj in (("Wq", dq), ("Wk", dk_), ("Wv", dv)):
            self.grads[name] += np.einsum("bld,bhlk->hdk", x, dproj, optimize=True)
            if name != "Wk":
                self.grads["b" + name[1]] += dproj.sum(axis=(0, 2))
            dx += np.einsum("bhlk,hdk->bld", dproj, p[name], optimize=True)
        return dx


class LSTM(Layer):
    """Single-layer LSTM returning the final hidden state (B, units)."""

    def __init__(self, d_in, units, rng):
        super().__init__()
        self.d_in, self.units = d_in, units
        self.params = {
            "Wx": _init_uniform(rng, (d_in, 4 * units), d_in),
            "Wh": _init_uniform(rng, (units, 4 * units), units),
            "b": np.zeros(4 * units),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def forward(self, x, training=False, rng=None):
        if x.ndim != 3 or x.shape[2] != self.d_in:
            raise ShapeError(f"expected (B, L, {self.d_in}), got {x.shape}")
        b, l, _ = x.shape
        u = self.units
        h = np.zeros((b, u))
        c = np.zeros((b, u))
        steps = []
        p = self.params
        for t in range(l):
            xt = x[:, t, :]
            z = xt @ p["Wx"] + h @ p["Wh"] + p["b"]
            i = _sigmoid(z[:, :u])
            f = _sigmoid(z[:, u : 2 * u])
            g = np.tanh(z[:, 2 * u : 3 * u])
            o = _sigmoid(z[:, 3 * u :])
            c_prev = c
            c = f * c_prev + i * g
            tanh_c = np.tanh(c)
            h = o * tanh_c
            steps.append((xt, h, c, c_prev, i, f, g, o, tanh_c))
        self._cache = (x, steps)
        return h

    def backward(self, dh_last):
        x, steps = self._cache
        b, l, _ = x.shape
        u = self.units
        p = self.params
        dx = np.zeros_like(x)
        dh = dh_last
        dc = np.zeros((b, u))
        for t in range(l - 1, -1, -1):
            xt, h, c, c_prev, i, f, g, o, tanh_c = steps[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c**2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g**2),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            h_prev = steps[t - 1][1] if t > 0 else np.zeros((b, u))
            self.grads["Wx"] += xt.T @ dz
            self.grads["Wh"] += h_prev.T @ dz
            self.grads["b"] += dz.sum(axis=0)
            dx[:, t, :] = dz @ p["Wx"].T
            dh = dz @ p["Wh"].T
            dc = dc * f
        return dx


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class Dropout(Layer):
    """Inverted dropout: identity at inference, scaled mask in training."""

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise DomainError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._cache = None
            return x
        if rng is None:
            raise DomainError("training-mode dropout requires an rng")
        mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        self._cache = mask
        return x * mask

    def backward(self, dy):
        if self._cache is None:
            return dy
        return dy * self._cache


class TemporalMeanPool(Layer):
    """(B, L, d) -> (B, d); identity on already-pooled (B, d) input."""

    def forward(self, x, training=False, rng=None):
        if x.ndim == 2:
            self._cache = None
            return x
        if x.shape[1] < 1:
            raise ShapeError("empty sequence")
        self._cache = x.shape
        return x.mean(axis=1)

    def backward(self, dy):
        if self._cache is None:
            return dy
        b, l, d = self._cache
        return np.broadcast_to(dy[:, None, :] / l, (b, l, d)).copy()


class Flatten(Layer):
    def forward(self, x, training=False, rng=None):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._cache)


class Dense(Layer):
    def __init__(self, n_in, n_out, rng):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self.params = {
            "W": _init_uniform(rng, (n_in, n_out), n_in),
            "b": np.full(n_out, RELU_BIAS_INIT),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def forward(self, x, training=False, rng=None):
        if x.shape[1] != self.n_in:
            raise ShapeError(f"expected width {self.n_in}, got {x.shape[1]}")
        self._cache = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        x = self._cache
        self.grads["W"] += x.T @ dy
        self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["W"].T
