"""The two-head convolutional detection network (attention or LSTM block).

Each head ingests one observable (RSSI or SINR window), runs three strided
convolutions, a sequence block, dropout, and temporal pooling into a fixed
16-wide embedding; the body concatenates both embeddings, treats them as a
one-channel sequence, convolves again and classifies with a softmax pair.
Temporal pooling makes the parameter count independent of the window size.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import ConfigError, ShapeError
from . import layers as L

MAX_TRAINABLE_PARAMS = 100_000

DEFAULT_CONV_SPECS = ((8, 8, 2), (8, 4, 2), (8, 3, 1))  # (filters, kernel, stride)


@dataclass(frozen=True)
class ArchConfig:
    variant: str = "attention"  # or "lstm"
    w: int = 300
    head_conv_specs: tuple = DEFAULT_CONV_SPECS
    attn_heads: int = 8
    attn_key_dim: int = 8
    attn_out_dim: int = 16
    lstm_units: int = 16
    body_conv_specs: tuple = DEFAULT_CONV_SPECS
    dense_width: int = 100
    dropout_rate: float = 0.4
    n_classes: int = 2

    def __post_init__(self):
        if self.variant not in ("attention", "lstm"):
            raise ConfigError(f"variant must be attention or lstm, got {self.variant!r}")
        if self.w < 1:
            raise ConfigError("w must be >= 1")
        for specs in (self.head_conv_specs, self.body_conv_specs):
            for spec in specs:
                if len(spec) != 3 or any(int(v) < 1 for v in spec):
                    raise ConfigError(f"bad conv spec {spec}")

    def to_dict(self):
        d = asdict(self)
        d["head_conv_specs"] = [list(s) for s in self.head_conv_specs]
        d["body_conv_specs"] = [list(s) for s in self.body_conv_specs]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["head_conv_specs"] = tuple(tuple(s) for s in d["head_conv_specs"])
        d["body_conv_specs"] = tuple(tuple(s) for s in d["body_conv_specs"])
        return cls(**d)


class _Stack:
    """A named sequence of layers sharing one forward/backward path."""

    def __init__(self, named_layers):
        self.named_layers = named_layers

    def forward(self, x, training=False, rng=None):
        for _, layer in self.named_layers:
            x = layer.forward(x, training=training, rng=rng)
        return x

    def backward(self, dy):
        for _, layer in reversed(self.named_layers):
            dy = layer.backward(dy)
        return dy

    def layers(self):
        return self.named_layers


class Model:
    """Two input heads plus a shared classification body."""

    def __init__(self, cfg: ArchConfig, seed=0):
        self.cfg = cfg
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.head_rssi = self._build_head(cfg, rng)
        self.head_sinr = self._build_head(cfg, rng)
        self.body = self._build_body(cfg, rng)
        n = self.param_count()
        if n >= MAX_TRAINABLE_PARAMS:
            raise ConfigError(f"parameter count {n} exceeds {MAX_TRAINABLE_PARAMS}")

    @staticmethod
    def _embed_dim(cfg):
        return cfg.attn_out_dim if cfg.variant == "attention" else cfg.lstm_units

    def _build_head(self, cfg, rng):
        named = []
        c_in = 1
        for i, (filters, kernel, stride) in enumerate(cfg.head_conv_specs):
            named.append((f"conv{i}", L.Conv1D(c_in, filters, kernel, stride, rng)))
            named.append((f"relu{i}", L.ReLU()))
            c_in = filters
        named.append(("to_seq", L.ToSequence()))
        if cfg.variant == "attention":
            named.append(
                (
                    "attention",
                    L.MultiHeadSelfAttention(
                        c_in, cfg.attn_heads, cfg.attn_key_dim, cfg.attn_out_dim, rng
                    ),
                )
            )
        else:
            named.append(("lstm", L.LSTM(c_in, cfg.lstm_units, rng)))
        named.append(("dropout", L.Dropout(cfg.dropout_rate)))
        named.append(("pool", L.TemporalMeanPool()))
        return _Stack(named)

    def _build_body(self, cfg, rng):
        named = []
        c_in = 1
        length = 2 * self._embed_dim(cfg)
        for i, (filters, kernel, stride) in enumerate(cfg.body_conv_specs):
            conv = L.Conv1D(c_in, filters, kernel, stride, rng)
            named.append((f"conv{i}", conv))
            named.append((f"relu{i}", L.ReLU()))
            length = conv.out_length(length)
            c_in = filters
        named.append(("flatten", L.Flatten()))
        named.append(("dropout", L.Dropout(cfg.dropout_rate)))
        named.append(("dense", L.Dense(c_in * length, cfg.dense_width, rng)))
        named.append(("dense_relu", L.ReLU()))
        named.append(("logits", L.Dense(cfg.dense_width, cfg.n_classes, rng)))
        return _Stack(named)

    # -- parameters ---------------------------------------------------------

    def named_parameters(self):
        out = {}
        for prefix, stack in (
            ("head_rssi", self.head_rssi),
            ("head_sinr", self.head_sinr),
            ("body", self.body),
        ):
            for lname, layer in stack.layers():
                for pname, arr in layer.params.items():
                    out[f"{prefix}.{lname}.{pname}"] = arr
        return out

    def named_gradients(self):
        out = {}
        for prefix, stack in (
            ("head_rssi", self.head_rssi),
            ("head_sinr", self.head_sinr),
            ("body", self.body),
        ):
            for lname, layer in stack.layers():
                for pname, arr in layer.grads.items():
                    out[f"{prefix}.{lname}.{pname}"] = arr
        return out

    def param_count(self):
        return sum(a.size for a in self.named_parameters().values())

    def zero_grads(self):
        for stack in (self.head_rssi, self.head_sinr, self.body):
            for _, layer in stack.layers():
                layer.zero_grads()

    # -- forward / backward -------------------------------------------------

    def forward(self, rssi, sinr, training=False, rng=None):
        """rssi/sinr: (B, w) normalized windows -> (B, n_classes) probs."""
        rssi = np.atleast_2d(np.asarray(rssi, dtype=np.float64))
        sinr = np.atleast_2d(np.asarray(sinr, dtype=np.float64))
        if rssi.shape != sinr.shape:
            raise ShapeError("rssi and sinr batches must have equal shape")
        if rssi.shape[1] != self.cfg.w:
            raise ShapeError(f"expected window length {self.cfg.w}, got {rssi.shape[1]}")
        e_rssi = self.head_rssi.forward(rssi[:, None, :], training=training, rng=rng)
        e_sinr = self.head_sinr.forward(sinr[:, None, :], training=training, rng=rng)
        merged = np.concatenate([e_rssi, e_sinr], axis=1)
        self._split = e_rssi.shape[1]
        logits = self.body.forward(merged[:, None, :], training=training, rng=rng)
        self._probs = L.softmax(logits, axis=1)
        return self._probs

    def backward(self, targets_onehot):
        """Mean cross-entropy gradient; call right after forward()."""
        p = self._probs
        dlogits = (p - targets_onehot) / p.shape[0]
        dmerged = self.body.backward(dlogits)[:, 0, :]
        d_rssi = self.head_rssi.backward(dmerged[:, : self._split])
        d_sinr = self.head_sinr.backward(dmerged[:, self._split :])
        return d_rssi, d_sinr


def build_mhdnn(cfg: ArchConfig, seed=0) -> Model:
    return Model(cfg, seed=seed)


def forward_windows(model: Model, samples, training=False, rng=None):
    """Forward a list of WindowSamples; returns (n, n_classes) probabilities."""
    rssi = np.stack([s.rssi for s in samples])
    sinr = np.stack([s.sinr for s in samples])
    return model.forward(rssi, sinr, training=training, rng=rng)


def cross_entropy(probs, targets_onehot, eps=1e-12):
    return float(-(targets_onehot * np.log(probs + eps)).sum(axis=1).mean())


def labels_to_onehot(labels, n_classes=2):
    """Column 0 = attack probability, column 1 = no-attack."""
    y = np.zeros((len(labels), n_classes))
    for i, lab in enumerate(labels):
        y[i, 0 if lab else 1] = 1.0
    return y


def attack_probability(probs):
    return probs[:, 0]
