"""SGD training loop and finite-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, TrainingError
from .layers import ReLU
from .model import Model, cross_entropy, forward_windows, labels_to_onehot


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2.5e-2
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")


def train(model: Model, samples, cfg: TrainConfig):
    """Plain mini-batch SGD on mean cross-entropy; deterministic per seed.

    Returns the per-epoch mean training loss curve.
    """
    if not samples:
        raise DomainError("train requires a non-empty train set")
    rng = np.random.default_rng(cfg.seed)
    params = model.named_parameters()
    grads = model.named_gradients()
    losses = []
    n = len(samples)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            batch = [samples[i] for i in order[start : start + cfg.batch_size]]
            y = labels_to_onehot([s.label for s in batch])
            model.zero_grads()
            probs = forward_windows(model, batch, training=True, rng=rng)
            loss = cross_entropy(probs, y)
            if not np.isfinite(loss):
                raise TrainingError("training loss is not finite", epoch=epoch)
            model.backward(y)
            for name in params:
                params[name] -= cfg.learning_rate * grads[name]
            epoch_loss += loss
            n_batches += 1
        losses.append(epoch_loss / n_batches)
    return losses


def _relu_masks(model: Model):
    masks = []
    for stack in (model.head_rssi, model.head_sinr, model.body):
        for _, layer in stack.layers():
            if isinstance(layer, ReLU):
                masks.append(np.array(layer._cache, copy=True))
    return masks


def grad_check(model: Model, sample, eps=1e-5, n_coords=200, seed=0):
    """Max relative error between analytic and central-difference gradients.

    Runs in inference mode (dropout disabled) over a random parameter
    subset of at least ``n_coords`` coordinates, resampling past two
    kinds of coordinate where a central difference is not a valid
    gradient estimate:

    - rectifier kinks: the active set of some ReLU changes between the
      two perturbed evaluations, so the loss is non-differentiable
      across the step;
    - below-resolution gradients: the difference ``up - down`` is at the
      scale of float64 rounding in the loss itself, roughly
      ``eps_mach * |loss| / eps``, so the quotient is noise. Those
      coordinates are still checked, but against an absolute bound on
      ``|analytic - numeric|`` instead of a relative one.
    """
    rng = np.random.default_rng(seed)
    y = labels_to_onehot([sample.label])

    def loss():
        probs = forward_windows(model, [sample], training=False)
        return cross_entropy(probs, y)

    model.zero_grads()
    forward_windows(model, [sample], training=False)
    model.backward(y)
    params = model.named_parameters()
    grads = model.named_gradients()
    base_loss = loss()

    # Roundoff noise of the central difference, with headroom for error
    # accumulated along the perturbed forward path.
    fd_noise = 8.0 * np.finfo(float).eps * max(1.0, abs(base_loss)) / (2.0 * eps)
    # Below this magnitude, 1e-4 relative agreement is not measurable.
    rel_floor = 1e4 * fd_noise

    names = sorted(params)
    max_err = 0.0
    checked = 0
    attempts = 0
    while checked < n_coords and attempts < 20 * n_coords:
        attempts += 1
        name = names[rng.integers(len(names))]
        flat = int(rng.integers(params[name].size))
        arr = params[name]
        orig = arr.flat[flat]
        arr.flat[flat] = orig + eps
        up = loss()
        masks_up = _relu_masks(model)
        arr.flat[flat] = orig - eps
        down = loss()
        masks_down = _relu_masks(model)
        arr.flat[flat] = orig
        if any(not np.array_equal(a, b) for a, b in zip(masks_up, masks_down)):
            continue
        numeric = (up - down) / (2.0 * eps)
        analytic = grads[name].flat[flat]
        checked += 1
        if max(abs(analytic), abs(numeric)) < rel_floor:
            if abs(analytic - numeric) > fd_noise:
                max_err = max(max_err, 1.0)
            continue
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        max_err = max(max_err, err)
    return max_err
