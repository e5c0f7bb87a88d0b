"""Reference classifiers on flattened windows: Gaussian naive Bayes and
logistic regression. Both double as fallbacks for undecided votes."""

from __future__ import annotations

import numpy as np

from .errors import DomainError, TrainingError
from .nn.checkpoint import load_checkpoint, save_checkpoint

VAR_FLOOR = 1e-9


def flatten_features(sample):
    """Normalized RSSI window concatenated with the normalized SINR window."""
    return np.concatenate([sample.rssi, sample.sinr])


def _design_matrix(samples):
    x = np.stack([flatten_features(s) for s in samples])
    y = np.array([1.0 if s.label else 0.0 for s in samples])
    return x, y


class GaussianNB:
    """Per-class per-feature Gaussian likelihoods with class priors."""

    def __init__(self):
        self.means = None  # (2, n_features); row 1 = attack
        self.variances = None
        self.log_priors = None

    def fit(self, samples):
        x, y = _design_matrix(samples)
        if len(np.unique(y)) < 2:
            raise DomainError("GaussianNB requires both classes in the fit data")
        means, variances, priors = [], [], []
        for cls in (0.0, 1.0):
            rows = x[y == cls]
            means.append(rows.mean(axis=0))
            variances.append(np.maximum(rows.var(axis=0), VAR_FLOOR))
            priors.append(len(rows) / len(x))
        self.means = np.stack(means)
        self.variances = np.stack(variances)
        self.log_priors = np.log(priors)
        return self

    def predict_proba(self, x):
        """x: (n, f) or a single feature vector -> attack probability."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        log_post = np.empty((x.shape[0], 2))
        for cls in (0, 1):
            ll = -0.5 * (
                np.log(2.0 * np.pi * self.variances[cls])
                + (x - self.means[cls]) ** 2 / self.variances[cls]
            ).sum(axis=1)
            log_post[:, cls] = ll + self.log_priors[cls]
        shifted = log_post - log_post.max(axis=1, keepdims=True)
        post = np.exp(shifted)
        post /= post.sum(axis=1, keepdims=True)
        return post[:, 1]

    def predict(self, sample):
        return bool(self.predict_proba(flatten_features(sample))[0] >= 0.5)

    def save(self, path, norm_stats=None):
        meta = {"norm_stats": norm_stats.to_dict() if norm_stats else None}
        save_checkpoint(
            path,
            "gnb",
            meta,
            {
                "means": self.means,
                "variances": self.variances,
                "log_priors": self.log_priors,
            },
        )

    @classmethod
    def load(cls, path):
        model_type, meta, arrays = load_checkpoint(path)
        if model_type != "gnb":
            raise DomainError(f"expected a gnb checkpoint, found {model_type!r}")
        out = cls()
        out.means = arrays["means"]
        out.variances = arrays["variances"]
        out.log_priors = arrays["log_priors"]
        return out


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class LogisticRegression:
    """Sigmoid-linear model trained by full-batch gradient descent."""

    def __init__(self):
        self.weights = None
        self.bias = 0.0

    def fit(self, samples, lr=0.1, epochs=200):
        x, y = _design_matrix(samples)
        self.weights = np.zeros(x.shape[1])
        self.bias = 0.0
        for epoch in range(epochs):
            p = _sigmoid(x @ self.weights + self.bias)
            err = p - y
            self.weights -= lr * (x.T @ err) / len(y)
            self.bias -= lr * float(err.mean())
            if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
                raise TrainingError("logistic regression diverged", epoch=epoch)
        return self

    def loss(self, samples, eps=1e-12):
        x, y = _design_matrix(samples)
        p = _sigmoid(x @ self.weights + self.bias)
        return float(-(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)).mean())

    def gradient(self, samples):
        """Mean-loss gradient (dw, db) at the current parameters."""
        x, y = _design_matrix(samples)
        err = _sigmoid(x @ self.weights + self.bias) - y
        return (x.T @ err) / len(y), float(err.mean())

    def predict_proba(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return _sigmoid(x @ self.weights + self.bias)

    def predict(self, sample):
        return bool(self.predict_proba(flatten_features(sample))[0] >= 0.5)

    def save(self, path, norm_stats=None):
        meta = {"norm_stats": norm_stats.to_dict() if norm_stats else None}
        save_checkpoint(
            path, "logreg", meta, {"weights": self.weights, "bias": np.array([self.bias])}
        )

    @classmethod
    def load(cls, path):
        model_type, meta, arrays = load_checkpoint(path)
        if model_type != "logreg":
            raise DomainError(f"expected a logreg checkpoint, found {model_type!r}")
        out = cls()
        out.weights = arrays["weights"]
        out.bias = float(arrays["bias"][0])
        return out


def make_fallback(kind, train_samples):
    """Build and fit the named fallback classifier ('lr' or 'gnb')."""
    if kind == "lr":
        return LogisticRegression().fit(train_samples)
    if kind == "gnb":
        return GaussianNB().fit(train_samples)
    raise DomainError(f"unknown fallback {kind!r}")
