"""Fallback classifier tests: Gaussian naive Bayes and logistic regression."""

import math

import numpy as np
import pytest

from jamsense.baselines import (
    GaussianNB,
    LogisticRegression,
    flatten_features,
    make_fallback,
)
from jamsense.dataset import WindowSample


def blob_samples(rng, n=200, mean=5.0, w=4):
    out = []
    for i in range(n):
        label = i % 2
        mu = mean if label else -mean
        out.append(
            WindowSample(
                rssi=rng.normal(mu, 1.0, w),
                sinr=rng.normal(mu, 1.0, w),
                label=label,
                origin=("b", i),
            )
        )
    return out


def test_flatten_features(rng):
    s = WindowSample(np.array([1.0, 2.0]), np.array([3.0, 4.0]), 1, ("r", 0))
    assert np.array_equal(flatten_features(s), [1.0, 2.0, 3.0, 4.0])


class TestGaussianNB:
    def test_separated_blobs(self, rng):
        train = blob_samples(rng)
        test = blob_samples(np.random.default_rng(99))
        clf = GaussianNB()
        clf.fit(train)
        preds = [clf.predict(s) for s in test]
        assert all(p == bool(s.label) for p, s in zip(preds, test))

    def test_midpoint_posterior_equals_priors(self):
        # symmetric likelihoods cancel at the midpoint; only priors remain
        clf = GaussianNB()
        clf.means = np.array([[0.0], [2.0]])
        clf.variances = np.array([[1.0], [1.0]])
        clf.log_priors = np.log([0.3, 0.7])
        p = clf.predict_proba(np.array([1.0]))
        assert p[0] == pytest.approx(0.7, abs=1e-12)

    def test_hand_case_equal_priors(self):
        # mu1=0, mu2=2, sigma=1, x=1, equal priors -> posterior 0.5
        clf = GaussianNB()
        clf.means = np.array([[0.0], [2.0]])
        clf.variances = np.array([[1.0], [1.0]])
        clf.log_priors = np.log([0.5, 0.5])
        assert clf.predict_proba(np.array([1.0]))[0] == pytest.approx(0.5, abs=1e-12)


class TestLogisticRegression:
    def test_zero_weights_half(self, rng):
        clf = LogisticRegression()
        clf.weights = np.zeros(8)
        clf.bias = 0.0
        assert clf.predict_proba(rng.normal(size=8))[0] == pytest.approx(0.5)

    def test_loss_decreases(self, rng):
        train = blob_samples(rng)
        clf = LogisticRegression()
        clf.weights = np.zeros(2 * 4)
        clf.bias = 0.0
        losses = [clf.loss(train)]
        for _ in range(5):
            dw, db = clf.gradient(train)
            clf.weights -= 0.1 * dw
            clf.bias -= 0.1 * db
            losses.append(clf.loss(train))
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_gradient_matches_finite_differences(self, rng):
        train = blob_samples(rng, n=40)
        clf = LogisticRegression()
        clf.weights = rng.normal(0.0, 0.1, 2 * 4)
        clf.bias = float(rng.normal(0.0, 0.1))
        dw, db = clf.gradient(train)
        eps = 1e-6
        for i in range(clf.weights.size):
            orig = clf.weights[i]
            clf.weights[i] = orig + eps
            up = clf.loss(train)
            clf.weights[i] = orig - eps
            down = clf.loss(train)
            clf.weights[i] = orig
            assert dw[i] == pytest.approx((up - down) / (2 * eps), abs=1e-6)
        clf.bias += eps
        up = clf.loss(train)
        clf.bias -= 2 * eps
        down = clf.loss(train)
        clf.bias += eps
        assert db == pytest.approx((up - down) / (2 * eps), abs=1e-6)


class TestPersistence:
    def test_round_trips(self, tmp_path, rng):
        train = blob_samples(rng)
        test = blob_samples(np.random.default_rng(5), n=20)
        for cls, name in ((GaussianNB, "gnb"), (LogisticRegression, "lr")):
            clf = make_fallback(name, train)
            path = tmp_path / f"{name}.ckpt"
            clf.save(path)
            loaded = cls.load(path)
            for s in test:
                assert loaded.predict(s) == clf.predict(s)
