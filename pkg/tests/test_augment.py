"""Flip-pattern augmentation tests."""

import numpy as np

from jamsense.augment import PATTERNS, augment_training_set, tsa_expand
from jamsense.dataset import WindowSample


def sample(rssi, sinr, label=1):
    return WindowSample(
        rssi=np.asarray(rssi, dtype=float),
        sinr=np.asarray(sinr, dtype=float),
        label=label,
        origin=("r", 0),
    )


def test_four_patterns_in_order():
    quad = tsa_expand(sample([1, 2, 3], [4, 5, 6]))
    assert quad.patterns == PATTERNS
    s1, s2, s3, s4 = quad.samples
    assert np.array_equal(s1.rssi, [1, 2, 3]) and np.array_equal(s1.sinr, [4, 5, 6])
    assert np.array_equal(s2.rssi, [1, 2, 3]) and np.array_equal(s2.sinr, [6, 5, 4])
    assert np.array_equal(s3.rssi, [3, 2, 1]) and np.array_equal(s3.sinr, [4, 5, 6])
    assert np.array_equal(s4.rssi, [3, 2, 1]) and np.array_equal(s4.sinr, [6, 5, 4])


def test_labels_and_origin_preserved():
    quad = tsa_expand(sample([1, 2], [3, 4], label=0))
    assert all(s.label == 0 for s in quad)
    assert all(s.origin == ("r", 0) for s in quad)


def test_palindrome_gives_equal_samples():
    quad = tsa_expand(sample([1, 2, 1], [5, 0, 5]))
    for s in quad.samples[1:]:
        assert np.array_equal(s.rssi, quad.samples[0].rssi)
        assert np.array_equal(s.sinr, quad.samples[0].sinr)


def test_double_reverse_identity(rng):
    for _ in range(100):
        w = int(rng.integers(2, 64))
        s = sample(rng.normal(size=w), rng.normal(size=w))
        s4 = tsa_expand(s).samples[3]
        back = tsa_expand(s4).samples[3]
        assert np.array_equal(back.rssi, s.rssi)
        assert np.array_equal(back.sinr, s.sinr)


def test_training_set_expansion(rng):
    samples = [
        sample(rng.normal(size=8), rng.normal(size=8), label=i % 2) for i in range(10)
    ]
    out = augment_training_set(samples, np.random.default_rng(0))
    assert len(out) == 40
    assert sum(1 for s in out if s.label == 1) == 20


def test_expansion_deterministic(rng):
    samples = [sample(rng.normal(size=8), rng.normal(size=8)) for _ in range(5)]
    a = augment_training_set(samples, np.random.default_rng(3))
    b = augment_training_set(samples, np.random.default_rng(3))
    assert all(np.array_equal(x.rssi, y.rssi) for x, y in zip(a, b))
