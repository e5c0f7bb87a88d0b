"""Time-series augmentation: the four flip-pattern variants of a window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import WindowSample

PATTERNS = (
    ("same", "same"),
    ("same", "flipped"),
    ("flipped", "same"),
    ("flipped", "flipped"),
)


@dataclass(frozen=True)
class AugmentedQuad:
    """The four flip-pattern variants derived from one window."""

    samples: tuple  # four WindowSamples, in PATTERNS order
    patterns: tuple = PATTERNS

    def __iter__(self):
        return iter(self.samples)


def _apply(seq, mode):
    return np.array(seq[::-1]) if mode == "flipped" else np.array(seq)


def tsa_expand(sample: WindowSample) -> AugmentedQuad:
    """Enumerate all four (RSSI, SINR) same/flipped combinations."""
    quad = tuple(
        WindowSample(
            rssi=_apply(sample.rssi, rm),
            sinr=_apply(sample.sinr, sm),
            label=sample.label,
            origin=sample.origin,
        )
        for rm, sm in PATTERNS
    )
    return AugmentedQuad(samples=quad)


def augment_training_set(samples, rng):
    """Replace each sample by its quad (4x expansion), shuffled."""
    expanded = []
    for s in samples:
        expanded.extend(tsa_expand(s).samples)
    order = rng.permutation(len(expanded))
    return [expanded[i] for i in order]
