"""Majority voting over the four augmented predictions, plus the full
classify pipeline with a fallback classifier for undecided windows."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .augment import tsa_expand
from .errors import ConfigError, DomainError
from .nn.model import attack_probability, forward_windows

VOTES_PER_SAMPLE = 4


class VoteClass(IntEnum):
    ATTACK = 1
    NO_ATTACK = 2
    UNDECIDED = 3


@dataclass(frozen=True)
class VoteDecision:
    vote_class: VoteClass
    probabilities: tuple  # four class-1 (attack) probabilities
    method: int
    fallback_invoked: bool = False

    def to_record(self, origin=None, final=None):
        return {
            "origin": list(origin) if origin is not None else None,
            "method": self.method,
            "votes": [1 if p >= 0.5 else 0 for p in self.probabilities],
            "mean_p": float(np.mean(self.probabilities)),
            "class": int(self.vote_class),
            "fallback_invoked": self.fallback_invoked,
            "final": final,
        }


def _check_probs(probs):
    probs = tuple(float(p) for p in probs)
    if len(probs) != VOTES_PER_SAMPLE:
        raise DomainError(f"expected {VOTES_PER_SAMPLE} probabilities, got {len(probs)}")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"probability {p} outside [0, 1]")
    return probs


def method1(probs) -> VoteDecision:
    """Round each probability to a hard vote, then count.

    3 or 4 attack votes -> attack; 3 or 4 no-attack votes -> no attack;
    a 2-2 draw is undecided. Rounding at exactly 0.5 votes attack.
    """
    probs = _check_probs(probs)
    c1 = sum(1 for p in probs if p >= 0.5)
    if c1 >= 3:
        cls = VoteClass.ATTACK
    elif (VOTES_PER_SAMPLE - c1) >= 3:
        cls = VoteClass.NO_ATTACK
    else:
        cls = VoteClass.UNDECIDED
    return VoteDecision(vote_class=cls, probabilities=probs, method=1)


def method2(probs, delta=0.0) -> VoteDecision:
    """Average the probabilities, then round the mean.

    Undecided only inside the [0.5-delta, 0.5+delta] band (exact tie when
    delta is 0).
    """
    probs = _check_probs(probs)
    if delta < 0:
        raise DomainError("delta must be >= 0")
    mean = float(np.mean(probs))
    if mean > 0.5 + delta:
        cls = VoteClass.ATTACK
    elif mean < 0.5 - delta:
        cls = VoteClass.NO_ATTACK
    else:
        cls = VoteClass.UNDECIDED
    return VoteDecision(vote_class=cls, probabilities=probs, method=2)


def vote_table():
    """Brute-force mapping of all 16 hard-vote patterns to method-1 classes."""
    table = {}
    for pattern in np.ndindex(2, 2, 2, 2):
        c1 = sum(pattern)
        if c1 >= 3:
            cls = VoteClass.ATTACK
        elif c1 <= 1:
            cls = VoteClass.NO_ATTACK
        else:
            cls = VoteClass.UNDECIDED
        table[pattern] = cls
    return table


def datr_classify(sample, model, method, fallback=None, delta=0.0):
    """Full decision pipeline: TSA -> 4 forward passes -> vote -> fallback.

    Returns (final_label: bool attack?, VoteDecision). The fallback's
    binary verdict on the original sample resolves undecided votes.
    """
    if method not in (1, 2):
        raise ConfigError(f"method must be 1 or 2, got {method}")
    quad = tsa_expand(sample)
    probs = attack_probability(forward_windows(model, list(quad)))
    decision = method1(probs) if method == 1 else method2(probs, delta=delta)
    if decision.vote_class is VoteClass.ATTACK:
        return True, decision
    if decision.vote_class is VoteClass.NO_ATTACK:
        return False, decision
    if fallback is None:
        raise ConfigError("undecided vote but no fallback classifier configured")
    final = bool(fallback.predict(sample))
    decision = VoteDecision(
        vote_class=decision.vote_class,
        probabilities=decision.probabilities,
        method=method,
        fallback_invoked=True,
    )
    return final, decision
