"""End-to-end honest and probe-attacked runs of Shor's algorithm.

With the probe in place the joint amplitude over the user's outcome ``c`` and
the attacker's outcome ``d`` depends only on ``(c + d) mod q``. So a run is
sampled as: ``m`` from the honest law, ``c`` uniform, ``d = m - c``. The
:func:`toy_state_oracle` materializes the full state to check that
factorization at small ``q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numtheory
from .errors import FactorizationFailure, ResourceLimitError
from .shor_spectrum import (
    ShorInstance,
    _sample_l,
    build_instance,
    register_size,
    sample_c,
    synthetic_instance,
)

__all__ = [
    "ShorAttackTranscript",
    "AttackerStats",
    "ShorDetection",
    "trial_seeds",
    "trial_rngs",
    "LeakPolicy",
    "run_honest_shor",
    "run_attacked_shor",
    "honest_user_c",
    "attacked_user_c",
    "detect_attack_shor",
    "attacker_stats",
    "toy_state_oracle",
]

CSampler = Callable[[ShorInstance, np.random.Generator], int]


class LeakPolicy(str, enum.Enum):
    ALWAYS = "always"
    ON_USER_FAILURE = "on-user-failure"


@dataclass
class ShorAttackTranscript:
    instance: ShorInstance
    user_c: int
    user_recovered: int | None
    factors: tuple[int, int] | None = None
    factor_failure: str | None = None
    attacked: bool = False
    attacker_d: int | None = None
    leaked: bool = False
    attacker_sum: int | None = None
    attacker_recovered: int | None = None

    @property
    def user_success(self) -> bool:
        return self.user_recovered == self.instance.r

    @property
    def attacker_success(self) -> bool:
        return self.attacker_recovered == self.instance.r


def trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(trials)


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    """One independent stream per trial, all derived from ``seed``.

    Trial ``i`` gets the same stream in an honest and an attacked batch,
    which pairs the runs.
    """
    return [np.random.default_rng(s) for s in trial_seeds(seed, trials)]


def _factor(n: int, y: int, r: int | None) -> tuple[tuple[int, int] | None, str | None]:
    if r is None:
        return None, None
    try:
        return numtheory.factor_from_period(n, y, r), None
    except FactorizationFailure as exc:
        return None, exc.reason


def _measure_register_b(n: int, y: int, rng: np.random.Generator) -> ShorInstance:
    r = numtheory.multiplicative_order(y, n)
    l = _sample_l(1 << register_size(n), r, rng)
    return build_instance(n, y, l)


def run_honest_shor(n: int, y: int, rng: np.random.Generator) -> ShorAttackTranscript:
    inst = _measure_register_b(n, y, rng)
    c = sample_c(inst, rng)
    recovered = numtheory.recover_period(c, inst.q, n, y)
    factors, failure = _factor(n, y, recovered)
    return ShorAttackTranscript(inst, c, recovered, factors, failure)


def run_attacked_shor(
    n: int,
    y: int,
    rng: np.random.Generator,
    leak: bool = True,
    *,
    leak_probability: float = 1.0,
    policy: LeakPolicy | str = LeakPolicy.ALWAYS,
) -> ShorAttackTranscript:
    """One run with the attacker's probe entangled with register A.

    The accomplice leaks ``user_c`` when ``leak`` is set, the policy allows
    it (always, or only when the user failed to find the period) and a
    ``leak_probability`` coin comes up heads.
    """
    if not 0.0 <= leak_probability <= 1.0:
        raise ValueError("leak_probability must lie in [0, 1]")
    policy = LeakPolicy(policy)
    inst = _measure_register_b(n, y, rng)
    q = inst.q
    total = sample_c(inst, rng)
    user_c = int(rng.integers(q))
    attacker_d = (total - user_c) % q
    recovered = numtheory.recover_period(user_c, q, n, y)
    factors, failure = _factor(n, y, recovered)
    transcript = ShorAttackTranscript(
        inst, user_c, recovered, factors, failure, attacked=True, attacker_d=attacker_d
    )
    if not leak:
        return transcript
    if policy is LeakPolicy.ON_USER_FAILURE and transcript.user_success:
        return transcript
    if leak_probability < 1.0 and rng.random() >= leak_probability:
        return transcript
    transcript.leaked = True
    transcript.attacker_sum = (user_c + attacker_d) % q
    transcript.attacker_recovered = numtheory.recover_period(transcript.attacker_sum, q, n, y)
    return transcript


def honest_user_c(inst: ShorInstance, rng: np.random.Generator) -> int:
    return sample_c(inst, rng)


def attacked_user_c(inst: ShorInstance, rng: np.random.Generator) -> int:
    """User's outcome with the probe in place: uniform over ``[0, q)``.

    The attacker's half of the joint draw is consumed too, so the stream
    advances exactly as in a full attacked run.
    """
    sample_c(inst, rng)
    return int(rng.integers(inst.q))


@dataclass
class ShorDetection:
    r_known: int
    L: int
    outcomes: list[int] = field(default_factory=list)
    violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        return bool(self.violations)

    @property
    def verdict(self) -> str:
        return "attack-detected" if self.detected else "clean"


def detect_attack_shor(
    r_known: int,
    L: int,
    sampler: CSampler,
    trials: int,
    rng: np.random.Generator,
) -> ShorDetection:
    """Run the ``a mod r_known`` test function ``trials`` times.

    With ``r_known | q`` honest outcomes are exactly the multiples of
    ``q / r_known``; anything else is recorded as ``(trial, c)``.
    """
    q = 1 << L
    if r_known < 1 or q % r_known:
        raise ValueError(f"r_known = {r_known} must divide q = {q}")
    if trials < 0:
        raise ValueError("trials must be >= 0")
    step = q // r_known
    out = ShorDetection(r_known, L)
    for trial in range(trials):
        l = _sample_l(q, r_known, rng)
        c = sampler(synthetic_instance(L, r_known, l), rng)
        out.outcomes.append(c)
        if c % step:
            out.violations.append((trial, c))
    return out


@dataclass(frozen=True)
class AttackerStats:
    P: float
    n_bar: float
    sd: float
    trials_per_illegal: float
    illegal_prob: float


def attacker_stats(P: float) -> AttackerStats:
    """Mean trials to success and the derived attack rate, Poisson model."""
    if not 0.0 <= P < 1.0:
        raise ValueError(f"P must lie in [0, 1), got {P}")
    n_bar = 1.0 / (1.0 - P)
    sd = math.sqrt(n_bar)
    return AttackerStats(P, n_bar, sd, (n_bar + sd) / sd, sd / (n_bar + sd))


def toy_state_oracle(q: int, r: int, l: int = 0) -> np.ndarray:
    """Joint ``Prob(c, d)`` from the full A/C state after both DFTs.

    Entry ``[c, d]`` of the result is ``|(1/q) sum_a e^{2 pi i a (c+d)/q} f(a)|^2``.
    """
    if q > 32 or q < 2 or q & (q - 1):
        raise ResourceLimitError("toy oracle needs q a power of two <= 32")
    if not 1 <= r < q or not 0 <= l < r:
        raise ValueError("need 1 <= r < q and 0 <= l < r")
    top = (q - 1 - l) // r
    f = np.zeros(q)
    f[np.arange(top + 1) * r + l] = 1.0 / math.sqrt(top + 1)
    a = np.arange(q)
    state = np.zeros((q, q), dtype=complex)
    for c in range(q):
        for d in range(q):
            state[c, d] = np.sum(np.exp(2j * np.pi * a * (c + d) / q) * f) / q
    return np.abs(state) ** 2
