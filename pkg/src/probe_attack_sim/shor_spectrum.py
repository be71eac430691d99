"""Measurement statistics of Shor's period-finding register.

After register B collapses onto ``y^l mod N`` register A holds a uniform
superposition over ``a = j*r + l``, ``j = 0..A``. Its DFT has the Dirichlet
kernel magnitude

    Prob(c) = sin^2(pi (A+1) x / q) / (q (A+1) sin^2(pi x / q)),  x = r*c mod q

which is computed here with integer phase reduction, so the zeros of the
kernel come out exactly zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np
from scipy import integrate

from . import numtheory
from .errors import NotCoprimeError, ResourceLimitError

__all__ = [
    "TABLE1_ROWS",
    "ShorInstance",
    "Spectrum",
    "Table1Row",
    "build_instance",
    "synthetic_instance",
    "register_size",
    "prob_c",
    "period_revealing_set",
    "miss_probability",
    "spectrum",
    "table1",
    "si",
    "analytic_miss",
    "integral_miss",
    "sample_l",
    "sample_c",
    "brute_force_spectrum",
]

# (N, y) pairs evaluated in the reference table of miss probabilities.
TABLE1_ROWS: tuple[tuple[int, int], ...] = (
    (21, 2), (33, 2), (35, 2), (55, 2), (77, 2), (119, 3), (143, 2),
    (187, 3), (221, 3), (247, 2), (323, 3), (391, 3), (437, 2), (551, 2),
    (667, 2), (713, 3), (899, 3), (1073, 2), (1147, 2), (1271, 3),
    (1517, 2), (1517, 16), (1591, 2), (1591, 9), (1763, 5), (1763, 10),
    (1927, 6), (1927, 16), (2021, 3), (2021, 4),
)

MAX_SPECTRUM_BITS = 22
MAX_BRUTE_FORCE_BITS = 16


@dataclass(frozen=True)
class ShorInstance:
    """One period-finding run after the register-B measurement.

    ``N`` and ``y`` are ``None`` for synthetic instances built directly from
    a known period (e.g. the ``a mod r`` detection function).
    """

    N: int | None
    y: int | None
    L: int
    r: int
    l: int
    A: int

    @property
    def q(self) -> int:
        return 1 << self.L


def register_size(n: int) -> int:
    """Smallest ``L`` with ``2**L >= n**2``."""
    return (n * n - 1).bit_length()


def _top_index(q: int, r: int, l: int) -> int:
    # Largest j with j*r + l <= q - 1.
    return (q - 1 - l) // r


def build_instance(n: int, y: int, l: int = 0) -> ShorInstance:
    if n < 9 or n % 2 == 0:
        raise ValueError(f"N must be an odd composite >= 9, got {n}")
    if numtheory.is_prime(n):
        raise ValueError(f"N = {n} is prime")
    if not 2 <= y <= n - 1:
        raise ValueError(f"y must lie in [2, N-1], got {y}")
    if math.gcd(y, n) != 1:
        raise NotCoprimeError(f"gcd({y}, {n}) = {math.gcd(y, n)}")
    L = register_size(n)
    q = 1 << L
    r = numtheory.multiplicative_order(y, n)
    if not 0 <= l < r:
        raise ValueError(f"l must lie in [0, {r}), got {l}")
    return ShorInstance(n, y, L, r, l, _top_index(q, r, l))


def synthetic_instance(L: int, r: int, l: int = 0) -> ShorInstance:
    """Instance for a function of known period ``r`` on ``2**L`` inputs."""
    if L < 1:
        raise ValueError("L must be >= 1")
    q = 1 << L
    if not 1 <= r < q:
        raise ValueError(f"r must lie in [1, {q}), got {r}")
    if not 0 <= l < r:
        raise ValueError(f"l must lie in [0, {r}), got {l}")
    return ShorInstance(None, None, L, r, l, _top_index(q, r, l))


def _dirichlet(inst: ShorInstance, cs: np.ndarray) -> np.ndarray:
    q, r, terms = inst.q, inst.r, inst.A + 1
    x = (cs.astype(np.int64) * r) % q
    num_phase = (x * terms) % q
    num = np.sin(np.pi * num_phase / q) ** 2
    den = np.sin(np.pi * x / q) ** 2
    out = np.empty(cs.shape, dtype=np.float64)
    # Removable singularity at r*c = 0 (mod q); every other x has den >= sin^2(pi/q).
    peak = x == 0
    out[peak] = terms / q
    out[~peak] = num[~peak] / (den[~peak] * q * terms)
    return out


def prob_c(inst: ShorInstance, c):
    """Exact ``Prob(c)`` for an int or an integer array of outcomes."""
    arr = np.asarray(c)
    if arr.dtype.kind not in "iu":
        raise ValueError("c must be integral")
    if np.any((arr < 0) | (arr >= inst.q)):
        raise ValueError(f"c must lie in [0, {inst.q})")
    out = _dirichlet(inst, np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out


def _centered(v: int, q: int) -> int:
    return (v + q // 2) % q - q // 2


def period_revealing_set(inst: ShorInstance) -> list[int]:
    """All ``c`` whose centered residue of ``r*c mod q`` is in ``[-r/2, r/2]``.

    Members cluster around ``lambda*q/r``, so only the two nearest integers
    per ``lambda`` are examined.
    """
    q, r = inst.q, inst.r
    found = set()
    for lam in range(r):
        base = lam * q // r
        for c in (base, base + 1):
            if c < q and 2 * abs(_centered(r * c, q)) <= r:
                found.add(c)
    return sorted(found)


@dataclass(frozen=True)
class Spectrum:
    """Outcome law of one instance. ``probs`` is materialized on first use."""

    instance: ShorInstance
    S: tuple[int, ...]
    miss_probability: float

    @cached_property
    def probs(self) -> np.ndarray:
        if self.instance.L > MAX_SPECTRUM_BITS:
            raise ResourceLimitError(f"q limited to 2^{MAX_SPECTRUM_BITS}")
        return _dirichlet(self.instance, np.arange(self.instance.q))

    @cached_property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    @property
    def hit_probability(self) -> float:
        return 1.0 - self.miss_probability


def miss_probability(inst: ShorInstance) -> float:
    S = period_revealing_set(inst)
    hit = math.fsum(_dirichlet(inst, np.asarray(S, dtype=np.int64)))
    return min(1.0, max(0.0, 1.0 - hit))


@lru_cache(maxsize=16)
def spectrum(inst: ShorInstance) -> Spectrum:
    S = period_revealing_set(inst)
    if len(S) != inst.r:
        warnings.warn(f"|S| = {len(S)} differs from r = {inst.r} for {inst}", stacklevel=2)
    return Spectrum(inst, tuple(S), miss_probability(inst))


@dataclass(frozen=True)
class Table1Row:
    N: int
    y: int
    L: int | None = None
    phi_N: int | None = None
    r: int | None = None
    A: int | None = None
    P: float | None = None
    S_size: int | None = None
    error: str | None = None

    @property
    def P_rounded(self) -> float | None:
        return None if self.P is None else round(self.P, 4)


def table1(rows: Iterable[tuple[int, int]] = TABLE1_ROWS) -> list[Table1Row]:
    """Miss probability with ``l = 0`` for each ``(N, y)``; bad rows carry ``error``."""
    out = []
    for n, y in rows:
        try:
            inst = build_instance(n, y, 0)
        except ValueError as exc:
            out.append(Table1Row(n, y, error=str(exc)))
            continue
        S = period_revealing_set(inst)
        out.append(
            Table1Row(
                n, y, inst.L, numtheory.euler_phi(n), inst.r, inst.A,
                miss_probability(inst), len(S),
            )
        )
    return out


def _si_series(x: float) -> float:
    terms = []
    term = x  # x^(2k+1) / (2k+1)!
    k = 0
    while True:
        contrib = term / (2 * k + 1)
        terms.append(contrib if k % 2 == 0 else -contrib)
        if abs(contrib) < 1e-18:
            break
        k += 1
        term *= x * x / ((2 * k) * (2 * k + 1))
    return math.fsum(terms)


def si(x: float) -> float:
    """Sine integral: power series up to 4, adaptive quadrature beyond."""
    if x < 0:
        raise ValueError(f"Si(x) requires x >= 0, got {x}")
    if x <= 4.0:
        return _si_series(x)
    # Integrate sinc one half-period at a time from 4 onward.
    edges = np.concatenate(([4.0], np.arange(4.0 + math.pi, x, math.pi), [x]))
    parts = [
        integrate.quad(lambda t: math.sin(t) / t, a, b, epsabs=1e-14, epsrel=1e-13)[0]
        for a, b in zip(edges[:-1], edges[1:])
        if b > a
    ]
    return _si_series(4.0) + math.fsum(parts)


def analytic_miss() -> float:
    """Large-N limit ``1 - (2/pi^2) (pi Si(pi) - 2)`` of the miss probability."""
    return 1.0 - 2.0 / math.pi**2 * (math.pi * si(math.pi) - 2.0)


def sample_l(n: int, y: int, rng: np.random.Generator) -> int:
    """Register-B outcome index ``l``: the residue ``a mod r`` of a uniform ``a``."""
    q = 1 << register_size(n)
    r = numtheory.multiplicative_order(y, n)
    return _sample_l(q, r, rng)


def _sample_l(q: int, r: int, rng: np.random.Generator) -> int:
    return int(rng.integers(q)) % r


def sample_c(inst: ShorInstance, rng: np.random.Generator, size: int | None = None):
    """Inverse-CDF draw(s) of the register-A outcome."""
    cdf = spectrum(inst).cdf
    u = rng.random(size) * cdf[-1]
    c = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    return int(c) if size is None else c.astype(np.int64)


def brute_force_spectrum(inst: ShorInstance) -> np.ndarray:
    """``|f~(c)|^2`` by literal summation over the support ``j*r + l``.

    Phases ``a*c mod q`` are reduced in integers and looked up in a table of
    ``q``-th roots of unity. Cost is ``O(q * A)``.
    """
    if inst.L > MAX_BRUTE_FORCE_BITS:
        raise ResourceLimitError(f"brute force limited to q <= 2^{MAX_BRUTE_FORCE_BITS}")
    q = inst.q
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    support = np.arange(inst.A + 1, dtype=np.int64) * inst.r + inst.l
    norm = 1.0 / math.sqrt(q * (inst.A + 1))
    out = np.empty(q)
    chunk = max(1, (1 << 21) // support.size)
    for start in range(0, q, chunk):
        cs = np.arange(start, min(start + chunk, q), dtype=np.int64)
        phase = (cs[:, None] * support[None, :]) % q
        amp = roots[phase].sum(axis=1) * norm
        out[start : start + cs.size] = amp.real**2 + amp.imag**2
    return out


def integral_miss(r: int, q: int) -> float:
    """Miss probability with the sum over S replaced by an integral over
    ``x in [-r/2, r/2]`` and ``sin(pi x/q)`` by its small-angle form.
    """

    def integrand(x: float) -> float:
        if x == 0.0:
            return (q / r) ** 2
        return math.sin(math.pi * x / r) ** 2 / (math.pi * x / q) ** 2

    val, _ = integrate.quad(integrand, 0.0, r / 2, epsabs=1e-14, epsrel=1e-13)
    return 1.0 - 2.0 * r / q**2 * val
