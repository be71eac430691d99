"""Simon's algorithm: exact outcome law, GF(2) post-processing, and the
entangling-probe attack on it.

Bit strings are plain ``int`` values; bit ``i`` of the integer is qubit ``i``
and ``x . k`` is ``popcount(x & k) mod 2``. Use :func:`to_bits` and
:func:`from_bits` at the edges.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import ResourceLimitError

__all__ = [
    "MAX_TABLE_BITS",
    "MAX_EXACT_BITS",
    "SimonFunction",
    "Gf2System",
    "Verdict",
    "SimonResult",
    "SimonAttackTranscript",
    "DetectionOutcome",
    "to_bits",
    "from_bits",
    "dot",
    "make_one_to_one",
    "make_two_to_one",
    "honest_outcome_distribution",
    "honest_sample",
    "honest_samples",
    "attacked_sample",
    "attacked_samples",
    "solve_gf2",
    "run_simon",
    "run_attacked_simon",
    "detect_attack_simon",
    "default_budget",
]

MAX_TABLE_BITS = 20
MAX_EXACT_BITS = 12

Sampler = Callable[["SimonFunction", np.random.Generator], int]


def to_bits(value: int, n: int) -> str:
    return format(value, f"0{n}b")


def from_bits(bits: str) -> int:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return int(bits, 2)


def dot(x: int, k: int) -> int:
    return (x & k).bit_count() & 1


def _parity(arr: np.ndarray) -> np.ndarray:
    """Bitwise parity of each entry of a nonnegative integer array."""
    arr = arr.astype(np.uint64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        arr ^= arr >> np.uint64(shift)
    return (arr & np.uint64(1)).astype(np.int64)


def _check_width(n: int) -> None:
    if not 1 <= n <= MAX_TABLE_BITS:
        raise ValueError(f"n must be in [1, {MAX_TABLE_BITS}], got {n}")


@dataclass(eq=False)
class SimonFunction:
    """Truth table of ``f: {0,1}^n -> {0,1}^n`` with hidden shift ``s``.

    ``s == 0`` means ``f`` is one-to-one.
    """

    n: int
    s: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_width(self.n)
        if not 0 <= self.s < 1 << self.n:
            raise ValueError(f"s must be an {self.n}-bit value")
        self.table = np.asarray(self.table, dtype=np.int64)
        if self.table.shape != (1 << self.n,):
            raise ValueError(f"table must have {1 << self.n} entries")

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def check(self) -> None:
        """Raise ``ValueError`` unless the table matches the declared ``s``."""
        size = 1 << self.n
        image = np.unique(self.table)
        if self.s == 0:
            if image.size != size:
                raise ValueError("one-to-one function must be a permutation")
            return
        xs = np.arange(size)
        if not np.array_equal(self.table, self.table[xs ^ self.s]):
            raise ValueError("table[x] != table[x ^ s] for some x")
        if image.size != size // 2:
            raise ValueError("two-to-one function must have 2^(n-1) distinct values")

    @cached_property
    def distribution(self) -> np.ndarray:
        return honest_outcome_distribution(self)

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self.distribution)


def make_one_to_one(n: int, seed: int | None = None) -> SimonFunction:
    _check_width(n)
    rng = np.random.default_rng(seed)
    return SimonFunction(n, 0, rng.permutation(1 << n))


def make_two_to_one(n: int, s: int, seed: int | None = None) -> SimonFunction:
    """Random two-to-one function pairing ``x`` with ``x ^ s``.

    Each pair gets a distinct random label.
    """
    _check_width(n)
    if not 0 < s < 1 << n:
        raise ValueError(f"s must be a nonzero {n}-bit value, got {s}")
    rng = np.random.default_rng(seed)
    size = 1 << n
    xs = np.arange(size)
    top = 1 << (s.bit_length() - 1)
    reps = xs[(xs & top) == 0]
    labels = rng.choice(size, size=size // 2, replace=False)
    table = np.empty(size, dtype=np.int64)
    table[reps] = labels
    table[reps ^ s] = labels
    return SimonFunction(n, s, table)


def _walsh_hadamard(block: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    rows, size = block.shape
    out = block.astype(np.float64, copy=True)
    h = 1
    while h < size:
        view = out.reshape(rows, size // (2 * h), 2, h)
        a = view[:, :, 0, :].copy()
        b = view[:, :, 1, :]
        view[:, :, 0, :] = a + b
        view[:, :, 1, :] = a - b
        h *= 2
    return out


def honest_outcome_distribution(f: SimonFunction) -> np.ndarray:
    """Exact law of the register-A measurement after ``U_f`` and ``H^n``.

    The amplitude on ``|k>|b>`` is ``2^-n * sum_{f(x)=b} (-1)^(x.k)``; the
    image values are processed in blocks to bound memory.
    """
    if f.n > MAX_EXACT_BITS:
        raise ResourceLimitError(f"exact enumeration limited to n <= {MAX_EXACT_BITS}")
    size = 1 << f.n
    image, inverse = np.unique(f.table, return_inverse=True)
    probs = np.zeros(size)
    block = max(1, (1 << 22) // size)
    xs = np.arange(size)
    for start in range(0, image.size, block):
        stop = min(start + block, image.size)
        mask = (inverse >= start) & (inverse < stop)
        indicator = np.zeros((stop - start, size))
        indicator[inverse[mask] - start, xs[mask]] = 1.0
        amps = _walsh_hadamard(indicator) / size
        probs += (amps**2).sum(axis=0)
    return probs


def _structural_samples(f: SimonFunction, rng: np.random.Generator, size: int) -> np.ndarray:
    ks = rng.integers(0, 1 << f.n, size=size, dtype=np.int64)
    if f.s:
        # Flipping the lowest set bit of s maps {k.s = 1} onto {k.s = 0}.
        low = f.s & -f.s
        ks = np.where(_parity(ks & f.s) == 1, ks ^ low, ks)
    return ks


def honest_samples(f: SimonFunction, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent honest outcomes as an int64 array."""
    if f.n <= MAX_EXACT_BITS:
        cdf = f._cdf
        u = rng.random(size) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1).astype(np.int64)
    return _structural_samples(f, rng, size)


def honest_sample(f: SimonFunction, rng: np.random.Generator) -> int:
    return int(honest_samples(f, rng, 1)[0])


def attacked_samples(
    f: SimonFunction, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Joint (user ``k``, attacker ``j``) outcomes with the probe in place.

    The joint law is uniform ``k`` times the honest law of ``k ^ j``.
    """
    m = honest_samples(f, rng, size)
    k = rng.integers(0, 1 << f.n, size=size, dtype=np.int64)
    return k, k ^ m


def attacked_sample(f: SimonFunction, rng: np.random.Generator) -> tuple[int, int]:
    k, j = attacked_samples(f, rng, 1)
    return int(k[0]), int(j[0])


@dataclass
class Gf2System:
    """Rows ``k_i`` of the homogeneous system ``k_i . s = 0`` over GF(2)."""

    n: int
    rows: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        for row in self.rows:
            if not 0 <= row < 1 << self.n:
                raise ValueError(f"row {row} does not fit in {self.n} bits")

    def echelon(self) -> dict[int, int]:
        """Reduced row-echelon form as ``{pivot_bit: row}``."""
        pivots: dict[int, int] = {}
        for row in self.rows:
            for bit, prow in pivots.items():
                if row >> bit & 1:
                    row ^= prow
            if not row:
                continue
            bit = row.bit_length() - 1
            for other in pivots:
                if pivots[other] >> bit & 1:
                    pivots[other] ^= row
            pivots[bit] = row
        return pivots

    def rank(self) -> int:
        return len(self.echelon())

    def null_space(self) -> list[int]:
        """Basis of ``{s : k_i . s = 0 for all i}``."""
        pivots = self.echelon()
        basis = []
        for free in range(self.n):
            if free in pivots:
                continue
            v = 1 << free
            for bit, prow in pivots.items():
                if prow >> free & 1:
                    v |= 1 << bit
            basis.append(v)
        return basis


def solve_gf2(system: Gf2System) -> int | None:
    """Hidden shift implied by the samples.

    Returns ``0`` for a trivial null space, the unique nonzero solution for a
    one-dimensional one, and ``None`` when the samples leave it ambiguous.
    """
    if not system.rows:
        raise ValueError("system has no rows")
    basis = system.null_space()
    if not basis:
        return 0
    if len(basis) == 1:
        return basis[0]
    return None


class Verdict(str, enum.Enum):
    ONE_TO_ONE = "one-to-one"
    TWO_TO_ONE = "two-to-one"
    INDETERMINATE = "indeterminate"


@dataclass
class SimonResult:
    verdict: Verdict
    s: int | None
    samples: list[int]

    def matches(self, s_true: int) -> bool:
        if s_true == 0:
            return self.verdict is Verdict.ONE_TO_ONE
        return self.verdict is Verdict.TWO_TO_ONE and self.s == s_true


def default_budget(n: int) -> int:
    return 4 * n


def _verdict_from_samples(n: int, samples: Sequence[int]) -> SimonResult:
    s = solve_gf2(Gf2System(n, list(samples)))
    if s is None:
        verdict = Verdict.INDETERMINATE
    elif s == 0:
        verdict = Verdict.ONE_TO_ONE
    else:
        verdict = Verdict.TWO_TO_ONE
    return SimonResult(verdict, s, list(samples))


def run_simon(
    f: SimonFunction,
    rng: np.random.Generator,
    m: int | None = None,
    *,
    sampler: Sampler = honest_sample,
    stop_rank: int | None = None,
) -> SimonResult:
    """Draw up to ``m`` outcomes and solve for the hidden shift.

    By default the full budget is drawn. ``stop_rank`` ends sampling as soon
    as the collected rows reach that rank; ``stop_rank=n`` is always safe
    (a two-to-one function cannot produce rank ``n``).
    """
    m = default_budget(f.n) if m is None else m
    if m < 1:
        raise ValueError("sample budget must be >= 1")
    samples: list[int] = []
    system = Gf2System(f.n)
    for _ in range(m):
        samples.append(sampler(f, rng))
        if stop_rank is not None:
            system.rows = samples
            if system.rank() >= stop_rank:
                break
    return _verdict_from_samples(f.n, samples)


@dataclass
class SimonAttackTranscript:
    """One attacked run: what the user sees and what the attacker recovers."""

    user: SimonResult
    attacker_j: list[int]
    leaked: bool
    attacker: SimonResult | None

    @property
    def leaked_samples(self) -> list[int] | None:
        return self.user.samples if self.leaked else None


def run_attacked_simon(
    f: SimonFunction,
    rng: np.random.Generator,
    m: int | None = None,
    *,
    leak: bool = True,
) -> SimonAttackTranscript:
    """User runs Simon on probe-entangled input; accomplice may leak the ``k``s.

    The attacker combines the leaked ``k_i`` with his own ``j_i`` and solves
    the system in ``k_i ^ j_i``.
    """
    m = default_budget(f.n) if m is None else m
    if m < 1:
        raise ValueError("sample budget must be >= 1")
    ks, js = attacked_samples(f, rng, m)
    user = _verdict_from_samples(f.n, [int(k) for k in ks])
    attacker = None
    if leak:
        attacker = _verdict_from_samples(f.n, [int(v) for v in ks ^ js])
    return SimonAttackTranscript(user, [int(j) for j in js], leak, attacker)


@dataclass
class DetectionOutcome:
    detected: bool
    result: SimonResult | None
    violations: list[int]

    @property
    def verdict(self) -> str:
        return "attack-detected" if self.detected else "clean"


def detect_attack_simon(
    n: int,
    s_known: int,
    sampler: Sampler,
    m: int,
    rng: np.random.Generator,
) -> DetectionOutcome:
    """Run a secret instance with known shift ``s_known`` and check it.

    Any sample with ``k . s_known = 1`` is proof of tampering, as is a
    determinate verdict other than ``two-to-one(s_known)``. An indeterminate
    verdict alone is not evidence.
    """
    if not 0 < s_known < 1 << n:
        raise ValueError(f"s_known must be a nonzero {n}-bit value")
    if m == 0:
        return DetectionOutcome(False, None, [])
    f = make_two_to_one(n, s_known, seed=int(rng.integers(2**63)))
    result = run_simon(f, rng, m, sampler=sampler)
    violations = [k for k in result.samples if dot(k, s_known)]
    wrong = result.verdict is not Verdict.INDETERMINATE and not result.matches(s_known)
    return DetectionOutcome(bool(violations) or wrong, result, violations)
