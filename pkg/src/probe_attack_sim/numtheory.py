"""Exact integer primitives for period finding.

Everything here is a pure function on Python integers. Convergents are
returned as :class:`fractions.Fraction`, which keeps them in lowest terms.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import FactorizationFailure, NotCoprimeError

__all__ = [
    "modpow",
    "prime_factors",
    "euler_phi",
    "multiplicative_order",
    "convergents",
    "recover_period",
    "factor_from_period",
    "is_prime",
]


def modpow(base: int, exponent: int, modulus: int) -> int:
    """Right-to-left square-and-multiply.

    >>> modpow(2, 6, 21)
    1
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if base < 0 or exponent < 0:
        raise ValueError("base and exponent must be nonnegative")
    result = 1
    base %= modulus
    while exponent:
        if exponent & 1:
            result = result * base % modulus
        base = base * base % modulus
        exponent >>= 1
    return result


def prime_factors(n: int) -> dict[int, int]:
    """Trial-division factorization, ``{prime: multiplicity}``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    factors: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return prime_factors(n) == {n: 1}


def euler_phi(n: int) -> int:
    """Count of integers in ``[1, n]`` coprime to ``n``."""
    result = n
    for p in prime_factors(n):
        result -= result // p
    return result


def multiplicative_order(y: int, n: int) -> int:
    """Smallest ``r >= 1`` with ``y**r = 1 (mod n)``.

    Starts from ``phi(n)`` and strips prime factors while the power stays 1.
    """
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    if gcd(y, n) != 1:
        raise NotCoprimeError(f"gcd({y}, {n}) = {gcd(y, n)} != 1")
    order = euler_phi(n)
    for p in prime_factors(order):
        while order % p == 0 and modpow(y, order // p, n) == 1:
            order //= p
    return order


def convergents(numerator: int, denominator: int) -> list[Fraction]:
    """All continued-fraction convergents of ``numerator/denominator``.

    >>> [str(f) for f in convergents(85, 512)]
    ['0', '1/6', '42/253', '85/512']
    """
    if denominator < 1:
        raise ValueError(f"denominator must be >= 1, got {denominator}")
    if numerator < 0:
        raise ValueError(f"numerator must be >= 0, got {numerator}")
    out = []
    p_prev, p = 0, 1
    d_prev, d = 1, 0
    a, b = numerator, denominator
    while b:
        t, rem = divmod(a, b)
        a, b = b, rem
        p_prev, p = p, t * p + p_prev
        d_prev, d = d, t * d + d_prev
        out.append(Fraction(p, d))
    return out


def recover_period(c: int, q: int, n: int, y: int) -> int | None:
    """Candidate period from a measured ``c``, or ``None``.

    Picks the largest convergent denominator ``d < n`` of ``c/q`` lying
    within ``1/(2q)`` of ``c/q`` and keeps it only if ``y**d = 1 (mod n)``.
    A verified ``d`` is a multiple of the true order, not always the order
    itself.
    """
    if not 0 <= c < q:
        raise ValueError(f"c must lie in [0, {q}), got {c}")
    if c == 0:
        return None
    best = None
    for frac in convergents(c, q):
        d = frac.denominator
        if d >= n:
            break
        # |c/q - p/d| <= 1/(2q)  <=>  2|c*d - p*q| <= d
        if 2 * abs(c * d - frac.numerator * q) <= d:
            best = d
    if best is None or best == 1:
        return None
    if modpow(y, best, n) != 1:
        return None
    return best


def factor_from_period(n: int, y: int, r: int) -> tuple[int, int]:
    """Split ``n`` using ``gcd(y**(r/2) +- 1, n)``.

    Returns the two factors (minus-side first). Raises
    :class:`FactorizationFailure` for an odd period or a trivial square root.
    """
    if r < 1 or modpow(y, r, n) != 1:
        raise ValueError(f"{y}^{r} is not 1 mod {n}")
    if r % 2:
        raise FactorizationFailure("odd-period")
    half = modpow(y, r // 2, n)
    if half in (1, n - 1):
        raise FactorizationFailure("trivial-root")
    return gcd(half - 1, n), gcd(half + 1, n)
