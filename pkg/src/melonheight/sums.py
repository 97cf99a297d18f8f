"""Divisor-weighted binomial sums and the sum formulas for H(n, 1), H(n, 2).

    S(n, a)    = sum_{k>=1} d(k) binom(2n, n-k+a) / binom(2n, n)
    S(n, a, b) = sum_{j,k>=1} d(gcd(j,k)) binom(2n, n-j+a) binom(2n, n-k+b) / binom(2n, n)^2

Exact mode returns Fractions.  High-precision mode returns mpmath mpf at the
requested binary precision; binomial quotients there come from a running
product so nothing ever gets large.
"""
from __future__ import annotations

import enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple

import mpmath as mp

from .errors import DomainError
from .exact import binomial_row, divisor_counts
from .special import DEFAULT_PREC

__all__ = [
    "SumMode",
    "SINGLESUM_TERMS",
    "DOUBLESUM_TERMS",
    "S1d",
    "S2d",
    "bigS1",
    "bigS2",
    "avg_height1_sum",
    "avg_height2_sum",
    "singlesum_coefficients",
    "binomial_quotients",
]

# exact mode is fine up to a few hundred; beyond that prefer HP
EXACT_GUIDANCE_N = 200


class SumMode(str, enum.Enum):
    EXACT = "exact"
    HP = "hp"

    @classmethod
    def coerce(cls, mode) -> "SumMode":
        if isinstance(mode, cls):
            return mode
        key = str(mode).lower().replace("_", "-")
        aliases = {"exact": cls.EXACT, "exact-rational": cls.EXACT, "rational": cls.EXACT,
                   "hp": cls.HP, "high-precision": cls.HP, "float": cls.HP}
        if key not in aliases:
            raise DomainError(f"unknown sum mode {mode!r}")
        return aliases[key]


# Single-sum combination.  Each entry is (scale, polynomial factor given by its
# roots' offsets, {a: weight}); the entry contributes
#   scale * prod(n + r for r in offsets) * sum(weight * S(n, a)).
SINGLESUM_TERMS: Tuple[Tuple[int, Tuple[int, ...], Mapping[int, int]], ...] = (
    (-20, (-1, 2), {0: 1}),
    (15, (0, 1), {-1: 1, 1: 1}),
    (1, (3,), {-1: 6, 0: -16, 1: 6}),
    (1, (-2,), {-1: 6, 0: 8, 1: 6}),
    (-6, (0, 3), {-2: 1, 2: 1}),
    (1, (2, 3), {-3: 1, 3: 1}),
)

# Double-sum combination: (multiplier, a, b) for multiplier * S(n, a, b).
DOUBLESUM_TERMS: Tuple[Tuple[int, int, int], ...] = (
    (1, -2, -2),
    (-1, -1, -3),
    (-2, -1, -2),
    (1, -1, -1),
    (2, -1, 0),
    (-1, -1, 3),
    (2, 0, -3),
    (-4, 0, 0),
    (2, 0, 3),
    (-1, 1, -3),
    (-2, 1, -2),
    (2, 1, -1),
    (2, 1, 0),
    (1, 1, 1),
    (-1, 1, 3),
    (2, 2, -2),
    (-2, 2, -1),
    (-2, 2, 1),
    (1, 2, 2),
)


def _guard_bits(n: int) -> int:
    """Extra working bits for the combinations.

    S_2(n) is of order n^-7/2 while its terms are of order 1, so roughly
    3.5 log2(n) bits cancel; S_1 loses less.
    """
    return 4 * int(n).bit_length() + 16


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")


def binomial_quotients(n: int, prec: int = DEFAULT_PREC) -> list:
    """[binom(2n, n-m)/binom(2n, n) for m = 0..n] as mpf, by running product."""
    _check_n(n)
    with mp.workprec(prec):
        q = [mp.mpf(1)]
        for m in range(n):
            q.append(q[-1] * (n - m) / (n + m + 1))
        return q


def _weights(n: int, a: int, mode: SumMode, prec: int):
    """Per-index weights w[k] = binom(2n, n-k+a) for k = 1..2n+a (index 0 unused).

    Exact mode keeps integer numerators (the caller divides by binom(2n,n));
    HP mode stores the quotient directly.
    """
    top = max(0, n + a)
    w = [0] * (top + 1)
    if mode is SumMode.EXACT:
        row = binomial_row(2 * n)
        for k in range(1, top + 1):
            if n - k + a <= 2 * n:
                w[k] = row[n - k + a]
    else:
        q = binomial_quotients(n, prec)
        with mp.workprec(prec):
            for k in range(1, top + 1):
                if abs(k - a) <= n:
                    w[k] = q[abs(k - a)]
    return w


def S1d(n: int, a: int, mode="exact", prec: int = DEFAULT_PREC):
    """S(n, a)."""
    _check_n(n)
    mode = SumMode.coerce(mode)
    w = _weights(n, a, mode, prec)
    d = divisor_counts(max(len(w) - 1, 1))
    if mode is SumMode.EXACT:
        num = sum(d[k] * w[k] for k in range(1, len(w)))
        return Fraction(num, binomial_row(2 * n)[n])
    with mp.workprec(prec):
        return mp.fsum(d[k] * w[k] for k in range(1, len(w)))


def S2d(n: int, a: int, b: int, mode="exact", prec: int = DEFAULT_PREC):
    """S(n, a, b).

    Uses d(gcd(j, k)) = #{m : m | j and m | k}, so the double sum becomes
    sum over m of (sum_{m | j} w_a[j]) * (sum_{m | k} w_b[k]).
    """
    _check_n(n)
    mode = SumMode.coerce(mode)
    wa = _weights(n, a, mode, prec)
    wb = _weights(n, b, mode, prec)
    top = min(len(wa), len(wb)) - 1
    if top < 1:
        return Fraction(0) if mode is SumMode.EXACT else mp.mpf(0)

    if mode is SumMode.EXACT:
        total = 0
        for m in range(1, top + 1):
            total += sum(wa[m::m]) * sum(wb[m::m])
        c = binomial_row(2 * n)[n]
        return Fraction(total, c * c)
    with mp.workprec(prec):
        parts = [mp.fsum(wa[m::m]) * mp.fsum(wb[m::m]) for m in range(1, top + 1)]
        return mp.fsum(parts)


def singlesum_coefficients(n, terms=SINGLESUM_TERMS) -> dict:
    """Polynomial coefficient of each S(n, a) in the single-sum combination, at n."""
    out = {}
    for scale, offsets, weights in terms:
        poly = scale
        for r in offsets:
            poly *= n + r
        for a, w in weights.items():
            out[a] = out.get(a, 0) + poly * w
    return out


def bigS1(n: int, mode="exact", prec: int = DEFAULT_PREC, S=None, terms=SINGLESUM_TERMS):
    """Single-sum combination S_1(n).

    ``S`` may replace S1d (signature S(n, a)), e.g. to force all sums to zero.
    """
    _check_n(n)
    mode = SumMode.coerce(mode)
    if S is None:
        wp = prec + _guard_bits(n)

        def S(n_, a_):
            return S1d(n_, a_, mode, wp)
    coef = singlesum_coefficients(n, terms)
    if mode is SumMode.EXACT:
        return sum((c * S(n, a) for a, c in sorted(coef.items())), Fraction(0))
    with mp.workprec(prec):
        return +mp.fsum(c * S(n, a) for a, c in sorted(coef.items()))


def bigS2(n: int, mode="exact", prec: int = DEFAULT_PREC, S=None,
          terms: Sequence[Tuple[int, int, int]] = DOUBLESUM_TERMS):
    """Double-sum combination S_2(n); ``terms`` can be swapped for mutation tests."""
    _check_n(n)
    mode = SumMode.coerce(mode)
    if S is None:
        wp = prec + _guard_bits(n)

        def S(n_, a_, b_):
            return S2d(n_, a_, b_, mode, wp)
    if mode is SumMode.EXACT:
        return sum((m * S(n, a, b) for m, a, b in terms), Fraction(0))
    with mp.workprec(prec):
        return +mp.fsum(m * S(n, a, b) for m, a, b in terms)


def avg_height1_sum(n: int, mode="exact", prec: int = DEFAULT_PREC):
    """H(n, 1) = (n+1)(S(n,1) - 2 S(n,0) + S(n,-1)) - 1."""
    _check_n(n)
    mode = SumMode.coerce(mode)
    if mode is SumMode.EXACT:
        return (n + 1) * (S1d(n, 1) - 2 * S1d(n, 0) + S1d(n, -1)) - 1
    wp = prec + _guard_bits(n)
    with mp.workprec(wp):
        v = (n + 1) * (S1d(n, 1, mode, wp) - 2 * S1d(n, 0, mode, wp) + S1d(n, -1, mode, wp)) - 1
    with mp.workprec(prec):
        return +v


def avg_height2_sum(n: int, mode="exact", prec: int = DEFAULT_PREC,
                    doublesum_terms: Optional[Sequence[Tuple[int, int, int]]] = None):
    """H(n, 2) from the single and double sums."""
    _check_n(n)
    mode = SumMode.coerce(mode)
    dterms = DOUBLESUM_TERMS if doublesum_terms is None else doublesum_terms
    rise2 = (n + 1) * (n + 2)
    rise3 = rise2 * (n + 3)
    if mode is SumMode.EXACT:
        s1 = bigS1(n, mode)
        s2 = bigS2(n, mode, terms=dterms)
        return Fraction(rise2, 12 * (2 * n + 1)) * (rise3 * s2 + s1) - 1
    wp = prec + _guard_bits(n)
    s1 = bigS1(n, mode, wp)
    s2 = bigS2(n, mode, wp, terms=dterms)
    with mp.workprec(wp):
        v = mp.mpf(rise2) / (12 * (2 * n + 1)) * (rise3 * s2 + s1) - 1
    with mp.workprec(prec):
        return +v
