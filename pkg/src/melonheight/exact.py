"""Exact enumeration of p-watermelons with a wall.

A p-watermelon of length n is a family of p nonintersecting +-1 step paths,
path i running from (0, 2i) to (2n, 2i) for i = 0..p-1.  With a wall, no path
goes below y = 0.  Its height is the largest ordinate reached by the top path.

Everything here is exact: counts are Python ints and averages are
``fractions.Fraction`` in lowest terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Sequence

from .errors import ConsistencyError, DomainError

__all__ = [
    "MelonConfig",
    "HeightSpectrum",
    "binomial",
    "binomial_row",
    "divisor_count",
    "divisor_counts",
    "catalan",
    "count_melons",
    "paths_avoiding_lines",
    "bounded_path_count",
    "bounded_dyck_count",
    "capped_melon_count",
    "height_spectrum",
    "avg_height_exact",
    "dp_oracle_count",
    "bareiss_det",
    "max_height",
]

DP_MAX_N = 14
DP_MAX_P = 3


@dataclass(frozen=True)
class MelonConfig:
    n: int
    p: int
    h: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.p < 1:
            raise DomainError(f"p must be >= 1, got {self.p}")
        if self.h is not None and self.h < 0:
            raise DomainError(f"h must be >= 0, got {self.h}")


@dataclass(frozen=True)
class HeightSpectrum:
    """Number of watermelons attaining each exact height."""

    n: int
    p: int
    counts: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def mean(self) -> Fraction:
        return Fraction(sum(h * c for h, c in self.counts.items()), self.total)


def max_height(n: int, p: int) -> int:
    """Largest attainable height; a cap at or above this is inactive."""
    return n + 2 * p - 2


# ---------------------------------------------------------------------------
# Elementary integer functions
# ---------------------------------------------------------------------------

def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero unless 0 <= k <= n."""
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    r = 1
    for i in range(1, k + 1):
        # r * (n-k+i) is divisible by i because r*(...)/i = binom(n-k+i, i)
        r = r * (n - k + i) // i
    return r


@lru_cache(maxsize=32)
def binomial_row(N: int) -> tuple:
    """Row (binomial(N, 0), ..., binomial(N, N)), built multiplicatively."""
    if N < 0:
        raise DomainError("row index must be nonnegative")
    row = [1] * (N + 1)
    for k in range(N):
        row[k + 1] = row[k] * (N - k) // (k + 1)
    return tuple(row)


def divisor_count(k: int) -> int:
    """Number of positive divisors of k."""
    if k < 1:
        raise DomainError(f"divisor_count needs k >= 1, got {k}")
    count = 1
    m = k
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        count *= e + 1
        p += 1 if p == 2 else 2
    if m > 1:
        count *= 2
    return count


@lru_cache(maxsize=16)
def divisor_counts(upto: int) -> tuple:
    """Sieve: entry k is d(k) for 1 <= k <= upto; entry 0 is 0."""
    d = [0] * (upto + 1)
    for i in range(1, upto + 1):
        for j in range(i, upto + 1, i):
            d[j] += 1
    return tuple(d)


def catalan(n: int) -> int:
    if n < 0:
        raise DomainError("catalan needs n >= 0")
    return binomial(2 * n, n) // (n + 1)


def count_melons(n: int, p: int) -> int:
    """Number C(n, p) of p-watermelons with a wall of length n."""
    MelonConfig(n, p)
    total = Fraction(1)
    for j in range(p):
        total *= Fraction(binomial(2 * n + 2 * j, n), binomial(n + 2 * j + 1, n))
    if total.denominator != 1:
        raise ConsistencyError(f"C({n},{p}) came out non-integral: {total}")
    return total.numerator


# ---------------------------------------------------------------------------
# Reflection sums
# ---------------------------------------------------------------------------

def _reflection_sum(N: int, first: int, second: int, period: int) -> int:
    """sum over k in Z of binomial(N, first - k*period) - binomial(N, second - k*period).

    Walks k outward from 0 in both directions and stops once both binomial
    arguments have left [0, N] for good.
    """
    row = binomial_row(N)

    def b(m):
        return row[m] if 0 <= m <= N else 0

    total = b(first) - b(second)
    k = 1
    while True:
        x, y = first - k * period, second - k * period
        if x < 0 and y < 0:
            break
        total += b(x) - b(y)
        k += 1
    k = -1
    while True:
        x, y = first - k * period, second - k * period
        if x > N and y > N:
            break
        total += b(x) - b(y)
        k -= 1
    return total


def paths_avoiding_lines(u: int, d: int, b: int, t: int) -> int:
    """Paths from (0,0) to (u+d, u-d) touching neither y = -b nor y = t."""
    if u < 0 or d < 0 or b < 1 or t < 1:
        raise DomainError("need u, d >= 0 and b, t >= 1")
    if not -b < u - d < t:
        raise DomainError(f"endpoint height {u - d} not strictly inside (-{b}, {t})")
    return _reflection_sum(u + d, u, u + b, b + t)


def bounded_path_count(n: int, i: int, j: int, h: int) -> int:
    """m(n, i, j, h): paths (0, 2i) -> (2n, 2j) staying within [0, h]."""
    if n < 0 or i < 0 or j < 0 or h < 0 or 2 * i > h or 2 * j > h:
        return 0
    return _reflection_sum(2 * n, n - i + j, n + i + j + 1, h + 2)


def bounded_dyck_count(n: int, h: int) -> int:
    """Dyck paths of length 2n with height <= h, via the folded reflection sum."""
    if n < 0 or h < 0:
        raise DomainError("need n, h >= 0")
    N = 2 * n
    row = binomial_row(N)

    def b(m):
        return row[m] if 0 <= m <= N else 0

    total = row[n] // (n + 1)
    k = 1
    while n - k * (h + 2) + 1 >= 0:
        c = n - k * (h + 2)
        total -= b(c - 1) - 2 * b(c) + b(c + 1)
        k += 1
    return total


# ---------------------------------------------------------------------------
# Determinants
# ---------------------------------------------------------------------------

def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    a = [list(r) for r in matrix]
    size = len(a)
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            for r in range(k + 1, size):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def capped_melon_count(n: int, p: int, h: Optional[int]) -> int:
    """C(n, p, h): watermelons of length n with height <= h (None = no cap)."""
    MelonConfig(n, p)
    if h is None or h == math.inf:
        h = max_height(n, p)
    if h < 0:
        return 0
    mat = [[bounded_path_count(n, i, j, h) for j in range(p)] for i in range(p)]
    return bareiss_det(mat)


def height_spectrum(n: int, p: int) -> HeightSpectrum:
    MelonConfig(n, p)
    top = max_height(n, p)
    counts = {}
    below = capped_melon_count(n, p, 2 * p - 2)
    for h in range(2 * p - 1, top + 1):
        upto = capped_melon_count(n, p, h)
        counts[h] = upto - below
        below = upto
    result = HeightSpectrum(n, p, counts)
    if result.total != count_melons(n, p):
        raise ConsistencyError(f"spectrum total {result.total} != C({n},{p})")
    return result


def avg_height_exact(n: int, p: int) -> Fraction:
    """H(n, p) = (1/C) * sum_{h=1}^{n+2p-2} (C - C(n, p, h-1))."""
    MelonConfig(n, p)
    total_count = count_melons(n, p)
    acc = 0
    for h in range(1, max_height(n, p) + 1):
        acc += total_count - capped_melon_count(n, p, h - 1)
    return Fraction(acc, total_count)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def dp_oracle_count(n: int, p: int, h: Optional[int] = None) -> int:
    """Count watermelons by stepping the tuple of current heights column by column.

    Independent of every reflection/determinant formula above.
    """
    if n < 1 or p < 1:
        raise DomainError("need n, p >= 1")
    if n > DP_MAX_N or p > DP_MAX_P:
        raise DomainError(f"dp oracle limited to n <= {DP_MAX_N}, p <= {DP_MAX_P}")
    cap = max_height(n, p) if h is None or h == math.inf else int(h)
    if cap < 0:
        return 0
    start = tuple(2 * i for i in range(p))
    if start[-1] > cap:
        return 0
    return _dp_run(n, p, cap, start)


@lru_cache(maxsize=4096)
def _dp_run(n, p, cap, start):
    moves = [()]
    for _ in range(p):
        moves = [m + (s,) for m in moves for s in (-1, 1)]
    states = {start: 1}
    for _ in range(2 * n):
        nxt = {}
        for heights, ways in states.items():
            for m in moves:
                new = tuple(y + s for y, s in zip(heights, m))
                if new[0] < 0 or new[-1] > cap:
                    continue
                if any(new[i] >= new[i + 1] for i in range(p - 1)):
                    continue
                nxt[new] = nxt.get(new, 0) + ways
        states = nxt
    return states.get(start, 0)
