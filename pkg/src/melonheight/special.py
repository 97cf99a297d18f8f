"""Special functions at the precision the asymptotic layer needs.

High-precision reals are ``mpmath.mpf``.  Every routine takes ``prec`` (bits)
and evaluates under ``mpmath.workprec(prec)``; the returned mpf keeps all of
those bits, so callers should keep working at the same precision.
"""
from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Optional, Tuple

import mpmath as mp

from .errors import DomainError, NumericError

__all__ = [
    "DEFAULT_PREC",
    "EULER_GAMMA_DIGITS",
    "QuadResult",
    "ThetaSeriesParams",
    "euler_gamma",
    "check_euler_gamma",
    "bernoulli",
    "digamma_halfint_parts",
    "digamma_halfint",
    "gamma_halfint_ratio",
    "gamma_halfint",
    "zeta_neg_int",
    "zeta_real",
    "theta_bar",
    "theta_bar_deriv",
    "theta_tail_constant",
    "integrate_one_to_inf",
    "log_gamma_asym",
    "binom_quotient_approx",
    "BINOM_QUOTIENT_GROUPS",
    "falling_factorial",
    "to_mpf",
    "rising_factorial",
]

DEFAULT_PREC = 128

EULER_GAMMA_DIGITS = "0.577215664901532860606512090082402431042159335939923598805767"


@dataclass(frozen=True)
class QuadResult:
    value: mp.mpf
    error_bound: mp.mpf
    rigorous: bool = False

    def __post_init__(self):
        if self.error_bound < 0:
            raise ValueError("error_bound must be nonnegative")
        if not mp.isfinite(self.value):
            raise ValueError("value must be finite")


@dataclass(frozen=True)
class ThetaSeriesParams:
    tol: mp.mpf = mp.mpf(2) ** -140
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 4:
            raise ValueError("max_terms must be >= 4")


def to_mpf(x) -> mp.mpf:
    """int, Fraction or mpf to mpf at the current working precision."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def falling_factorial(x: int, k: int) -> int:
    """x (x-1) ... (x-k+1); 1 for k = 0, 0 for k < 0."""
    if k < 0:
        return 0
    r = 1
    for i in range(k):
        r *= x - i
    return r


def rising_factorial(x: int, k: int) -> int:
    if k < 0:
        return 0
    r = 1
    for i in range(k):
        r *= x + i
    return r


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

def euler_gamma(prec: int = DEFAULT_PREC) -> mp.mpf:
    with mp.workprec(prec):
        return +mp.mpf(EULER_GAMMA_DIGITS)


def check_euler_gamma(N: int = 1000) -> float:
    """Compare the stored constant with H_N - log N corrected by Euler-Maclaurin.

    Returns the absolute discrepancy (about 1e-16 for N = 1000).
    """
    with mp.workprec(120):
        h = mp.fsum(mp.mpf(1) / k for k in range(1, N + 1))
        n = mp.mpf(N)
        approx = h - mp.log(n) - 1 / (2 * n) + 1 / (12 * n**2) - 1 / (120 * n**4)
        err = abs(approx - mp.mpf(EULER_GAMMA_DIGITS))
    if err > 1e-12:
        raise AssertionError(f"stored Euler gamma disagrees with limit definition by {err}")
    return float(err)


check_euler_gamma()


# ---------------------------------------------------------------------------
# Bernoulli numbers, gamma and digamma at half integers, zeta
# ---------------------------------------------------------------------------

_bernoulli_table = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(k: int) -> Fraction:
    """B_k with B_1 = -1/2, from sum_{j<=k} binom(k+1, j) B_j = 0."""
    if k < 0:
        raise DomainError("bernoulli index must be >= 0")
    if k < len(_bernoulli_table):
        return _bernoulli_table[k]
    with _bernoulli_lock:
        table = list(_bernoulli_table)
        from .exact import binomial

        for m in range(len(table), k + 1):
            s = sum(binomial(m + 1, j) * table[j] for j in range(m))
            table.append(-s / (m + 1))
        _bernoulli_table[:] = table
    return _bernoulli_table[k]


def zeta_neg_int(m: int) -> Fraction:
    """zeta(-m) = (-1)^m B_{m+1}/(m+1) for m >= 0 (with B_1 = -1/2)."""
    if m < 0:
        raise DomainError("zeta_neg_int needs m >= 0")
    return (-1) ** m * bernoulli(m + 1) / (m + 1)


def digamma_halfint_parts(two_z: int) -> Tuple[Fraction, Fraction, Fraction]:
    """psi(two_z/2) as (rational part, coefficient of gamma, coefficient of log 2)."""
    if two_z < 1:
        raise DomainError("digamma_halfint needs two_z >= 1")
    if two_z % 2 == 0:
        z0, gamma_c, log2_c = Fraction(1), Fraction(-1), Fraction(0)
    else:
        z0, gamma_c, log2_c = Fraction(1, 2), Fraction(-1), Fraction(-2)
    steps = int(Fraction(two_z, 2) - z0)
    rational = sum((1 / (z0 + j) for j in range(steps)), Fraction(0))
    return rational, gamma_c, log2_c


def digamma_halfint(two_z: int, prec: int = DEFAULT_PREC) -> mp.mpf:
    r, g, l2 = digamma_halfint_parts(two_z)
    with mp.workprec(prec):
        return to_mpf(r) + g * euler_gamma(prec) + l2 * mp.log(2)


def gamma_halfint_ratio(m: int) -> Fraction:
    """Gamma(m + 1/2) / sqrt(pi) = (2m)! / (4^m m!)."""
    if m < 0:
        raise DomainError("gamma_halfint_ratio needs m >= 0")
    return Fraction(factorial(2 * m), 4**m * factorial(m))


def gamma_halfint(m: int, prec: int = DEFAULT_PREC) -> mp.mpf:
    r = gamma_halfint_ratio(m)
    with mp.workprec(prec):
        return to_mpf(r) * mp.sqrt(mp.pi)


def zeta_real(s, tol=None, prec: int = DEFAULT_PREC) -> mp.mpf:
    """zeta(s) for real s > 1: direct sum to N plus Euler-Maclaurin tail."""
    with mp.workprec(prec + 20):
        s = mp.mpf(s)
        if s <= 1:
            raise DomainError(f"zeta_real needs s > 1, got {s}")
        tol = mp.mpf(2) ** (-prec) if tol is None else mp.mpf(tol)
        N = 32
        head = mp.fsum(mp.mpf(k) ** -s for k in range(1, N))
        Nm = mp.mpf(N)
        tail = Nm ** (1 - s) / (s - 1) + Nm**-s / 2
        # B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
        rising = s
        for j in range(1, 60):
            b = bernoulli(2 * j)
            term = to_mpf(b) / mp.factorial(2 * j) * rising * Nm ** (-s - 2 * j + 1)
            tail += term
            if abs(term) < tol / 4:
                break
            rising *= (s + 2 * j - 1) * (s + 2 * j)
        else:
            raise NumericError("Euler-Maclaurin tail did not converge", partial=head + tail)
        result = head + tail
    with mp.workprec(prec):
        return +result


# ---------------------------------------------------------------------------
# Theta function
# ---------------------------------------------------------------------------

def theta_bar_deriv(a: int, u, params: Optional[ThetaSeriesParams] = None,
                    prec: int = DEFAULT_PREC) -> mp.mpf:
    """a-th derivative of sum_{n in Z} exp(-pi n^2 u)."""
    if a < 0:
        raise DomainError("derivative order must be >= 0")
    params = params or ThetaSeriesParams()
    with mp.workprec(prec + 10):
        u = mp.mpf(u)
        if u <= 0:
            raise DomainError(f"theta needs u > 0, got {u}")
        total = mp.mpf(0)
        for n in range(1, params.max_terms + 1):
            pn2 = mp.pi * n * n
            term = (-pn2) ** a * mp.exp(-pn2 * u)
            total += term
            # (pi n^2)^a exp(-pi n^2 u) only decreases once pi n^2 u > a
            if n >= 3 and pn2 * u > a and abs(term) < params.tol:
                break
        else:
            raise NumericError("theta series did not reach tolerance", partial=total)
        result = 2 * total + (1 if a == 0 else 0)
    with mp.workprec(prec):
        return +result


def theta_bar(u, params: Optional[ThetaSeriesParams] = None, prec: int = DEFAULT_PREC) -> mp.mpf:
    return theta_bar_deriv(0, u, params, prec)


def theta_tail_constant(a: int, prec: int = DEFAULT_PREC) -> mp.mpf:
    """A with |theta_a(t) - [a == 0]| <= A exp(-pi t) for every t >= 1."""
    with mp.workprec(prec):
        s = mp.mpf(0)
        n = 1
        while True:
            term = mp.mpf(n) ** (2 * a) * mp.exp(-mp.pi * (n * n - 1))
            s += term
            if n >= 3 and term < mp.mpf(2) ** (-prec):
                break
            n += 1
        return 2 * mp.pi**a * s


# ---------------------------------------------------------------------------
# Quadrature on [1, infinity)
# ---------------------------------------------------------------------------

def _exp_tail(C, q, U):
    """Upper bound for C * int_U^inf t^q exp(-pi t) dt, valid when pi U > q."""
    rate = mp.pi - max(q, 0) / U
    if rate <= 0:
        return mp.inf
    return C * U**q * mp.exp(-mp.pi * U) / rate


def integrate_one_to_inf(f: Callable, tol=1e-12, *, q: float = 0.0, C=None,
                         max_subdivisions: int = 200, prec: int = DEFAULT_PREC) -> QuadResult:
    """Integrate f over [1, inf) for integrands bounded by C t^q exp(-pi t).

    The range is cut at U where the tail bound drops below tol/4; [1, U] is
    integrated by adaptive bisection with a tanh-sinh rule on each panel.
    When C is None it is estimated from samples of f and the result is
    flagged as heuristic.
    """
    with mp.workprec(prec):
        tol = mp.mpf(tol)
        rigorous = C is not None
        if C is None:
            samples = [mp.mpf(t) for t in (1, 1.5, 2, 3, 4)]
            C = 2 * max(abs(f(t)) * mp.exp(mp.pi * t) * t ** (-q) for t in samples)
        C = mp.mpf(C)
        if C == 0:
            return QuadResult(mp.mpf(0), mp.mpf(0), rigorous)
        U = mp.mpf(2)
        while _exp_tail(C, q, U) > tol / 4:
            U *= mp.mpf(1.25)
        tail = _exp_tail(C, q, U)

        budget = tol / 2
        pending = [(mp.mpf(1), mp.mpf(2))]
        edge = mp.mpf(2)
        while edge < U:
            nxt = min(edge * 2, U)
            pending.append((edge, nxt))
            edge = nxt
        total = mp.mpf(0)
        quad_err = mp.mpf(0)
        panels = 0
        while pending:
            lo, hi = pending.pop()
            panels += 1
            if panels > max_subdivisions:
                raise NumericError("quadrature exceeded max subdivisions",
                                   partial=QuadResult(total, quad_err + tail, False))
            val, err = mp.quad(f, [lo, hi], error=True)
            share = budget * (hi - lo) / (U - 1)
            if err <= share or hi - lo < mp.mpf(2) ** (-20):
                total += val
                quad_err += err
            else:
                mid = (lo + hi) / 2
                pending.append((lo, mid))
                pending.append((mid, hi))
        return QuadResult(total, quad_err + tail, rigorous)


# ---------------------------------------------------------------------------
# Stirling series
# ---------------------------------------------------------------------------

def log_gamma_asym(z, terms: int = 8, prec: int = DEFAULT_PREC) -> mp.mpf:
    """Truncated Stirling series for log Gamma(z), z >= 10."""
    with mp.workprec(prec):
        z = mp.mpf(z)
        if z < 10:
            raise DomainError("log_gamma_asym is only used for z >= 10")
        s = (z - mp.mpf(1) / 2) * mp.log(z) - z + mp.log(2 * mp.pi) / 2
        for j in range(1, terms + 1):
            b = bernoulli(2 * j)
            s += z ** (1 - 2 * j) * to_mpf(b) / ((2 * j) * (2 * j - 1))
        return s


# Exponent of binom(2n, n+a-k)/binom(2n, n) with x = (k-a)/n, truncated at x^8:
# (scale, power of n, coefficients of x^2, x^4, x^6, x^8).
BINOM_QUOTIENT_GROUPS = (
    (-2, 1, (Fraction(1, 2), Fraction(1, 12), Fraction(1, 30), Fraction(1, 56))),
    (1, 0, (Fraction(1, 2), Fraction(1, 4), Fraction(1, 6), Fraction(1, 8))),
    (Fraction(-1, 6), -1, (1, 1, 1, 1)),
    (1, -3, (Fraction(1, 30), Fraction(1, 12), Fraction(7, 45), Fraction(1, 4))),
    (-1, -5, (Fraction(1, 42), Fraction(1, 9), Fraction(1, 3), Fraction(11, 14))),
    (1, -7, (Fraction(1, 30), Fraction(1, 4), Fraction(11, 10), Fraction(143, 40))),
    (-1, -9, (Fraction(5, 66), Fraction(5, 6), Fraction(91, 18), Fraction(65, 3))),
)

FULL_ORDER = 5


def _closed_group(j: int, x):
    """Correction group of n^{1-2j}: B_{2j}/(2j(2j-1)) * (2 - (1+x)^{1-2j} - (1-x)^{1-2j})."""
    b = bernoulli(2 * j)
    c = to_mpf(b) / ((2 * j) * (2 * j - 1))
    return c * (2 - (1 + x) ** (1 - 2 * j) - (1 - x) ** (1 - 2 * j))


def binom_quotient_approx(n: int, a: int, k: int, order="full", x_degree: Optional[int] = None,
                          prec: int = DEFAULT_PREC) -> mp.mpf:
    """Stirling approximation of binomial(2n, n+a-k) / binomial(2n, n).

    ``order`` is the number of 1/n^(2j-1) correction groups (0..5, "full" = 5).
    With ``x_degree=8`` each group is the polynomial truncated at x^8 exactly
    as tabulated in BINOM_QUOTIENT_GROUPS; with ``x_degree=None`` (default)
    every group is summed in closed form.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    order = FULL_ORDER if order == "full" else int(order)
    if not 0 <= order <= FULL_ORDER:
        raise DomainError(f"order must be in 0..{FULL_ORDER} or 'full'")
    with mp.workprec(prec):
        x = mp.mpf(k - a) / n
        if abs(x) > 1:
            return mp.mpf(0)
        if abs(x) > 0.5:
            warnings.warn(f"|x| = {float(abs(x)):.3g} > 1/2: Stirling quotient is low-accuracy",
                          RuntimeWarning, stacklevel=2)
        if x_degree is None and abs(x) == 1:
            x_degree = 8
        expo = mp.mpf(0)
        if x_degree is None:
            expo -= n * ((1 + x) * mp.log1p(x) + (1 - x) * mp.log1p(-x))
            expo -= mp.log1p(-x * x) / 2
            for j in range(1, order + 1):
                expo += _closed_group(j, x) * mp.mpf(n) ** (1 - 2 * j)
        else:
            if x_degree not in (2, 4, 6, 8):
                raise DomainError("x_degree must be None or one of 2, 4, 6, 8")
            for idx, (scale, power, coeffs) in enumerate(BINOM_QUOTIENT_GROUPS):
                if idx >= 2 + order:
                    break
                poly = mp.fsum(to_mpf(c) * x ** (2 * i + 2) for i, c in enumerate(coeffs[: x_degree // 2]))
                expo += to_mpf(scale) * mp.mpf(n) ** power * poly
        return mp.exp(expo)
