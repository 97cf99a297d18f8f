"""The double Dirichlet series Z(a, b; s) = sum_{k,l>=1} k^{2a} l^{2b} / (k^2 + l^2)^s.

Direct summation covers s > a + b + 1.  Everywhere else Z is reached through
the Mellin transform of products of theta derivatives, split at u = 1 and
folded with theta(u) = theta(1/u) / sqrt(u), which leaves integrals over
[1, inf) that converge for every s.

Z* is the same sum over all of Z^2 minus the origin:
    Z*(a,b;s) = 4 Z(a,b;s) + 2[b=0] zeta(2s-2a) + 2[a=0] zeta(2s-2b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, Mapping, Optional, Tuple

import mpmath as mp
import numpy as np

from .errors import DomainError, NumericError
from .special import (
    DEFAULT_PREC,
    QuadResult,
    ThetaSeriesParams,
    euler_gamma,
    falling_factorial,
    integrate_one_to_inf,
    theta_bar_deriv,
    theta_tail_constant,
    to_mpf,
    zeta_neg_int,
    zeta_real,
)

__all__ = [
    "DirichletConstants",
    "H2_PAIRS",
    "Z_direct",
    "Zstar_from_Z",
    "Z_continued",
    "Zstar_continued",
    "coprime_sum_check",
    "residue_main",
    "residue_half",
    "special_value_check",
    "c_const",
    "compute_constants",
    "constant_value",
    "dirichlet_eta",
    "dirichlet_beta",
    "zeta_half_oracle",
    "c00_oracle",
]

# (a, b) pairs whose constants enter the sqrt(n) coefficient of H(n, 2)
H2_PAIRS = ((0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0), (3, 1))

DIRECT_MARGIN = 0.25
DIRECT_MAX_K = 12_000


@dataclass(frozen=True)
class DirichletConstants:
    """Residues and constant term of Z(a, b; s) around s = a + b + 1/2.

    ``residue_main_coeff`` multiplies pi in the residue at s = a + b + 1.
    """

    a: int
    b: int
    residue_main_coeff: Fraction
    residue_half: Fraction
    c_ab: mp.mpf
    c_error: mp.mpf

    def __post_init__(self):
        if self.c_error < 0:
            raise ValueError("c_error must be nonnegative")

    def as_row(self, digits: int = 20) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "residue_main_coeff": str(self.residue_main_coeff),
            "residue_half": str(self.residue_half),
            "c_ab": mp.nstr(self.c_ab, digits, min_fixed=-mp.inf, max_fixed=mp.inf),
            "c_error": mp.nstr(self.c_error, 3),
        }


def residue_main(a: int, b: int) -> Fraction:
    """Residue of Z(a,b;s) at s = a+b+1, divided by pi."""
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    return Fraction(factorial(2 * a) * factorial(2 * b),
                    4 ** (a + b + 1) * factorial(a) * factorial(b) * factorial(a + b))


def residue_half(a: int, b: int) -> Fraction:
    """Residue at s = a+b+1/2; nonzero only when a or b vanishes."""
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    return Fraction(-1, 4) * ((b == 0) + (a == 0))


# ---------------------------------------------------------------------------
# Direct summation
# ---------------------------------------------------------------------------

def _tail_bound(sigma: float, K: int) -> float:
    """Bound on sum of r^{-sigma} over lattice points k, l >= 1 with max(k, l) > K.

    Each point dominates the unit square below-left of it, whose points all
    lie at radius >= K - sqrt 2, so the sum is below the quarter-plane integral.
    """
    r0 = K - math.sqrt(2)
    return (math.pi / 2) * r0 ** (2 - sigma) / (sigma - 2)


def Z_direct(a: int, b: int, s, tol=1e-10, prec: int = DEFAULT_PREC) -> QuadResult:
    """Truncated double sum with a rigorous bound on the omitted tail."""
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    s = float(s)
    if s <= a + b + 1 + DIRECT_MARGIN:
        raise DomainError(f"s = {s} too close to the convergence boundary {a + b + 1}")
    tol = float(tol)
    sigma = 2 * s - 2 * a - 2 * b
    K = 4
    while _tail_bound(sigma, K) > tol / 2:
        K *= 2
        if K > DIRECT_MAX_K:
            raise NumericError(f"Z_direct needs more than {DIRECT_MAX_K}^2 terms for tol {tol}")
    lo, hi = K // 2, K
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_bound(sigma, mid) <= tol / 2:
            hi = mid
        else:
            lo = mid
    K = max(hi, 4)
    tail = _tail_bound(sigma, K)

    if tol < 1e-13:
        with mp.workprec(prec):
            total = mp.fsum(mp.mpf(k) ** (2 * a) * mp.mpf(l) ** (2 * b) / mp.mpf(k * k + l * l) ** s
                            for k in range(1, K + 1) for l in range(1, K + 1))
            return QuadResult(total, mp.mpf(tail), True)

    idx = np.arange(1, K + 1, dtype=np.float64)
    kpow = idx ** (2 * a)
    lpow = idx ** (2 * b)
    rows = []
    for k in range(1, K + 1):
        r2 = k * k + idx * idx
        rows.append(float(np.sum(kpow[k - 1] * lpow * r2 ** (-s))))
    total = math.fsum(rows)
    rounding = 1e-15 * abs(total) * math.log2(K + 1)
    with mp.workprec(prec):
        return QuadResult(mp.mpf(total), mp.mpf(tail + rounding), True)


def Zstar_from_Z(a: int, b: int, s, tol=1e-10, prec: int = DEFAULT_PREC) -> mp.mpf:
    z = Z_direct(a, b, s, tol, prec).value
    with mp.workprec(prec):
        s = mp.mpf(s)
        out = 4 * z
        if b == 0:
            out += 2 * zeta_real(2 * s - 2 * a, prec=prec)
        if a == 0:
            out += 2 * zeta_real(2 * s - 2 * b, prec=prec)
        return out


def coprime_sum_check(a: int, b: int, s, K: int = 400) -> Tuple[mp.mpf, mp.mpf]:
    """Both sides of the gcd identity, truncated at k, l <= K.

    lhs sums k^a l^b / (k^2+l^2)^s over coprime pairs; rhs is the unrestricted
    sum divided by zeta(2s - a - b).  The exponents a, b are used as given.
    """
    s = float(s)
    idx = np.arange(1, K + 1)
    g = np.gcd.outer(idx, idx)
    kk = idx.astype(np.float64)[:, None]
    ll = idx.astype(np.float64)[None, :]
    terms = kk**a * ll**b * (kk * kk + ll * ll) ** (-s)
    lhs = math.fsum(terms[g == 1].tolist())
    full = math.fsum(terms.ravel().tolist())
    z = float(zeta_real(2 * s - a - b, prec=64))
    return mp.mpf(lhs), mp.mpf(full / z)


# ---------------------------------------------------------------------------
# Continuation through theta integrals
# ---------------------------------------------------------------------------

def _theta_product_bound(i: int, j: int, prec: int) -> mp.mpf:
    """C with |theta_i theta_j - [i = j = 0]| <= C exp(-pi t) on [1, inf)."""
    Ai, Aj = theta_tail_constant(i, prec), theta_tail_constant(j, prec)
    di, dj = (i == 0), (j == 0)
    return di * Aj + dj * Ai + Ai * Aj * mp.exp(-mp.pi)


def _theta_integral(i: int, j: int, power, tol, prec: int, subtract: bool) -> QuadResult:
    """int_1^inf t^power (theta_i theta_j - [subtract]) dt."""
    params = ThetaSeriesParams(tol=mp.mpf(2) ** (-prec - 10))

    def f(t):
        v = theta_bar_deriv(i, t, params, prec) * theta_bar_deriv(j, t, params, prec)
        if subtract:
            v -= 1
        return t**power * v

    with mp.workprec(prec):
        C = _theta_product_bound(i, j, prec)
        if not subtract and i == 0 and j == 0:
            raise DomainError("theta_0^2 does not decay; subtract the constant")
        return integrate_one_to_inf(f, tol, q=float(power), C=C, prec=prec)


def _zeta_any(x, prec):
    """zeta at any real x != 1.

    x > 1 sums directly, 0 < x < 1 goes through eta, nonpositive integers use
    Bernoulli numbers and other negative x use the functional equation.
    """
    with mp.workprec(prec):
        x = mp.mpf(x)
        if x == 1:
            raise DomainError("zeta has a pole at 1")
        if x > 1:
            return zeta_real(x, prec=prec)
        if x <= 0 and x == mp.floor(x):
            return to_mpf(zeta_neg_int(int(-x)))
        if x > 0:
            return dirichlet_eta(x, prec) / (1 - mp.mpf(2) ** (1 - x))
        return (mp.mpf(2) ** x * mp.pi ** (x - 1) * mp.sin(mp.pi * x / 2)
                * mp.gamma(1 - x) * zeta_real(1 - x, prec=prec))


def Zstar_continued(a: int, b: int, s, tol=1e-12, prec: int = DEFAULT_PREC) -> QuadResult:
    """Z*(a, b; s) for any real s except the pole s = a + b + 1."""
    if a < b:
        a, b = b, a
    with mp.workprec(prec):
        s = mp.mpf(s)
        if s == a + b + 1:
            raise DomainError("s is the pole a + b + 1")
        err = mp.mpf(0)
        if a == 0:
            # Z*(0,0;s) = pi^s/Gamma(s) [1/(s-1) - 1/s + J(-s) + J(s-1)],
            # with 1/(s Gamma(s)) = 1/Gamma(s+1) to stay finite at s = 0.
            j1 = _theta_integral(0, 0, -s, tol, prec, subtract=True)
            j2 = _theta_integral(0, 0, s - 1, tol, prec, subtract=True)
            inner = 1 / (s - 1) + j1.value + j2.value
            value = mp.pi**s * (mp.rgamma(s) * inner - mp.rgamma(s + 1))
            err = abs(mp.pi**s * mp.rgamma(s)) * (j1.error_bound + j2.error_bound)
            return QuadResult(value, err, j1.rigorous and j2.rigorous)

        sign = (-1) ** (a + b)
        lead = sign * mp.mpf(factorial(2 * a) * factorial(2 * b)) / (4 ** (a + b) * factorial(a) * factorial(b))
        main = _theta_integral(a, b, s - 1, tol, prec, subtract=False)
        inner = lead / (s - a - b - 1) + main.value
        err += main.error_bound
        rig = main.rigorous
        for k in range(a + 1):
            for j in range(b + 1):
                coef = mp.mpf(falling_factorial(2 * a, 2 * k) * falling_factorial(2 * b, 2 * j)) / (
                    4 ** (k + j) * factorial(k) * factorial(j))
                r = _theta_integral(a - k, b - j, 2 * a + 2 * b - k - j - s, tol, prec,
                                    subtract=(k == a and j == b))
                inner += sign * coef * r.value
                err += coef * r.error_bound
                rig = rig and r.rigorous
        scale = mp.pi**s * (-mp.pi) ** (-(a + b)) * mp.rgamma(s)
        return QuadResult(scale * inner, abs(scale) * err, rig)


def Z_continued(a: int, b: int, s, tol=1e-12, prec: int = DEFAULT_PREC) -> QuadResult:
    """Meromorphic continuation of Z(a, b; s) to real s (poles excluded)."""
    zs = Zstar_continued(a, b, s, tol, prec)
    with mp.workprec(prec):
        s = mp.mpf(s)
        out = zs.value
        if b == 0:
            out -= 2 * _zeta_any(2 * s - 2 * a, prec)
        if a == 0:
            out -= 2 * _zeta_any(2 * s - 2 * b, prec)
        return QuadResult(out / 4, zs.error_bound / 4, zs.rigorous)


def special_value_check(a: int, b: int, m: int, tol=1e-12, prec: int = DEFAULT_PREC) -> mp.mpf:
    """Continued value Z(a, b; -m); reported, not asserted against any claim."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    return Z_continued(a, b, -m, tol, prec).value


# ---------------------------------------------------------------------------
# Constant terms c_{a,b}
# ---------------------------------------------------------------------------

def c_const(a: int, b: int, tol=1e-12, prec: int = DEFAULT_PREC) -> DirichletConstants:
    """Constant term of Z(a, b; s) at s = a + b + 1/2 from the theta integrals."""
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    if a < b:
        c = c_const(b, a, tol, prec)
        return DirichletConstants(a, b, c.residue_main_coeff, c.residue_half, c.c_ab, c.c_error)
    half = mp.mpf(1) / 2
    with mp.workprec(prec):
        gamma = euler_gamma(prec)
        if a == 0:
            r = _theta_integral(0, 0, -half, tol, prec, subtract=True)
            value = -gamma - 1 + r.value / 2
            err = r.error_bound / 2
        elif b == 0:
            value = -gamma / 2 - half
            pre = mp.mpf(4) ** (a - 1) * factorial(a) * ((-1) ** a + 1) / factorial(2 * a)
            err = mp.mpf(0)
            if pre != 0:
                r = _theta_integral(a, 0, a - half, tol, prec, subtract=False)
                value += pre * r.value
                err += abs(pre) * r.error_bound
            for k in range(1, a + 1):
                w = mp.mpf(4) ** (a - k - 1) * factorial(a) / (factorial(k) * factorial(2 * a - 2 * k))
                r = _theta_integral(a - k, 0, a - k - half, tol, prec, subtract=(a == k))
                value += w * r.value
                err += w * r.error_bound
        else:
            inner = -2 * mp.mpf(factorial(2 * a) * factorial(2 * b)) / (4 ** (a + b) * factorial(a) * factorial(b))
            r = _theta_integral(a, b, a + b - half, tol, prec, subtract=False)
            inner += (-1) ** (a + b) * r.value
            err = r.error_bound
            for k in range(a + 1):
                for j in range(b + 1):
                    w = mp.mpf(falling_factorial(2 * a, 2 * k) * falling_factorial(2 * b, 2 * j)) / (
                        4 ** (k + j) * factorial(k) * factorial(j))
                    r = _theta_integral(a - k, b - j, a + b - k - j - half, tol, prec,
                                        subtract=(a == k and b == j))
                    inner += w * r.value
                    err += w * r.error_bound
            outer = mp.mpf(4) ** (a + b - 1) * factorial(a + b) / factorial(2 * a + 2 * b)
            value = outer * inner
            err *= outer
    return DirichletConstants(a, b, residue_main(a, b), residue_half(a, b), value, err)


def compute_constants(pairs: Iterable[Tuple[int, int]] = H2_PAIRS, tol=1e-12,
                      prec: int = DEFAULT_PREC) -> Dict[Tuple[int, int], DirichletConstants]:
    return {(a, b): c_const(a, b, tol, prec) for a, b in pairs}


def constant_value(constants: Mapping, a: int, b: int):
    """Look up c_{a,b} symmetrically in a provider mapping.

    Values may be DirichletConstants or plain numbers (handy for injecting
    synthetic constants in tests).
    """
    from .errors import ConfigurationError

    for key in ((a, b), (b, a)):
        if key in constants:
            v = constants[key]
            return v.c_ab if isinstance(v, DirichletConstants) else v
    raise ConfigurationError(f"constant c_{{{a},{b}}} not available")


# ---------------------------------------------------------------------------
# Independent oracle: Z(0,0;s) = zeta(s) beta(s) - zeta(2s)
# ---------------------------------------------------------------------------

def _alternating_sum(term, n_terms: int, prec: int):
    """sum_{k>=0} (-1)^k term(k) by the Cohen-Rodriguez Villegas-Zagier acceleration."""
    with mp.workprec(prec + 20):
        d = (3 + mp.sqrt(8)) ** n_terms
        d = (d + 1 / d) / 2
        bb = mp.mpf(-1)
        c = -d
        s = mp.mpf(0)
        for k in range(n_terms):
            c = bb - c
            s += c * term(k)
            bb = bb * (k + n_terms) * (k - n_terms) / ((k + mp.mpf(1) / 2) * (k + 1))
        return s / d


def dirichlet_eta(s, prec: int = DEFAULT_PREC) -> mp.mpf:
    n_terms = int(prec * 0.45) + 10
    with mp.workprec(prec):
        s = mp.mpf(s)
        return +_alternating_sum(lambda k: mp.mpf(k + 1) ** -s, n_terms, prec)


def dirichlet_beta(s, prec: int = DEFAULT_PREC) -> mp.mpf:
    n_terms = int(prec * 0.45) + 10
    with mp.workprec(prec):
        s = mp.mpf(s)
        return +_alternating_sum(lambda k: mp.mpf(2 * k + 1) ** -s, n_terms, prec)


def zeta_half_oracle(s, prec: int = DEFAULT_PREC) -> mp.mpf:
    """zeta(s) for 0 < s < 1 via eta(s) / (1 - 2^{1-s})."""
    with mp.workprec(prec):
        s = mp.mpf(s)
        return dirichlet_eta(s, prec) / (1 - mp.mpf(2) ** (1 - s))


def c00_oracle(prec: int = DEFAULT_PREC) -> mp.mpf:
    """zeta(1/2) beta(1/2) - gamma, the constant term of Z(0,0;s) at s = 1/2."""
    with mp.workprec(prec):
        h = mp.mpf(1) / 2
        return zeta_half_oracle(h, prec) * dirichlet_beta(h, prec) - euler_gamma(prec)
