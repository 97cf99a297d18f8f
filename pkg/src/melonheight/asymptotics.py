"""Asymptotics of the divisor sums g(n, b), g(n, a, b) and of H(n, 1), H(n, 2).

    g(n, b)    = sum_{k>=1} k^b d(k) exp(-k^2/n)
    g(n, a, b) = sum_{k,l>=1} k^a l^b d(gcd(k, l)) exp(-(k^2 + l^2)/n)

Expansions are kept symbolically (sympy) as GExpansion objects so that the
assembled averages can be checked term by term: log n and digamma terms must
cancel and the sqrt(n) coefficient must come out as the stated combination
of the constants c_{a,b}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, Mapping, Optional, Tuple

import mpmath as mp
import sympy as sp

from .dirichlet import H2_PAIRS, constant_value
from .errors import ConfigurationError, DomainError
from .exact import avg_height_exact, divisor_counts
from .special import DEFAULT_PREC, bernoulli, digamma_halfint_parts

__all__ = [
    "GExpansion",
    "AsymptoticCoefficient",
    "g_direct",
    "g2_direct",
    "g_expansion",
    "g_asym",
    "g2_expansion",
    "g2_asym",
    "S1_ASYM_TERMS",
    "S2_ASYM_TERMS",
    "bigS1_expansion",
    "bigS2_expansion",
    "bigS1_asym",
    "bigS2_asym",
    "first_part_expansion",
    "second_part_expansion",
    "H1_asym",
    "H2_MULTIPLIERS",
    "H2_coefficient",
    "H2_asym",
    "Q_COEFF",
    "convergence_ratio",
    "c_symbol",
]

G2_VARIANTS = ("three-case", "residue")

# literal normalization used for the convergence quotient q(n)
Q_COEFF = "2.57758"


def c_symbol(a: int, b: int) -> sp.Symbol:
    """Symbol for c_{a,b}, always keyed with a >= b."""
    a, b = max(a, b), min(a, b)
    return sp.Symbol(f"c_{a}_{b}")


def _sym_pairs(expr):
    """(a, b) pairs of the c-symbols occurring in expr."""
    out = []
    for s in expr.free_symbols:
        if s.name.startswith("c_"):
            _, a, b = s.name.split("_")
            out.append((s, int(a), int(b)))
    return out


def _q(x) -> sp.Rational:
    x = Fraction(x)
    return sp.Rational(x.numerator, x.denominator)


# ---------------------------------------------------------------------------
# Symbolic expansions
# ---------------------------------------------------------------------------

@dataclass
class GExpansion:
    """Finite sum of coef * n^power * (log n)^logpow.

    Keys are (power, logpow) with power a Fraction; coefficients are sympy
    expressions in pi, EulerGamma, log(2) and the c-symbols.
    """

    terms: Dict[Tuple[Fraction, int], sp.Expr] = field(default_factory=dict)
    label: str = ""
    order: int = 0

    def copy(self) -> "GExpansion":
        return GExpansion(dict(self.terms), self.label, self.order)

    def add_term(self, power, logpow: int, coef):
        key = (Fraction(power), logpow)
        self.terms[key] = sp.expand(self.terms.get(key, 0) + coef)
        return self

    def __add__(self, other: "GExpansion") -> "GExpansion":
        out = self.copy()
        for (p, l), c in other.terms.items():
            out.add_term(p, l, c)
        return out

    def scale(self, coef) -> "GExpansion":
        return GExpansion({k: sp.expand(coef * v) for k, v in self.terms.items()}, self.label, self.order)

    def times_laurent(self, series: Mapping[int, sp.Expr]) -> "GExpansion":
        """Multiply by sum_j series[j] n^j."""
        out = GExpansion(label=self.label, order=self.order)
        for (p, l), c in self.terms.items():
            for j, s in series.items():
                out.add_term(p + j, l, c * s)
        return out

    def simplified(self) -> "GExpansion":
        return GExpansion({k: v for k, v in ((k, sp.expand(v)) for k, v in self.terms.items()) if v != 0},
                          self.label, self.order)

    def truncate(self, min_power) -> "GExpansion":
        """Drop every term of order below n^min_power."""
        m = Fraction(min_power)
        return GExpansion({k: v for k, v in self.terms.items() if k[0] >= m}, self.label, self.order)

    def coefficient(self, power, logpow: int = 0):
        return sp.expand(self.terms.get((Fraction(power), logpow), sp.Integer(0)))

    def sorted_terms(self):
        """Terms by decreasing power (then decreasing log power)."""
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]), reverse=True)

    def expr(self, n=None) -> sp.Expr:
        n = sp.Symbol("n", positive=True) if n is None else n
        return sum((c * n ** _q(p) * sp.log(n) ** l for (p, l), c in self.terms.items()), sp.Integer(0))

    def evaluate(self, n, constants: Optional[Mapping] = None, prec: int = DEFAULT_PREC) -> mp.mpf:
        """Numeric value at n; c-symbols are looked up in ``constants``."""
        dps = int(prec * 0.30103) + 5
        with mp.workprec(prec):
            n = mp.mpf(n)
            subs = {}
            for (p, l), c in self.terms.items():
                for s, a, b in _sym_pairs(c):
                    if s not in subs:
                        if constants is None:
                            raise ConfigurationError(f"expansion needs c_{{{a},{b}}}")
                        v = constant_value(constants, a, b)
                        subs[s] = sp.Float(mp.nstr(mp.mpf(v), dps), dps)
            total = mp.mpf(0)
            logn = mp.log(n)
            for (p, l), c in self.terms.items():
                cv = sp.N(c.subs(subs), dps)
                total += mp.mpf(str(cv)) * n ** (mp.mpf(p.numerator) / p.denominator) * logn ** l
            return total


@dataclass(frozen=True)
class AsymptoticCoefficient:
    """H(n, 2) ~ K sqrt(pi n) + constant."""

    K: mp.mpf
    constant: int
    provenance: Tuple[Tuple[int, Tuple[int, int]], ...]

    @property
    def K_sqrt_pi(self) -> mp.mpf:
        return self.K * mp.sqrt(mp.pi)

    def evaluate(self, n) -> mp.mpf:
        return self.K * mp.sqrt(mp.pi * n) + self.constant


def _psi_halfint_sym(two_z: int) -> sp.Expr:
    r, g, l2 = digamma_halfint_parts(two_z)
    return _q(r) + _q(g) * sp.EulerGamma + _q(l2) * sp.log(2)


def _gamma_half_sym(two_z: int) -> sp.Expr:
    """Gamma(two_z / 2) for two_z >= 1, exactly."""
    return sp.gamma(sp.Rational(two_z, 2))


# ---------------------------------------------------------------------------
# Direct summation
# ---------------------------------------------------------------------------

def _column_sums(n, b, K, m_max, prec):
    """For each m <= m_max, sum over multiples k of m (k <= K) of k^b e^{-k^2/n}."""
    with mp.workprec(prec):
        n = mp.mpf(n)
        vals = [mp.mpf(0)] + [mp.mpf(k) ** b * mp.exp(-mp.mpf(k * k) / n) for k in range(1, K + 1)]
        return [mp.fsum(vals[m::m]) if m else mp.mpf(0) for m in range(m_max + 1)]


def _cutoff(n, b, tol):
    """A cutoff K past the peak of k^(b+1) e^{-k^2/n} whose summed tail is below tol.

    The bound k^(b+1) e^{-k^2/n} (from d(k) <= k) decreases beyond
    k0 = sqrt(n (b+1) / 2); there consecutive terms shrink by at least
    r = exp(-(2k+1)/n) ((k+1)/k)^(b+1) < 1, so the tail is at most term/(1 - r).
    """
    n = mp.mpf(n)
    k = int(mp.sqrt(n * (b + 1) / 2)) + 2
    while True:
        term = mp.mpf(k) ** (b + 1) * mp.exp(-mp.mpf(k * k) / n)
        r = mp.exp(-mp.mpf(2 * k + 1) / n) * (mp.mpf(k + 1) / k) ** (b + 1)
        if r < 1 and term / (1 - r) < tol:
            return k
        k += max(1, k // 8)


def g_direct(n, b: int, tol=None, prec: int = DEFAULT_PREC) -> mp.mpf:
    """g(n, b) by truncated summation; the omitted tail is below tol (default 2^-prec * value)."""
    if n < 1 or b < 0:
        raise DomainError("need n >= 1 and b >= 0")
    with mp.workprec(prec + 10):
        if tol is None:
            tol = mp.mpf(2) ** (-prec) * mp.exp(-1 / mp.mpf(n))
        K = _cutoff(n, b, mp.mpf(tol))
        d = divisor_counts(K)
        nn = mp.mpf(n)
        total = mp.fsum(d[k] * mp.mpf(k) ** b * mp.exp(-mp.mpf(k * k) / nn) for k in range(1, K + 1))
    return +total


def g2_direct(n, a: int, b: int, tol=None, prec: int = DEFAULT_PREC) -> mp.mpf:
    """g(n, a, b) with raw exponents a, b.

    Summed as sum_m (sum_{m|k} k^a e^{-k^2/n}) (sum_{m|l} l^b e^{-l^2/n}),
    which is the same finite double sum regrouped by common divisors.
    """
    if n < 1 or a < 0 or b < 0:
        raise DomainError("need n >= 1 and a, b >= 0")
    with mp.workprec(prec + 10):
        if tol is None:
            tol = mp.mpf(2) ** (-prec) * mp.exp(-2 / mp.mpf(n))
        tol = mp.mpf(tol)
        # each index tail is bounded with the other index summed in full;
        # the full single sums are at most g(n, .) which K_other already bounds
        Ka = _cutoff(n, a + 1, tol / 4)
        Kb = _cutoff(n, b + 1, tol / 4)
        K = max(Ka, Kb)
        ca = _column_sums(n, a, K, K, prec + 10)
        cb = _column_sums(n, b, K, K, prec + 10)
        total = mp.fsum(ca[m] * cb[m] for m in range(1, K + 1))
    return +total


# ---------------------------------------------------------------------------
# Residue expansions
# ---------------------------------------------------------------------------

def g_expansion(b: int, corrections: int = 1) -> GExpansion:
    """Residue expansion of g(n, b) for even b.

    Double pole at z = (b+1)/2 of Gamma(z) n^z zeta(2z - b)^2, plus the
    first ``corrections`` simple poles at z = -m.
    """
    if b < 0 or b % 2:
        raise DomainError("g_expansion supports even b >= 0 only")
    if corrections < 0:
        raise DomainError("corrections must be >= 0")
    e = GExpansion(label=f"g(n,{b})", order=corrections)
    half = Fraction(b + 1, 2)
    G = _gamma_half_sym(b + 1)
    e.add_term(half, 1, G / 4)
    e.add_term(half, 0, G * (_psi_halfint_sym(b + 1) / 4 + sp.EulerGamma))
    for m in range(corrections):
        j = 2 * m + b + 1
        val = Fraction((-1) ** m, factorial(m)) * (bernoulli(j) / j) ** 2
        if val:
            e.add_term(-m, 0, _q(val))
    return e


def g_asym(n, b: int, corrections: int = 1, prec: int = DEFAULT_PREC) -> mp.mpf:
    return g_expansion(b, corrections).evaluate(n, prec=prec)


def g2_expansion(a: int, b: int, variant: str = "three-case") -> GExpansion:
    """Expansion of g(n, 2a, 2b) in terms of c_{a,b}.

    variant "three-case" is the standard three-case closed form taken verbatim.
    variant "residue" is the residue computation of Gamma(z) n^z
    zeta(2z-2a-2b) Z(a,b;z): it adds the constant -1/8 for a = b = 0 and, for
    a, b > 0, has sqrt(n) coefficient (1/2)(2a+2b)!/(4^(a+b) (a+b)!) c_{a,b}
    without the extra factor (2a)!(2b)!/(a! b!).
    """
    if variant not in G2_VARIANTS:
        raise DomainError(f"variant must be one of {G2_VARIANTS}")
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    if a < b:
        a, b = b, a
    e = GExpansion(label=f"g(n,{2 * a},{2 * b})", order=0)
    c = c_symbol(a, b)
    pi = sp.pi
    fa, fb = factorial(2 * a), factorial(2 * b)
    lead = pi**3 * sp.Rational(fa * fb, 24 * 4 ** (a + b) * factorial(a) * factorial(b))
    e.add_term(a + b + 1, 0, lead)
    if b == 0:
        pre = sp.Rational(fa, 2 ** (2 * a + 3) * factorial(a)) * sp.sqrt(pi)
        if a == 0:
            # (sqrt(pi n)/4)(2c - log n - psi(1/2) - 2 gamma)
            pre = sp.sqrt(pi) / 4
            inner = 2 * c - _psi_halfint_sym(1) - 2 * sp.EulerGamma
        else:
            inner = 4 * c - _psi_halfint_sym(2 * a + 1) - 2 * sp.EulerGamma
        e.add_term(Fraction(2 * a + 1, 2), 0, pre * inner)
        e.add_term(Fraction(2 * a + 1, 2), 1, -pre)
        if a == 0 and variant == "residue":
            e.add_term(0, 0, sp.Rational(-1, 8))
        return e
    s = a + b
    if variant == "three-case":
        coef = (sp.Rational(fa * fb, 2 ** (2 * s + 3) * factorial(a) * factorial(b))
                * 4 * sp.Rational(factorial(2 * s), factorial(s)))
    else:
        coef = sp.Rational(factorial(2 * s), 2 * 4**s * factorial(s))
    e.add_term(Fraction(2 * s + 1, 2), 0, coef * sp.sqrt(pi) * c)
    return e


def g2_asym(n, a: int, b: int, constants: Mapping, variant: str = "three-case",
            prec: int = DEFAULT_PREC) -> mp.mpf:
    """Asymptotic value of g(n, 2a, 2b) with c_{a,b} from ``constants``."""
    return g2_expansion(a, b, variant).evaluate(n, constants, prec)


# ---------------------------------------------------------------------------
# Asymptotic single and double sums
# ---------------------------------------------------------------------------

# (b, scale, polynomial coefficients in decreasing degree, j):
# contributes scale * poly(n) * g(n, b) / n^j
S1_ASYM_TERMS = (
    (0, -24, (4, 20, 89), 3),
    (2, 4, (96, 1065, 3656), 4),
    (4, -1, (288, 4060, 12213), 5),
    (6, 8, (8, 107, 335), 6),
    (8, Fraction(-1, 3), (96, 521), 7),
    (10, Fraction(10, 3), (1,), 8),
)

_H = Fraction(1, 2)
# (A, B): {j: coefficient of g(n, A, B) / n^j}
S2_ASYM_TERMS: Dict[Tuple[int, int], Dict[int, Fraction]] = {
    (0, 0): {4: _H * -192, 5: _H * 1632, 6: _H * -8736},
    (2, 0): {5: 768, 6: -8928, 7: 61744},
    (2, 2): {6: _H * -1152, 7: _H * 18432, 8: _H * -161488},
    (4, 0): {6: -576, 7: 10336, 8: -99336},
    (4, 2): {7: 384, 8: -10784, 9: 138128},
    (4, 4): {8: _H * 512, 9: _H * -7872, 10: _H * 58368},
    (6, 0): {7: 128, 8: -4192, 9: Fraction(300624, 5)},
    (6, 2): {8: -256, 9: 6848, 10: Fraction(-1517888, 15)},
    (6, 4): {10: Fraction(2432, 3), 11: Fraction(-62368, 5)},
    (6, 6): {11: _H * Fraction(256, 3), 12: _H * Fraction(-416, 15)},
    (8, 0): {9: 544, 10: Fraction(-225488, 15)},
    (8, 2): {10: -960, 11: Fraction(398912, 15)},
    (8, 4): {11: Fraction(-256, 3), 12: Fraction(31736, 15)},
    (8, 6): {13: Fraction(1328, 45)},
    (8, 8): {14: Fraction(64, 9)},
    (10, 0): {10: Fraction(-64, 3), 11: Fraction(8672, 5)},
    (10, 2): {11: Fraction(128, 3), 12: Fraction(-47504, 15)},
    (10, 4): {13: Fraction(-7856, 45)},
    (10, 6): {14: Fraction(-32, 3)},
    (12, 0): {12: Fraction(-456, 5)},
    (12, 2): {13: Fraction(2576, 15)},
    (12, 4): {14: Fraction(64, 9)},
    (14, 0): {13: Fraction(16, 9)},
    (14, 2): {14: Fraction(-32, 9)},
}


def _s1_laurent(scale, poly, j) -> Dict[int, sp.Expr]:
    deg = len(poly) - 1
    return {deg - i - j: _q(scale) * c for i, c in enumerate(poly)}


def bigS1_expansion() -> GExpansion:
    out = GExpansion(label="S1", order=1)
    for b, scale, poly, j in S1_ASYM_TERMS:
        out = out + g_expansion(b, 1).times_laurent(_s1_laurent(scale, poly, j))
    out.label = "S1"
    return out


def bigS2_expansion(variant: str = "residue") -> GExpansion:
    out = GExpansion(label="S2")
    for (A, B), coefs in S2_ASYM_TERMS.items():
        g = g2_expansion(A // 2, B // 2, variant)
        out = out + g.times_laurent({-j: _q(v) for j, v in coefs.items()})
    out.label = "S2"
    return out


def needed_pairs() -> Tuple[Tuple[int, int], ...]:
    """Every (a, b) whose constant appears in the double-sum expansion."""
    return tuple(sorted({(A // 2, B // 2) for A, B in S2_ASYM_TERMS}))


def bigS1_asym(n, prec: int = DEFAULT_PREC) -> mp.mpf:
    return bigS1_expansion().evaluate(n, prec=prec)


def bigS2_asym(n, constants: Mapping, variant: str = "residue", prec: int = DEFAULT_PREC) -> mp.mpf:
    """Asymptotic S_2(n); ``constants`` must cover needed_pairs()."""
    return bigS2_expansion(variant).evaluate(n, constants, prec)


def _laurent_at_infinity(rational: sp.Expr, n: sp.Symbol, order: int) -> Dict[int, sp.Expr]:
    """Coefficients of n^j, j >= -order, in the expansion of a rational function at infinity."""
    t = sp.Symbol("t", positive=True)
    num, den = sp.fraction(sp.together(rational))
    top = sp.degree(num, n) - sp.degree(den, n)
    f = sp.expand(rational.subs(n, 1 / t) * t**top)
    ser = sp.series(f, t, 0, order + top + 1).removeO()
    poly = sp.Poly(ser, t)
    return {top - k: c for (k,), c in poly.terms()}


def _prefactors(order: int = 6):
    n = sp.Symbol("n", positive=True)
    p1 = (n + 1) * (n + 2) / (12 * (2 * n + 1))
    p2 = p1 * (n + 1) * (n + 2) * (n + 3)
    return _laurent_at_infinity(p1, n, order), _laurent_at_infinity(p2, n, order)


def first_part_expansion(min_power=Fraction(-1, 2)) -> GExpansion:
    """(n+1)(n+2)/(12(2n+1)) * S1(n), expanded, keeping powers above min_power."""
    l1, _ = _prefactors()
    return bigS1_expansion().times_laurent(l1).truncate(Fraction(min_power) + Fraction(1, 10)).simplified()


def second_part_expansion(variant: str = "residue", min_power=Fraction(1, 2)) -> GExpansion:
    """(n+1)(n+2)/(12(2n+1)) (n+1)(n+2)(n+3) S2(n) at powers >= min_power.

    The double-sum expansion is only accurate to O(n^-4) relative to g(n,0,0),
    which leaves the sqrt(n) term and above determined but not the constant.
    """
    _, l2 = _prefactors()
    return bigS2_expansion(variant).times_laurent(l2).truncate(min_power).simplified()


# ---------------------------------------------------------------------------
# Averages
# ---------------------------------------------------------------------------

def H1_asym(n, prec: int = DEFAULT_PREC) -> mp.mpf:
    with mp.workprec(prec):
        return mp.sqrt(mp.pi * n) - mp.mpf(3) / 2


H2_MULTIPLIERS = (
    (-2, (0, 0)),
    (8, (1, 0)),
    (-9, (1, 1)),
    (-9, (2, 0)),
    (15, (2, 1)),
    (35, (2, 2)),
    (5, (3, 0)),
    (-35, (3, 1)),
)
assert tuple(p for _, p in H2_MULTIPLIERS) == H2_PAIRS


def H2_coefficient(constants: Mapping, prec: int = DEFAULT_PREC) -> AsymptoticCoefficient:
    """K with H(n, 2) ~ K sqrt(pi n) - 2."""
    with mp.workprec(prec):
        K = mp.fsum(m * mp.mpf(constant_value(constants, a, b)) for m, (a, b) in H2_MULTIPLIERS)
    return AsymptoticCoefficient(K, -2, H2_MULTIPLIERS)


def H2_asym(n, constants: Mapping, prec: int = DEFAULT_PREC) -> mp.mpf:
    with mp.workprec(prec):
        return H2_coefficient(constants, prec).evaluate(mp.mpf(n))


def convergence_ratio(n: int, H=None, prec: int = DEFAULT_PREC) -> mp.mpf:
    """q(n) = H(n, 2) / (2.57758 sqrt(n) - 2), with H(n, 2) from the determinant route."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if H is None:
        H = avg_height_exact(n, 2)
    with mp.workprec(prec):
        h = mp.mpf(H.numerator) / H.denominator if isinstance(H, Fraction) else mp.mpf(H)
        return h / (mp.mpf(Q_COEFF) * mp.sqrt(n) - 2)
