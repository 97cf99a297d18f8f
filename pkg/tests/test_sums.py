import math
import re
from fractions import Fraction

import mpmath as mp
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from melonheight.errors import DomainError
from melonheight.exact import avg_height_exact, divisor_count
from melonheight.sums import (
    DOUBLESUM_TERMS,
    SINGLESUM_TERMS,
    S1d,
    S2d,
    SumMode,
    avg_height1_sum,
    avg_height2_sum,
    bigS1,
    bigS2,
    binomial_quotients,
    singlesum_coefficients,
)

# Second transcription of the two combinations, kept as formula text.
SINGLE_TEXT = (
    "-20*(n-1)*(n+2)*Sa0 + 15*n*(n+1)*(Sm1+Sa1) + (n+3)*(6*Sm1-16*Sa0+6*Sa1)"
    " + (n-2)*(6*Sm1+8*Sa0+6*Sa1) - 6*n*(n+3)*(Sm2+Sa2) + (n+2)*(n+3)*(Sm3+Sa3)"
)
DOUBLE_TEXT = (
    "S(n,-2,-2)-S(n,-1,-3)-2S(n,-1,-2)+S(n,-1,-1)+2S(n,-1,0)-S(n,-1,3)+2S(n,0,-3)"
    "-4S(n,0,0)+2S(n,0,3)-S(n,1,-3)-2S(n,1,-2)+2S(n,1,-1)+2S(n,1,0)+S(n,1,1)"
    "-S(n,1,3)+2S(n,2,-2)-2S(n,2,-1)-2S(n,2,1)+S(n,2,2)"
)
# Third check: the single-sum coefficients expanded by hand.
SINGLE_EXPANDED = {
    0: (-20, -28, -24),
    1: (15, 27, 6), -1: (15, 27, 6),
    2: (-6, -18, 0), -2: (-6, -18, 0),
    3: (1, 5, 6), -3: (1, 5, 6),
}


def parse_double(text):
    out = []
    for sign, mult, a, b in re.findall(r"([+-]?)(\d*)S\(n,(-?\d+),(-?\d+)\)", text):
        m = int(mult or 1) * (-1 if sign == "-" else 1)
        out.append((m, int(a), int(b)))
    return out


def single_poly_from_text():
    n = sp.Symbol("n")
    names = {"Sa0": 0, "Sa1": 1, "Sm1": -1, "Sa2": 2, "Sm2": -2, "Sa3": 3, "Sm3": -3}
    syms = {k: sp.Symbol(k) for k in names}
    expr = sp.expand(sp.sympify(SINGLE_TEXT, locals={**syms, "n": n}))
    return {a: sp.Poly(expr.coeff(syms[k]), n) for k, a in names.items()}


def S1_literal(n, a):
    c = math.comb(2 * n, n)
    return sum(Fraction(divisor_count(k) * math.comb(2 * n, n - k + a), c)
               for k in range(1, n + a + 1) if 0 <= n - k + a <= 2 * n)


def S2_literal(n, a, b):
    c = math.comb(2 * n, n)
    total = Fraction(0)
    for j in range(1, 2 * n + 4):
        for k in range(1, 2 * n + 4):
            x, y = n - j + a, n - k + b
            if 0 <= x <= 2 * n and 0 <= y <= 2 * n:
                total += Fraction(divisor_count(math.gcd(j, k)) * math.comb(2 * n, x) * math.comb(2 * n, y), c * c)
    return total


# --- transcription ------------------------------------------------------

def test_double_sum_double_entry():
    assert parse_double(DOUBLE_TEXT) == list(DOUBLESUM_TERMS)
    assert len(DOUBLESUM_TERMS) == 19


def test_single_sum_double_entry():
    polys = single_poly_from_text()
    for n in range(-3, 12):
        coef = singlesum_coefficients(n)
        for a, p in polys.items():
            assert coef.get(a, 0) == p.eval(n), (n, a)
            c2, c1, c0 = SINGLE_EXPANDED[a]
            assert coef.get(a, 0) == c2 * n * n + c1 * n + c0


# --- S(n,a) and S(n,a,b) --------------------------------------------------

def test_S1d_examples():
    assert S1d(1, 1) == 2
    assert S1d(2, 0) == 1
    assert S1d(1, -1) == 0


def test_S2d_examples():
    assert S2d(1, 1, 1) == Fraction(5, 2)
    assert S2d(1, -3, -3) == 0
    assert S2d(2, 0, 0) == S2_literal(2, 0, 0)


@given(n=st.integers(1, 12), a=st.integers(-4, 4))
@settings(max_examples=80, deadline=None)
def test_S1d_literal(n, a):
    assert S1d(n, a) == S1_literal(n, a)


@given(n=st.integers(1, 7), a=st.integers(-3, 3), b=st.integers(-3, 3))
@settings(max_examples=60, deadline=None)
def test_S2d_literal_and_symmetric(n, a, b):
    v = S2d(n, a, b)
    assert v == S2_literal(n, a, b)
    assert v == S2d(n, b, a)


@given(n=st.integers(1, 40), a=st.integers(-45, 5))
@settings(max_examples=60, deadline=None)
def test_S1d_nonnegative_and_vanishing(n, a):
    v = S1d(n, a)
    assert v >= 0
    if n + a < 1:
        assert v == 0


# --- formula equivalence --------------------------------------------------

def test_avg1_examples():
    assert avg_height1_sum(1) == 1
    assert avg_height1_sum(2) == Fraction(3, 2)
    assert avg_height1_sum(10) == avg_height_exact(10, 1)


def test_avg2_examples():
    assert avg_height2_sum(1) == 3
    assert avg_height2_sum(2) == Fraction(11, 3)
    assert avg_height2_sum(30) == avg_height_exact(30, 2)


def test_avg1_equivalence_upto_50():
    for n in range(1, 51):
        assert avg_height1_sum(n) == avg_height_exact(n, 1), n


def test_avg2_equivalence_upto_30():
    for n in range(1, 31):
        assert avg_height2_sum(n) == avg_height_exact(n, 2), n


def test_mutated_table_is_caught():
    for idx in (0, 7, 18):
        m, a, b = DOUBLESUM_TERMS[idx]
        tampered = list(DOUBLESUM_TERMS)
        tampered[idx] = (m + 1, a, b)
        assert any(avg_height2_sum(n, doublesum_terms=tampered) != avg_height_exact(n, 2)
                   for n in range(1, 31))


def test_linearity_with_zero_sums():
    assert bigS1(5, S=lambda n, a: 0) == 0
    assert bigS2(5, S=lambda n, a, b: 0) == 0


# --- high precision -----------------------------------------------------

def test_binomial_quotients_running_product():
    q = binomial_quotients(50)
    assert q[0] == 1
    for m in (1, 10, 50):
        with mp.workprec(128):
            assert mp.almosteq(q[m], mp.mpf(math.comb(100, 50 - m)) / math.comb(100, 50), 1e-35)


@pytest.mark.parametrize("n", [1, 7, 30, 100])
def test_hp_matches_exact(n):
    prec = 128
    bound = mp.mpf(2) ** (-prec + 20)
    with mp.workprec(prec + 64):
        for exact_v, hp_v in (
            (avg_height2_sum(n), avg_height2_sum(n, "hp", prec)),
            (avg_height1_sum(n), avg_height1_sum(n, SumMode.HP, prec)),
            (S2d(n, 1, -2), S2d(n, 1, -2, "hp", prec)),
        ):
            e = mp.mpf(exact_v.numerator) / exact_v.denominator
            assert abs(hp_v - e) <= bound * abs(e), n


def test_mode_names():
    assert SumMode.coerce("exact-rational") is SumMode.EXACT
    assert SumMode.coerce("high-precision") is SumMode.HP
    with pytest.raises(DomainError):
        SumMode.coerce("fast")
    with pytest.raises(DomainError):
        S1d(0, 1)
