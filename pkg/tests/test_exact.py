import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from melonheight.errors import ConsistencyError, DomainError
from melonheight.exact import (
    HeightSpectrum,
    MelonConfig,
    avg_height_exact,
    bareiss_det,
    binomial,
    bounded_dyck_count,
    bounded_path_count,
    capped_melon_count,
    catalan,
    count_melons,
    divisor_count,
    divisor_counts,
    dp_oracle_count,
    height_spectrum,
    max_height,
    paths_avoiding_lines,
)


def walks(length):
    return itertools.product((1, -1), repeat=length)


def brute_dyck_heights(n):
    """Heights of all Dyck paths of length 2n by listing every step sequence."""
    out = []
    for steps in walks(2 * n):
        h, top, ok = 0, 0, True
        for s in steps:
            h += s
            if h < 0:
                ok = False
                break
            top = max(top, h)
        if ok and h == 0:
            out.append(top)
    return out


def brute_single_path(length, start, end, lo, hi):
    count = 0
    for steps in walks(length):
        y, ok = start, True
        for s in steps:
            y += s
            if not lo <= y <= hi:
                ok = False
                break
        if ok and y == end:
            count += 1
    return count


# --- elementary ---------------------------------------------------------

def test_binomial_examples():
    assert binomial(4, 2) == 6
    assert binomial(4, -1) == 0
    assert binomial(4, 5) == 0
    big = binomial(2000, 1000)
    assert big == binomial(1999, 999) * 2000 // 1000
    assert big == math.comb(2000, 1000)
    assert 600 <= len(str(big)) <= 601


def test_divisor_count():
    assert divisor_count(1) == 1
    assert divisor_count(12) == 6
    assert divisor_count(9973) == 2
    with pytest.raises(DomainError):
        divisor_count(0)


def test_divisor_sieve_matches_trial_division():
    table = divisor_counts(500)
    assert all(table[k] == divisor_count(k) for k in range(1, 501))


def test_catalan():
    assert catalan(0) == 1
    assert catalan(3) == 5
    assert catalan(10) == 16796 == dp_oracle_count(10, 1)


def test_count_melons_examples():
    assert count_melons(3, 1) == 5
    assert count_melons(2, 2) == 3
    assert count_melons(3, 2) == 14
    assert all(count_melons(n, 1) == catalan(n) for n in range(1, 30))


def test_config_validation():
    with pytest.raises(DomainError):
        MelonConfig(0, 1)
    with pytest.raises(DomainError):
        MelonConfig(1, 0)
    with pytest.raises(DomainError):
        MelonConfig(1, 1, -1)
    with pytest.raises(DomainError):
        count_melons(0, 2)


# --- reflection counts --------------------------------------------------

def test_paths_avoiding_lines_examples():
    assert paths_avoiding_lines(2, 2, 1, 2) == 1
    assert paths_avoiding_lines(3, 3, 1, 4) == 5
    assert paths_avoiding_lines(1, 1, 1, 1) == 0
    with pytest.raises(DomainError):
        paths_avoiding_lines(3, 0, 1, 2)
    with pytest.raises(DomainError):
        paths_avoiding_lines(1, 1, 0, 2)


@given(u=st.integers(0, 6), d=st.integers(0, 6), b=st.integers(1, 5), t=st.integers(1, 5))
@settings(max_examples=150, deadline=None)
def test_paths_avoiding_lines_brute(u, d, b, t):
    if not -b < u - d < t:
        return
    assert paths_avoiding_lines(u, d, b, t) == brute_single_path(u + d, 0, u - d, -b + 1, t - 1)


def test_bounded_path_count_examples():
    assert bounded_path_count(2, 0, 0, 1) == 1
    assert bounded_path_count(3, 0, 0, 10) == 5
    assert bounded_path_count(3, 1, 1, 2) == brute_single_path(6, 2, 2, 0, 2)


@given(n=st.integers(0, 6), i=st.integers(0, 3), j=st.integers(0, 3), h=st.integers(0, 9))
@settings(max_examples=150, deadline=None)
def test_bounded_path_count_brute(n, i, j, h):
    expect = brute_single_path(2 * n, 2 * i, 2 * j, 0, h) if 2 * i <= h and 2 * j <= h else 0
    assert bounded_path_count(n, i, j, h) == expect


def test_bounded_dyck_count():
    assert bounded_dyck_count(2, 1) == 1
    assert bounded_dyck_count(3, 2) == 4
    assert bounded_dyck_count(5, 5) == 42
    for n in range(1, 8):
        heights = brute_dyck_heights(n)
        for h in range(0, n + 2):
            assert bounded_dyck_count(n, h) == sum(1 for x in heights if x <= h)
            assert bounded_dyck_count(n, h) == bounded_path_count(n, 0, 0, h)


# --- determinants -------------------------------------------------------

def test_bareiss():
    assert bareiss_det([]) == 1
    assert bareiss_det([[2, 3], [4, 5]]) == -2
    assert bareiss_det([[0, 1], [1, 0]]) == -1
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    m = [[3, 1, 4], [1, 5, 9], [2, 6, 5]]
    assert bareiss_det(m) == 3 * (25 - 54) - 1 * (5 - 18) + 4 * (6 - 10)


def test_capped_examples():
    assert capped_melon_count(2, 2, 2) == 0
    assert capped_melon_count(2, 2, 3) == 1
    assert capped_melon_count(2, 2, 4) == 3
    for h in range(0, 2 * 3 - 1):
        assert capped_melon_count(5, 3, h) == 0
    assert capped_melon_count(4, 2, None) == count_melons(4, 2)
    assert capped_melon_count(4, 2, math.inf) == count_melons(4, 2)
    assert capped_melon_count(4, 2, -1) == 0


def test_capped_matches_dp_small():
    for p in (1, 2, 3):
        for n in range(1, 7):
            for h in range(0, max_height(n, p) + 2):
                assert capped_melon_count(n, p, h) == dp_oracle_count(n, p, h), (n, p, h)


@given(n=st.integers(1, 25), p=st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_capped_monotone_and_saturating(n, p):
    counts = [capped_melon_count(n, p, h) for h in range(0, max_height(n, p) + 1)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    assert counts[-1] == count_melons(n, p)
    assert capped_melon_count(n, p, max_height(n, p) + 5) == counts[-1]


def test_spectrum_examples():
    assert height_spectrum(2, 2).counts == {3: 1, 4: 2}
    assert height_spectrum(1, 1).counts == {1: 1}
    assert height_spectrum(3, 1).counts == {1: 1, 2: 3, 3: 1}
    s = height_spectrum(4, 2)
    assert isinstance(s, HeightSpectrum) and s.total == count_melons(4, 2)


def test_spectrum_vs_brute_dyck():
    for n in range(1, 9):
        heights = brute_dyck_heights(n)
        expect = {h: heights.count(h) for h in set(heights)}
        assert height_spectrum(n, 1).counts == expect


def test_average_examples():
    assert avg_height_exact(1, 1) == 1
    assert avg_height_exact(2, 1) == Fraction(3, 2)
    assert avg_height_exact(1, 2) == 3
    assert avg_height_exact(2, 2) == Fraction(11, 3)


@given(n=st.integers(1, 20), p=st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_average_is_spectrum_mean(n, p):
    assert avg_height_exact(n, p) == height_spectrum(n, p).mean()


def test_average_bounds():
    for p in (1, 2, 3):
        for n in range(1, 15):
            h = avg_height_exact(n, p)
            assert 2 * p - 1 <= h <= max_height(n, p)


# --- oracle -------------------------------------------------------------

def test_dp_oracle_examples():
    assert dp_oracle_count(2, 2) == 3
    assert dp_oracle_count(3, 1) == 5
    assert dp_oracle_count(4, 3, 6) == capped_melon_count(4, 3, 6) == 64


def test_dp_oracle_limits():
    with pytest.raises(DomainError):
        dp_oracle_count(15, 1)
    with pytest.raises(DomainError):
        dp_oracle_count(3, 4)


def test_consistency_error_type():
    assert issubclass(ConsistencyError, ArithmeticError)
