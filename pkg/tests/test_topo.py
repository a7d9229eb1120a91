from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardball import BoxDomain, betti_across_threshold, harmonic, k_multiplicity, poincare_conf
from hardball.exceptions import ParameterError


def stirling_first(n):
    """Unsigned Stirling numbers c(n, k) by the recurrence c(m+1, k) = m c(m, k) + c(m, k-1)."""
    row = [1]
    for m in range(n):
        nxt = [0] * (len(row) + 1)
        for k, c in enumerate(row):
            nxt[k] += m * c
            nxt[k + 1] += c
        row = nxt
    return row


def test_examples():
    assert str(poincare_conf(3, 2)) == "1 + 3t + 2t^2"
    assert poincare_conf(1, 5).coefficients == (1,)
    assert str(poincare_conf(3, 3)) == "1 + 3t^2 + 2t^4"


@pytest.mark.parametrize("m, value", [(0, Fraction(0)), (2, Fraction(3, 2)), (4, Fraction(25, 12))])
def test_harmonic(m, value):
    assert harmonic(m) == value


@pytest.mark.parametrize("lengths, k", [((1.0, 2.0), 1), ((1.0, 1.0, 2.0), 2), ((1.0, 1.0, 1.0), 3), ((2.0, 1.0, 1.0), 2)])
def test_k_multiplicity(lengths, k):
    assert k_multiplicity(BoxDomain(lengths)) == k


@given(st.integers(1, 12), st.integers(2, 6))
def test_matches_stirling_numbers(n, d):
    # prod (1 + i t^(d-1)) has c(n, n - j) at degree j (d - 1)
    p = poincare_conf(n, d)
    c = stirling_first(n)
    for j in range(n):
        assert p[j * (d - 1)] == c[n - j]
    assert sum(p.coefficients) == factorial(n)
    assert p.degree == (n - 1) * (d - 1)
    assert p[0] == 1


@given(st.integers(2, 10), st.integers(2, 5))
def test_top_coefficients(n, d):
    p = poincare_conf(n, d)
    N = (n - 1) * (d - 1)
    assert p[N] == factorial(n - 1)
    assert p[N - (d - 1)] == factorial(n - 1) * harmonic(n - 1)


def test_betti_examples():
    t = betti_across_threshold(2, 2, 1)
    assert t.below == (1, 1) and t.above == (2, 0)
    assert betti_across_threshold(2, 3, 1).above == (1, 1, 0)
    assert betti_across_threshold(3, 2, 1).above == (1, 7, 0)


@given(st.integers(2, 7), st.integers(2, 5), st.data())
def test_euler_bookkeeping(n, d, data):
    k = data.draw(st.integers(1, d))
    t = betti_across_threshold(n, d, k)
    N = t.N
    assert t.euler_below() - t.euler_above() == (-1) ** N * k * factorial(n)
    assert t.cells_attached == k * factorial(n)
    assert t.cells_to_betti_N == factorial(n - 1)
    assert t.above[:N - 1] == t.below[:N - 1]
    assert t.above[N] == 0


def test_r_star_is_exact():
    t = betti_across_threshold(3, 2, 1, shortest_side=1)
    assert t.r_star == Fraction(1, 6)
    d = t.to_dict()
    assert set(d) >= {"r_star", "below", "above", "cells_attached", "cells_to_betti_N"}


def test_parameter_errors():
    with pytest.raises(ParameterError):
        betti_across_threshold(1, 2, 1)
    with pytest.raises(ParameterError):
        betti_across_threshold(2, 2, 3)
    with pytest.raises(ParameterError):
        poincare_conf(0, 2)
    with pytest.raises(ParameterError):
        harmonic(-1)
