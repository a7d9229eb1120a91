"""Exact Betti-number bookkeeping across the first critical radius.

All arithmetic here is on Python integers and :class:`fractions.Fraction`.
The above-threshold table assumes the top Betti numbers vanish for radii
just above ``r*``; that vanishing is taken as given, not derived.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .exceptions import ParameterError
from .geometry import BoxDomain


@dataclass(frozen=True)
class PoincarePolynomial:
    coefficients: tuple

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, i: int) -> int:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else 0

    def __call__(self, t):
        return sum(c * t ** i for i, c in enumerate(self.coefficients))

    def euler_characteristic(self) -> int:
        return self(-1)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "t" if i == 1 else f"t^{i}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms) or "0"


def _multiply(p: list, q: list) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def poincare_conf(n: int, d: int) -> PoincarePolynomial:
    """Poincare polynomial ``prod_{i=1}^{n-1} (1 + i t^(d-1))`` of ``n`` labelled points in ``R^d``."""
    if n < 1 or d < 2:
        raise ParameterError("need n >= 1 and d >= 2")
    poly = [1]
    for i in range(1, n):
        factor = [0] * d
        factor[0] = 1
        factor[d - 1] = i
        poly = _multiply(poly, factor)
    if n >= 2:
        top = (n - 1) * (d - 1)
        sub = (n - 2) * (d - 1)
        if poly[top] != factorial(n - 1) or poly[sub] != factorial(n - 1) * harmonic(n - 1):
            raise ArithmeticError(f"expansion of Conf({n}) in R^{d} disagrees with its closed-form top terms")
    return PoincarePolynomial(tuple(poly))


def harmonic(m: int) -> Fraction:
    if m < 0:
        raise ParameterError("harmonic number needs m >= 0")
    return sum((Fraction(1, i) for i in range(1, m + 1)), Fraction(0))


def k_multiplicity(domain: BoxDomain) -> int:
    """Number of sides equal to the shortest one."""
    return len(domain.shortest_axes())


@dataclass(frozen=True)
class BettiTables:
    n: int
    d: int
    k: int
    below: tuple
    above: tuple
    cells_attached: int
    cells_to_betti_N: int
    r_star: object = None

    @property
    def N(self) -> int:
        return (self.n - 1) * (self.d - 1)

    def euler_below(self) -> int:
        return sum((-1) ** i * b for i, b in enumerate(self.below))

    def euler_above(self) -> int:
        return sum((-1) ** i * b for i, b in enumerate(self.above))

    def to_dict(self) -> dict:
        r = self.r_star
        return {
            "n": self.n,
            "d": self.d,
            "k": self.k,
            "r_star": float(r) if r is not None else None,
            "below": list(self.below),
            "above": list(self.above),
            "cells_attached": self.cells_attached,
            "cells_to_betti_N": self.cells_to_betti_N,
            "conditional": "top Betti numbers vanish just above r*",
        }

    def to_text(self) -> str:
        width = max(len(str(b)) for b in self.below + self.above) + 2
        head = "degree " + "".join(f"{i:>{width}}" for i in range(len(self.below)))
        lines = [
            head,
            "below  " + "".join(f"{b:>{width}}" for b in self.below),
            "above  " + "".join(f"{b:>{width}}" for b in self.above),
            f"cells attached: {self.cells_attached}, raising beta_N: {self.cells_to_betti_N}",
        ]
        if self.r_star is not None:
            lines.insert(0, f"r* = {float(self.r_star)!r}")
        return "\n".join(lines)


def betti_across_threshold(n: int, d: int, k: int, shortest_side=None) -> BettiTables:
    """Betti numbers of ``Conf(n, r)`` just below and just above ``r* = L/2n``.

    Below, the space is homotopy equivalent to ``Conf(n)``. Crossing ``r*``
    attaches ``k n!`` cells of dimension ``N = (n-1)(d-1)``, ``(n-1)!`` of
    which account for ``beta_N``; the rest lower ``beta_{N-1}``. Above, the
    degrees ``>= N`` are zero.
    """
    if n < 2 or d < 2 or not 1 <= k <= d:
        raise ParameterError("need n >= 2, d >= 2 and 1 <= k <= d")
    below = poincare_conf(n, d).coefficients
    N = (n - 1) * (d - 1)
    above = [below[i] if i <= N - 2 else 0 for i in range(N + 1)]
    H = harmonic(n - 1)
    closed = (H + k * n - 1) * factorial(n - 1) if d == 2 else Fraction((k * n - 1) * factorial(n - 1))
    incremental = below[N - 1] + k * factorial(n) - factorial(n - 1)
    if closed != incremental or closed.denominator != 1:
        raise ArithmeticError(f"inconsistent beta_(N-1): {closed} vs {incremental}")
    above[N - 1] = int(closed)
    r = Fraction(shortest_side) / (2 * n) if shortest_side is not None else None
    return BettiTables(n, d, k, tuple(below), tuple(above), k * factorial(n), factorial(n - 1), r)
