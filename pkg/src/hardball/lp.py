"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` (or max) subject to ``A_ub @ x <= b_ub``,
``A_eq @ x == b_eq`` and ``x >= 0``. The problems posed by this package
have at most a few dozen rows and columns, so a dense tableau is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import LPNumericError

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-12


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    fun: Optional[float]
    nit: int

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    prow = T[row] / T[row, col]
    T -= np.outer(T[:, col], prow)
    T[row] = prow


def _entering(obj: np.ndarray, allowed: int, tol: float) -> int:
    # Bland: first improving column
    candidates = np.flatnonzero(obj[:allowed] < -tol)
    return int(candidates[0]) if candidates.size else -1


def _leaving(T: np.ndarray, basis: np.ndarray, col: int, tol: float) -> int:
    column = T[:-1, col]
    rows = np.flatnonzero(column > tol)
    if rows.size == 0:
        return -1
    ratios = T[rows, -1] / column[rows]
    best = ratios.min()
    tied = rows[ratios <= best + tol * max(1.0, abs(best))]
    # Bland: among ties, the row whose basic variable has the smallest index
    return int(tied[np.argmin(basis[tied])])


def _run(T, basis, allowed, budget, tol):
    nit = 0
    while True:
        col = _entering(T[-1], allowed, tol)
        if col < 0:
            return "optimal", nit
        row = _leaving(T, basis, col, tol)
        if row < 0:
            return "unbounded", nit
        _pivot(T, row, col)
        basis[row] = col
        nit += 1
        if nit > budget:
            raise LPNumericError(f"simplex exceeded its iteration cap of {budget}")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, maximize=False,
            max_iter=None, tol=PIVOT_TOL, feas_tol=FEAS_TOL) -> LPResult:
    """Solve a small dense LP over the nonnegative orthant.

    Parameters
    ----------
    c : array_like, shape (n,)
        Objective coefficients.
    A_ub, b_ub : array_like, optional
        Inequality rows ``A_ub @ x <= b_ub``.
    A_eq, b_eq : array_like, optional
        Equality rows.
    maximize : bool
        Maximize instead of minimize.
    max_iter : int, optional
        Pivot budget over both phases; defaults to ``10 * (rows + cols)``.

    Returns
    -------
    LPResult

    Raises
    ------
    LPNumericError
        When the pivot budget is exhausted.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if max_iter is None:
        max_iter = 10 * (m + n + m_ub)

    # rows with a negative right-hand side are flipped and given an artificial
    flip_ub = b_ub < 0
    flip_eq = b_eq < 0
    need_art = np.concatenate([flip_ub, np.ones(m_eq, dtype=bool)])
    n_art = int(need_art.sum())
    ncols = n + m_ub + n_art

    T = np.zeros((m + 1, ncols + 1))
    T[:m_ub, :n] = A_ub
    T[:m_ub, n:n + m_ub] = np.eye(m_ub)
    T[:m_ub, -1] = b_ub
    T[m_ub:m, :n] = A_eq
    T[m_ub:m, -1] = b_eq
    T[:m_ub][flip_ub] *= -1.0
    T[m_ub:m][flip_eq] *= -1.0

    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    art_rows = np.flatnonzero(need_art)
    for k, row in enumerate(art_rows):
        T[row, n + m_ub + k] = 1.0
        basis[row] = n + m_ub + k

    nit = 0
    if n_art:
        # phase 1: minimise the sum of artificials
        T[-1, :] = 0.0
        T[-1, n + m_ub:n + m_ub + n_art] = 1.0
        for row in art_rows:
            T[-1] -= T[row]
        status, k = _run(T, basis, ncols, max_iter, tol)
        nit += k
        if status != "optimal":
            raise LPNumericError("phase 1 reported an unbounded auxiliary problem")
        scale = max(1.0, float(np.abs(T[:-1, -1]).max(initial=0.0)))
        if -T[-1, -1] > feas_tol * scale:
            return LPResult("infeasible", None, None, nit)
        # drive remaining artificials out of the basis; drop redundant rows
        keep = np.ones(m, dtype=bool)
        for row in range(m):
            if basis[row] >= n + m_ub:
                cols = np.flatnonzero(np.abs(T[row, :n + m_ub]) > tol)
                if cols.size:
                    _pivot(T, row, int(cols[0]))
                    basis[row] = int(cols[0])
                else:
                    keep[row] = False
        T = np.vstack([T[:-1][keep], T[-1:]])
        basis = basis[keep]
        T = np.hstack([T[:, :n + m_ub], T[:, -1:]])

    # phase 2
    cost = np.concatenate([-c if maximize else c, np.zeros(m_ub)])
    T[-1, :] = 0.0
    T[-1, :n + m_ub] = cost
    for row, var in enumerate(basis):
        if cost[var] != 0.0:
            T[-1] -= cost[var] * T[row]
    status, k = _run(T, basis, n + m_ub, max_iter - nit, tol)
    nit += k
    if status == "unbounded":
        return LPResult("unbounded", None, None, nit)
    x_full = np.zeros(n + m_ub)
    x_full[basis] = T[:-1, -1]
    x = np.maximum(x_full[:n], 0.0)
    fun = float(c @ x)
    return LPResult("optimal", x, fun, nit)
