"""Farkas alternative for the active constraints of tau.

Either the open cone ``{v : <g_p, v> > 0 for all active p}`` is nonempty
(an ascent direction exists, the level is regular there) or some convex
combination of the active gradients vanishes (a balanced stress graph).
Both sides are decided by small LPs solved with :mod:`hardball.lp`.

Under the ``||v||_inf <= 1`` normalisation the optimal ascent margin equals
the smallest ``l1`` norm of a convex combination of gradients, so the two
certificates are exclusive up to the tolerances below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import AmbiguousClassificationError, LPNumericError, PreconditionError
from .geometry import BoxDomain, check_inside
from .lp import linprog
from .taut import PairConstraint, active_set, gradient_matrix

MARGIN_TOL = 1e-8
BALANCE_TOL_REL = 1e-9
WEIGHT_FLOOR = 1e-10
HULL_TOL_REL = 1e-9
# margin the least-l1 refinement of an ascent direction may give up
_MARGIN_SLACK = 1e-12
# floor on the per-row slack of the weight-spreading LPs
_SPREAD_ROW_TOL = 1e-13


@dataclass(frozen=True)
class AscentCertificate:
    """A direction (``max|v_k| <= 1``) raising every active constraint at rate >= ``margin``."""

    direction: np.ndarray
    margin: float
    constraints: tuple
    tau: float

    def validate(self, config, tol=1e-12) -> bool:
        G = gradient_matrix(self.constraints, config)
        return bool(np.all(G @ self.direction >= self.margin - tol))

    def to_dict(self) -> dict:
        return {
            "kind": "ascent",
            "tau": self.tau,
            "margin": self.margin,
            "direction": self.direction.tolist(),
            "constraints": [c.to_dict() for c in self.constraints],
        }


@dataclass(frozen=True)
class BalanceCertificate:
    """Positive weights (summing to one) under which the active gradients cancel."""

    constraints: tuple
    weights: np.ndarray
    residual: float
    tau: float
    margin: float = 0.0

    @property
    def support_size(self) -> int:
        return len(self.constraints)

    def to_dict(self) -> dict:
        return {
            "kind": "balance",
            "tau": self.tau,
            "residual": self.residual,
            "support_size": self.support_size,
            "weights": [dict(c.to_dict(), weight=float(w)) for c, w in zip(self.constraints, self.weights)],
        }


def _default_tols(domain, balance_tol, eps_act):
    L = domain.shortest_side()
    return (BALANCE_TOL_REL * L if balance_tol is None else balance_tol,
            eps_act)


def _reduce(G: np.ndarray):
    """Drop coordinates no active gradient touches."""
    cols = np.flatnonzero(np.any(G != 0.0, axis=0))
    return G[:, cols], cols


def max_margin(G: np.ndarray):
    """Optimal margin ``max_v min_p <g_p, v>`` over ``||v||_inf <= 1`` and a canonical maximiser.

    Among maximisers the one of least ``l1`` norm is returned, so coordinates
    that no constraint needs are left at zero.
    """
    m, dim = G.shape
    v = np.zeros(dim)
    if m == 0:
        return np.inf, v
    Gr, cols = _reduce(G)
    k = cols.size
    # variables: v+ (k), v- (k), delta
    A = np.zeros((m + 2 * k, 2 * k + 1))
    A[:m, :k] = -Gr
    A[:m, k:2 * k] = Gr
    A[:m, -1] = 1.0
    A[m:, :2 * k] = np.eye(2 * k)
    b = np.concatenate([np.zeros(m), np.ones(2 * k)])
    c = np.zeros(2 * k + 1)
    c[-1] = 1.0
    res = linprog(c, A, b, maximize=True)
    if not res.success:
        raise LPNumericError(f"ascent LP returned status {res.status}")
    delta = res.fun
    if delta > 0:
        A2 = np.zeros((m + 2 * k, 2 * k))
        A2[:m, :k] = -Gr
        A2[:m, k:] = Gr
        A2[m:] = np.eye(2 * k)
        b2 = np.concatenate([np.full(m, -(delta - _MARGIN_SLACK)), np.ones(2 * k)])
        res2 = linprog(np.ones(2 * k), A2, b2)
        x = res2.x if res2.success else res.x
    else:
        x = res.x
    v[cols] = x[:k] - x[k:2 * k]
    top = np.abs(v).max()
    if delta > 0 and top > 0:
        v /= top
    return float(delta), v


def min_combination(G: np.ndarray):
    """Convex weights ``w`` minimising ``||G.T @ w||_1``; returns ``(w, l1_residual)``."""
    m, _ = G.shape
    Gr, cols = _reduce(G)
    k = cols.size
    # variables: w (m), p (k), q (k) with G^T w + p - q = 0, sum w = 1
    A_eq = np.zeros((k + 1, m + 2 * k))
    A_eq[:k, :m] = Gr.T
    A_eq[:k, m:m + k] = np.eye(k)
    A_eq[:k, m + k:] = -np.eye(k)
    A_eq[k, :m] = 1.0
    b_eq = np.zeros(k + 1)
    b_eq[k] = 1.0
    c = np.concatenate([np.zeros(m), np.ones(2 * k)])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq)
    if not res.success:
        raise LPNumericError(f"balance LP returned status {res.status}")
    return res.x[:m], float(res.fun)


def _spread_weights(G: np.ndarray, row_tol: float) -> Optional[np.ndarray]:
    """Balanced weights in the relative interior of the balancing cone.

    First finds the largest set of constraints that can carry positive weight
    at once, then maximises the smallest weight on that set.
    """
    m, _ = G.shape
    Gr, _ = _reduce(G)
    k = Gr.shape[1]
    # support LP: max sum z, z_j <= w_j, z_j <= 1, |G^T w| <= row_tol * sum(w), sum w <= m
    ones = np.ones((k, m))
    A = np.vstack([
        np.hstack([Gr.T - row_tol * ones, np.zeros((k, m))]),
        np.hstack([-Gr.T - row_tol * ones, np.zeros((k, m))]),
        np.hstack([-np.eye(m), np.eye(m)]),
        np.hstack([np.zeros((m, m)), np.eye(m)]),
        np.hstack([np.ones((1, m)), np.zeros((1, m))]),
    ])
    b = np.concatenate([np.zeros(2 * k + m), np.ones(m), [float(m)]])
    res = linprog(np.concatenate([np.zeros(m), np.ones(m)]), A, b, maximize=True)
    if not res.success:
        return None
    support = np.flatnonzero(res.x[m:] > 0.5)
    if support.size == 0:
        return None
    Gs = Gr[support]
    s = support.size
    # max-min LP over the support: w_j >= t, sum w = 1, |G^T w| <= row_tol
    A = np.vstack([
        np.hstack([Gs.T, np.zeros((k, 1))]),
        np.hstack([-Gs.T, np.zeros((k, 1))]),
        np.hstack([-np.eye(s), np.ones((s, 1))]),
    ])
    b = np.concatenate([np.full(2 * k, row_tol), np.zeros(s)])
    A_eq = np.hstack([np.ones((1, s)), np.zeros((1, 1))])
    c = np.zeros(s + 1)
    c[-1] = 1.0
    res = linprog(c, A, b, A_eq, [1.0], maximize=True)
    if not res.success:
        return None
    w = np.zeros(m)
    w[support] = res.x[:s]
    return w


def _solve_both(domain, config, eps_act, balance_tol, weight_floor):
    pts = check_inside(domain, config)
    aset = active_set(domain, pts, eps_act)
    G = gradient_matrix(aset.constraints, pts)
    delta, v = max_margin(G)
    w, _ = min_combination(G)
    residual = float(np.linalg.norm(G.T @ w))
    if residual <= balance_tol:
        row_tol = max(_SPREAD_ROW_TOL, 2.0 * float(np.abs(G.T @ w).max(initial=0.0)))
        spread = _spread_weights(G, row_tol)
        if spread is not None and np.linalg.norm(G.T @ spread) <= balance_tol:
            w = spread
    keep = w > weight_floor
    weights = w[keep] / w[keep].sum() if keep.any() else w[keep]
    constraints = tuple(c for c, kept in zip(aset.constraints, keep) if kept)
    residual = float(np.linalg.norm(G[keep].T @ weights)) if keep.any() else float("inf")
    ascent = AscentCertificate(v, float(np.min(G @ v)) if G.shape[0] else np.inf, aset.constraints, aset.tau)
    balance = BalanceCertificate(constraints, weights, residual, aset.tau, delta)
    return pts, aset, delta, ascent, balance


def ascent_direction(domain: BoxDomain, config, eps_act=None, margin_tol=MARGIN_TOL) -> Optional[AscentCertificate]:
    """Ascent certificate for the cone of increasing directions, or ``None`` if it is (numerically) empty."""
    pts = check_inside(domain, config)
    aset = active_set(domain, pts, eps_act)
    G = gradient_matrix(aset.constraints, pts)
    delta, v = max_margin(G)
    if not delta > margin_tol:
        return None
    return AscentCertificate(v, float(np.min(G @ v)), aset.constraints, aset.tau)


def balance_weights(domain: BoxDomain, config, eps_act=None, balance_tol=None,
                    weight_floor=WEIGHT_FLOOR) -> Optional[BalanceCertificate]:
    """Positive weights cancelling the active gradients, or ``None`` if no such combination exists."""
    balance_tol, eps_act = _default_tols(domain, balance_tol, eps_act)
    _, _, _, _, balance = _solve_both(domain, config, eps_act, balance_tol, weight_floor)
    if not balance.residual <= balance_tol:
        return None
    return balance


# -- stress graphs -----------------------------------------------------------

@dataclass(frozen=True)
class StressEdge:
    """Edge between internal point ``i`` and either internal point ``j`` or boundary vertex ``foot``.

    ``weight`` is the certificate weight; ``force`` is the magnitude of the
    repulsive force it exerts, i.e. the weight times the gradient block norm
    (``1/2`` for contacts between spheres, ``1`` for wall contacts).
    """

    i: int
    weight: float
    j: Optional[int] = None
    foot: Optional[int] = None
    constraint: object = None

    @property
    def is_pair(self) -> bool:
        return self.j is not None

    @property
    def force(self) -> float:
        return 0.5 * self.weight if self.is_pair else self.weight


@dataclass
class StressGraph:
    """Contact graph with positive weights built from a balance certificate."""

    points: np.ndarray
    radius: float
    feet: np.ndarray
    edges: list
    scale: float = 1.0
    components: list = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            self.components = self._components()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def _components(self):
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        n_vert = self.n + len(self.feet)
        rows, cols = [], []
        for e in self.edges:
            rows.append(e.i)
            cols.append(e.j if e.is_pair else self.n + e.foot)
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_vert, n_vert))
        _, labels = connected_components(adj, directed=False)
        groups = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        out = []
        for verts in groups.values():
            internal = [v for v in verts if v < self.n]
            boundary = [v - self.n for v in verts if v >= self.n]
            out.append({"internal": internal, "boundary": boundary, "trivial": len(verts) == 1})
        return out

    @property
    def trivial(self) -> bool:
        return not self.edges

    def with_weights(self, weights) -> "StressGraph":
        edges = [StressEdge(e.i, float(w), e.j, e.foot, e.constraint) for e, w in zip(self.edges, weights)]
        return StressGraph(self.points, self.radius, self.feet, edges, self.scale)

    def forces(self):
        """Net force on every internal point and the force on every boundary vertex."""
        internal = np.zeros_like(self.points)
        boundary = np.zeros_like(self.feet)
        for e in self.edges:
            xi = self.points[e.i]
            other = self.points[e.j] if e.is_pair else self.feet[e.foot]
            u = (xi - other) / np.linalg.norm(xi - other)
            internal[e.i] += e.force * u
            if e.is_pair:
                internal[e.j] -= e.force * u
            else:
                boundary[e.foot] -= e.force * u
        return internal, boundary

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "points": self.points.tolist(),
            "feet": self.feet.tolist(),
            "edges": [
                {"i": e.i + 1, "j": None if e.j is None else e.j + 1,
                 "foot": e.foot, "weight": e.weight}
                for e in self.edges
            ],
            "components": [
                {"internal": [v + 1 for v in c["internal"]], "boundary": c["boundary"], "trivial": c["trivial"]}
                for c in self.components
            ],
        }


def build_stress_graph(domain: BoxDomain, config, certificate: BalanceCertificate) -> StressGraph:
    """Stress graph whose edges are the supported constraints of ``certificate``."""
    pts = check_inside(domain, config)
    feet, edges = [], []
    for c, w in zip(certificate.constraints, certificate.weights):
        if isinstance(c, PairConstraint):
            edges.append(StressEdge(c.i, float(w), j=c.j, constraint=c))
        else:
            edges.append(StressEdge(c.i, float(w), foot=len(feet), constraint=c))
            feet.append(c.foot)
    feet = np.asarray(feet, dtype=float).reshape(-1, pts.shape[1])
    return StressGraph(pts, certificate.tau, feet, edges, domain.shortest_side())


@dataclass
class BalanceReport:
    balanced: bool
    trivial: bool
    internal_residuals: np.ndarray
    component_boundary_sums: list
    tol: float


def check_balance(graph: StressGraph, balance_tol: Optional[float] = None) -> BalanceReport:
    """Net force at each internal point and summed boundary stress per component."""
    if balance_tol is None:
        balance_tol = BALANCE_TOL_REL * graph.scale
    internal, boundary = graph.forces()
    norms = np.linalg.norm(internal, axis=1)
    sums = []
    for comp in graph.components:
        total = boundary[comp["boundary"]].sum(axis=0) if comp["boundary"] else np.zeros(graph.points.shape[1])
        sums.append(float(np.linalg.norm(total)))
    balanced = bool(np.all(norms <= balance_tol) and all(s <= balance_tol for s in sums))
    return BalanceReport(balanced, graph.trivial, norms, sums, balance_tol)


def _in_hull(vertices: np.ndarray, x: np.ndarray, tol: float) -> bool:
    if len(vertices) == 0:
        return False
    w, _ = min_combination(vertices - x)
    return float(np.linalg.norm((vertices - x).T @ w)) <= tol


@dataclass
class HullReport:
    kissing_ok: dict
    component_ok: list

    @property
    def passed(self) -> bool:
        return all(self.kissing_ok.values()) and all(self.component_ok)


def hull_checks(graph: StressGraph, hull_tol: Optional[float] = None, balance_tol=None) -> HullReport:
    """Convex-hull consequences of balance.

    Every non-isolated internal point must lie in the hull of its kissing
    points, and every nontrivial component in the hull of its boundary
    kissing points.
    """
    if not check_balance(graph, balance_tol).balanced:
        raise PreconditionError("hull checks require a balanced stress graph")
    if hull_tol is None:
        hull_tol = HULL_TOL_REL * graph.scale
    kissing = {i: [] for i in range(graph.n)}
    for e in graph.edges:
        if e.is_pair:
            mid = 0.5 * (graph.points[e.i] + graph.points[e.j])
            kissing[e.i].append(mid)
            kissing[e.j].append(mid)
        else:
            kissing[e.i].append(graph.feet[e.foot])
    kissing_ok = {
        i: _in_hull(np.asarray(k), graph.points[i], hull_tol) for i, k in kissing.items() if k
    }
    component_ok = []
    for comp in graph.components:
        if comp["trivial"]:
            continue
        feet = graph.feet[comp["boundary"]]
        component_ok.append(all(_in_hull(feet, graph.points[i], hull_tol) for i in comp["internal"]))
    return HullReport(kissing_ok, component_ok)


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class Regular:
    certificate: AscentCertificate
    residual: float

    kind = "regular"


@dataclass(frozen=True)
class Balanced:
    certificate: BalanceCertificate
    graph: StressGraph

    kind = "balanced"

    @property
    def nontrivial(self) -> bool:
        return not self.graph.trivial


def classify(domain: BoxDomain, config, eps_act=None, margin_tol=MARGIN_TOL, balance_tol=None,
             weight_floor=WEIGHT_FLOOR):
    """Return :class:`Regular` or :class:`Balanced`; raise if the alternative is undecided.

    Raises
    ------
    AmbiguousClassificationError
        When neither or both certificates clear their thresholds.
    """
    balance_tol, eps_act = _default_tols(domain, balance_tol, eps_act)
    pts, aset, delta, ascent, balance = _solve_both(domain, config, eps_act, balance_tol, weight_floor)
    regular = delta > margin_tol
    balanced = balance.residual <= balance_tol
    if regular == balanced:
        raise AmbiguousClassificationError(delta, balance.residual)
    if regular:
        return Regular(ascent, balance.residual)
    return Balanced(balance, build_stress_graph(domain, pts, balance))
