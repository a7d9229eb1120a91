"""The tautological function tau and its active constraints.

For a box the parameter family splits into ``C(n, 2)`` pair constraints
``f = |x_i - x_j| / 2`` and ``2 d n`` face constraints ``f = dist(x_i, face)``.
Indices are 0-based here and 1-based in serialized output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .exceptions import DegenerateGradientError, ParameterError
from .geometry import BoxDomain, Face, as_points, check_inside, min_gap

#: certificate band, relative to the shortest side
EPS_ACT_REL = 1e-9
#: looser band used by the flow to stop constraints chattering in and out
EPS_FLOW_REL = 1e-6


@dataclass(frozen=True)
class PairConstraint:
    i: int
    j: int
    value: float

    kind = "pair"

    def __post_init__(self):
        if not self.i < self.j:
            raise ParameterError("pair constraint needs i < j")

    def evaluate(self, points) -> float:
        pts = np.asarray(points, dtype=float)
        return 0.5 * float(np.linalg.norm(pts[self.j] - pts[self.i]))

    def to_dict(self) -> dict:
        return {"kind": "pair", "i": self.i + 1, "j": self.j + 1, "value": self.value}


@dataclass(frozen=True)
class WallConstraint:
    i: int
    face: Face
    foot: tuple
    value: float
    on_face: bool = False

    kind = "wall"

    def evaluate(self, points) -> float:
        """Signed distance to the face plane (negative once the point has crossed it)."""
        x = float(np.asarray(points, dtype=float)[self.i, self.face.axis])
        plane = self.foot[self.face.axis]
        return x - plane if self.face.side == 0 else plane - x

    def to_dict(self) -> dict:
        return {
            "kind": "wall",
            "i": self.i + 1,
            "face": str(self.face),
            "foot": list(self.foot),
            "value": self.value,
        }


Constraint = Union[PairConstraint, WallConstraint]


def constraint_from_dict(data: dict) -> Constraint:
    if data["kind"] == "pair":
        return PairConstraint(int(data["i"]) - 1, int(data["j"]) - 1, float(data["value"]))
    if data["kind"] == "wall":
        face = Face.parse(data["face"])
        foot = tuple(float(v) for v in data["foot"])
        return WallConstraint(int(data["i"]) - 1, face, foot, float(data["value"]), float(data["value"]) == 0.0)
    raise ParameterError(f"unknown constraint kind {data['kind']!r}")


@dataclass(frozen=True)
class ActiveSet:
    """Constraints within ``eps_act`` of the minimum ``tau``."""

    tau: float
    constraints: tuple
    eps_act: float

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "constraints": [c.to_dict() for c in self.constraints]}

    @classmethod
    def from_dict(cls, data: dict, eps_act: float = 0.0) -> "ActiveSet":
        return cls(float(data["tau"]), tuple(constraint_from_dict(c) for c in data["constraints"]), eps_act)


def _wall_values(domain: BoxDomain, pts: np.ndarray) -> np.ndarray:
    """``(n, d, 2)`` signed distances to the lower and upper faces."""
    return np.stack([pts, domain.upper - pts], axis=-1)


def tau(domain: BoxDomain, config) -> float:
    """Minimum of the pair half-distances and the wall distances."""
    pts = check_inside(domain, config)
    return min(min_gap(pts), float(_wall_values(domain, pts).min()))


def signed_tau(domain: BoxDomain, pts: np.ndarray) -> float:
    """``tau`` extended outside the box by signed wall distances; no domain check."""
    return min(min_gap(pts), float(_wall_values(domain, pts).min()))


def tau_batch(domain: BoxDomain, batch) -> np.ndarray:
    """Signed ``tau`` for an ``(m, n, d)`` stack of configurations."""
    X = np.asarray(batch, dtype=float)
    walls = np.minimum(X, domain.upper - X).min(axis=(1, 2))
    n = X.shape[1]
    if n < 2:
        return walls
    iu, ju = np.triu_indices(n, 1)
    gaps = 0.5 * np.linalg.norm(X[:, ju] - X[:, iu], axis=-1).min(axis=1)
    return np.minimum(walls, gaps)


def all_constraints(domain: BoxDomain, config) -> list:
    """Every pair and face constraint with its current value (the finite parameter family)."""
    pts = as_points(config, domain.d)
    n, d = pts.shape
    # ball by ball: walls of ball i, then pairs (i, j > i)
    out = []
    for i in range(n):
        for m in range(d):
            for side in (0, 1):
                face = Face(m, side)
                foot = pts[i].copy()
                foot[m] = 0.0 if side == 0 else domain.lengths[m]
                value = float(pts[i, m] if side == 0 else domain.lengths[m] - pts[i, m])
                out.append(WallConstraint(i, face, tuple(foot.tolist()), value, value == 0.0))
        for j in range(i + 1, n):
            out.append(PairConstraint(i, j, 0.5 * float(np.linalg.norm(pts[j] - pts[i]))))
    return out


def _order_key(c):
    # ball by ball; the walls of ball i come before its pairs (i, j)
    if isinstance(c, PairConstraint):
        return (c.i, 1, c.j, 0)
    return (c.i, 0, c.face.axis, c.face.side)


def active_set(domain: BoxDomain, config, eps_act: Optional[float] = None) -> ActiveSet:
    """All constraints whose value is at most ``tau + eps_act``."""
    pts = check_inside(domain, config)
    if eps_act is None:
        eps_act = EPS_ACT_REL * domain.shortest_side()
    if not eps_act > 0:
        raise ParameterError("eps_act must be positive")
    t = tau(domain, pts)
    n, d = pts.shape
    out = []
    if n >= 2:
        iu, ju = np.triu_indices(n, 1)
        half = 0.5 * np.linalg.norm(pts[ju] - pts[iu], axis=1)
        for k in np.flatnonzero(half <= t + eps_act):
            out.append(PairConstraint(int(iu[k]), int(ju[k]), float(half[k])))
    walls = _wall_values(domain, pts)
    for i, m, side in zip(*np.nonzero(walls <= t + eps_act)):
        foot = pts[i].copy()
        foot[m] = 0.0 if side == 0 else domain.lengths[m]
        value = float(walls[i, m, side])
        out.append(WallConstraint(int(i), Face(int(m), int(side)), tuple(foot.tolist()), value, value <= 0.0))
    out.sort(key=_order_key)
    return ActiveSet(t, tuple(out), eps_act)


def constraint_gradient(constraint: Constraint, config) -> np.ndarray:
    """Gradient of one constraint as a flat ``n * d`` vector.

    Pair ``(i, j)`` contributes ``-u/2`` at slot ``i`` and ``+u/2`` at slot ``j``
    with ``u`` the unit vector from ``x_i`` to ``x_j``. A face contributes its
    inward normal at slot ``i``; on the face itself this is the one-sided
    (continuously extended) gradient.
    """
    pts = as_points(config)
    n, d = pts.shape
    g = np.zeros((n, d))
    if isinstance(constraint, PairConstraint):
        diff = pts[constraint.j] - pts[constraint.i]
        dist = np.linalg.norm(diff)
        if dist == 0.0:
            raise DegenerateGradientError(f"points {constraint.i + 1} and {constraint.j + 1} coincide")
        u = diff / dist
        g[constraint.i] = -0.5 * u
        g[constraint.j] = 0.5 * u
    else:
        g[constraint.i] = constraint.face.inward_normal(d)
    return g.reshape(-1)


def gradient_matrix(constraints, config) -> np.ndarray:
    """Stack of constraint gradients, one row per constraint."""
    pts = as_points(config)
    if not len(constraints):
        return np.zeros((0, pts.size))
    return np.vstack([constraint_gradient(c, pts) for c in constraints])
