"""Axis-aligned boxes, configurations of sphere centres and the membership test.

Boxes keep the axis order the user supplied; the sorted convention
``L_1 <= ... <= L_d`` is only ever realised through :meth:`BoxDomain.shortest_side`
and :meth:`BoxDomain.shortest_axes`, so face identifiers stay stable in I/O.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import DomainViolationError, ParameterError

#: membership tolerance, relative to the shortest side
ABS_TOL_REL = 1e-9
#: sides whose relative difference is below this count as equal
SIDE_EQ_REL = 1e-12


@dataclass(frozen=True, order=True)
class Face:
    """One of the ``2d`` faces of a box: ``side`` 0 is ``{f_axis = 0}``, 1 is ``{f_axis = L_axis}``."""

    axis: int
    side: int

    def __str__(self):
        return f"{self.axis}{'-' if self.side == 0 else '+'}"

    @classmethod
    def parse(cls, text: str) -> "Face":
        text = str(text).strip()
        if len(text) < 2 or text[-1] not in "-+" or not text[:-1].isdigit():
            raise ParameterError(f"malformed face id {text!r}")
        return cls(int(text[:-1]), 0 if text[-1] == "-" else 1)

    def inward_normal(self, d: int) -> np.ndarray:
        normal = np.zeros(d)
        normal[self.axis] = 1.0 if self.side == 0 else -1.0
        return normal


@dataclass(frozen=True)
class BoxDomain:
    """The box ``{0 <= f_m <= L_m}`` with side lengths as given."""

    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(x) for x in np.atleast_1d(np.asarray(self.lengths, dtype=float)))
        if len(lengths) < 1:
            raise ParameterError("a box needs at least one side")
        if not all(np.isfinite(x) and x > 0 for x in lengths):
            raise ParameterError(f"side lengths must be positive and finite, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.lengths)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * self.upper

    def shortest_side(self) -> float:
        return min(self.lengths)

    def shortest_axes(self) -> tuple:
        """Axes whose length equals the shortest side, in index order."""
        L = self.shortest_side()
        return tuple(m for m, x in enumerate(self.lengths) if x - L <= SIDE_EQ_REL * L)

    def sorted_axes(self) -> tuple:
        """Axis indices ordered by length (stable in index), i.e. ``f_1, f_2, ...``."""
        return tuple(sorted(range(self.d), key=lambda m: (self.lengths[m], m)))

    @property
    def abs_tol(self) -> float:
        return ABS_TOL_REL * self.shortest_side()

    def faces(self):
        return [Face(m, s) for m in range(self.d) for s in (0, 1)]

    def contains(self, points, slack: Optional[float] = None) -> bool:
        slack = self.abs_tol if slack is None else slack
        pts = np.asarray(points, dtype=float)
        return bool(np.all(pts >= -slack) and np.all(pts <= self.upper + slack))

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, data: dict) -> "BoxDomain":
        if "lengths" not in data:
            raise ParameterError("domain JSON needs a 'lengths' key")
        return cls(tuple(data["lengths"]))


@dataclass(frozen=True, eq=False)
class Configuration:
    """Labelled centres ``x_1 ... x_n`` as an ``(n, d)`` array, optionally with a radius."""

    points: np.ndarray
    radius: Optional[float] = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, ndmin=2)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ParameterError(f"points must be an (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("points must be finite")
        if self.radius is not None and not self.radius >= 0:
            raise ParameterError("radius must be nonnegative")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def flat(self) -> np.ndarray:
        return self.points.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.points, other.points)

    def to_dict(self) -> dict:
        data = {"points": self.points.tolist()}
        if self.radius is not None:
            data["radius"] = self.radius
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Configuration":
        if "points" not in data:
            raise ParameterError("configuration JSON needs a 'points' key")
        return cls(np.asarray(data["points"], dtype=float), data.get("radius"))


def as_points(config, d: Optional[int] = None) -> np.ndarray:
    """Return ``config`` as a float ``(n, d)`` array (accepts :class:`Configuration`)."""
    if isinstance(config, Configuration):
        pts = config.points
    else:
        pts = np.asarray(config, dtype=float)
        if pts.ndim == 1:
            if d is None:
                raise ParameterError("flat coordinate vector needs an explicit dimension")
            pts = pts.reshape(-1, d)
    if pts.ndim != 2:
        raise ParameterError(f"expected an (n, d) array, got shape {pts.shape}")
    if d is not None and pts.shape[1] != d:
        raise ParameterError(f"points have dimension {pts.shape[1]}, box has {d}")
    return pts


def check_inside(domain: BoxDomain, points) -> np.ndarray:
    pts = as_points(points, domain.d)
    if not domain.contains(pts):
        raise DomainViolationError("configuration has a point outside the box")
    return pts


def wall_distances(domain: BoxDomain, point) -> list:
    """Distances from ``point`` to each of the ``2d`` faces, as ``(Face, distance)`` pairs."""
    p = np.asarray(point, dtype=float).reshape(-1)
    if p.shape[0] != domain.d:
        raise ParameterError(f"point has dimension {p.shape[0]}, box has {domain.d}")
    if not domain.contains(p):
        raise DomainViolationError(f"point {p.tolist()} lies outside the box")
    out = []
    for m, L in enumerate(domain.lengths):
        out.append((Face(m, 0), float(p[m])))
        out.append((Face(m, 1), float(L - p[m])))
    return out


def min_gap(config) -> float:
    """Half the smallest pairwise distance; ``inf`` when there is no pair."""
    pts = as_points(config)
    if pts.shape[0] < 2:
        return float("inf")
    return 0.5 * float(pdist(pts).min())


def in_conf(domain: BoxDomain, config, r: float) -> bool:
    """Whether ``config`` lies in ``Conf(n, r)``, i.e. ``tau >= r - abs_tol``."""
    from .taut import tau

    pts = as_points(config, domain.d)
    if not domain.contains(pts):
        return False
    return tau(domain, pts) >= r - domain.abs_tol
