"""Chains across the shortest side and the cycles they carry just above ``r* = L/2n``.

Just above ``r*`` the chains of ``n`` mutually tangent balls pinned to the
centre of the lower face and touching the upper face form a sphere of
dimension ``nd - n - d``. The dual cell ``Sigma`` (``n - 1`` balls stacked
along the axis, one ball beside them) meets it transversally in one point,
and each chain can be contracted inside ``Conf(n, r)`` for ``r`` below
``r*``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import (DegenerateSampleError, GeodesicAmbiguityError, NonUniquenessError,
                         ParameterError)
from .geometry import BoxDomain, as_points
from .taut import tau

FIT_TOL_REL = 1e-10
SIGMA_TOL_REL = 1e-9
ANGLE_TOL = 1e-6
RANK_TOL = 1e-8


@dataclass(frozen=True)
class ChainSpec:
    """Which shortest axis the chain spans and which label sits at each slot."""

    axis: int = 0
    permutation: Optional[tuple] = None

    def order(self, n: int) -> tuple:
        perm = tuple(range(n)) if self.permutation is None else tuple(int(p) for p in self.permutation)
        if sorted(perm) != list(range(n)):
            raise ParameterError(f"{perm} is not a permutation of 0..{n - 1}")
        return perm

    def validate(self, domain: BoxDomain, n: int) -> tuple:
        if self.axis not in domain.shortest_axes():
            raise ParameterError(f"axis {self.axis} is not a shortest side of {domain.lengths}")
        return self.order(n)


def r_star(domain: BoxDomain, n: int) -> float:
    return domain.shortest_side() / (2 * n)


def chain_configuration(domain: BoxDomain, n: int, spec: ChainSpec = ChainSpec()):
    """Equally spaced chain along ``spec.axis``; returns ``(points, r_star)``.

    Slot ``k`` (0-based) sits at ``(2k + 1) L / 2n``; the label placed there
    is ``spec.permutation[k]``. Off-axis coordinates are at the box centre.
    """
    if n < 1:
        raise ParameterError("need at least one ball")
    perm = spec.validate(domain, n)
    L = domain.lengths[spec.axis]
    pts = np.tile(domain.center, (n, 1))
    for slot, label in enumerate(perm):
        pts[label, spec.axis] = (2 * slot + 1) * L / (2 * n)
    return pts, r_star(domain, n)


def chain_distance(domain: BoxDomain, config, axis: Optional[int] = None) -> float:
    """Euclidean distance from ``config`` to the nearest critical chain.

    Chains may sit at any off-axis position and in any label order, so the
    off-axis offset is fitted (it is the mean) and all orders are tried.
    """
    pts = as_points(config, domain.d)
    n = pts.shape[0]
    axes = domain.shortest_axes() if axis is None else (axis,)
    best = np.inf
    for ax in axes:
        L = domain.lengths[ax]
        slots = (2 * np.arange(n) + 1) * L / (2 * n)
        others = [m for m in range(domain.d) if m != ax]
        off = pts[:, others]
        lateral = float(((off - off.mean(axis=0)) ** 2).sum())
        # assignment along the axis: sorted order is optimal for 1-d matching
        order = np.argsort(pts[:, ax], kind="stable")
        along = float(((pts[order, ax] - slots) ** 2).sum())
        best = min(best, np.sqrt(lateral + along))
    return float(best)


# -- the sphere S_eps ----------------------------------------------------------

@dataclass(frozen=True)
class SphereSample:
    directions: np.ndarray  # (n-1, d) unit link vectors
    epsilon: float
    config: np.ndarray
    r_prime: float
    axis: int
    order: tuple

    @property
    def n(self) -> int:
        return self.config.shape[0]

    @property
    def d(self) -> int:
        return self.config.shape[1]


def _check_epsilon(domain: BoxDomain, n: int, epsilon: float) -> None:
    if n < 2:
        raise ParameterError("a chain needs at least two balls")
    bound = domain.shortest_side() / (2 * n * (n - 1))
    if not 0 < epsilon < bound:
        raise ParameterError(f"epsilon must lie in (0, {bound}) for n={n}")


def _pinned_start(domain: BoxDomain, axis: int, r_prime: float) -> np.ndarray:
    x1 = domain.center.copy()
    x1[axis] = r_prime
    return x1


def _assemble(x1, directions, r_prime, order):
    slots = np.vstack([x1, x1 + np.cumsum(2 * r_prime * directions, axis=0)])
    pts = np.empty_like(slots)
    pts[list(order)] = slots
    return pts


def _fit_axis_components(U: np.ndarray, axis: int, target: float, iters: int = 60):
    """Tilt each unit vector towards ``e_axis`` by a common shift ``s`` so their axis components sum to ``target``.

    Newton on the monotone scalar map ``s -> sum normalize(U + s e)[axis]``,
    safeguarded by bisection.
    """
    e = np.zeros(U.shape[1])
    e[axis] = 1.0

    def g(s):
        W = U + s * e
        norms = np.linalg.norm(W, axis=1)
        comp = W[:, axis] / norms
        # d/ds of w_a / |w| is (1 - comp^2) / |w|
        return comp.sum() - target, ((1.0 - comp ** 2) / norms).sum(), W / norms[:, None]

    lo, hi = -1e3, 1e3
    s = 0.0
    for _ in range(iters):
        val, der, W = g(s)
        if abs(val) < 1e-15 * max(1.0, abs(target)):
            return W
        if val > 0:
            hi = s
        else:
            lo = s
        step = s - val / der if der > 0 else 0.5 * (lo + hi)
        s = step if lo < step < hi else 0.5 * (lo + hi)
    val, _, W = g(s)
    if abs(val) > 1e-12:
        return None
    return W


def sample_S_epsilon(domain: BoxDomain, n: int, epsilon: float, seed=None, spec: ChainSpec = ChainSpec(),
                     max_retries: int = 1000) -> SphereSample:
    """Random point of ``S_eps``: a chain of radius ``r' = L/2n + eps`` balls touching both faces.

    Directions are drawn uniformly on the sphere, then tilted towards the
    spanned axis until the chain exactly reaches the far face; draws leaving
    ``Conf(n, r')`` are rejected.
    """
    _check_epsilon(domain, n, epsilon)
    order = spec.validate(domain, n)
    rng = np.random.default_rng(seed)
    L = domain.lengths[spec.axis]
    rp = L / (2 * n) + epsilon
    x1 = _pinned_start(domain, spec.axis, rp)
    target = (L - 2 * rp) / (2 * rp)
    fit_tol = FIT_TOL_REL * domain.shortest_side()
    for _ in range(max_retries):
        U = rng.standard_normal((n - 1, domain.d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        W = _fit_axis_components(U, spec.axis, target)
        if W is None:
            continue
        pts = _assemble(x1, W, rp, order)
        # the reach equation is met to rounding; snap the last slot onto the face plane
        pts[order[-1], spec.axis] = L - rp
        if not domain.contains(pts, slack=0.0) or tau(domain, pts) < rp - fit_tol:
            continue
        return SphereSample(W, float(epsilon), pts, rp, spec.axis, order)
    raise DegenerateSampleError(f"no valid S_eps sample after {max_retries} draws")


def chain_equations(domain: BoxDomain, sample_or_config, r_prime: float, axis: int, order: Sequence[int]):
    """Residuals and Jacobian of the equations cutting out ``S_eps``.

    Rows: pinned first ball (``d``), link lengths (``n - 1``), far-face contact (1).
    """
    pts = as_points(sample_or_config, domain.d)
    n, d = pts.shape
    L = domain.lengths[axis]
    x1 = _pinned_start(domain, axis, r_prime)
    res = np.zeros(d + n)
    J = np.zeros((d + n, n * d))
    first = order[0]
    res[:d] = pts[first] - x1
    J[:d, first * d:(first + 1) * d] = np.eye(d)
    for k in range(n - 1):
        a, b = order[k], order[k + 1]
        diff = pts[b] - pts[a]
        res[d + k] = diff @ diff - (2 * r_prime) ** 2
        J[d + k, b * d:(b + 1) * d] = 2 * diff
        J[d + k, a * d:(a + 1) * d] = -2 * diff
    last = order[-1]
    res[-1] = pts[last, axis] - (L - r_prime)
    J[-1, last * d + axis] = 1.0
    return res, J


def _numerical_rank(J: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(J, compute_uv=False)
    if s.size == 0:
        return 0
    return int((s > tol * max(1.0, s[0])).sum())


def tangent_rank(domain: BoxDomain, sample: SphereSample, strict: bool = False) -> int:
    """Dimension of the tangent space of ``S_eps`` at ``sample`` (``nd`` minus the Jacobian rank).

    With ``strict`` a rank-deficient Jacobian raises :class:`DegenerateSampleError`.
    """
    _, J = chain_equations(domain, sample.config, sample.r_prime, sample.axis, sample.order)
    rank = _numerical_rank(J)
    if strict and rank < J.shape[0]:
        raise DegenerateSampleError(f"Jacobian rank {rank} < {J.shape[0]} at sample")
    return sample.config.size - rank


# -- the cell Sigma ------------------------------------------------------------

def _sigma_axes(domain: BoxDomain, axis: int):
    """``(f1, f2, rest)``: the spanned axis, the next-shortest axis and the others."""
    rest = [m for m in domain.sorted_axes() if m != axis]
    if not rest:
        raise ParameterError("Sigma needs d >= 2")
    return axis, rest[0], rest[1:]


def sigma_membership(domain: BoxDomain, config, r: float, spec: ChainSpec = ChainSpec(),
                     gap_from_first: bool = False, tol: Optional[float] = None) -> bool:
    """Whether ``config`` lies in the cell ``Sigma``.

    The link inequalities run over consecutive slots from the second ball
    on; ``gap_from_first`` also imposes one between the first two balls.
    """
    pts = as_points(config, domain.d)
    n = pts.shape[0]
    order = spec.order(n)
    f1, f2, rest = _sigma_axes(domain, spec.axis)
    tol = SIGMA_TOL_REL * domain.shortest_side() if tol is None else tol
    L = domain.lengths[f1]
    P = pts[list(order)]
    if rest and np.any(np.abs(P[:, rest] - P[0, rest]) > tol):
        return False
    if n >= 2 and np.any(np.abs(P[1:, [f2]] - P[1, [f2]]) > tol):
        return False
    if P[0, f1] < r - tol or P[-1, f1] > L - r + tol:
        return False
    start = 0 if gap_from_first else 1
    for k in range(start, n - 1):
        if P[k + 1, f1] - P[k, f1] < 2 * r - tol:
            return False
    if n >= 2 and P[0, f2] > P[1, f2] + tol:
        return False
    return True


def sigma_equations(domain: BoxDomain, config, axis: int, order: Sequence[int]):
    """Residuals and Jacobian of the equalities spanning the affine hull of ``Sigma``."""
    pts = as_points(config, domain.d)
    n, d = pts.shape
    _, f2, rest = _sigma_axes(domain, axis)
    rows, res = [], []
    first, second = order[0], order[1]
    for k in order[1:]:
        for m in rest:
            row = np.zeros(n * d)
            row[k * d + m] = 1.0
            row[first * d + m] = -1.0
            rows.append(row)
            res.append(pts[k, m] - pts[first, m])
    for k in order[2:]:
        row = np.zeros(n * d)
        row[k * d + f2] = 1.0
        row[second * d + f2] = -1.0
        rows.append(row)
        res.append(pts[k, f2] - pts[second, f2])
    return np.asarray(res, dtype=float), np.asarray(rows, dtype=float).reshape(-1, n * d)


def _null_space(J: np.ndarray, dim: int) -> np.ndarray:
    if J.shape[0] == 0:
        return np.eye(dim)
    _, s, Vt = np.linalg.svd(J)
    rank = int((s > RANK_TOL * max(1.0, s[0] if s.size else 1.0)).sum())
    return Vt[rank:].T


@dataclass
class IntersectionWitness:
    config: np.ndarray
    rank: int
    span_rank: int
    roots: list
    r_prime: float


def intersection_witness(domain: BoxDomain, n: int, epsilon: float, spec: ChainSpec = ChainSpec(),
                         starts: int = 16, seed=0, r: Optional[float] = None) -> IntersectionWitness:
    """The single point of ``S_eps`` inside ``Sigma``, with transversality ranks.

    Damped Newton on the square system (chain equations plus the equalities
    of ``Sigma``) from ``starts`` perturbed straight chains. Roots outside
    ``Sigma`` (the mirror branch) are discarded; the rest must coincide.

    Returns
    -------
    IntersectionWitness
        ``rank`` is the rank of the stacked Jacobian and ``span_rank`` the
        rank of the two tangent spaces side by side; both are ``nd`` when the
        intersection is transversal.

    Raises
    ------
    NonUniquenessError
        If accepted roots disagree beyond ``1e-8``, or none is found.
    """
    _check_epsilon(domain, n, epsilon)
    order = spec.validate(domain, n)
    if domain.d < 2:
        raise ParameterError("Sigma needs d >= 2")
    L = domain.lengths[spec.axis]
    rp = L / (2 * n) + epsilon
    r = L / (2 * n) - epsilon if r is None else r
    _, f2, _ = _sigma_axes(domain, spec.axis)
    straight = np.tile(domain.center, (n, 1))
    straight[:, spec.axis] = np.linspace(rp, L - rp, n)
    rng = np.random.default_rng(seed)

    def system(flat):
        pts = flat.reshape(n, domain.d)
        r1, J1 = chain_equations(domain, pts, rp, spec.axis, order)
        r2, J2 = sigma_equations(domain, pts, spec.axis, order)
        return np.concatenate([r1, r2]), np.vstack([J1, J2])

    roots = []
    for _ in range(starts):
        P = np.empty_like(straight)
        P[list(order)] = straight
        P = P + rng.normal(scale=0.1 * rp, size=P.shape)
        x = P.reshape(-1)
        for _ in range(100):
            F, J = system(x)
            if np.linalg.norm(F) < 1e-14:
                break
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
            lam = 1.0
            while lam > 1e-6 and np.linalg.norm(system(x + lam * step)[0]) >= np.linalg.norm(F):
                lam *= 0.5
            x = x + lam * step
        F, _ = system(x)
        pts = x.reshape(n, domain.d)
        if np.linalg.norm(F) < 1e-12 and sigma_membership(domain, pts, r, spec):
            roots.append(pts)
    if not roots:
        raise NonUniquenessError("no multistart converged to a point of S_eps in Sigma")
    ref = roots[0]
    for other in roots[1:]:
        if np.abs(other - ref).max() > 1e-8:
            raise NonUniquenessError("multistart roots disagree")
    _, J = system(ref.reshape(-1))
    rank = _numerical_rank(J)
    dim = n * domain.d
    _, J_S = chain_equations(domain, ref, rp, spec.axis, order)
    _, J_Sigma = sigma_equations(domain, ref, spec.axis, order)
    span = np.hstack([_null_space(J_S, dim), _null_space(J_Sigma, dim)])
    return IntersectionWitness(ref, rank, _numerical_rank(span), roots, rp)


# -- contracting a chain -------------------------------------------------------

def _slerp(u: np.ndarray, e: np.ndarray, s: float) -> np.ndarray:
    cos = float(np.clip(u @ e, -1.0, 1.0))
    theta = np.arccos(cos)
    if theta < 1e-15:
        return u.copy()
    return (np.sin((1 - s) * theta) * u + np.sin(s * theta) * e) / np.sin(theta)


def retract_chain(sample: SphereSample, r: float, r_prime: Optional[float] = None, steps: int = 64,
                  angle_tol: float = ANGLE_TOL) -> list:
    """Contract a chain of ``S_eps`` to the straight chain, staying in ``Conf(n, r)``.

    Stage one shrinks every link from ``2 r'`` to ``2 r`` about the pinned
    first ball; stage two rotates each link onto the spanned axis along the
    short great-circle arc. Returns the ``2 * steps + 1`` configurations of
    the discretised path.

    Raises
    ------
    GeodesicAmbiguityError
        If a link points within ``angle_tol`` of straight down, where the
        rotation direction is undefined.
    """
    rp = sample.r_prime if r_prime is None else r_prime
    if not 0 < r <= rp:
        raise ParameterError("need 0 < r <= r'")
    e = np.zeros(sample.d)
    e[sample.axis] = 1.0
    U = sample.directions
    if np.any(U @ e < -1.0 + angle_tol):
        raise GeodesicAmbiguityError("a link points straight against the axis")
    x1 = sample.config[sample.order[0]]
    path = []
    for k in range(steps + 1):
        t = k / steps
        scale = ((1 - t) * rp + t * r) / rp
        path.append(_assemble(x1, U * scale, rp, sample.order))
    for k in range(1, steps + 1):
        s = k / steps
        W = np.vstack([_slerp(u, e, s) for u in U])
        path.append(_assemble(x1, W * (r / rp), rp, sample.order))
    return path


def permuted_specs(n: int, axis: int = 0):
    """Every label order of a chain along ``axis`` (the ``n!`` classes)."""
    for perm in itertools.permutations(range(n)):
        yield ChainSpec(axis, perm)
