"""Probabilistic roadmaps on ``Conf(n, r)`` for counting path components."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .exceptions import InsufficientDataError, ParameterError
from .geometry import BoxDomain, as_points
from .taut import tau_batch

RESOLUTION_REL = 1e-3
MAX_TRIES = 100_000
DEFAULT_K = 10
_BATCH = 512


def sample_configuration(domain: BoxDomain, n: int, r: float, rng, max_tries: int = MAX_TRIES):
    """Uniform rejection sample of ``Conf(n, r)``, or ``None`` after ``max_tries`` candidates."""
    if r < 0:
        raise ParameterError("radius must be nonnegative")
    lo = np.full(domain.d, r)
    hi = domain.upper - r
    if np.any(hi < lo):
        return None
    tried = 0
    while tried < max_tries:
        m = min(_BATCH, max_tries - tried)
        X = rng.uniform(lo, hi, size=(m, n, domain.d))
        ok = np.flatnonzero(tau_batch(domain, X) >= r)
        if ok.size:
            return X[ok[0]]
        tried += m
    return None


def _bisection_levels(m: int):
    """Interior sample indices ``1..m-1`` grouped coarse-to-fine, as recursive bisection visits them."""
    seen = np.zeros(m + 1, dtype=bool)
    seen[[0, m]] = True
    step = m
    while step > 1:
        step = max(1, step // 2)
        idx = np.arange(step, m, step)
        idx = idx[~seen[idx]]
        seen[idx] = True
        if idx.size:
            yield idx


def local_plan(domain: BoxDomain, c1, c2, r: float, resolution: Optional[float] = None) -> bool:
    """Whether the straight segment from ``c1`` to ``c2`` stays in ``Conf(n, r)``.

    The segment is probed coarse-to-fine until consecutive probes are at most
    ``resolution`` apart in max-norm; the first failing probe ends the search.
    """
    a = np.asarray(as_points(c1, domain.d), dtype=float)
    b = np.asarray(as_points(c2, domain.d), dtype=float)
    resolution = RESOLUTION_REL * domain.shortest_side() if resolution is None else resolution
    floor = r - domain.abs_tol
    span = float(np.abs(b - a).max())
    if tau_batch(domain, np.stack([a, b])).min() < floor:
        return False
    if span == 0.0:
        return True
    m = 1 << int(np.ceil(np.log2(max(1.0, span / resolution))))
    for idx in _bisection_levels(m):
        s = (idx / m)[:, None, None]
        if tau_batch(domain, a + s * (b - a)).min() < floor:
            return False
    return True


@dataclass
class Roadmap:
    nodes: np.ndarray  # (m, n, d)
    edges: list
    labels: np.ndarray
    r: float
    resolution: float
    candidates: list = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def to_dict(self, adjacency: bool = False) -> dict:
        out = {"r": self.r, "nodes": int(len(self.nodes)), "components": self.n_components,
               "edges": len(self.edges)}
        if adjacency:
            out["adjacency"] = [[int(i), int(j)] for i, j in self.edges]
            out["labels"] = self.labels.tolist()
        return out


def component_labels(num_nodes: int, edges) -> np.ndarray:
    if not edges:
        return np.arange(num_nodes)
    i, j = np.asarray(edges).T
    adj = coo_matrix((np.ones(len(i)), (i, j)), shape=(num_nodes, num_nodes))
    return connected_components(adj, directed=False)[1]


def _sample_nodes(domain, n, r, num_samples, seed, n_jobs, max_tries):
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(num_samples)]
    job = lambda rng: sample_configuration(domain, n, r, rng, max_tries)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            samples = list(pool.map(job, streams))
    else:
        samples = [job(rng) for rng in streams]
    return [s for s in samples if s is not None]


def build_roadmap(domain: BoxDomain, nodes, r: float, k: int = DEFAULT_K, resolution: Optional[float] = None,
                  n_jobs: int = 1) -> Roadmap:
    """k-nearest roadmap over given nodes; edges are straight segments that pass :func:`local_plan`."""
    nodes = np.asarray(nodes, dtype=float)
    resolution = RESOLUTION_REL * domain.shortest_side() if resolution is None else resolution
    m = len(nodes)
    flat = nodes.reshape(m, -1)
    kk = min(k + 1, m)
    _, nbrs = cKDTree(flat).query(flat, kk)
    nbrs = np.asarray(nbrs).reshape(m, kk)
    candidates = sorted({(min(i, int(j)), max(i, int(j))) for i in range(m) for j in nbrs[i] if j != i})
    check = lambda e: local_plan(domain, nodes[e[0]], nodes[e[1]], r, resolution)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            ok = list(pool.map(check, candidates))
    else:
        ok = [check(e) for e in candidates]
    edges = [e for e, good in zip(candidates, ok) if good]
    return Roadmap(nodes, edges, component_labels(m, edges), r, resolution, candidates)


def connectivity_experiment(domain: BoxDomain, n: int, r: float, num_samples: int, seed=0, k: int = DEFAULT_K,
                            resolution: Optional[float] = None, n_jobs: int = 1, max_tries: int = MAX_TRIES):
    """Sample a roadmap of ``Conf(n, r)`` and count its components; returns ``(count, roadmap)``.

    Raises
    ------
    InsufficientDataError
        If fewer than two nodes could be sampled.
    """
    if num_samples < 2:
        raise ParameterError("need at least two samples")
    nodes = _sample_nodes(domain, n, r, num_samples, seed, n_jobs, max_tries)
    if len(nodes) < 2:
        raise InsufficientDataError(f"only {len(nodes)} configurations could be sampled at r={r}")
    roadmap = build_roadmap(domain, np.stack(nodes), r, k, resolution, n_jobs)
    return roadmap.n_components, roadmap


def radius_sweep(domain: BoxDomain, n: int, radii, num_samples: int, seed=0, **kwargs):
    """Component counts for several radii, as ``[(r, count), ...]``."""
    return [(float(r), connectivity_experiment(domain, n, r, num_samples, seed, **kwargs)[0]) for r in radii]
