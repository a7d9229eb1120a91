"""Configuration generators shared by the test modules."""

import numpy as np

from hardball import BoxDomain, chain_configuration, tau


def uniform(domain: BoxDomain, n: int, rng) -> np.ndarray:
    return rng.uniform(0.0, domain.upper, size=(n, domain.d))


def lattice(domain: BoxDomain, n: int, m: int, rng) -> np.ndarray:
    """``n`` distinct cell centres of the grid with ``m`` cells along the shortest side (many exact ties)."""
    L = domain.shortest_side()
    counts = [max(1, int(round(m * Li / L))) for Li in domain.lengths]
    cells = rng.choice(int(np.prod(counts)), size=n, replace=False)
    idx = np.stack(np.unravel_index(cells, counts), axis=1)
    return (idx + 0.5) * (np.asarray(domain.lengths) / np.asarray(counts))


def near_chain(domain: BoxDomain, n: int, scale: float, rng) -> np.ndarray:
    pts, _ = chain_configuration(domain, n)
    out = pts + scale * rng.standard_normal(pts.shape)
    return np.clip(out, 0.0, domain.upper)


def symmetric_slice(domain: BoxDomain, a: float, rng) -> np.ndarray:
    """Two balls at equal height along the shortest axis, with ``tau >= a``."""
    L = domain.shortest_side()
    while True:
        x1, x2 = np.sort(rng.uniform(a, L - a, size=2))
        y = rng.uniform(a, domain.lengths[1] - a)
        pts = np.array([[x1, y], [x2, y]])
        if tau(domain, pts) >= a:
            return pts


def mixed(domain: BoxDomain, n: int, rng) -> np.ndarray:
    """Uniform, lattice or near-chain, chosen at random."""
    kind = rng.integers(3)
    if kind == 0:
        return uniform(domain, n, rng)
    if kind == 1:
        return lattice(domain, n, int(rng.integers(n, 2 * n + 2)), rng)
    return near_chain(domain, n, 10.0 ** rng.uniform(-9, -2), rng)
