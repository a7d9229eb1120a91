import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardball import (BoxDomain, ChainSpec, chain_configuration, chain_distance, classify, in_conf,
                      intersection_witness, r_star, retract_chain, sample_S_epsilon, sigma_membership,
                      tangent_rank, tau)
from hardball.exceptions import DegenerateSampleError, GeodesicAmbiguityError, ParameterError
from hardball.witness import SphereSample, permuted_specs


def test_chain_box12_n2(box12):
    pts, rs = chain_configuration(box12, 2)
    assert pts.tolist() == [[0.25, 1.0], [0.75, 1.0]]
    assert rs == 0.25


def test_chain_single_ball(unit):
    pts, rs = chain_configuration(unit, 1)
    assert pts.tolist() == [[0.5, 0.5]] and rs == 0.5


def test_chain_box12_n3(box12):
    pts, rs = chain_configuration(box12, 3)
    assert pts[:, 0] == pytest.approx([1 / 6, 1 / 2, 5 / 6], abs=1e-15)
    assert rs == 1 / 6


def test_chain_rejects_long_axis(box12):
    with pytest.raises(ParameterError):
        chain_configuration(box12, 2, ChainSpec(axis=1))


@pytest.mark.parametrize("lengths", [(1.0, 2.0), (1.0, 1.0), (1.0, 1.0, 2.0), (2.0, 1.0)])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chain_is_balanced_with_equal_pair_weights(lengths, n):
    box = BoxDomain(lengths)
    axis = box.shortest_axes()[0]
    pts, rs = chain_configuration(box, n, ChainSpec(axis))
    assert rs == box.shortest_side() / (2 * n)
    res = classify(box, pts)
    assert res.kind == "balanced" and res.nontrivial
    pair_w = [w for c, w in zip(res.certificate.constraints, res.certificate.weights) if hasattr(c, "j")]
    if pair_w:
        assert max(pair_w) - min(pair_w) <= 1e-12
    assert chain_distance(box, pts) <= 1e-12


def test_permutation_equivariance(box12):
    base, _ = chain_configuration(box12, 3)
    for spec in permuted_specs(3):
        pts, _ = chain_configuration(box12, 3, spec)
        for slot, label in enumerate(spec.permutation):
            assert np.array_equal(pts[label], base[slot])
    assert len(list(permuted_specs(3))) == 6


def test_S_eps_two_solutions(box12):
    seen = set()
    for seed in range(20):
        s = sample_S_epsilon(box12, 2, 0.01, seed=seed)
        assert s.config[0] == pytest.approx([0.26, 1.0], abs=1e-12)
        x2 = tuple(np.round(s.config[1], 8))
        assert x2 in {(0.74, 1.2), (0.74, 0.8)}
        seen.add(x2)
    assert len(seen) == 2


@pytest.mark.parametrize("eps", [0.0, -0.01, 0.25])
def test_S_eps_epsilon_range(box12, eps):
    with pytest.raises(ParameterError):
        sample_S_epsilon(box12, 2, eps, seed=0)


@pytest.mark.parametrize("n, lengths, want", [(2, (1.0, 2.0), 0), (3, (1.0, 2.0), 1), (2, (1.0, 1.0, 2.0), 1)])
def test_tangent_rank_examples(n, lengths, want):
    box = BoxDomain(lengths)
    assert tangent_rank(box, sample_S_epsilon(box, n, 0.01, seed=3)) == want


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, (1.0, 2.0)), (3, (1.0, 2.0)), (4, (1.0, 2.0)), (3, (1.0, 1.0, 2.0))]),
       st.floats(0.05, 0.3), st.integers(0, 2 ** 32 - 1))
def test_S_eps_sample_invariants(case, frac, seed):
    n, lengths = case
    box = BoxDomain(lengths)
    L = box.shortest_side()
    eps = frac * L / (2 * n * (n - 1))
    s = sample_S_epsilon(box, n, eps, seed=seed)
    rp = L / (2 * n) + eps
    fit = 1e-10 * L
    assert s.r_prime == pytest.approx(rp, rel=1e-15)
    assert np.allclose(np.linalg.norm(s.directions, axis=1), 1.0, atol=1e-12)
    chain = s.config[list(s.order)]
    gaps = np.linalg.norm(np.diff(chain, axis=0), axis=1)
    assert np.all(np.abs(gaps - 2 * rp) <= fit)
    assert abs(chain[0, s.axis] - rp) <= fit
    assert abs(chain[-1, s.axis] - (L - rp)) <= fit
    assert in_conf(box, s.config, rp)


def test_S_eps_wide_epsilon_can_leave_the_box(box12):
    # n = 2, eps = 0.125: both solutions put x2 within r' of a long-side face
    with pytest.raises(DegenerateSampleError):
        sample_S_epsilon(box12, 2, 0.125, seed=0, max_retries=50)


def test_sigma_examples(box12):
    assert sigma_membership(box12, [[0.26, 1.0], [0.74, 1.2]], 0.24)
    assert not sigma_membership(box12, [[0.26, 1.0], [0.74, 0.8]], 0.24)



def test_sigma_link_ordering(box12):
    # links are constrained from the second ball on
    assert not sigma_membership(box12, [[0.2, 1.0], [0.8, 1.2], [0.4, 1.2]], 0.15)
    assert sigma_membership(box12, [[0.2, 1.0], [0.4, 1.2], [0.8, 1.2]], 0.15)
    # the first link only with gap_from_first
    swapped = [[0.74, 1.0], [0.26, 1.2]]
    assert sigma_membership(box12, swapped, 0.24)
    assert not sigma_membership(box12, swapped, 0.24, gap_from_first=True)


def test_sigma_requires_common_offaxis_coordinates():
    box = BoxDomain((1.0, 1.0, 2.0))
    assert sigma_membership(box, [[0.3, 0.5, 1.0], [0.8, 0.6, 1.0]], 0.2)
    assert not sigma_membership(box, [[0.3, 0.5, 1.0], [0.8, 0.6, 1.1]], 0.2)


def test_intersection_n2(box12):
    w = intersection_witness(box12, 2, 0.01)
    assert w.config == pytest.approx(np.array([[0.26, 1.0], [0.74, 1.2]]), abs=1e-8)
    assert w.rank == 4


def test_intersection_n3(box12):
    w = intersection_witness(box12, 3, 0.02)
    assert w.rank == 6
    assert sigma_membership(box12, w.config, r_star(box12, 3) - 0.02)
    # every multistart root agrees
    assert all(np.abs(root - w.config).max() <= 1e-8 for root in w.roots)


def test_intersection_needs_two_balls(box12):
    with pytest.raises(ParameterError):
        intersection_witness(box12, 1, 0.01)


def test_retract_chain_n2_endpoint(box12):
    s = [sample_S_epsilon(box12, 2, 0.01, seed=k) for k in range(10)]
    s = next(x for x in s if x.config[1, 1] > 1.0)
    path = retract_chain(s, 0.24)
    assert len(path) == 129
    assert path[0] == pytest.approx(s.config, abs=1e-12)
    assert path[-1] == pytest.approx(np.array([[0.26, 1.0], [0.74, 1.0]]), abs=1e-12)


def test_retract_straight_chain_stage2_constant(box12):
    pts = np.array([[0.26, 1.0], [0.78, 1.0]])
    s = SphereSample(np.array([[1.0, 0.0]]), 0.01, pts, 0.26, 0, (0, 1))
    path = retract_chain(s, 0.24, steps=8)
    assert all(np.array_equal(p, path[8]) for p in path[8:])


def test_retract_downward_link_is_ambiguous(box12):
    s = SphereSample(np.array([[-1.0, 0.0]]), 0.01, np.array([[0.78, 1.0], [0.26, 1.0]]), 0.26, 0, (0, 1))
    with pytest.raises(GeodesicAmbiguityError):
        retract_chain(s, 0.24)


@pytest.mark.parametrize("n, lengths", [(3, (1.0, 2.0)), (4, (1.0, 2.0)), (3, (1.0, 1.0, 2.0))])
def test_retract_chain_stays_in_conf(n, lengths):
    box = BoxDomain(lengths)
    eps = 0.5 * box.shortest_side() / (2 * n * (n - 1))
    r = r_star(box, n) - eps
    for seed in range(25):
        for p in retract_chain(sample_S_epsilon(box, n, eps, seed=seed), r, steps=32):
            assert tau(box, p) >= r - 1e-9


def test_chain_distance_detects_offset(box12):
    pts, _ = chain_configuration(box12, 2)
    bumped = pts + np.array([[0.0, 0.0], [0.01, 0.0]])
    assert chain_distance(box12, bumped) == pytest.approx(0.01, rel=1e-6)
    # any off-axis position along the long side is also a chain
    assert chain_distance(box12, pts + np.array([0.0, 0.3])) <= 1e-12
