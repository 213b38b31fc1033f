import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterchain import disentangle as dis


def test_cluster_point():
    r = dis.optimize_disentangling_angles(0.0)
    assert all(abs(t) < 1e-8 for t in r.angles.values())
    assert r.max_residual < 1e-12
    # four equally likely branches, two of them in class 0
    assert [r.probabilities[s] for s in (1, 0, -1)] == pytest.approx([0.25, 0.5, 0.25], abs=1e-12)


def test_ising_limit_suppresses_class_zero():
    r = dis.optimize_disentangling_angles(50.0)
    assert r.probabilities[0] < 1e-3
    assert r.probabilities[1] == pytest.approx(0.5, abs=1e-3)
    assert r.probabilities[-1] == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("j", [0.1, 0.5, 1.3, 2.0])
def test_optimized_residual_and_reflection(j):
    r = dis.optimize_disentangling_angles(j)
    assert not r.flagged
    assert r.max_residual < 1e-8
    assert r.reflection_gap < 1e-10
    cond = r.conditional_probabilities
    assert sum(cond.values()) == pytest.approx(1.0, abs=1e-12)


def test_angles_match_grid_search():
    j = 0.5
    r = dis.optimize_disentangling_angles(j)
    psi = dis.ground_state(j)
    grid = np.arange(-np.pi / 2, np.pi / 2, 1e-4)
    for s, (s1, s2) in ((s, dis._BRANCHES[s][0]) for s in dis.OUTCOME_CLASSES):
        d = np.abs([np.linalg.det(dis.end_matrix(psi, x, s1, x, s2)) for x in grid])
        near = grid[np.abs(grid - r.angles[s]) < 0.01]
        dn = d[np.abs(grid - r.angles[s]) < 0.01]
        assert abs(near[np.argmin(dn)] - r.angles[s]) <= 1e-4


def test_fixed_angle_residual_grows_with_j():
    w = [sum(dis.weighted_residual(j, 0.0).values()) for j in (0.0, 0.25, 0.5, 1.0)]
    assert w[0] == pytest.approx(0.0, abs=1e-12)
    assert all(x > 0 for x in w[1:])


@given(j=st.floats(0, 3), c=st.floats(0.01, 0.8))
def test_povm_is_valid(j, c):
    angles = {s: t for s, t in zip((1, 0, -1), (0.07 * j / (1 + j), 0.09 * j / (1 + j), -0.07 * j / (1 + j)))}
    p = dis.build_povm(angles, c)
    assert np.allclose(p.total(), np.eye(4), atol=1e-12)
    for e in p.elements.values():
        assert np.linalg.eigvalsh((e + e.T) / 2)[0] > -1e-10


def test_povm_cluster_failure_probability():
    psi = dis.ground_state(0.0)
    p = dis.build_povm({1: 0.0, 0: 0.0, -1: 0.0}, 0.5, psi)
    # Z-basis projectors sum to the identity, so E_X = (1 - c) * 1
    assert p.failure_probability == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(p.elements["EX"], 0.5 * np.eye(4))


def test_povm_rejects_excess_c():
    angles = {1: 0.3, 0: 0.0, -1: -0.3}
    cmax = dis.build_povm(angles, 0.1).c_max
    assert cmax < 1
    with pytest.raises(dis.PovmNotPositive):
        dis.build_povm(angles, min(1.0, cmax * 1.05))
    with pytest.raises(ValueError):
        dis.build_povm(angles, 0.0)


def test_maximal_c_minimizes_failure():
    res, best = dis.povm_for(0.7)
    _, fixed = dis.povm_for(0.7, 0.5)
    assert best.failure_probability <= fixed.failure_probability


def test_adaptive_scan_coarse():
    rep0 = dis.adaptive_scan(0.0, resolution=1e-2)
    assert rep0.projective_possible and rep0.adaptive_possible
    rep = dis.adaptive_scan(0.5, resolution=1e-2)
    assert not rep.projective_possible and not rep.adaptive_possible


def test_adaptive_scan_rejects_coarse_grid():
    with pytest.raises(ValueError):
        dis.adaptive_scan(0.5, resolution=0.05)


def test_chain_extension_is_approximate():
    p, ent = dis.chain_disentangle(8, 0.3, (1, 0, -1))
    assert 0 < p < 1
    # four-qubit angles leave a small but nonzero residue on longer chains
    assert 0 <= ent < 0.05
    _, exact = dis.chain_disentangle(4, 0.3, (1,))
    assert exact < 1e-8
