import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterchain import oracle
from clusterchain.params import ChainParams


def test_cluster_state_is_stabilized():
    n = 6
    psi = oracle.cluster_state_dense(n)
    for mu in range(n):
        k = {(mu - 1) % n: "Z", mu: "X", (mu + 1) % n: "Z"}
        assert oracle.expectation_dense(psi, k) == pytest.approx(1.0, abs=1e-12)


def test_cluster_ground_state():
    g = oracle.ground_state_dense(ChainParams(8))
    assert g.energy == pytest.approx(-8.0, abs=1e-10)
    assert g.gap == pytest.approx(2.0, abs=1e-10)
    overlap = abs(g.amplitudes @ oracle.cluster_state_dense(8))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_cz_chain_maps_plus_to_cluster():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    psi = oracle.apply_cz_chain(oracle.product_state_dense(plus, 5))
    assert np.allclose(psi, oracle.cluster_state_dense(5))


def test_dense_matches_sparse_operator():
    p = ChainParams(6, 0.4, 0.3, 0.2)
    h = oracle.hamiltonian_dense(p)
    v = np.random.default_rng(0).normal(size=h.shape[0])
    assert np.allclose(oracle.hamiltonian_operator(p) @ v, h @ v)
    assert np.allclose(h, h.T)


def test_pairs_of_bell_entropy():
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    assert oracle.entropy_dense(bell, [0]) == pytest.approx(1.0)


def test_size_limit():
    with pytest.raises(ValueError):
        oracle.ground_state_dense(ChainParams(40))


def test_enumeration_rejects_repeated_site():
    with pytest.raises(ValueError):
        oracle.enumerate_protocol(oracle.cluster_state_dense(4), [(0, 0.0), (0, 0.0)])


@given(
    j=st.floats(0, 2),
    bx=st.floats(0, 2),
    bz=st.floats(0, 1),
    angles=st.lists(st.floats(-np.pi, np.pi), min_size=3, max_size=3),
)
def test_branch_probabilities_sum_to_one(j, bx, bz, angles):
    psi = oracle.ground_state_dense(ChainParams(6, j, bx, bz)).amplitudes
    br = oracle.enumerate_protocol(psi, list(zip([0, 2, 4], angles)))
    assert br.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
    ok = br.probabilities > 1e-14
    assert np.allclose(np.linalg.norm(br.residuals[ok], axis=1), 1.0)


@given(j=st.floats(0, 2), bx=st.floats(0, 2), bz=st.floats(-1, 1))
def test_ground_state_is_eigenvector(j, bx, bz):
    p = ChainParams(6, j, bx, bz)
    g = oracle.ground_state_dense(p)
    h = oracle.hamiltonian_dense(p)
    assert np.linalg.norm(h @ g.amplitudes - g.energy * g.amplitudes) < 1e-8
    assert oracle.energy_dense(p, g.amplitudes) == pytest.approx(g.energy, abs=1e-9)
