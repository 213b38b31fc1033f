import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterchain import mps, oracle
from clusterchain.params import ChainParams


def _plan(n, angles):
    return mps.MeasurementPlan(tuple((k, a) for k, a in zip(range(1, n - 1), angles)))


def test_cluster_mps_matches_dense():
    psi = mps.cluster_mps(8).to_dense()
    assert abs(psi @ oracle.cluster_state_dense(8)) == pytest.approx(1.0, abs=1e-12)


def test_cluster_expectations_at_large_n():
    st_ = mps.cluster_mps(200)
    assert mps.expectation(st_, {0: "Z", 1: "X", 2: "Z"}) == pytest.approx(1.0, abs=1e-12)
    assert mps.expectation(st_, {5: "X"}) == pytest.approx(0.0, abs=1e-12)


def test_tilted_state_is_ground_state():
    n = 8
    p = ChainParams(n, b_z=0.5)
    psi = mps.tilted_bz_mps(0.5, n).to_dense()
    ref = oracle.ground_state_dense(p)
    assert abs(psi @ ref.amplitudes) == pytest.approx(1.0, abs=1e-10)


def test_optimal_angle_of_cluster_is_x():
    assert mps.optimal_measurement_angle(mps.cluster_mps(20)) == pytest.approx(np.pi / 4, abs=1e-3)


def test_det_weight_closed_form():
    # for the cluster tensors the weight is |sin 2 xi|
    st_ = mps.cluster_mps(10)
    for xi in np.linspace(0, np.pi, 7):
        assert mps.det_weight(st_, xi) == pytest.approx(abs(np.sin(2 * xi)), abs=1e-12)


def test_canonical_forms(rng):
    st_ = mps.random_open_mps(7, 4, rng)
    left = mps.left_canonicalize(st_)
    right = mps.right_canonicalize(st_)
    assert mps.is_left_canonical(left) and mps.is_right_canonical(right)
    ref = st_.to_dense() / np.linalg.norm(st_.to_dense())
    for s in (left, right):
        v = s.to_dense()
        assert abs(v @ ref) / np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_from_dense_round_trip(rng):
    psi = rng.normal(size=2**7)
    psi /= np.linalg.norm(psi)
    assert np.allclose(mps.from_dense(psi).to_dense(), psi)


def test_json_round_trip(tmp_path):
    st_ = mps.tilted_bz_mps(0.3, 12)
    st_.save(tmp_path / "s.json")
    back = mps.MatrixProductState.load(tmp_path / "s.json")
    assert all(np.array_equal(a, b) for a, b in zip(st_.site_tensors(), back.site_tensors()))


def test_impossible_outcome():
    # Z-measurement never yields outcome 1 on |0...0>
    zero = np.zeros(2**4)
    zero[0] = 1.0
    with pytest.raises(mps.ImpossibleOutcome):
        mps.measure_site(mps.from_dense(zero), 1, 0.0, 1)


def test_plan_rejects_repeat():
    with pytest.raises(ValueError):
        mps.MeasurementPlan(((1, 0.0), (1, 0.3)))


@given(j=st.floats(0, 1.5), bz=st.floats(0, 0.8), angles=st.lists(st.floats(0, np.pi), min_size=6, max_size=6))
def test_enumeration_matches_oracle(j, bz, angles):
    n = 8
    psi = oracle.ground_state_dense(ChainParams(n, j, 0.2, bz)).amplitudes
    plan = _plan(n, angles)
    got = mps.enumerate_plan(mps.from_dense(psi), plan)
    ref = oracle.enumerate_protocol(psi, list(plan.entries))
    assert np.allclose(got.probabilities, ref.probabilities, atol=1e-12)
    ok = ref.probabilities > 1e-10
    # residuals agree up to a global sign per branch
    ov = np.abs(np.sum(got.residuals[ok] * ref.residuals[ok], axis=1))
    assert np.allclose(ov, 1.0, atol=1e-8)


@given(angle=st.floats(0, np.pi), site=st.integers(0, 5), outcome=st.integers(0, 1))
def test_measure_site_probability(angle, site, outcome):
    psi = oracle.ground_state_dense(ChainParams(6, 0.3, 0.4)).amplitudes
    br = oracle.enumerate_protocol(psi, [(site, angle)])
    p = br.probabilities[outcome]
    if p < 1e-10:
        return
    _, prob = mps.measure_site(mps.from_dense(psi), site, angle, outcome)
    assert prob == pytest.approx(p, abs=1e-12)


def test_sampling_is_seeded_and_unbiased():
    n = 10
    st_ = mps.tilted_bz_mps(0.4, n)
    plan = _plan(n, [np.pi / 4] * (n - 2))
    a = mps.sample_plan_batch(st_, plan, 4000, 5)
    b = mps.sample_plan_batch(st_, plan, 4000, 5)
    assert np.array_equal(a.outcomes, b.outcomes)
    exact = mps.enumerate_plan(st_, plan)
    # frequency of the first outcome bit
    p1 = exact.probabilities @ exact.outcomes[:, 0]
    freq = a.outcomes[:, 0].mean()
    assert abs(freq - p1) < 4 * np.sqrt(p1 * (1 - p1) / 4000)
    # sampled probabilities equal the exact ones of the same branch
    idx = a.outcomes @ (1 << np.arange(n - 3, -1, -1))
    assert np.allclose(a.probabilities, exact.probabilities[idx])
