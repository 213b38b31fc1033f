import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterchain import locent as le
from clusterchain import mps, oracle
from clusterchain.params import ChainParams


def _exhaustive(j, n=10):
    psi = oracle.ground_state_dense(ChainParams(n, j)).amplitudes
    return le.exhaustive_localizable_entanglement(mps.from_dense(psi), le.ProtocolSpec(n))


def test_protocol_defaults():
    p = le.ProtocolSpec(60)
    assert (p.a, p.b, p.separation) == (0, 55, 55)
    z_left, z_right = p.z_sites()
    assert sorted(z_left) == [58, 59] and sorted(z_right) == [56, 57]
    entries = dict(p.plan().entries)
    assert len(entries) == 58
    assert entries[3] == pytest.approx(np.pi / 4) and entries[57] == 0.0


@pytest.mark.parametrize("kw", [dict(b=4), dict(b=9)])
def test_protocol_rejects_bad_endpoints(kw):
    with pytest.raises(ValueError):
        le.ProtocolSpec(10, 0, **kw)


def test_cluster_corrections_are_exact():
    est = _exhaustive(0.0)
    assert est.mean == pytest.approx(1.0, abs=1e-12)
    # every branch lands on the same pair up to sign
    ov = np.abs(est.corrected @ le.CLUSTER_PAIR)
    assert np.allclose(ov, 1.0, atol=1e-12)
    assert np.allclose(le.phi_angle(est.corrected * np.sign(est.corrected @ le.CLUSTER_PAIR)[:, None]), 0.0, atol=1e-12)


def test_record_and_vectorized_corrections_agree():
    n = 10
    psi = oracle.cluster_state_dense(n)
    proto = le.ProtocolSpec(n)
    batch = mps.enumerate_plan(mps.from_dense(psi), proto.plan())
    z, x = le._corrections(batch.outcomes, batch.sites, proto)
    for rec, zz, xx, res in zip(batch.records(), z, x, batch.residuals):
        c = le.pauli_correction(rec, proto)
        assert (c.z_power, c.x_power) == (zz, xx)
        assert np.allclose(c.apply(res), le.apply_corrections(res[None], np.array([zz]), np.array([xx]))[0])


def test_large_chain_sampling_at_cluster_point():
    est = le.estimate_localizable_entanglement(mps.cluster_mps(60), le.ProtocolSpec(60), 200, seed=1)
    assert tuple(est) == pytest.approx((1.0, 0.0), abs=1e-10)


def test_sampling_agrees_with_exhaustive():
    n = 10
    psi = oracle.ground_state_dense(ChainParams(n, 0.4)).amplitudes
    state, proto = mps.from_dense(psi), le.ProtocolSpec(n)
    exact = le.exhaustive_localizable_entanglement(state, proto)
    est = le.estimate_localizable_entanglement(state, proto, 4000, seed=2)
    assert abs(est.mean - exact.mean) < 4 * est.std_err + 1e-12


def test_concurrence_of_bell_and_product():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    prod = np.array([1, 1, 1, 1]) / 2
    assert le.concurrence(np.stack([bell, prod])) == pytest.approx([1.0, 0.0])


def test_tomogram_round_trip(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    t = le.TwoQubitTomogram.from_state(v)
    assert np.allclose(t.density(), np.outer(v, v.conj()))
    assert t.purity == pytest.approx(1.0)
    c = le.cluster_pair_tomogram()
    assert c["zx"] == pytest.approx(1.0) and c["xz"] == pytest.approx(1.0) and c["yy"] == pytest.approx(1.0)


@given(phi=st.floats(-np.pi / 2, np.pi / 2, exclude_min=True))
def test_phi_family(phi):
    pair = np.cos(phi) * le.C00 + np.sin(phi) * le.C11
    c = le.pair_correlations(pair)
    assert le.phi_family_violation(pair) < 1e-12
    assert c["zx"] == pytest.approx(np.cos(2 * phi), abs=1e-12)
    assert c["xx"] == pytest.approx(np.sin(2 * phi), abs=1e-12)
    assert le.phi_angle(pair[None])[0] == pytest.approx(phi, abs=1e-9) or abs(abs(phi) - np.pi / 2) < 1e-9


@given(v=st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_pair_correlations_match_tomogram(v):
    v = np.asarray(v)
    if np.linalg.norm(v) < 1e-3:
        return
    v = v / np.linalg.norm(v)
    c = le.pair_correlations(v)
    t = le.TwoQubitTomogram.from_state(v)
    for k in ("zx", "xz", "xx", "zz", "yy"):
        assert c[k] == pytest.approx(t[k], abs=1e-12)
    assert le.concurrence(v) == pytest.approx(abs(c["yy"]), abs=1e-12)


def test_characterize_uniform_family():
    phis = np.linspace(-0.3, 0.3, 41)
    pairs = np.cos(phis)[:, None] * le.C00 + np.sin(phis)[:, None] * le.C11
    ch = le.characterize_phi(pairs)
    assert ch.p_yy == pytest.approx(1.0)
    assert ch.phase == pytest.approx(0.0, abs=1e-12)
    assert ch.amplitude == pytest.approx(np.mean(np.cos(2 * phis)))
    assert ch.n_near_maximal == 41 and ch.n_excluded == 0


@pytest.mark.parametrize("j", [0.1, 0.2, 0.4])
def test_near_maximal_branches_are_close_to_family(j):
    est = _exhaustive(j)
    c = est.concurrences
    viol = le.phi_family_violation(est.corrected)
    near = c > 0.99
    assert near.any()
    assert np.all(viol[near] <= 1.5 * (1 - c[near]) + 1e-12)


def test_classification_on_synthetic_data():
    seps = np.arange(1, 40, 4)
    flat = le.classify_entanglement_length(seps, 0.9 + 0 * seps, np.full(seps.size, 1e-3))
    decay = le.classify_entanglement_length(seps, np.exp(-seps / 7.0), 1e-3 * np.exp(-seps / 7.0))
    assert flat.infinite
    assert not decay.infinite and decay.xi == pytest.approx(7.0, rel=1e-6)
    with pytest.raises(ValueError):
        le.classify_entanglement_length([1, 3], [0.5, 0.4], [0.1, 0.1])


def test_tilted_state_has_finite_length():
    st_ = mps.tilted_bz_mps(0.5, 30)
    seps = list(range(1, le.ProtocolSpec.max_separation(30) + 1, 2))
    s, e, err = le.entanglement_vs_separation(st_, seps, 500, seed=4)
    assert not le.classify_entanglement_length(s, e, err).infinite


def test_transition_fit_recovers_parameters(rng):
    j = np.linspace(0, 1, 21)
    xi = le.transition_curve(j, 12.0, 0.45) + rng.normal(scale=1e-3, size=j.size)
    fit = le.fit_transition(j, xi, np.full(j.size, 1e-3))
    assert fit.converged
    assert fit.k == pytest.approx(12.0, rel=0.05)
    assert fit.eta == pytest.approx(0.45, abs=0.01)


def test_guide_curve_endpoints():
    assert le.guide_curve(np.array([0.0, 1.0, 1.5])) == pytest.approx([1.0, 0.0, 0.0])
