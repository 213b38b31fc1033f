"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (collected in the terminal
summary) and then asserts the same condition, so a failing criterion
shows up both in the summary and as a failed test.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from clusterchain import disentangle as dis
from clusterchain import ff_exact as ff
from clusterchain import locent as le
from clusterchain import mps, oracle, vmps
from clusterchain.params import ChainParams

STRINGS = ("zx", "xz", "yy")


def test_criterion_1_cluster_point(acceptance):
    n = 200
    t0 = time.perf_counter()
    p = ChainParams(n)
    g = ff.ground_state(p)
    values = {
        "energy": (g.energy, -n),
        "gap": (ff.excitation_gap(p), 2.0),
        "S1": (ff.block_entropy(g, 0, 0), 1.0),
        "S2": (ff.block_entropy(g, 0, 1), 2.0),
    }
    for pat in STRINGS:
        values[pat] = (ff.string_correlator(g, ff.StringSpec.full_chain(pat, n)), 1.0)
    elapsed = time.perf_counter() - t0
    el = le.estimate_localizable_entanglement(mps.cluster_mps(n), le.ProtocolSpec(n), 2000, seed=0)
    values["E_L"] = (el.mean, 1.0)
    dev = max(abs(a - b) for a, b in values.values())
    ok = dev < 1e-8 and elapsed < 1.0
    acceptance(1, ok, f"max deviation {dev:.1e}, free-fermion time {elapsed:.3f} s")
    assert ok


def test_criterion_2_oracle_equivalence(acceptance):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for n in (4, 6, 8, 10):
        for j, bx in rng.uniform(0, 2, size=(20, 2)):
            p = ChainParams(n, float(j), float(bx))
            g = ff.ground_state(p)
            ref = oracle.ground_state_dense(p)
            psi = ref.amplitudes
            devs = [
                abs(g.energy - ref.energy),
                abs(ff.local_x_expectation(g, 0) - oracle.expectation_dense(psi, {0: "X"})),
                abs(ff.block_entropy(g, 0, 1) - oracle.entropy_dense(psi, [0, 1])),
            ]
            for pat in STRINGS:
                ops = ff.StringSpec.full_chain(pat, n).operators(n)
                devs.append(abs(ff.pauli_expectation(g, ops) - oracle.expectation_dense(psi, ops)))
            if max(devs) > worst:
                worst, where = max(devs), (n, round(float(j), 3), round(float(bx), 3))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 300
    acceptance(2, ok, f"max deviation {worst:.1e} at (N, J, B_x) = {where}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_string_size_dependence(acceptance):
    t0 = time.perf_counter()
    js = np.round(np.arange(0.0, 1.0, 0.05), 2)
    diffs = []
    for j in js:
        yy = [ff.string_correlator(ff.ground_state(ChainParams(n, j)), ff.StringSpec.full_chain("yy", n)) for n in (100, 200)]
        diffs.append(abs(yy[0] - yy[1]))
    diffs = np.array(diffs)
    xz = [ff.string_correlator(ff.ground_state(ChainParams(n, 0.5)), ff.StringSpec.full_chain("xz", n)) for n in (100, 200)]
    ratio = xz[0] / xz[1]
    elapsed = time.perf_counter() - t0
    bad = js[diffs >= 1e-4]
    ok = bad.size == 0 and ratio > 1.5 and elapsed < 10
    acceptance(
        3,
        ok,
        f"max |yy(100) - yy(200)| = {diffs.max():.1e} (>= 1e-4 at J = {[float(x) for x in bad]}), "
        f"xz(100)/xz(200) at J=0.5 = {ratio:.2f}, {elapsed:.1f} s",
    )
    assert ok


def test_criterion_4_det_weight_closed_form(acceptance):
    grid = np.arange(0.0, np.pi, 1e-3)
    dev, off = 0.0, 0.0
    for theta in (0.0, np.pi / 16, np.pi / 8):
        st = mps.tilted_mps(theta, 10)
        w = np.array([mps.det_weight(st, x) for x in grid])
        dev = max(dev, float(np.max(np.abs(w - np.abs(np.sin(2 * grid) * np.cos(2 * theta))))))
        off = max(off, abs(mps.optimal_measurement_angle(st) - np.pi / 4))
    ok = dev < 1e-10 and off <= 1e-3
    acceptance(4, ok, f"max closed-form deviation {dev:.1e}, |argmax - pi/4| = {off:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_5_vmps_fidelity(acceptance):
    n = 200
    cfg = vmps.VmpsConfig(bond_dim=8, n_sweeps=6, n_restarts=40, rng_seed=5)
    t0 = time.perf_counter()
    rows = []
    for bx in np.round(np.arange(0.0, 2.0001, 0.2), 1):
        p = ChainParams(n, 0.5, float(bx))
        best = vmps.best_of_restarts(p, cfg)
        exact = ff.block_entropy(ff.ground_state(p), 0, 1)
        rows.append((float(bx), best.s2, exact))
        print(f"  B_x={bx:.1f}  S2 vmps={best.s2:.6f}  exact={exact:.6f}  diff={best.s2 - exact:+.2e}")
    elapsed = time.perf_counter() - t0
    deep = [abs(s - e) for bx, s, e in rows if bx in (0.0, 0.2, 1.8, 2.0)]
    excess = [(bx, s - e) for bx, s, e in rows if s - e > 1e-6]
    ok = max(deep) < 0.05 and not excess and elapsed < 1800
    acceptance(
        5,
        ok,
        f"deep-phase max |dS2| = {max(deep):.1e}; excess above exact > 1e-6 at "
        f"{[(b, f'{d:.1e}') for b, d in excess]}; {elapsed / 60:.1f} min",
    )
    assert ok


@pytest.mark.slow
def test_criterion_6_localizable_transition(acceptance):
    t0 = time.perf_counter()
    n = 60
    cfg = vmps.VmpsConfig(bond_dim=8, n_sweeps=6, n_restarts=4, rng_seed=6)
    seps = [5, 15, 25, 35, 45, 55]
    off_guide, finite = [], []
    for j in (0.0, 0.2, 0.4, 0.6, 0.8):
        best = vmps.best_of_restarts(ChainParams(n, j), cfg)
        est = le.estimate_localizable_entanglement(best.state, le.ProtocolSpec(n), 2000, seed=int(100 * j))
        guide = float(le.guide_curve(j))
        z = abs(est.mean - guide) / max(est.std_err, 1e-300)
        if abs(est.mean - guide) > 3 * est.std_err:
            off_guide.append((j, round(z, 1)))
        s, e, err = le.entanglement_vs_separation(best.state, seps, 2000, seed=int(10 * j) + 1)
        length = le.classify_entanglement_length(s, e, err)
        if not length.infinite:
            finite.append(j)
        print(f"  J={j:.1f}  E_L={est.mean:.4f} +- {est.std_err:.4f}  guide={guide:.4f}  length={length.kind}")
    xis = []
    for m in (20, 40, 60):
        st = mps.tilted_bz_mps(0.5, m)
        s = list(range(1, le.ProtocolSpec.max_separation(m) + 1, 2))
        s, e, err = le.entanglement_vs_separation(st, s, 2000, seed=m)
        length = le.classify_entanglement_length(s, e, err)
        xis.append(length.xi if not length.infinite else np.inf)
    xis = np.array(xis)
    stable = bool(np.all(np.isfinite(xis)) and np.all(np.abs(xis / xis.mean() - 1) <= 0.2))
    elapsed = time.perf_counter() - t0
    ok = not off_guide and not finite and stable and elapsed < 7200
    acceptance(
        6,
        ok,
        f"outside 3 sigma of guide at (J, z) = {off_guide}; finite length at J = {finite}; "
        f"tilted xi_E = {np.round(xis, 2).tolist()}; {elapsed / 60:.1f} min",
    )
    assert ok


def _exhaustive(j, n=10):
    psi = oracle.ground_state_dense(ChainParams(n, j)).amplitudes
    return le.exhaustive_localizable_entanglement(mps.from_dense(psi), le.ProtocolSpec(n))


def _transition_eta(n, js, seed):
    cfg = vmps.VmpsConfig(bond_dim=8, n_sweeps=4, n_restarts=2, rng_seed=seed)
    xi = []
    for j in js:
        best = vmps.best_of_restarts(ChainParams(n, float(j)), cfg)
        est = le.estimate_localizable_entanglement(best.state, le.ProtocolSpec(n), 1000, seed=seed)
        xi.append(le.characterize_phi(est.corrected).phase)
    return le.fit_transition(js, xi).eta


def test_criterion_7_corrected_pair_structure(acceptance):
    worst = {}
    for j in (0.2, 0.4):
        est = _exhaustive(j)
        c = le.pair_correlations(est.corrected)
        near = est.concurrences > 0.99
        worst[j] = {
            "yy": float(np.max(np.abs(c["yy"][near] - 1))),
            "zx-xz": float(np.max(np.abs(c["zx"][near] - c["xz"][near]))),
            "xx+zz": float(np.max(np.abs(c["xx"][near] + c["zz"][near]))),
            "circle": float(np.max(np.abs(c["zx"][near] ** 2 + c["xx"][near] ** 2 - 1))),
            "branches": int(near.sum()),
        }
    phi0 = float(np.max(np.abs(le.phi_angle(_exhaustive(0.0).corrected))))
    dev = max(max(v for k, v in w.items() if k != "branches") for w in worst.values())
    js = np.round(np.arange(0.1, 0.91, 0.1), 1)
    etas = [_transition_eta(n, js, 7) for n in (20, 50, 100)]
    decreasing = bool(np.all(np.diff(etas) < 0))
    print(f"  stretch (informational): eta(N=20, 50, 100) = {np.round(etas, 3).tolist()}, decreasing = {decreasing}")
    ok = dev < 1e-8 and phi0 == 0.0
    detail = "; ".join(
        f"J={j}: {w['branches']} branches, yy {w['yy']:.1e}, zx-xz {w['zx-xz']:.1e}, xx+zz {w['xx+zz']:.1e}, "
        f"circle {w['circle']:.1e}"
        for j, w in worst.items()
    )
    acceptance(7, ok, f"{detail}; J=0 max |Phi| = {phi0:.1e}; eta decreasing (info) = {decreasing}")
    assert ok


def test_criterion_8_disentangler(acceptance):
    t0 = time.perf_counter()
    r0 = dis.optimize_disentangling_angles(0.0)
    psi0 = dis.ground_state(0.0)
    branch_p = [
        float(np.sum(dis.end_matrix(psi0, r0.angles[s], a, r0.angles[s], b) ** 2))
        for s in dis.OUTCOME_CLASSES
        for a, b in dis._BRANCHES[s]
    ]
    ok0 = (
        max(abs(t) for t in r0.angles.values()) < 1e-8
        and r0.max_residual < 1e-8
        and np.allclose(branch_p, 0.25, atol=1e-12)
    )
    resid, psum_dev, cond_dev, psd = {}, {}, {}, {}
    for j in (0.0, 0.25, 0.5, 1.0, 2.0):
        res, povm = dis.povm_for(j, 0.8)
        psd[j] = povm.min_eigenvalue
        if j > 0:
            resid[j] = res.max_residual
            psum_dev[j] = abs(res.probability_sum - 1)
            cond_dev[j] = abs(sum(res.conditional_probabilities.values()) - 1)
    reports = {j: dis.adaptive_scan(j, resolution=1e-3) for j in (0.5, 1.0)}
    negative = all(not r.projective_possible and not r.adaptive_possible for r in reports.values())
    elapsed = time.perf_counter() - t0
    ok = (
        ok0
        and max(resid.values()) < 1e-8
        and max(psum_dev.values()) < 1e-12
        and min(psd.values()) > -1e-10
        and negative
        and elapsed < 300
    )
    acceptance(
        8,
        ok,
        f"J=0 ok = {ok0}; max residual {max(resid.values()):.1e}; "
        f"|sum p_s - 1| = {', '.join(f'{j}: {d:.1e}' for j, d in psum_dev.items())} "
        f"(conditional: {max(cond_dev.values()):.1e}); min eig E_X {min(psd.values()):.3f}; "
        f"adaptive/projective impossible = {negative}; {elapsed:.0f} s",
    )
    assert ok


RUNS = {
    "exact": ["--n-sites", "12", "--j", "0:0.4:0.2", "--b-x", "0.3", "--verify"],
    "scan": ["--n-sites", "30", "--j", "0,0.8", "--b-x", "0,1.2"],
    "vmps": ["--n-sites", "16", "--j", "0.5", "--b-x", "0.4", "--restarts", "2", "--sweeps", "2"],
    "locent": ["--n-sites", "20", "--j", "0.3", "--restarts", "1", "--sweeps", "2", "--samples", "300", "--records"],
    "disentangle": ["--j", "0,0.5"],
}


def test_criterion_9_determinism(tmp_path, acceptance):
    mismatched = []
    for sub, extra in RUNS.items():
        outputs = []
        for rep in range(2):
            d = tmp_path / f"{sub}{rep}"
            d.mkdir()
            cmd = [sys.executable, "-m", "clusterchain", sub, *extra, "--seed", "11", "--deterministic"]
            subprocess.run(cmd + ["--out", str(d / "out.csv")], check=True, capture_output=True)
            outputs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
        if outputs[0] != outputs[1] or not outputs[0]:
            mismatched.append(sub)
    ok = not mismatched
    acceptance(9, ok, f"subcommands checked {list(RUNS)}; differing outputs: {mismatched}")
    assert ok
