"""Variational ground states by single-site sweeping over open MPS.

The optimization runs on an open chain with truncated end stabilizers. The
two central tensors of the converged state are then read out as a
two-site unit cell of a translation-invariant periodic state, on which the
energy and the two-site entropy are evaluated.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import mps
from .mps import MatrixProductState
from .params import Boundary, ChainParams

REGULARIZATION = 1e-12
MAX_CONDITION = 1e12
SCHMIDT_CUTOFF = 1e-8

_I = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class VmpsConfig:
    """Sweep settings.

    ``eval_sites`` is the length of the periodic chain used to evaluate
    the extracted state; ``None`` reuses the optimized chain length.
    """

    bond_dim: int = 8
    n_sweeps: int = 6
    n_restarts: int = 40
    rng_seed: int | None = 0
    convergence_tol: float = 1e-8
    eval_sites: int | None = None
    n_workers: int = 1

    def __post_init__(self) -> None:
        if self.bond_dim < 2:
            raise ValueError("bond_dim must be at least 2")
        if self.n_sweeps < 1:
            raise ValueError("n_sweeps must be at least 1")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be at least 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.n_workers < 1:
            raise ValueError("n_workers must be at least 1")


@dataclass(frozen=True)
class VmpsResult:
    state: MatrixProductState
    energy: float
    s2: float
    restart_index: int
    open_energy: float = float("nan")
    converged: bool = True
    regularized: bool = False
    sweep_energies: tuple[float, ...] = ()
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_json_line(self) -> str:
        doc = {
            "restart": self.restart_index,
            "energy": self.energy,
            "open_energy": self.open_energy,
            "s2": self.s2,
            "converged": self.converged,
            "regularized": self.regularized,
            "sweep_energies": list(self.sweep_energies),
        }
        return json.dumps(doc)


# ---------------------------------------------------------------------------
# operator
# ---------------------------------------------------------------------------


def build_mpo(params: ChainParams) -> list[np.ndarray]:
    """Open-chain MPO as tensors ``W[left, right, s, t]``.

    States: 0 nothing placed yet, 1 a Z placed, 2 a ``Z X`` placed,
    3 finished, 4 an ``X`` on the first site waiting for its ``Z``.
    """
    if params.periodic:
        raise ValueError("the sweep operates on open chains")
    n = params.n_sites
    w = 5
    field_op = -params.b_x * _X - params.b_z * _Z
    out = []
    for k in range(n):
        t = np.zeros((w, w, 2, 2))
        t[0, 0] = _I
        t[3, 3] = _I
        t[0, 3] = field_op
        t[0, 1] = _Z
        t[1, 3] = -params.j_ising * _Z
        t[1, 2] = _X
        t[2, 3] = -_Z
        if params.end_stabilizers:
            if k == 0:
                t[0, 4] = _X
            if k == 1:
                t[4, 3] = -_Z
            if k == n - 1:
                t[1, 3] = t[1, 3] - _X
        if k == 0:
            t = t[:1]
        if k == n - 1:
            t = t[:, 3:4]
        out.append(t)
    return out


def mpo_to_dense(mpo: list[np.ndarray]) -> np.ndarray:
    """Dense matrix of a short MPO, for checks."""
    cur = mpo[0]  # (1, w, s, t)
    for w in mpo[1:]:
        cur = np.einsum("axst,xyuv->aysutv", cur, w)
        a, y, s, u, t, v = cur.shape
        cur = cur.reshape(a, y, s * u, t * v)
    return cur[0, 0]


# ---------------------------------------------------------------------------
# environments and local problem
# ---------------------------------------------------------------------------


def _grow_left(env: np.ndarray, a: np.ndarray, w: np.ndarray | None) -> np.ndarray:
    if w is None:
        return np.einsum("sab,sac->bc", a, np.tensordot(env, a, ([1], [1])).transpose(1, 0, 2))
    t = np.tensordot(env, a, ([0], [1]))  # (x, c, s, b)
    t = np.tensordot(t, w, ([0, 2], [0, 2]))  # (c, b, y, t)
    return np.tensordot(t, a, ([0, 3], [1, 0]))  # (b, y, d)


def _grow_right(env: np.ndarray, a: np.ndarray, w: np.ndarray | None) -> np.ndarray:
    if w is None:
        return np.einsum("sab,scb->ac", a, np.tensordot(a, env, ([2], [1])))
    t = np.tensordot(a, env, ([2], [0]))  # (s, a, y, d)
    t = np.tensordot(t, w, ([0, 2], [2, 1]))  # (a, d, x, t)
    return np.tensordot(t, a, ([1, 3], [2, 0]))  # (a, x, c)


def _effective(lh, w, rh, ln, rn) -> tuple[np.ndarray, np.ndarray]:
    t = np.tensordot(lh, w, ([1], [0]))  # (a, c, y, s, t)
    heff = np.tensordot(t, rh, ([2], [1])).transpose(2, 0, 4, 3, 1, 5)
    neff = np.einsum("st,ac,bd->sabtcd", _I, ln, rn)
    dim = heff.shape[0] * heff.shape[1] * heff.shape[2]
    return heff.reshape(dim, dim), neff.reshape(dim, dim)


def _solve_local(heff: np.ndarray, neff: np.ndarray, ln: np.ndarray, rn: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Lowest generalized eigenpair; returns (vector, value, regularized).

    ``N_eff = 1 (x) ln (x) rn``, so its spectrum is the set of products of
    the environment spectra and its Cholesky factor is the product of the
    environment factors. The well-conditioned case is reduced to a
    standard problem with those factors; otherwise ``N_eff`` gets a small
    diagonal shift and the generalized problem is solved directly.
    """
    heff = (heff + heff.T) / 2
    ln = (ln + ln.T) / 2
    rn = (rn + rn.T) / 2
    wl = np.linalg.eigvalsh(ln)
    wr = np.linalg.eigvalsh(rn)
    prods = np.outer(wl, wr)
    lo, hi = prods.min(), prods.max()
    if lo <= 0 or hi / lo > MAX_CONDITION:
        neff = (neff + neff.T) / 2 + REGULARIZATION * np.eye(neff.shape[0])
        vals, vecs = scipy.linalg.eigh(heff, neff, subset_by_index=[0, 0])
        return vecs[:, 0], float(vals[0]), True
    dl, dr = ln.shape[0], rn.shape[0]
    fl = np.linalg.inv(np.linalg.cholesky(ln))
    fr = np.linalg.inv(np.linalg.cholesky(rn))
    h = heff.reshape(2, dl, dr, 2, dl, dr)
    h = np.tensordot(fl, h, ([1], [1]))  # (i, s, b, t, c, d)
    h = np.tensordot(fr, h, ([1], [2]))  # (j, i, s, t, c, d)
    h = np.tensordot(h, fl, ([4], [1]))  # (j, i, s, t, d, k)
    h = np.tensordot(h, fr, ([4], [1]))  # (j, i, s, t, k, l)
    h = h.transpose(2, 1, 0, 3, 4, 5)
    dim = heff.shape[0]
    vals, vecs = scipy.linalg.eigh(h.reshape(dim, dim), subset_by_index=[0, 0])
    y = vecs[:, 0].reshape(2, dl, dr)
    x = np.einsum("ia,jb,sij->sab", fl, fr, y)
    return x.reshape(-1), float(vals[0]), False


def _environments(state: MatrixProductState, mpo: list[np.ndarray]):
    n = state.n_sites
    one = np.ones((1, 1, 1))
    lh = [one] + [None] * n
    ln = [np.ones((1, 1))] + [None] * n
    for k in range(n):
        a = state.tensors[k]
        lh[k + 1] = _grow_left(lh[k], a, mpo[k])
        ln[k + 1] = _grow_left(ln[k], a, None)
    rh = [None] * n + [one]
    rn = [None] * n + [np.ones((1, 1))]
    for k in range(n - 1, -1, -1):
        a = state.tensors[k]
        rh[k] = _grow_right(rh[k + 1], a, mpo[k])
        rn[k] = _grow_right(rn[k + 1], a, None)
    return lh, ln, rh, rn


def local_minimize(state: MatrixProductState, site: int, params: ChainParams) -> tuple[np.ndarray, float, bool]:
    """Optimal tensor at ``site`` with every other tensor held fixed.

    Solves ``H_eff v = lambda N_eff v`` and returns the new tensor (scaled
    to unit norm for the full state), the energy ``lambda`` and whether
    the norm matrix had to be regularized. No gauge is assumed.
    """
    if state.boundary != "open":
        raise ValueError("local_minimize works on open chains")
    params = _open(params, state.n_sites)
    mpo = build_mpo(params)
    lh, ln, rh, rn = _environments(state, mpo)
    heff, neff = _effective(lh[site], mpo[site], rh[site + 1], ln[site], rn[site + 1])
    vec, val, reg = _solve_local(heff, neff, ln[site], rn[site + 1])
    vec = vec / np.sqrt(vec @ neff @ vec)
    return vec.reshape(state.tensors[site].shape), val, reg


def _open(params: ChainParams, n: int | None = None) -> ChainParams:
    if params.periodic:
        params = params.with_(boundary=Boundary.OPEN, end_stabilizers=True)
    if n is not None and params.n_sites != n:
        raise ValueError("state and Hamiltonian lengths differ")
    return params


class _Sweeper:
    """Single-site sweeps with cached environments and a moving gauge center."""

    def __init__(self, params: ChainParams, state: MatrixProductState):
        self.params = params
        self.mpo = build_mpo(params)
        self.n = params.n_sites
        self.ts = list(state.tensors)
        # state arrives right-canonical: every right environment is fresh
        self.lh = [np.ones((1, 1, 1))] + [None] * self.n
        self.ln = [np.ones((1, 1))] + [None] * self.n
        self.rh = [None] * self.n + [np.ones((1, 1, 1))]
        self.rn = [None] * self.n + [np.ones((1, 1))]
        for k in range(self.n - 1, 0, -1):
            self._update_right(k)
        self.energies: list[float] = []
        self.regularized = False

    def _update_left(self, k: int) -> None:
        self.lh[k + 1] = _grow_left(self.lh[k], self.ts[k], self.mpo[k])
        self.ln[k + 1] = _grow_left(self.ln[k], self.ts[k], None)

    def _update_right(self, k: int) -> None:
        self.rh[k] = _grow_right(self.rh[k + 1], self.ts[k], self.mpo[k])
        self.rn[k] = _grow_right(self.rn[k + 1], self.ts[k], None)

    def _optimize(self, k: int) -> None:
        heff, neff = _effective(self.lh[k], self.mpo[k], self.rh[k + 1], self.ln[k], self.rn[k + 1])
        vec, val, reg = _solve_local(heff, neff, self.ln[k], self.rn[k + 1])
        vec = vec / np.sqrt(vec @ neff @ vec)
        self.regularized |= reg
        self.ts[k] = vec.reshape(self.ts[k].shape)
        self.energies.append(val)

    def step_right(self, k: int) -> None:
        self._optimize(k)
        if k == self.n - 1:
            return
        a = self.ts[k]
        d, dl, dr = a.shape
        q, r = mps._qr_positive(a.transpose(1, 0, 2).reshape(dl * d, dr))
        self.ts[k] = q.reshape(dl, d, dr).transpose(1, 0, 2)
        self.ts[k + 1] = np.einsum("ab,sbc->sac", r, self.ts[k + 1])
        self._update_left(k)

    def step_left(self, k: int) -> None:
        self._optimize(k)
        if k == 0:
            return
        a = self.ts[k]
        d, dl, dr = a.shape
        q, r = mps._qr_positive(a.transpose(2, 0, 1).reshape(dr * d, dl))
        self.ts[k] = q.reshape(dr, d, dl).transpose(1, 2, 0)
        self.ts[k - 1] = np.einsum("sab,cb->sac", self.ts[k - 1], r)
        self._update_right(k)

    def state(self) -> MatrixProductState:
        return MatrixProductState(tuple(self.ts), self.n, "open")


def run_sweeps(params: ChainParams, config: VmpsConfig, rng: np.random.Generator) -> dict:
    """Random start, ``n_sweeps`` back-and-forth passes, then half way back."""
    params = _open(params)
    n = params.n_sites
    start = mps.random_open_mps(n, config.bond_dim, rng)
    sw = _Sweeper(params, start)
    sweep_energies = []
    converged = False
    for _ in range(config.n_sweeps):
        for k in range(n):
            sw.step_right(k)
        for k in range(n - 1, -1, -1):
            sw.step_left(k)
        sweep_energies.append(sw.energies[-1])
        if len(sweep_energies) > 1 and abs(sweep_energies[-1] - sweep_energies[-2]) < config.convergence_tol:
            converged = True
    for k in range(n // 2):
        sw.step_right(k)
    return {
        "state": sw.state(),
        "open_energy": sw.energies[-1],
        "local_energies": sw.energies,
        "sweep_energies": tuple(sweep_energies),
        "converged": converged,
        "regularized": sw.regularized,
    }


# ---------------------------------------------------------------------------
# periodic read-out
# ---------------------------------------------------------------------------


def truncate_bonds(state: MatrixProductState, cutoff: float = SCHMIDT_CUTOFF) -> MatrixProductState:
    """Drop Schmidt values below ``cutoff`` times the largest on every bond.

    Returns a left-canonical open state. Bond directions without weight do
    not change the open state but would feed spurious sectors into the
    ring closure.
    """
    ts = mps.left_canonicalize(state).site_tensors()
    carry = np.eye(1)
    out = [None] * len(ts)
    for k in range(len(ts) - 1, -1, -1):
        a = np.einsum("sab,bc->sac", ts[k], carry)
        d, dl, dr = a.shape
        m = a.transpose(1, 0, 2).reshape(dl, d * dr)
        if k == 0:
            out[0] = (m / np.linalg.norm(m)).reshape(dl, d, dr).transpose(1, 0, 2)
            break
        u, sv, vt = np.linalg.svd(m, full_matrices=False)
        r = max(1, int(np.sum(sv > cutoff * sv[0])))
        out[k] = vt[:r].reshape(r, d, dr).transpose(1, 0, 2)
        carry = u[:, :r] * sv[:r]
    return mps.left_canonicalize(MatrixProductState(tuple(out), state.n_sites, "open"))


def extract_periodic(open_state: MatrixProductState, n_sites: int, cutoff: float = SCHMIDT_CUTOFF) -> MatrixProductState:
    """Two-site unit cell taken from the middle of an open chain.

    The open state is truncated to its significant Schmidt values and
    brought to left-canonical form; the tensors at sites ``c - 1`` and
    ``c`` (``c`` the midpoint) are kept. Bonds ``c - 1`` and ``c + 1`` carry
    unrelated gauges, so before closing the ring the second tensor is
    rotated by the isometry between them, taken from the fixed point of the
    transfer matrix mixing the chain with its two-site translate.
    """
    if n_sites % 2:
        raise ValueError("a two-site unit cell needs an even chain length")
    ts = truncate_bonds(open_state, cutoff).site_tensors()
    n = open_state.n_sites
    c = n // 2
    if c < 2 or c + 1 >= n:
        raise ValueError("open chain too short to extract a bulk unit cell")
    # x maps bond k of the chain onto bond k + 2 of the shifted chain
    x = np.ones((ts[2].shape[1], ts[0].shape[1]))
    for k in range(c - 1):
        x = sum(ts[k + 2][s].T @ x @ ts[k][s] for s in range(2))
        x /= np.linalg.norm(x)
    # x now links bond c - 1 to bond c + 1
    u, _, vt = np.linalg.svd(x, full_matrices=False)
    a = ts[c - 1]
    b = np.einsum("sab,bc->sac", ts[c], u @ vt)
    return MatrixProductState((a, b), n_sites, "periodic", "left")


def ring_energy(state: MatrixProductState, params: ChainParams) -> float:
    """Energy of a translation-invariant periodic state, from its unit cell."""
    cell = len(state.tensors)
    total = 0.0
    for m in range(cell):
        left, right = (m - 1) % state.n_sites, (m + 1) % state.n_sites
        total -= mps.expectation(state, {left: "Z", m: "X", right: "Z"})
        if params.j_ising:
            total -= params.j_ising * mps.expectation(state, {m: "Z", right: "Z"})
        if params.b_x:
            total -= params.b_x * mps.expectation(state, {m: "X"})
        if params.b_z:
            total -= params.b_z * mps.expectation(state, {m: "Z"})
    return total * state.n_sites / cell


def pair_density_matrix(state: MatrixProductState, first: int = 0) -> np.ndarray:
    """Reduced density matrix of sites ``first`` and ``first + 1``."""
    rho = np.empty((4, 4))
    second = (first + 1) % state.n_sites
    for i in range(4):
        for j in range(4):
            # rho[i, j] = <|j><i|>
            p = np.zeros((2, 2))
            q = np.zeros((2, 2))
            p[j >> 1, i >> 1] = 1.0
            q[j & 1, i & 1] = 1.0
            rho[i, j] = mps.operator_expectation(state, {first: p, second: q})
    return (rho + rho.T) / 2


def pair_entropy(state: MatrixProductState, first: int = 0) -> float:
    """Two-site von Neumann entropy in bits."""
    w = np.linalg.eigvalsh(pair_density_matrix(state, first))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


def _restart(params: ChainParams, config: VmpsConfig, seed: np.random.SeedSequence, index: int) -> VmpsResult:
    run = run_sweeps(params, config, np.random.default_rng(seed))
    eval_n = config.eval_sites or params.n_sites
    ring = extract_periodic(run["state"], eval_n)
    ring_params = params.with_(n_sites=eval_n, boundary=Boundary.PERIODIC)
    energy = ring_energy(ring, ring_params)
    s2 = pair_entropy(ring)
    return VmpsResult(
        state=ring,
        energy=energy,
        s2=s2,
        restart_index=index,
        open_energy=run["open_energy"],
        converged=run["converged"],
        regularized=run["regularized"],
        sweep_energies=run["sweep_energies"],
        diagnostics={"local_energies": run["local_energies"]},
    )


def sweep_to_ground(params: ChainParams, config: VmpsConfig | None = None, restart_index: int = 0) -> VmpsResult:
    """One restart; its seed is child ``restart_index`` of ``config.rng_seed``."""
    config = config or VmpsConfig()
    seeds = np.random.SeedSequence(config.rng_seed).spawn(restart_index + 1)
    return _restart(params, config, seeds[restart_index], restart_index)


def all_restarts(params: ChainParams, config: VmpsConfig | None = None) -> list[VmpsResult]:
    config = config or VmpsConfig()
    seeds = np.random.SeedSequence(config.rng_seed).spawn(config.n_restarts)
    idx = range(config.n_restarts)
    if config.n_workers == 1:
        return [_restart(params, config, s, i) for s, i in zip(seeds, idx)]
    with ProcessPoolExecutor(max_workers=config.n_workers) as pool:
        return list(pool.map(_restart, [params] * len(seeds), [config] * len(seeds), seeds, idx))


def select_best(results: list[VmpsResult]) -> VmpsResult:
    """Largest S2; ties broken by lower energy, then lower restart index."""
    if not results:
        raise ValueError("no restarts to choose from")
    return min(results, key=lambda r: (-r.s2, r.energy, r.restart_index))


def best_of_restarts(params: ChainParams, config: VmpsConfig | None = None) -> VmpsResult:
    return select_best(all_restarts(params, config))
