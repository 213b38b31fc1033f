"""Real matrix product states on open and periodic chains.

A state is ``sum_s Tr(A^{s_1}_1 ... A^{s_N}_N) |s_1 ... s_N>`` with site
tensors stored as arrays of shape ``(2, D_left, D_right)``. Periodic states
keep a repeating unit cell of tensors (one or two for translation-invariant
states, ``N`` for a general ring); open states keep one tensor per site with
outer bond dimension 1.

Measurement angles live in the x-z plane: outcome 0 of angle ``xi``
projects on ``cos(xi)|0> + sin(xi)|1>``, so ``xi = 0`` is a Z and
``xi = pi/4`` an X measurement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

IMPOSSIBLE = 1e-14

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
    # Y = -i * YR; strings with an even number of Y stay real
    "YR": np.array([[0.0, 1.0], [-1.0, 0.0]]),
}


def basis_vectors(angle: float) -> np.ndarray:
    """Rows are the outcome-0 and outcome-1 vectors of an x-z measurement."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def rotate_tensor(a: np.ndarray, angle: float) -> np.ndarray:
    """Site tensor in the measurement basis of ``angle``."""
    return np.tensordot(basis_vectors(angle), a, axes=([1], [0]))


@dataclass(frozen=True)
class MatrixProductState:
    tensors: tuple[np.ndarray, ...]
    n_sites: int
    boundary: str = "periodic"
    canonical: str = "none"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        tensors = tuple(np.asarray(t, dtype=float) for t in self.tensors)
        object.__setattr__(self, "tensors", tensors)
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.canonical not in ("left", "right", "none"):
            raise ValueError(f"unknown canonical flag {self.canonical!r}")
        if self.n_sites % len(tensors):
            raise ValueError("unit cell does not divide the chain length")
        if self.boundary == "open" and len(tensors) != self.n_sites:
            raise ValueError("open chains store one tensor per site")
        for k, t in enumerate(tensors):
            if t.ndim != 3 or t.shape[0] != 2:
                raise ValueError(f"site tensor {k} has shape {t.shape}, expected (2, Dl, Dr)")
            nxt = tensors[(k + 1) % len(tensors)]
            if k + 1 < len(tensors) or self.boundary == "periodic":
                if t.shape[2] != nxt.shape[1]:
                    raise ValueError(f"bond mismatch after site {k}")
        if self.boundary == "open" and (tensors[0].shape[1] != 1 or tensors[-1].shape[2] != 1):
            raise ValueError("open chains need outer bond dimension 1")

    # -- structure -----------------------------------------------------------

    @property
    def bond_dim(self) -> int:
        return max(max(t.shape[1], t.shape[2]) for t in self.tensors)

    @property
    def translation_invariant(self) -> bool:
        return self.boundary == "periodic" and len(self.tensors) < self.n_sites

    def site_tensor(self, site: int) -> np.ndarray:
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} outside chain of {self.n_sites}")
        return self.tensors[site % len(self.tensors)]

    def site_tensors(self) -> list[np.ndarray]:
        return [self.site_tensor(k) for k in range(self.n_sites)]

    def with_length(self, n_sites: int) -> "MatrixProductState":
        if not self.translation_invariant:
            raise ValueError("only translation-invariant states can be resized")
        return MatrixProductState(self.tensors, n_sites, self.boundary, self.canonical)

    def expanded(self) -> "MatrixProductState":
        """Same state with one stored tensor per site."""
        return MatrixProductState(tuple(self.site_tensors()), self.n_sites, self.boundary, self.canonical)

    # -- contraction -----------------------------------------------------------

    def transfer(self, site: int, op: np.ndarray | None = None) -> np.ndarray:
        a = self.site_tensor(site)
        return _transfer(a, op)

    def to_dense(self) -> np.ndarray:
        if self.n_sites > 20:
            raise ValueError("dense conversion limited to 20 sites")
        a0 = self.site_tensor(0)
        cur = a0.transpose(1, 0, 2)  # (D0, phys, D)
        for k in range(1, self.n_sites):
            cur = np.tensordot(cur, self.site_tensor(k), axes=([2], [1]))  # (D0, p, s, D)
            cur = cur.reshape(cur.shape[0], -1, cur.shape[-1])
        return np.einsum("apa->p", cur)

    def norm_squared(self) -> float:
        return _ring_value(self, {})

    def normalized(self) -> "MatrixProductState":
        nrm = self.norm_squared()
        scale = nrm ** (-0.5 / self.n_sites)
        return MatrixProductState(
            tuple(t * scale for t in self.tensors), self.n_sites, self.boundary, self.canonical
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": "clusterchain-mps",
                "version": 1,
                "n_sites": self.n_sites,
                "boundary": self.boundary,
                "canonical": self.canonical,
                "bond_dim": self.bond_dim,
                "tensors": [
                    {"shape": list(t.shape), "data": t.reshape(-1).tolist()} for t in self.tensors
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MatrixProductState":
        doc = json.loads(text)
        if doc.get("format") != "clusterchain-mps":
            raise ValueError("not a serialized matrix product state")
        tensors = tuple(np.array(t["data"], dtype=float).reshape(t["shape"]) for t in doc["tensors"])
        return cls(tensors, int(doc["n_sites"]), doc["boundary"], doc["canonical"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "MatrixProductState":
        return cls.from_json(Path(path).read_text())


def _transfer(a: np.ndarray, op: np.ndarray | None = None) -> np.ndarray:
    """``sum_st op[s, t] A^s (x) A^t`` as a ``(Dl^2, Dr^2)`` matrix."""
    if op is None:
        e = np.einsum("sab,scd->acbd", a, a)
    else:
        e = np.einsum("st,sab,tcd->acbd", op, a, a)
    dl, dr = a.shape[1], a.shape[2]
    return e.reshape(dl * dl, dr * dr)


def _ring_value(state: MatrixProductState, ops: dict[int, np.ndarray]) -> float:
    """``Tr`` of the transfer-matrix product with operators inserted.

    Runs of bare transfer matrices on translation-invariant states are
    taken as matrix powers. Each factor is rescaled to keep the product
    finite; the same scales are applied to every call for a given state,
    so ratios are exact.
    """
    n = state.n_sites
    cell = len(state.tensors)
    scale = _scale(state)
    result = None
    k = 0
    while k < n:
        if k not in ops and state.translation_invariant and k % cell == 0:
            run = 0
            while k + (run + 1) * cell <= n and not any((k + run * cell + j) in ops for j in range(cell)):
                run += 1
            if run > 1:
                block = np.linalg.matrix_power(_cell_transfer(state) / scale**cell, run)
                result = block if result is None else result @ block
                k += run * cell
                continue
        e = state.transfer(k, ops.get(k)) / scale
        result = e if result is None else result @ e
        k += 1
    return float(np.trace(result))


def _cell_transfer(state: MatrixProductState) -> np.ndarray:
    out = None
    for k in range(len(state.tensors)):
        e = state.transfer(k)
        out = e if out is None else out @ e
    return out


def _scale(state: MatrixProductState) -> float:
    if state.translation_invariant:
        lam = np.max(np.abs(np.linalg.eigvals(_cell_transfer(state))))
        return float(lam ** (1.0 / len(state.tensors))) if lam > 0 else 1.0
    return 1.0


def _op_matrices(ops: dict[int, str]) -> tuple[dict[int, np.ndarray], float]:
    mats = {}
    n_y = 0
    for site, p in ops.items():
        p = p.upper()
        if p == "I":
            continue
        if p == "Y":
            n_y += 1
            mats[site] = _PAULI["YR"]
        else:
            mats[site] = _PAULI[p]
    if n_y % 2:
        return mats, 0.0
    return mats, float((-1) ** (n_y // 2))


def expectation(state: MatrixProductState, ops: dict[int, str] | Sequence[str]) -> float:
    """Expectation of a Pauli product, given as ``{site: pauli}`` or a full string."""
    if not isinstance(ops, dict):
        if len(ops) != state.n_sites:
            raise ValueError(f"operator string has length {len(ops)}, chain has {state.n_sites}")
        ops = {k: p for k, p in enumerate(ops) if p.upper() != "I"}
    for site in ops:
        if not 0 <= site < state.n_sites:
            raise ValueError(f"site {site} outside chain of {state.n_sites}")
    mats, sign = _op_matrices(ops)
    if sign == 0.0:
        return 0.0
    return sign * _ring_value(state, mats) / _ring_value(state, {})


def operator_expectation(state: MatrixProductState, ops: dict[int, np.ndarray]) -> float:
    """Expectation of a product of arbitrary real single-site operators."""
    return _ring_value(state, ops) / _ring_value(state, {})


# ---------------------------------------------------------------------------
# closed-form states
# ---------------------------------------------------------------------------


def cluster_mps(n_sites: int = 200) -> MatrixProductState:
    a0 = np.array([[1.0, 1.0], [0.0, 0.0]])
    a1 = np.array([[0.0, 0.0], [1.0, -1.0]])
    return MatrixProductState((np.stack([a0, a1]) / np.sqrt(2),), n_sites, "periodic", "left")


def tilted_angle(b_z: float) -> float:
    """Single-qubit angle of the ``H_C - B_z sum Z`` ground state."""
    if b_z == 0:
        return 0.0
    return float(np.arctan((np.sqrt(b_z**2 + 1) - 1) / b_z))


def tilted_bz_mps(b_z: float, n_sites: int = 200) -> MatrixProductState:
    """Exact ground state of ``H_C - B_z sum Z`` (right-normalized)."""
    return tilted_mps(tilted_angle(b_z), n_sites)


def tilted_mps(theta: float, n_sites: int = 200) -> MatrixProductState:
    """Cluster-like chain built from qubits at angle ``theta`` instead of ``|+>``.

    ``theta = 0`` is the cluster state; each site tensor has
    ``sum_s |det A_s(xi)| = |sin 2xi cos 2theta|``.
    """
    ep = (np.cos(theta) + np.sin(theta)) / np.sqrt(2)
    em = (np.cos(theta) - np.sin(theta)) / np.sqrt(2)
    a0 = np.array([[ep, em], [0.0, 0.0]])
    a1 = np.array([[0.0, 0.0], [ep, -em]])
    return MatrixProductState((np.stack([a0, a1]),), n_sites, "periodic", "right")


# ---------------------------------------------------------------------------
# canonical forms (open chains)
# ---------------------------------------------------------------------------


def _qr_positive(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(m)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, signs[:, None] * r


def left_canonicalize(state: MatrixProductState) -> MatrixProductState:
    """QR sweep with positive ``R`` diagonal; unique, hence idempotent."""
    if state.boundary != "open":
        raise ValueError("canonicalization is implemented for open chains")
    out = []
    carry = np.eye(1)
    ts = state.site_tensors()
    for k, a in enumerate(ts):
        a = np.einsum("ab,sbc->sac", carry, a)
        d, dl, dr = a.shape
        m = a.transpose(1, 0, 2).reshape(dl * d, dr)
        if k == len(ts) - 1:
            m = m / np.linalg.norm(m)
            out.append(m.reshape(dl, d, dr).transpose(1, 0, 2))
            break
        q, r = _qr_positive(m)
        out.append(q.reshape(dl, d, -1).transpose(1, 0, 2))
        carry = r
    return MatrixProductState(tuple(out), state.n_sites, "open", "left")


def right_canonicalize(state: MatrixProductState) -> MatrixProductState:
    if state.boundary != "open":
        raise ValueError("canonicalization is implemented for open chains")
    flipped = _mirror(state)
    return _mirror(left_canonicalize(flipped), canonical="right")


def _mirror(state: MatrixProductState, canonical: str = "none") -> MatrixProductState:
    ts = [t.transpose(0, 2, 1) for t in reversed(state.site_tensors())]
    return MatrixProductState(tuple(ts), state.n_sites, state.boundary, canonical)


def is_left_canonical(state: MatrixProductState, tol: float = 1e-10) -> bool:
    for k in range(state.n_sites - (1 if state.boundary == "open" else 0)):
        a = state.site_tensor(k)
        g = np.einsum("sab,sac->bc", a, a)
        if not np.allclose(g, np.eye(g.shape[0]), atol=tol):
            return False
    return True


def is_right_canonical(state: MatrixProductState, tol: float = 1e-10) -> bool:
    start = 1 if state.boundary == "open" else 0
    for k in range(start, state.n_sites):
        a = state.site_tensor(k)
        g = np.einsum("sab,scb->ac", a, a)
        if not np.allclose(g, np.eye(g.shape[0]), atol=tol):
            return False
    return True


def random_open_mps(n_sites: int, bond_dim: int, rng: np.random.Generator) -> MatrixProductState:
    """Uniform ``[-1, 1]`` entries, bonds capped by the Hilbert-space size."""
    dims = [1] + [min(bond_dim, 2 ** min(k, n_sites - k)) for k in range(1, n_sites)] + [1]
    ts = tuple(rng.uniform(-1.0, 1.0, size=(2, dims[k], dims[k + 1])) for k in range(n_sites))
    return right_canonicalize(MatrixProductState(ts, n_sites, "open"))


def from_dense(psi: np.ndarray, cutoff: float = 1e-14) -> MatrixProductState:
    """Exact open MPS of a dense state vector by successive SVDs."""
    psi = np.asarray(psi, dtype=float).reshape(-1)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise ValueError("state length is not a power of two")
    ts = []
    rest = psi.reshape(1, -1)
    for _ in range(n - 1):
        dl = rest.shape[0]
        u, sv, vt = np.linalg.svd(rest.reshape(dl * 2, -1), full_matrices=False)
        r = max(1, int(np.sum(sv > cutoff * sv[0])))
        ts.append(u[:, :r].reshape(dl, 2, r).transpose(1, 0, 2))
        rest = sv[:r, None] * vt[:r]
    ts.append(rest.reshape(rest.shape[0], 2, 1).transpose(1, 0, 2))
    return MatrixProductState(tuple(ts), n, "open", "left")


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


class ImpossibleOutcome(ArithmeticError):
    """A measurement outcome whose probability is below ``IMPOSSIBLE``."""


def measure_site(
    state: MatrixProductState, site: int, angle: float, outcome: int
) -> tuple[MatrixProductState, float]:
    """Project ``site`` on an outcome and remove it from the chain.

    The projected matrix is absorbed into the next site (the previous one
    for the last site of an open chain). The returned state has
    ``n_sites - 1`` sites, one tensor per site, and unit norm.
    """
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if state.n_sites < 3:
        raise ValueError("cannot shorten a chain below two sites")
    vec = basis_vectors(angle)[outcome]
    proj = np.outer(vec, vec)
    prob = operator_expectation(state, {site: proj})
    if prob < IMPOSSIBLE:
        raise ImpossibleOutcome(f"outcome {outcome} at site {site} has probability {prob:.3e}")
    ts = state.site_tensors()
    m = np.tensordot(vec, ts[site], axes=([0], [0]))
    n = state.n_sites
    if state.boundary == "open" and site == n - 1:
        ts[site - 1] = np.einsum("sab,bc->sac", ts[site - 1], m)
    else:
        nxt = (site + 1) % n
        ts[nxt] = np.einsum("ab,sbc->sac", m, ts[nxt])
    del ts[site]
    collapsed = MatrixProductState(tuple(ts), n - 1, state.boundary, "none").normalized()
    return collapsed, float(prob)


@dataclass(frozen=True)
class MeasurementPlan:
    """Ordered ``(site, angle)`` pairs; angles are folded into ``[0, pi)``."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(s), float(np.mod(a, np.pi))) for s, a in self.entries)
        sites = [s for s, _ in entries]
        if len(set(sites)) != len(sites):
            raise ValueError("plan measures a site twice")
        object.__setattr__(self, "entries", entries)

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.entries)

    def angle(self, site: int) -> float:
        return dict(self.entries)[site]


@dataclass(frozen=True)
class MeasurementRecord:
    sites: tuple[int, ...]
    outcomes: tuple[int, ...]
    joint_probability: float


@dataclass(frozen=True)
class SampleBatch:
    """Many sampled records of one plan with their residual pair states.

    ``outcomes`` is indexed like ``sites``; ``residuals`` holds normalized
    amplitudes ``psi[s_a * 2 + s_b]`` of the two unmeasured sites.
    """

    sites: tuple[int, ...]
    kept: tuple[int, int]
    outcomes: np.ndarray
    probabilities: np.ndarray
    residuals: np.ndarray

    def records(self) -> list[MeasurementRecord]:
        return [
            MeasurementRecord(self.sites, tuple(int(x) for x in row), float(p))
            for row, p in zip(self.outcomes, self.probabilities)
        ]


def _kept_sites(state: MatrixProductState, plan: MeasurementPlan) -> tuple[int, int]:
    kept = tuple(k for k in range(state.n_sites) if k not in set(plan.sites))
    if len(kept) != 2 or len(plan.sites) != state.n_sites - 2:
        raise ValueError("plan must cover every site except two endpoints")
    return kept


def sample_plan_batch(
    state: MatrixProductState,
    plan: MeasurementPlan,
    n_samples: int,
    rng: np.random.Generator | int | None = None,
) -> SampleBatch:
    """Draw records outcome by outcome from conditional Born probabilities.

    Sites are visited in chain order. For each sample the doubled-layer
    product ``L`` of the sites already visited is kept, and the marginal of
    the next outcome is ``Tr(L E_s R)`` with ``R`` the product of full
    transfer matrices of all later sites, so every conditional probability
    is exact.
    """
    rng = np.random.default_rng(rng)
    kept = _kept_sites(state, plan)
    n = state.n_sites
    angles = dict(plan.entries)
    ts = state.site_tensors()
    d0 = ts[0].shape[1]

    # right environments: renv[k] = E_k ... E_{N-1} as (Dk, Dk, D0, D0)
    renv: list[np.ndarray] = [None] * (n + 1)
    eye = np.eye(d0)
    renv[n] = np.einsum("ac,bd->abcd", eye, eye)
    for k in range(n - 1, -1, -1):
        r = np.einsum("sab,scd,bdef->acef", ts[k], ts[k], renv[k + 1])
        renv[k] = r / np.max(np.abs(r))

    left = np.broadcast_to(np.einsum("ac,bd->abcd", eye, eye), (n_samples, d0, d0, d0, d0)).copy()
    outcomes = np.zeros((n_samples, len(plan.sites)), dtype=np.int8)
    col = {s: i for i, s in enumerate(plan.sites)}
    logp = np.zeros(n_samples)
    chosen_mats: dict[int, np.ndarray] = {}

    for k in range(n):
        a = ts[k]
        if k in kept:
            left = sum(np.swapaxes(a[s], 0, 1) @ left @ a[s] for s in range(2))
            left /= np.max(np.abs(left), axis=(1, 2, 3, 4), keepdims=True)
            continue
        m = rotate_tensor(a, angles[k])
        weights = np.empty((2, n_samples))
        for s in range(2):
            f = np.einsum("ab,cd,bdef->acef", m[s], m[s], renv[k + 1])
            weights[s] = np.einsum("nefac,acef->n", left, f)
        total = weights.sum(axis=0)
        p1 = np.clip(weights[1] / total, 0.0, 1.0)
        draw = (rng.random(n_samples) < p1).astype(np.int8)
        p = np.where(draw == 1, p1, 1.0 - p1)
        if np.any(p < IMPOSSIBLE):
            raise ImpossibleOutcome(f"sampled an outcome with probability below {IMPOSSIBLE} at site {k}")
        logp += np.log(p)
        outcomes[:, col[k]] = draw
        chosen_mats[k] = m
        dr = m.shape[2]
        nxt = np.empty(left.shape[:3] + (dr, dr))
        for s in range(2):
            idx = np.flatnonzero(draw == s)
            if idx.size:
                nxt[idx] = m[s].T @ left[idx] @ m[s]
        left = nxt
        left /= np.max(np.abs(left), axis=(1, 2, 3, 4), keepdims=True)

    residuals = _residuals(ts, kept, chosen_mats, outcomes, col)
    return SampleBatch(plan.sites, kept, outcomes, np.exp(logp), residuals)


def _residuals(ts, kept, mats, outcomes, col) -> np.ndarray:
    """Single-layer contraction of each record, amplitudes of the kept pair."""
    n_samples = outcomes.shape[0]
    d0 = ts[0].shape[1]
    # prod[n, ka, kb, a, b] with the kept physical indices as extra axes
    prod = np.broadcast_to(np.eye(d0), (n_samples, 1, d0, d0)).copy()
    for k, a in enumerate(ts):
        if k in kept:
            prod = np.einsum("nxab,sbc->nxsac", prod, a)
            prod = prod.reshape(n_samples, -1, prod.shape[-2], prod.shape[-1])
            continue
        mk = mats[k]
        new = np.empty(prod.shape[:-1] + (a.shape[2],))
        for s in range(2):
            idx = np.flatnonzero(outcomes[:, col[k]] == s)
            if idx.size:
                new[idx] = prod[idx] @ mk[s]
        prod = new
        prod /= np.max(np.abs(prod), axis=(1, 2, 3), keepdims=True)
    amps = np.einsum("nxaa->nx", prod)
    return amps / np.linalg.norm(amps, axis=1, keepdims=True)


def sample_plan(
    state: MatrixProductState, plan: MeasurementPlan, rng_seed: int | np.random.Generator | None = None
) -> tuple[MeasurementRecord, np.ndarray]:
    """One record and the normalized residual pair state (4 amplitudes)."""
    batch = sample_plan_batch(state, plan, 1, rng_seed)
    return batch.records()[0], batch.residuals[0]


def enumerate_plan(state: MatrixProductState, plan: MeasurementPlan) -> SampleBatch:
    """Every record of a plan with its exact probability (up to 20 measured sites)."""
    kept = _kept_sites(state, plan)
    m = len(plan.sites)
    if m > 20:
        raise ValueError("exhaustive enumeration limited to 20 measured sites")
    idx = np.arange(1 << m)
    outcomes = ((idx[:, None] >> (m - 1 - np.arange(m))) & 1).astype(np.int8)
    col = {s: i for i, s in enumerate(plan.sites)}
    ts = state.site_tensors()
    mats = {k: rotate_tensor(ts[k], a) for k, a in plan.entries}
    # unnormalized amplitudes first, to get probabilities
    n_rec = outcomes.shape[0]
    d0 = ts[0].shape[1]
    prod = np.broadcast_to(np.eye(d0), (n_rec, 1, d0, d0)).copy()
    for k, a in enumerate(ts):
        if k in kept:
            prod = np.einsum("nxab,sbc->nxsac", prod, a)
            prod = prod.reshape(n_rec, -1, prod.shape[-2], prod.shape[-1])
            continue
        new = np.empty(prod.shape[:-1] + (a.shape[2],))
        for s in range(2):
            sel = np.flatnonzero(outcomes[:, col[k]] == s)
            new[sel] = prod[sel] @ mats[k][s]
        prod = new
    amps = np.einsum("nxaa->nx", prod)
    weights = np.sum(amps**2, axis=1)
    probs = weights / weights.sum()
    norms = np.sqrt(np.where(weights > 0, weights, 1.0))
    return SampleBatch(plan.sites, kept, outcomes, probs, amps / norms[:, None])


# ---------------------------------------------------------------------------
# optimal basis
# ---------------------------------------------------------------------------


def det_weight(state: MatrixProductState, angle: float, site: int = 0) -> float:
    """``sum_s |det A_s(angle)|`` of one site tensor."""
    rotated = rotate_tensor(state.site_tensor(site), angle)
    return float(sum(abs(np.linalg.det(rotated[s])) for s in range(2)))


def optimal_measurement_angle(state: MatrixProductState, grid_step: float = 1e-3) -> float:
    """Angle maximizing ``sum_s |det A_s(angle)|`` over the stored unit cell.

    A ``grid_step`` grid over ``[0, pi/2)`` (angles ``xi`` and
    ``xi + pi/2`` give the same basis) is refined by golden-section search.
    """
    cell = range(len(state.tensors))

    def weight(x: float) -> float:
        return sum(det_weight(state, x, k) for k in cell)

    grid = np.arange(0.0, np.pi / 2, grid_step)
    vals = np.array([weight(x) for x in grid])
    k = int(np.argmax(vals))
    lo, hi = grid[k] - grid_step, grid[k] + grid_step
    res = minimize_scalar(lambda x: -weight(x), bracket=(lo, grid[k], hi), method="golden", tol=1e-10)
    best = res.x if -res.fun >= vals[k] else grid[k]
    return float(np.mod(best, np.pi))
