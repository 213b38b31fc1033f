"""Pairwise disentangling measurements on the four-qubit open chain.

The two middle qubits of the ``B = 0`` ground state are measured in the
x-z plane and the end pair is left behind. Angles use the convention of
:func:`clusterchain.oracle.basis_vectors`: outcome 0 of angle ``t``
projects on ``cos(t)|0> + sin(t)|1>``, so ``t = 0`` is Z and ``t = pi/4``
is X, and ``t`` and ``t + pi`` give the same projectors.

Outcome classes follow the total spin along the measured direction:
``s = +1`` is both outcomes 0, ``s = -1`` both outcomes 1 and ``s = 0``
the two mixed outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from . import oracle
from .params import Boundary, ChainParams

OUTCOME_CLASSES = (1, 0, -1)
_BRANCHES = {1: ((0, 0),), 0: ((0, 1), (1, 0)), -1: ((1, 1),)}
CERTIFY = 1e-8
FLAG = 1e-6
MAX_RESOLUTION = 1e-2


def chain_params(j_ising: float, n_sites: int = 4) -> ChainParams:
    """Open chain with truncated end stabilizers and no fields."""
    if j_ising < 0:
        raise ValueError("J must be nonnegative")
    return ChainParams(n_sites, j_ising, 0.0, 0.0, Boundary.OPEN, True)


def ground_state(j_ising: float) -> np.ndarray:
    return oracle.ground_state_dense(chain_params(j_ising)).amplitudes


def end_matrix(psi: np.ndarray, theta1: float, s1: int, theta2: float, s2: int) -> np.ndarray:
    """Unnormalized end-pair amplitudes after outcomes ``s1, s2`` on qubits 1, 2."""
    t = np.asarray(psi).reshape(2, 2, 2, 2)
    v1 = oracle.basis_vectors(theta1)[s1]
    v2 = oracle.basis_vectors(theta2)[s2]
    return np.einsum("abcd,b,c->ad", t, v1, v2)


def _dets(t: np.ndarray, th1: np.ndarray, th2: np.ndarray, s1: int, s2: int) -> np.ndarray:
    """``det`` of the end matrix on a broadcast grid of angles."""
    b1 = np.stack([np.cos(th1), np.sin(th1)]) if s1 == 0 else np.stack([-np.sin(th1), np.cos(th1)])
    b2 = np.stack([np.cos(th2), np.sin(th2)]) if s2 == 0 else np.stack([-np.sin(th2), np.cos(th2)])
    m = np.einsum("abcd,b...,c...->...ad", t, b1, b2)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def pair_entropy(m: np.ndarray) -> float:
    """Entanglement entropy in bits of the normalized pure state with amplitudes ``m``."""
    s = np.linalg.svd(m, compute_uv=False) ** 2
    total = s.sum()
    if total <= 0:
        return 0.0
    s = s / total
    s = s[s > 1e-300]
    return float(max(-np.sum(s * np.log2(s)), 0.0))


def _class_det(psi: np.ndarray, s: int):
    s1, s2 = _BRANCHES[s][0]
    return lambda x: float(np.linalg.det(end_matrix(psi, x, s1, x, s2)))


def _class_probability(psi: np.ndarray, s: int, theta: float) -> float:
    return float(sum(np.sum(end_matrix(psi, theta, a, theta, b) ** 2) for a, b in _BRANCHES[s]))


def _fold(theta: float) -> float:
    """Representative in ``(-pi/2, pi/2]``."""
    t = np.mod(theta + np.pi / 2, np.pi) - np.pi / 2
    return float(np.pi / 2 if np.isclose(t, -np.pi / 2) else t)


def _roots(f, step: float) -> list[float]:
    """Zeros of a ``pi``-periodic function, bracketed on a grid."""
    grid = np.arange(0.0, np.pi, step)
    n = grid.size
    vals = np.array([f(x) for x in grid])
    out = []
    for k in range(n):
        lo, hi = grid[k], grid[k] + step if k + 1 < n else np.pi
        v_hi = vals[(k + 1) % n]
        if vals[k] == 0.0:
            out.append(float(lo))
        elif vals[k] * v_hi < 0:
            out.append(float(brentq(f, lo, hi, xtol=1e-15)))
    # touching zeros show up as local minima of |f|
    mag = np.abs(vals)
    for k in range(n):
        if mag[k] <= mag[k - 1] and mag[k] <= mag[(k + 1) % n]:
            lo, hi = grid[k] - step, grid[k] + step
            # a double zero is a stationary point: locate it from f'
            h = 1e-5
            df = lambda x: (f(x + h) - f(x - h)) / (2 * h)  # noqa: E731
            if df(lo) * df(hi) < 0:
                x = brentq(df, lo, hi, xtol=1e-15)
            else:
                x = minimize_scalar(lambda x: f(x) ** 2, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}).x
            if abs(f(x)) < 1e-12:
                out.append(float(x))
    return out


@dataclass(frozen=True)
class DisentangleResult:
    """Per outcome class: angle, raw probability and residual entanglement.

    ``probabilities[s]`` is the probability of class ``s`` when both
    qubits are measured at ``angles[s]``. Because the angles differ
    between classes these raw values need not sum to one;
    ``conditional_probabilities`` are the class probabilities given a
    non-failure outcome of the corresponding POVM.
    """

    j: float
    angles: dict[int, float]
    probabilities: dict[int, float]
    residuals: dict[int, float]
    weighted_residuals: dict[int, float]
    reflection_gap: float
    flagged: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def probability_sum(self) -> float:
        return float(sum(self.probabilities.values()))

    @property
    def conditional_probabilities(self) -> dict[int, float]:
        total = self.probability_sum
        return {s: p / total for s, p in self.probabilities.items()}

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def optimize_disentangling_angles(j_ising: float, grid_step: float = 1e-3) -> DisentangleResult:
    """Per-class angle that leaves the end qubits in a product state.

    Zeros of the end-pair determinant are bracketed on a ``grid_step``
    grid over ``[0, pi)`` and polished by root finding (touching zeros by
    golden-section search on its square). Of the zeros the one closest to
    the Z basis is kept.
    """
    psi = ground_state(j_ising)
    angles, probs, res, wres = {}, {}, {}, {}
    notes = []
    flagged = False
    for s in OUTCOME_CLASSES:
        f = _class_det(psi, s)
        roots = _roots(f, grid_step)
        if roots:
            # mirror-image pairs +-t tie; the positive one is kept
            theta = min((_fold(r) for r in roots), key=lambda t: (round(abs(t), 9), -t))
        else:
            # no zero: fall back to the least entangled angle on the grid
            grid = np.arange(0.0, np.pi, grid_step)
            theta = _fold(grid[int(np.argmin([abs(f(x)) for x in grid]))])
            notes.append(f"class {s}: no disentangling zero found")
        p = _class_probability(psi, s, theta)
        s1, s2 = _BRANCHES[s][0]
        ent = pair_entropy(end_matrix(psi, theta, s1, theta, s2))
        if ent > FLAG:
            flagged = True
            notes.append(f"class {s}: residual {ent:.3e} above {FLAG}")
        angles[s], probs[s], res[s], wres[s] = theta, p, ent, p * ent
    m01 = end_matrix(psi, angles[0], 0, angles[0], 1)
    m10 = end_matrix(psi, angles[0], 1, angles[0], 0)
    gap = _state_distance(m01, m10.T)
    return DisentangleResult(float(j_ising), angles, probs, res, wres, gap, flagged, tuple(notes))


def _state_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    """``1 - |<a|b>|`` between the normalized states with amplitudes ``m1, m2``."""
    n1, n2 = np.linalg.norm(m1), np.linalg.norm(m2)
    if n1 == 0 or n2 == 0:
        return 0.0 if n1 == n2 else 1.0
    return float(1 - abs(np.sum(m1 * m2)) / (n1 * n2))


def weighted_residual(j_ising: float, theta: float = 0.0) -> dict[int, float]:
    """``p_s`` times residual entropy per class at a fixed, non-adapted angle."""
    psi = ground_state(j_ising)
    out = {}
    for s in OUTCOME_CLASSES:
        out[s] = float(
            sum(
                np.sum(m**2) * pair_entropy(m)
                for m in (end_matrix(psi, theta, a, theta, b) for a, b in _BRANCHES[s])
            )
        )
    return out


# ---------------------------------------------------------------------------
# POVM
# ---------------------------------------------------------------------------


class PovmNotPositive(ValueError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"failure element has eigenvalue {min_eigenvalue:.3e} < 0")
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True)
class PovmSet:
    """``E_{-1}, E_0, E_0', E_1`` and the failure element ``E_X``."""

    elements: dict[str, np.ndarray]
    c: float
    min_eigenvalue: float
    failure_probability: float
    c_max: float

    def total(self) -> np.ndarray:
        return sum(self.elements.values())


def _projectors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    b = oracle.basis_vectors(theta)
    return np.outer(b[0], b[0]), np.outer(b[1], b[1])


def build_povm(angles: dict[int, float], c: float, psi: np.ndarray | None = None, tol: float = 1e-10) -> PovmSet:
    """POVM on the measured pair, with ``p(E_X)`` evaluated on ``psi`` if given.

    Raises :class:`PovmNotPositive` if ``E_X`` has an eigenvalue below
    ``-tol``.
    """
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    pp1, pm1 = _projectors(angles[1])
    pp0, pm0 = _projectors(angles[0])
    ppm, pmm = _projectors(angles[-1])
    base = {
        "E-1": np.kron(pmm, pmm),
        "E0": np.kron(pm0, pp0),
        "E0'": np.kron(pp0, pm0),
        "E1": np.kron(pp1, pp1),
    }
    total = sum(base.values())
    lam = float(np.linalg.eigvalsh(total)[-1])
    c_max = 1.0 / lam
    elements = {k: c * v for k, v in base.items()}
    ex = np.eye(4) - c * total
    ex = (ex + ex.T) / 2
    min_eig = float(np.linalg.eigvalsh(ex)[0])
    if min_eig < -tol:
        raise PovmNotPositive(min_eig)
    elements["EX"] = ex
    p_fail = float("nan")
    if psi is not None:
        t = np.asarray(psi).reshape(2, 4, 2)
        p_fail = float(np.einsum("apb,pq,aqb->", t, ex, t))
    return PovmSet(elements, float(c), min_eig, p_fail, c_max)


def povm_for(j_ising: float, c: float | None = None) -> tuple[DisentangleResult, PovmSet]:
    """Optimized angles and their POVM; ``c=None`` takes the largest positive ``c``."""
    res = optimize_disentangling_angles(j_ising)
    psi = ground_state(j_ising)
    if c is None:
        probe = build_povm(res.angles, 1e-3)
        c = min(probe.c_max, 1.0)
    return res, build_povm(res.angles, c, psi)


# ---------------------------------------------------------------------------
# projective and adaptive scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdaptiveReport:
    j: float
    resolution: float
    projective_possible: bool
    adaptive_possible: bool
    projective_min: float
    projective_point: tuple[float, float]
    adaptive_min: float
    adaptive_point: tuple[float, float, float]
    loci: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)


def adaptive_scan(j_ising: float, resolution: float = 1e-3, threshold: float = 1e-12) -> AdaptiveReport:
    """Search for a projective or an adaptive disentangling measurement.

    Qubit 1 is measured at ``theta1`` and qubit 2 at ``theta2``. Each
    outcome branch ``(s1, s2)`` disentangles on the zero set of its
    end-pair determinant ``D``. A projective scheme needs a common zero of
    all four; an adaptive scheme needs a ``theta1`` such that, for each
    ``s1``, some ``theta2`` zeros both ``D(s1, 0)`` and ``D(s1, 1)``. Both
    are judged by the smallest sum of squared determinants, found on the
    grid and polished locally; below ``threshold`` counts as possible.
    """
    if resolution > MAX_RESOLUTION:
        raise ValueError(f"grid resolution {resolution} coarser than {MAX_RESOLUTION}")
    t = ground_state(j_ising).reshape(2, 2, 2, 2)
    grid = np.arange(0.0, np.pi, resolution)
    th2 = grid[None, :]
    n = grid.size
    branch = [(0, 0), (0, 1), (1, 0), (1, 1)]
    proj_best = (np.inf, 0.0, 0.0)
    adapt_g = np.empty((2, n))
    adapt_arg = np.empty((2, n), dtype=np.int64)
    loci: dict[tuple[int, int], list] = {b: [] for b in branch}
    chunk = max(1, 2_000_000 // n)
    for start in range(0, n, chunk):
        th1 = grid[start : start + chunk, None]
        d = {b: _dets(t, th1, th2, *b) for b in branch}
        for b, v in d.items():
            r, c_ = np.nonzero(np.sign(v[:, :-1]) != np.sign(v[:, 1:]))
            loci[b].append(np.column_stack([th1[r, 0], grid[c_]]))
        tot = sum(v**2 for v in d.values())
        k = np.unravel_index(np.argmin(tot), tot.shape)
        if tot[k] < proj_best[0]:
            proj_best = (float(tot[k]), float(th1[k[0], 0]), float(grid[k[1]]))
        for s1 in (0, 1):
            g = d[(s1, 0)] ** 2 + d[(s1, 1)] ** 2
            adapt_arg[s1, start : start + chunk] = np.argmin(g, axis=1)
            adapt_g[s1, start : start + chunk] = g[np.arange(g.shape[0]), adapt_arg[s1, start : start + chunk]]

    def proj_obj(x):
        return float(sum(_dets(t, x[0], x[1], *b) ** 2 for b in branch))

    pr = minimize(proj_obj, [proj_best[1], proj_best[2]], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 4000})
    proj_min = min(pr.fun, proj_best[0])
    proj_pt = tuple(pr.x) if pr.fun <= proj_best[0] else proj_best[1:]

    worst = adapt_g.max(axis=0)
    k = int(np.argmin(worst))
    x0 = [grid[k], grid[adapt_arg[0, k]], grid[adapt_arg[1, k]]]

    def adapt_obj(x):
        return float(
            max(
                _dets(t, x[0], x[1], 0, 0) ** 2 + _dets(t, x[0], x[1], 0, 1) ** 2,
                _dets(t, x[0], x[2], 1, 0) ** 2 + _dets(t, x[0], x[2], 1, 1) ** 2,
            )
        )

    ar = minimize(adapt_obj, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 6000})
    adapt_min = min(ar.fun, float(worst[k]))
    adapt_pt = tuple(ar.x) if ar.fun <= worst[k] else tuple(x0)
    return AdaptiveReport(
        j=float(j_ising),
        resolution=resolution,
        projective_possible=bool(proj_min < threshold),
        adaptive_possible=bool(adapt_min < threshold),
        projective_min=float(proj_min),
        projective_point=tuple(float(x) for x in proj_pt),
        adaptive_min=float(adapt_min),
        adaptive_point=tuple(float(x) for x in adapt_pt),
        loci={b: np.concatenate(v) for b, v in loci.items()},
    )


# ---------------------------------------------------------------------------
# longer chains (approximate)
# ---------------------------------------------------------------------------


def chain_disentangle(n_sites: int, j_ising: float, classes: tuple[int, ...]) -> tuple[float, float]:
    """Approximate scheme on an ``n_sites`` open chain.

    Every middle pair ``(1, 2), (3, 4), ...`` is measured at the
    four-qubit angle of its requested outcome class and post-selected on
    that class. Returns ``(probability, residual entropy of the ends)``.
    The angles are only close to optimal for ``n_sites > 4``.
    """
    if n_sites % 2 or n_sites < 4 or n_sites > oracle.MAX_SITES:
        raise ValueError(f"n_sites must be even and between 4 and {oracle.MAX_SITES}")
    n_pairs = (n_sites - 2) // 2
    if len(classes) != n_pairs or any(s not in OUTCOME_CLASSES for s in classes):
        raise ValueError(f"need {n_pairs} outcome classes from {OUTCOME_CLASSES}")
    angles = optimize_disentangling_angles(j_ising).angles
    psi = oracle.ground_state_dense(chain_params(j_ising, n_sites)).amplitudes
    t = psi.reshape((2,) * n_sites)
    branches = [()]
    for s in classes:
        branches = [b + o for b in branches for o in _BRANCHES[s]]
    total_p = 0.0
    ends = []
    for b in branches:
        cur = t
        for pair, (o1, o2) in enumerate(zip(b[0::2], b[1::2])):
            th = angles[classes[pair]]
            v = oracle.basis_vectors(th)
            cur = np.tensordot(cur, v[o1], axes=([1], [0]))
            cur = np.tensordot(cur, v[o2], axes=([1], [0]))
        m = cur.reshape(2, 2)
        total_p += float(np.sum(m**2))
        ends.append(m)
    ent = sum(np.sum(m**2) * pair_entropy(m) for m in ends) / total_p if total_p > 0 else 0.0
    return total_p, float(ent)
