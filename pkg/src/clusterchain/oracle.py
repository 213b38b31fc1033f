"""Dense state-vector reference simulator for short chains.

Site ``k`` (0-based) is tensor axis ``k`` and the most significant bit of
the basis index; ``|0>`` is the ``+1`` eigenstate of Z. Everything here is
brute force and meant as ground truth for the faster solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .params import ChainParams

MAX_SITES = 14
MAX_EXHAUSTIVE = 12
_DENSE_LIMIT = 512


@dataclass(frozen=True)
class DenseState:
    amplitudes: np.ndarray
    energy: float = float("nan")
    gap: float = float("nan")
    degenerate: bool = False

    @property
    def n_sites(self) -> int:
        return int(round(np.log2(self.amplitudes.size)))


def _masks(n: int, ops: dict[int, str]) -> tuple[int, int, int]:
    flip = 0
    sign = 0
    n_y = 0
    for site, p in ops.items():
        bit = 1 << (n - 1 - site)
        p = p.upper()
        if p == "X":
            flip |= bit
        elif p == "Z":
            sign |= bit
        elif p == "Y":
            flip |= bit
            sign |= bit
            n_y += 1
        elif p != "I":
            raise ValueError(f"unknown Pauli {p!r}")
    return flip, sign, n_y


def _signs(n: int, sign_mask: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return 1.0 - 2.0 * (np.bitwise_count(idx & sign_mask) & 1)


def apply_pauli_string(psi: np.ndarray, ops: dict[int, str]) -> np.ndarray:
    """Return ``O psi`` for ``O`` the tensor product described by ``ops``."""
    psi = np.asarray(psi).reshape(-1)
    n = int(round(np.log2(psi.size)))
    for site in ops:
        if not 0 <= site < n:
            raise IndexError(f"site {site} outside chain of {n}")
    flip, sign_mask, n_y = _masks(n, ops)
    idx = np.arange(1 << n, dtype=np.int64)
    # (O psi)[i] = i^nY (-1)^{popcount(j & zy)} psi[j], with j = i ^ flip
    j = idx ^ flip
    out = _signs(n, sign_mask)[j] * psi[j]
    phase = 1j**n_y
    if phase == 1:
        return out
    if phase == -1:
        return -out
    return phase * out


def expectation_dense(psi: np.ndarray, ops: dict[int, str]) -> float:
    psi = np.asarray(psi).reshape(-1)
    val = np.vdot(psi, apply_pauli_string(psi, ops))
    return float(np.real(val))


class _Hamiltonian:
    """Matrix-free Hamiltonian grouped by bit-flip pattern."""

    def __init__(self, params: ChainParams):
        n = params.n_sites
        self.n = n
        self.dim = 1 << n
        self.diag = np.zeros(self.dim)
        groups: dict[int, np.ndarray] = {}
        for coef, ops in params.terms():
            flip, sign_mask, n_y = _masks(n, ops)
            if n_y % 2:
                raise ValueError("odd number of Y operators gives a complex Hamiltonian")
            vec = coef * (1j**n_y).real * _signs(n, sign_mask)
            if flip == 0:
                self.diag += vec
            else:
                # stored on the source index j: contributes to row j ^ flip
                groups[flip] = groups.get(flip, 0.0) + vec
        self.groups = list(groups.items())
        self._idx = np.arange(self.dim, dtype=np.int64)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        for flip, vec in self.groups:
            j = self._idx ^ flip
            out = out + vec[j].reshape((-1,) + (1,) * (v.ndim - 1)) * v[j]
        return out

    def operator(self) -> LinearOperator:
        return LinearOperator(
            (self.dim, self.dim), matvec=self.matvec, matmat=self.matvec, dtype=float
        )

    def dense(self) -> np.ndarray:
        return self.matvec(np.eye(self.dim))


def hamiltonian_operator(params: ChainParams) -> LinearOperator:
    _check_size(params.n_sites)
    return _Hamiltonian(params).operator()


def hamiltonian_dense(params: ChainParams) -> np.ndarray:
    _check_size(params.n_sites)
    return _Hamiltonian(params).dense()


def _check_size(n: int) -> None:
    if n > MAX_SITES:
        raise ValueError(f"dense oracle limited to {MAX_SITES} sites, got {n}")


def low_spectrum(params: ChainParams, k: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs, sorted ascending."""
    _check_size(params.n_sites)
    ham = _Hamiltonian(params)
    if ham.dim <= _DENSE_LIMIT:
        w, v = np.linalg.eigh(ham.dense())
        return w[:k], v[:, :k]
    w, v = eigsh(ham.operator(), k=k, which="SA", tol=1e-13, maxiter=20000)
    order = np.argsort(w)
    return w[order], v[:, order]


def ground_state_dense(params: ChainParams, degeneracy_tol: float = 1e-10) -> DenseState:
    """Lowest eigenvector of the chain Hamiltonian.

    When the two lowest levels are degenerate within ``degeneracy_tol`` the
    returned vector is the combination with the largest overlap on the
    ``prod X = +1`` sector (the global spin-flip symmetry of ``B_z = 0``),
    and the state is flagged as degenerate.
    """
    w, v = low_spectrum(params, k=3)
    gap = float(w[1] - w[0])
    psi = v[:, 0]
    degenerate = gap < degeneracy_tol
    if degenerate:
        n = params.n_sites
        sub = v[:, w - w[0] < degeneracy_tol]
        flipped = np.stack([apply_pauli_string(c, {k: "X" for k in range(n)}) for c in sub.T], 1)
        overlap = sub.T @ flipped
        ew, ev = np.linalg.eigh((overlap + overlap.T) / 2)
        psi = sub @ ev[:, -1]
    psi = _fix_sign(psi / np.linalg.norm(psi))
    return DenseState(psi, float(w[0]), gap, degenerate)


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(psi) > 1e-12 * np.abs(psi).max()))
    return psi if psi[k] > 0 else -psi


def energy_dense(params: ChainParams, psi: np.ndarray) -> float:
    psi = np.asarray(psi).reshape(-1)
    return float(np.real(np.vdot(psi, _Hamiltonian(params).matvec(psi))))


def cluster_state_dense(n: int, periodic: bool = True) -> np.ndarray:
    """Controlled-phase gates applied to ``|+>^n``."""
    _check_size(n)
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    bonds = n if periodic else n - 1
    phase = np.zeros(1 << n, dtype=np.int64)
    for mu in range(bonds):
        phase += bits[:, mu] * bits[:, (mu + 1) % n]
    return (1 - 2 * (phase & 1)) / np.sqrt(1 << n)


def product_state_dense(single: np.ndarray, n: int) -> np.ndarray:
    psi = np.array([1.0])
    for _ in range(n):
        psi = np.kron(psi, single)
    return psi


def apply_cz_chain(psi: np.ndarray, periodic: bool = True) -> np.ndarray:
    psi = np.asarray(psi).reshape(-1)
    n = int(round(np.log2(psi.size)))
    return cluster_state_dense(n, periodic) * np.sqrt(1 << n) * psi


def basis_vectors(angle: float) -> np.ndarray:
    """Rows are the outcome-0 and outcome-1 vectors of an x-z measurement."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class Branches:
    """Every outcome branch of a fixed measurement plan."""

    sites: tuple[int, ...]
    kept: tuple[int, ...]
    outcomes: np.ndarray  # (n_branch, n_measured) bits
    probabilities: np.ndarray
    residuals: np.ndarray  # (n_branch, 2**len(kept)) normalized


def enumerate_protocol(psi: np.ndarray, plan: list[tuple[int, float]]) -> Branches:
    """Exhaustive Born-rule enumeration of a single-qubit measurement plan."""
    psi = np.asarray(psi).reshape(-1)
    n = int(round(np.log2(psi.size)))
    sites = tuple(int(s) for s, _ in plan)
    if len(set(sites)) != len(sites):
        raise ValueError("plan measures a site twice")
    if len(sites) > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive mode limited to {MAX_EXHAUSTIVE} measured sites")
    kept = tuple(k for k in range(n) if k not in sites)
    t = psi.reshape((2,) * n)
    # move measured axes to the front in plan order
    t = np.moveaxis(t, sites, range(len(sites)))
    for pos, (_, angle) in enumerate(plan):
        t = np.moveaxis(np.tensordot(basis_vectors(angle), t, axes=([1], [pos])), 0, pos)
    m = len(sites)
    amps = t.reshape(1 << m, -1)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    norms = np.sqrt(np.where(probs > 0, probs, 1.0))
    residuals = amps / norms[:, None]
    idx = np.arange(1 << m)
    outcomes = (idx[:, None] >> (m - 1 - np.arange(m))) & 1
    return Branches(sites, kept, outcomes, probs, residuals)


def reduced_density_matrix(psi: np.ndarray, sites: list[int]) -> np.ndarray:
    psi = np.asarray(psi).reshape(-1)
    n = int(round(np.log2(psi.size)))
    rest = [k for k in range(n) if k not in sites]
    t = np.transpose(psi.reshape((2,) * n), list(sites) + rest).reshape(1 << len(sites), -1)
    return t @ t.conj().T


def entropy_dense(psi: np.ndarray, sites: list[int]) -> float:
    """Von Neumann entropy in bits of the reduced state on ``sites``."""
    w = np.linalg.eigvalsh(reduced_density_matrix(psi, sites))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def majorana_strings(n: int) -> list[dict[int, str]]:
    """Majorana operators as Pauli strings in the original spin frame.

    In the frame with x and z swapped, ``c_{2m} = Z..Z X_m`` and
    ``c_{2m+1} = Z..Z Y_m`` (0-based ``m``). Mapping back sends
    ``X' -> Z``, ``Z' -> X`` and ``Y' -> -Y``; the sign of ``Y`` is
    returned separately by :func:`majorana_correlation_dense`.
    """
    out = []
    for m in range(n):
        string = {k: "X" for k in range(m)}
        out.append({**string, m: "Z"})
        out.append({**string, m: "Y"})
    return out


def majorana_correlation_dense(psi: np.ndarray) -> np.ndarray:
    """``Gamma_ij = i <c_i c_j>`` for ``i != j`` (convention ``{c_i, c_j} = 2 delta``)."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = int(round(np.log2(psi.size)))
    strings = majorana_strings(n)
    signs = np.array([1.0 if k % 2 == 0 else -1.0 for k in range(2 * n)])
    vecs = np.stack([s * apply_pauli_string(psi, op) for s, op in zip(signs, strings)])
    # <c_i c_j> = <c_i psi | c_j psi>
    g = 1j * (vecs.conj() @ vecs.T)
    np.fill_diagonal(g, 0.0)
    return np.real(g)
