"""Exact solution of the ``B_z = 0`` chain through a Jordan-Wigner transform.

After swapping x and z, every term of the Hamiltonian is a Majorana
bilinear. With ``c_{2m} = (prod_{k<m} Z_k) X_m`` and
``c_{2m+1} = (prod_{k<m} Z_k) Y_m`` (0-based sites, swapped frame,
``{c_i, c_j} = 2 delta_ij``)

    Z_m             = -i c_{2m}   c_{2m+1}
    X_m X_{m+1}     = -i c_{2m+1} c_{2m+2}
    X_{m-1} Z_m X_{m+1} = -i c_{2m-1} c_{2m+2}

so ``H = (i/4) sum_ij A_ij c_i c_j`` with ``A`` real antisymmetric. Terms
that wrap around a periodic chain pick up a factor ``-P`` where ``P`` is
the conserved parity ``prod Z`` (``prod X`` in the original frame).

``A`` only couples even to odd Majoranas, so it is fixed by the ``N x N``
block ``M_mn = A_{2m, 2n+1}``. With ``M = U S V^T`` the single-particle
energies are the singular values and the ground-state correlation matrix
``Gamma_ij = i <c_i c_j>`` has even-odd block ``-U V^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import ChainParams, dual_point, phase_label  # noqa: F401  (re-exported)

ZERO_MODE_TOL = 1e-12


class Sector(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    OPEN = "open"

    @property
    def parity(self) -> int:
        return {"plus": 1, "minus": -1, "open": 0}[self.value]


@dataclass(frozen=True)
class MajoranaCoupling:
    """Real antisymmetric generator ``A`` of ``H = (i/4) c^T A c``."""

    matrix: np.ndarray
    parity_sector: Sector

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0] // 2

    def block(self) -> np.ndarray:
        return self.matrix[0::2, 1::2]

    def single_particle_energies(self) -> np.ndarray:
        """Ascending mode energies (cost of occupying each mode)."""
        return np.sort(np.linalg.svd(self.block(), compute_uv=False))


@dataclass(frozen=True)
class CorrelationMatrix:
    """``Gamma_ij = i <c_i c_j>`` (``i != j``) of a pure Gaussian state."""

    gamma: np.ndarray
    energy: float
    parity: int
    sector: Sector
    degenerate: bool = False

    @property
    def n_sites(self) -> int:
        return self.gamma.shape[0] // 2


def _check(params: ChainParams) -> None:
    if params.b_z != 0:
        raise ValueError("B_z != 0 has no free-fermion solution")
    if params.n_sites < 3:
        raise ValueError("need at least 3 sites")
    if not params.periodic and params.end_stabilizers:
        raise ValueError(
            "truncated end stabilizers are odd in Majorana operators; "
            "use end_stabilizers=False for the open free-fermion chain"
        )


def build_majorana_coupling(params: ChainParams, sector: Sector | str | None = None) -> MajoranaCoupling:
    _check(params)
    if sector is None:
        sector = Sector.PLUS if params.periodic else Sector.OPEN
    sector = Sector(sector)
    if params.periodic == (sector is Sector.OPEN):
        raise ValueError(f"sector {sector.value} does not match boundary {params.boundary.value}")
    n = params.n_sites
    two_n = 2 * n
    a = np.zeros((two_n, two_n))
    boundary_factor = -float(sector.parity)

    def add(i: int, j: int, h: float) -> None:
        wraps = i < 0 or j >= two_n
        if wraps:
            if sector is Sector.OPEN:
                return
            h = h * boundary_factor
        i %= two_n
        j %= two_n
        a[i, j] += 2 * h
        a[j, i] -= 2 * h

    for m in range(n):
        add(2 * m, 2 * m + 1, params.b_x)
        if m < n - 1 or params.periodic:
            add(2 * m + 1, 2 * m + 2, params.j_ising)
        if params.periodic or 0 < m < n - 1:
            add(2 * m - 1, 2 * m + 2, 1.0)
    return MajoranaCoupling(a, sector)


def _gaussian_ground(coupling: MajoranaCoupling) -> tuple[np.ndarray, float, int, bool]:
    """Lowest state of the quadratic form compatible with the sector parity."""
    m = coupling.block()
    n = m.shape[0]
    u, s, vt = np.linalg.svd(m)
    degenerate = bool(s.min() < ZERO_MODE_TOL)
    energy = -0.5 * float(s.sum())
    parity = int(round(np.linalg.det(u) * np.linalg.det(vt)))
    target = coupling.parity_sector.parity
    flip = np.ones(n)
    if target != 0 and parity != target:
        k = int(np.argmin(s))
        flip[k] = -1.0
        energy += float(s[k])
        parity = target
    g = -(u * flip) @ vt
    gamma = np.zeros((2 * n, 2 * n))
    gamma[0::2, 1::2] = g
    gamma[1::2, 0::2] = -g.T
    return gamma, energy, parity, degenerate


def correlation_matrix(coupling: MajoranaCoupling) -> CorrelationMatrix:
    """Ground-state correlation matrix within the coupling's parity sector.

    If the quasiparticle vacuum has the wrong fermion parity, the lowest
    mode is occupied. Zero modes (below ``ZERO_MODE_TOL``) are paired
    arbitrarily and left unoccupied; ``degenerate`` is set in that case.
    """
    gamma, energy, parity, degenerate = _gaussian_ground(coupling)
    return CorrelationMatrix(gamma, energy, parity, coupling.parity_sector, degenerate)


def _sectors(params: ChainParams) -> list[Sector]:
    return [Sector.PLUS, Sector.MINUS] if params.periodic else [Sector.OPEN]


def ground_sector_and_energy(params: ChainParams) -> tuple[Sector, float]:
    best = None
    for sector in _sectors(params):
        _, e, _, _ = _gaussian_ground(build_majorana_coupling(params, sector))
        if best is None or e < best[1]:
            best = (sector, e)
    return best


def low_energies(params: ChainParams, k: int = 2) -> np.ndarray:
    """The ``k`` lowest many-body energies (``k <= 2``) over all sectors."""
    out = []
    for sector in _sectors(params):
        coupling = build_majorana_coupling(params, sector)
        m = coupling.block()
        u, s, vt = np.linalg.svd(m)
        s = np.sort(s)
        e_vac = -0.5 * s.sum()
        if sector is Sector.OPEN:
            out += [e_vac, e_vac + s[0]]
            continue
        parity = int(round(np.linalg.det(u) * np.linalg.det(vt)))
        if parity == sector.parity:
            out += [e_vac, e_vac + s[0] + s[1]]
        else:
            out += [e_vac + s[0], e_vac + s[1]]
    return np.sort(out)[:k]


def excitation_gap(params: ChainParams) -> float:
    e = low_energies(params, 2)
    return float(e[1] - e[0])


def ground_state(params: ChainParams) -> CorrelationMatrix:
    sector, _ = ground_sector_and_energy(params)
    return correlation_matrix(build_majorana_coupling(params, sector))


def local_x_expectation(gamma: CorrelationMatrix, site: int) -> float:
    """``<X_site>`` of the original model (0-based site)."""
    n = gamma.n_sites
    if not 0 <= site < n:
        raise IndexError(f"site {site} outside chain of {n}")
    return float(-gamma.gamma[2 * site, 2 * site + 1])


def local_z_expectation(gamma: CorrelationMatrix, site: int) -> float:
    # odd in Majoranas, so zero for any parity eigenstate
    return pauli_expectation(gamma, {site: "Z"})


# ---------------------------------------------------------------------------
# Pauli strings through Wick's theorem
# ---------------------------------------------------------------------------

_SWAP = {"X": ("Z", 1), "Z": ("X", 1), "Y": ("Y", -1), "I": ("I", 1)}


def _majorana_word(n: int, ops: dict[int, str]) -> tuple[complex, np.ndarray]:
    """Reduce a Pauli string (original frame) to ``phase * c_i1 ... c_ik``."""
    present = np.zeros(2 * n, dtype=bool)
    phase: complex = 1.0

    def push(idx: int) -> None:
        nonlocal phase
        # move c_idx left past every larger index already present
        if np.count_nonzero(present[idx + 1 :]) % 2:
            phase = -phase
        present[idx] = not present[idx]

    for site in sorted(ops):
        if not 0 <= site < n:
            raise IndexError(f"site {site} outside chain of {n}")
        p, sign = _SWAP[ops[site].upper()]
        phase *= sign
        if p == "I":
            continue
        if p == "Z":
            phase *= -1j
            push(2 * site)
            push(2 * site + 1)
            continue
        phase *= (-1j) ** site
        for k in range(2 * site):
            push(k)
        push(2 * site if p == "X" else 2 * site + 1)
    return phase, np.flatnonzero(present)


def majorana_expectation(gamma: np.ndarray, indices: np.ndarray) -> complex:
    """``<c_i1 ... c_i2k>`` for sorted distinct indices, Gaussian state."""
    k2 = len(indices)
    if k2 == 0:
        return 1.0
    if k2 % 2:
        return 0.0
    evens = indices[indices % 2 == 0]
    odds = indices[indices % 2 == 1]
    if len(evens) != len(odds):
        return 0.0
    k = k2 // 2
    # permutation sign bringing the word to (evens..., odds...)
    is_odd = indices % 2 == 1
    inversions = int(np.sum(np.cumsum(is_odd)[~is_odd]))
    sign = (-1) ** (inversions + k * (k - 1) // 2)
    det = np.linalg.det(gamma[np.ix_(evens, odds)])
    return sign * det * (-1j) ** k


def pauli_expectation(gamma: CorrelationMatrix, ops: dict[int, str]) -> float:
    """Expectation of a Pauli string given in the original spin frame."""
    phase, word = _majorana_word(gamma.n_sites, ops)
    val = phase * majorana_expectation(gamma.gamma, word)
    if abs(np.imag(val)) > 1e-9 * max(1.0, abs(val)):
        raise ArithmeticError(f"non-Hermitian string {ops}")
    return float(np.real(val))


@dataclass(frozen=True)
class StringSpec:
    """A string operator localizing a pair ``(a, b)`` (0-based, ``a < b``).

    ``zx``  Z_a X_{a+1} X_{a+3} ... X_b Z_{b+1}
    ``xz``  Z_{a-1} X_a X_{a+2} ... X_{b-1} Z_b
    ``yy``  Z_{a-1} Y_a X_{a+1} ... X_{b-1} Y_b Z_{b+1}
    ``el``  Y_a X_{a+1} ... X_{b-1} Y_b

    The first three need ``b - a`` odd and are all ``+1`` on the cluster
    state; ``yy`` is the product of ``zx`` and ``xz``, i.e. the string
    whose value is ``<Y_a Y_b>`` after the measurements and Pauli
    corrections. The last is the end-to-end localizable-entanglement
    string.
    """

    pattern: str
    a: int
    b: int

    def operators(self, n_sites: int) -> dict[int, str]:
        a, b, pat = self.a, self.b, self.pattern.lower()
        if not 0 <= a < b < n_sites:
            raise ValueError(f"need 0 <= a < b < {n_sites}, got {a}, {b}")
        if pat in ("zx", "xz", "yy") and (b - a) % 2 == 0:
            raise ValueError(f"{pat} string needs an odd separation, got {b - a}")
        if pat in ("xz", "yy") and a < 1:
            raise ValueError(f"{pat} string needs a site before a")
        if pat in ("zx", "yy") and b + 1 >= n_sites:
            raise ValueError(f"{pat} string needs a site after b")
        if pat == "zx":
            ops = {j: "X" for j in range(a + 1, b + 1, 2)}
            ops.update({a: "Z", b + 1: "Z"})
        elif pat == "xz":
            ops = {j: "X" for j in range(a, b, 2)}
            ops.update({a - 1: "Z", b: "Z"})
        elif pat == "yy":
            ops = {j: "X" for j in range(a + 1, b)}
            ops.update({a - 1: "Z", a: "Y", b: "Y", b + 1: "Z"})
        elif pat == "el":
            ops = {j: "X" for j in range(a + 1, b)}
            ops.update({a: "Y", b: "Y"})
        else:
            raise ValueError(f"unknown string pattern {self.pattern!r}")
        return ops

    @classmethod
    def full_chain(cls, pattern: str, n_sites: int) -> "StringSpec":
        """The pair ``(1, N-2)`` used on an ``N``-site chain (``N`` even)."""
        if pattern == "el":
            return cls(pattern, 0, n_sites - 1)
        return cls(pattern, 1, n_sites - 2)


def string_correlator(gamma: CorrelationMatrix, spec: StringSpec) -> float:
    return pauli_expectation(gamma, spec.operators(gamma.n_sites))


def block_entropy(gamma: CorrelationMatrix, first: int, last: int) -> float:
    """Entropy in bits of the contiguous block ``first..last`` (inclusive)."""
    n = gamma.n_sites
    if not 0 <= first <= last < n:
        raise IndexError(f"block {first}..{last} outside chain of {n}")
    sub = gamma.gamma[2 * first : 2 * last + 2, 2 * first : 2 * last + 2]
    lam = np.linalg.eigvalsh(1j * sub)
    lam = np.clip(lam[lam.size // 2 :], 0.0, 1.0)
    p = (1 + lam) / 2
    q = 1 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return float(np.sum(h))
