"""Chain parameters shared by every solver."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class ChainParams:
    """Parameters of ``H = -sum K_mu - sum (B_x X + B_z Z) - J sum Z Z``.

    ``K_mu = Z_{mu-1} X_mu Z_{mu+1}`` is the cluster stabilizer. On an open
    chain the end stabilizers are truncated to ``X_1 Z_2`` and
    ``Z_{N-1} X_N`` when ``end_stabilizers`` is true, and dropped otherwise
    (the dropped form is the one that stays quadratic in Majorana fermions).
    """

    n_sites: int
    j_ising: float = 0.0
    b_x: float = 0.0
    b_z: float = 0.0
    boundary: Boundary = Boundary.PERIODIC
    end_stabilizers: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if int(self.n_sites) != self.n_sites or self.n_sites < 3:
            raise ValueError(f"n_sites must be an integer >= 3, got {self.n_sites}")
        if self.j_ising < 0:
            raise ValueError(f"j_ising must be nonnegative, got {self.j_ising}")

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    def with_(self, **changes) -> "ChainParams":
        from dataclasses import replace

        return replace(self, **changes)

    def terms(self) -> list[tuple[float, dict[int, str]]]:
        """Hamiltonian as ``(coefficient, {site: pauli})`` terms, sites 0-based."""
        n = self.n_sites
        out: list[tuple[float, dict[int, str]]] = []
        if self.periodic:
            for mu in range(n):
                out.append((-1.0, {(mu - 1) % n: "Z", mu: "X", (mu + 1) % n: "Z"}))
        else:
            for mu in range(1, n - 1):
                out.append((-1.0, {mu - 1: "Z", mu: "X", mu + 1: "Z"}))
            if self.end_stabilizers:
                out.append((-1.0, {0: "X", 1: "Z"}))
                out.append((-1.0, {n - 2: "Z", n - 1: "X"}))
        bonds = n if self.periodic else n - 1
        if self.j_ising != 0.0:
            for mu in range(bonds):
                out.append((-self.j_ising, {mu: "Z", (mu + 1) % n: "Z"}))
        for mu in range(n):
            if self.b_x != 0.0:
                out.append((-self.b_x, {mu: "X"}))
            if self.b_z != 0.0:
                out.append((-self.b_z, {mu: "Z"}))
        return out


def dual_point(j_ising: float, b_x: float) -> tuple[float, float]:
    """Image of ``(J, B_x)`` under the controlled-phase duality."""
    if b_x == 0:
        raise ValueError("dual point undefined for B_x = 0")
    return j_ising / b_x, 1.0 / b_x


def phase_label(j_ising: float, b_x: float) -> str:
    """Approximate phase at ``B_z = 0`` using the linear critical lines.

    The cluster/Ising line is taken as ``B_x = 1 - J`` and the
    Ising/separable line as ``B_x = 1 + J``; both are approximations.
    """
    if b_x + j_ising < 1.0:
        return "cluster"
    if b_x > 1.0 + j_ising:
        return "separable"
    return "ising"
