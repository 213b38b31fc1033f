"""Localizable entanglement by Monte Carlo sampling of measurement records.

The protocol on a ring keeps two sites ``a < b`` with ``b - a`` odd,
measures every site strictly between them in X, the ``n_z`` sites beyond
each endpoint in Z, and whatever remains of the ring in X. For the cluster
state the Z measurements cut the ring, so the far arc plays no role.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import mps
from .mps import MatrixProductState, MeasurementPlan, MeasurementRecord

X_ANGLE = np.pi / 4
Z_ANGLE = 0.0
NEAR_MAXIMAL = 0.99

_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LABELS = [p + q for p in "IXYZ" for q in "IXYZ" if p + q != "II"]

# two-qubit cluster state CZ|++> and its Pauli partners on b
CLUSTER_PAIR = np.array([1.0, 1.0, 1.0, -1.0]) / 2
_XB = np.kron(np.eye(2), _P1["X"].real)
_ZB = np.kron(np.eye(2), _P1["Z"].real)
C00 = CLUSTER_PAIR
C11 = _XB @ _ZB @ CLUSTER_PAIR


# ---------------------------------------------------------------------------
# protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolSpec:
    """Measurement protocol between sites ``a`` and ``b`` of a ring."""

    n_sites: int
    a: int = 0
    b: int | None = None
    n_z: int = 2

    def __post_init__(self) -> None:
        if self.n_z < 1:
            raise ValueError("n_z must be at least 1")
        b = self.b
        if b is None:
            b = self.a + self.max_separation(self.n_sites, self.n_z)
            object.__setattr__(self, "b", b)
        sep = b - self.a
        if not 0 <= self.a < b < self.n_sites:
            raise ValueError("endpoints must satisfy 0 <= a < b < n_sites")
        if sep % 2 == 0:
            raise ValueError("the endpoint separation b - a must be odd")
        if self.n_sites - sep - 1 < 2 * self.n_z:
            raise ValueError("ring too short for n_z Z measurements on both sides")

    @staticmethod
    def max_separation(n_sites: int, n_z: int = 2) -> int:
        sep = n_sites - 1 - 2 * n_z
        if sep % 2 == 0:
            sep -= 1
        if sep < 1:
            raise ValueError("ring too short for this protocol")
        return sep

    @classmethod
    def with_separation(cls, n_sites: int, separation: int, n_z: int = 2) -> "ProtocolSpec":
        return cls(n_sites, 0, separation, n_z)

    @property
    def separation(self) -> int:
        return self.b - self.a

    def z_sites(self) -> tuple[list[int], list[int]]:
        """Z-measured sites before ``a`` and after ``b``, nearest first."""
        n = self.n_sites
        before = [(self.a - k) % n for k in range(1, self.n_z + 1)]
        after = [(self.b + k) % n for k in range(1, self.n_z + 1)]
        return before, after

    def plan(self) -> MeasurementPlan:
        before, after = self.z_sites()
        z = set(before) | set(after)
        entries = []
        for k in range(self.n_sites):
            if k in (self.a, self.b):
                continue
            entries.append((k, Z_ANGLE if k in z else X_ANGLE))
        return MeasurementPlan(tuple(entries))


@dataclass(frozen=True)
class PauliCorrection:
    """``Z_b^z_power X_b^x_power`` applied to the kept pair."""

    z_power: int
    x_power: int

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(2)
        if self.x_power:
            m = _P1["X"].real @ m
        if self.z_power:
            m = _P1["Z"].real @ m
        return m

    def apply(self, pair: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(2), self.matrix) @ pair


def pauli_correction(record: MeasurementRecord, protocol: ProtocolSpec) -> PauliCorrection:
    """Correction on ``b`` after the standard protocol.

    X outcomes at odd offsets ``a+1, a+3, ..., b-2`` and the Z outcome next
    to ``b`` set the Z power; X outcomes at even offsets ``a+2, ..., b-1``
    and the Z outcome next to ``a`` set the X power. At the cluster point
    every corrected record is exactly ``CZ|++>``.
    """
    out = dict(zip(record.sites, record.outcomes))
    a, b = protocol.a, protocol.b
    n = protocol.n_sites
    z_pow = sum(out[k] for k in range(a + 1, b - 1, 2)) + out[(b + 1) % n]
    x_pow = sum(out[k] for k in range(a + 2, b, 2)) + out[(a - 1) % n]
    return PauliCorrection(int(z_pow % 2), int(x_pow % 2))


def _corrections(outcomes: np.ndarray, sites: Sequence[int], protocol: ProtocolSpec) -> tuple[np.ndarray, np.ndarray]:
    col = {s: i for i, s in enumerate(sites)}
    a, b, n = protocol.a, protocol.b, protocol.n_sites
    odd = [col[k] for k in range(a + 1, b - 1, 2)] + [col[(b + 1) % n]]
    even = [col[k] for k in range(a + 2, b, 2)] + [col[(a - 1) % n]]
    o = outcomes.astype(np.int64)
    return o[:, odd].sum(1) % 2, o[:, even].sum(1) % 2


def apply_corrections(residuals: np.ndarray, z_pow: np.ndarray, x_pow: np.ndarray) -> np.ndarray:
    """Apply per-record corrections to residual pairs ``psi[s_a * 2 + s_b]``."""
    out = np.array(residuals, dtype=float, copy=True)
    xs = x_pow.astype(bool)
    out[xs] = out[xs][:, [1, 0, 3, 2]]
    zs = z_pow.astype(bool)
    out[np.ix_(zs, [1, 3])] *= -1
    return out


# ---------------------------------------------------------------------------
# two-qubit states
# ---------------------------------------------------------------------------


def concurrence(pair: np.ndarray) -> np.ndarray:
    """Concurrence ``2|ad - bc|`` of pure pair states (last axis of length 4)."""
    pair = np.asarray(pair)
    return 2 * np.abs(pair[..., 0] * pair[..., 3] - pair[..., 1] * pair[..., 2])


@dataclass(frozen=True)
class TwoQubitTomogram:
    """All 15 non-trivial Pauli correlations of a two-qubit state."""

    pauli_correlations: dict[str, float]
    purity: float

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "TwoQubitTomogram":
        corr = {}
        for lab in _LABELS:
            op = np.kron(_P1[lab[0]], _P1[lab[1]])
            corr[lab] = float(np.real(np.trace(rho @ op)))
        purity = float(np.real(np.trace(rho @ rho)))
        return cls(corr, purity)

    @classmethod
    def from_state(cls, pair: np.ndarray) -> "TwoQubitTomogram":
        pair = np.asarray(pair, dtype=complex)
        pair = pair / np.linalg.norm(pair)
        return cls.from_density(np.outer(pair, pair.conj()))

    def __getitem__(self, label: str) -> float:
        return self.pauli_correlations[label.upper()]

    def density(self) -> np.ndarray:
        rho = np.kron(_P1["I"], _P1["I"]).copy()
        for lab, v in self.pauli_correlations.items():
            rho += v * np.kron(_P1[lab[0]], _P1[lab[1]])
        return rho / 4


def cluster_pair_tomogram() -> TwoQubitTomogram:
    return TwoQubitTomogram.from_state(CLUSTER_PAIR)


def pair_correlations(pairs: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized ``zx, xz, xx, zz, yy`` correlations of real pure pair states."""
    p = np.asarray(pairs, dtype=float)
    a, b, c, d = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    return {
        "zx": 2 * (a * b - c * d),
        "xz": 2 * (a * c - b * d),
        "xx": 2 * (a * d + b * c),
        "zz": a * a - b * b - c * c + d * d,
        "yy": 2 * (b * c - a * d),
    }


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalizableEstimate:
    mean: float
    std_err: float
    n_samples: int
    protocol: ProtocolSpec
    outcomes: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    concurrences: np.ndarray = field(repr=False)
    corrected: np.ndarray = field(repr=False)

    def __iter__(self) -> Iterator[float]:
        return iter((self.mean, self.std_err))


def sample_protocol(
    state: MatrixProductState, protocol: ProtocolSpec, n_samples: int, seed=None
) -> LocalizableEstimate:
    """Sample records, correct them and collect the residual concurrences."""
    if state.n_sites != protocol.n_sites:
        raise ValueError("state and protocol lengths differ")
    plan = protocol.plan()
    batch = mps.sample_plan_batch(state, plan, n_samples, seed)
    return _estimate(batch, protocol)


def _estimate(batch: mps.SampleBatch, protocol: ProtocolSpec, weights: np.ndarray | None = None) -> LocalizableEstimate:
    z_pow, x_pow = _corrections(batch.outcomes, batch.sites, protocol)
    corrected = apply_corrections(batch.residuals, z_pow, x_pow)
    conc = concurrence(corrected)
    if weights is None:
        mean = float(conc.mean())
        se = float(conc.std(ddof=1) / np.sqrt(conc.size)) if conc.size > 1 else 0.0
    else:
        mean = float(weights @ conc)
        se = 0.0
    return LocalizableEstimate(mean, se, conc.size, protocol, batch.outcomes, batch.probabilities, conc, corrected)


def estimate_localizable_entanglement(
    state: MatrixProductState, protocol: ProtocolSpec, n_samples: int = 2000, seed=None
) -> LocalizableEstimate:
    """Mean concurrence over sampled records with its standard error.

    Unpacks as ``(mean, std_err)``.
    """
    return sample_protocol(state, protocol, n_samples, seed)


def exhaustive_localizable_entanglement(state: MatrixProductState, protocol: ProtocolSpec) -> LocalizableEstimate:
    """Exact Born average over every record (at most 20 measured sites)."""
    batch = mps.enumerate_plan(state, protocol.plan())
    return _estimate(batch, protocol, weights=batch.probabilities)


def entanglement_vs_separation(
    state: MatrixProductState,
    separations: Sequence[int],
    n_samples: int = 2000,
    seed=None,
    n_z: int = 2,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(separations, E_L, std_err)`` with one derived seed per separation."""
    seeds = np.random.SeedSequence(seed).spawn(len(separations))
    means, errs = [], []
    for sep, s in zip(separations, seeds):
        est = estimate_localizable_entanglement(
            state, ProtocolSpec.with_separation(state.n_sites, int(sep), n_z), n_samples, s
        )
        means.append(est.mean)
        errs.append(est.std_err)
    return np.asarray(separations), np.asarray(means), np.asarray(errs)


@dataclass(frozen=True)
class EntanglementLength:
    kind: str  # "infinite" or "finite"
    xi: float
    slope: float
    slope_err: float

    @property
    def infinite(self) -> bool:
        return self.kind == "infinite"


def classify_entanglement_length(
    separations: Sequence[float], values: Sequence[float], errors: Sequence[float], n_sigma: float = 2.0
) -> EntanglementLength:
    """Weighted straight-line fit of ``log E_L`` against separation.

    A slope within ``n_sigma`` standard errors of zero means an infinite
    entanglement length; otherwise ``xi_E = -1 / slope``.
    """
    n = np.asarray(separations, dtype=float)
    e = np.asarray(values, dtype=float)
    err = np.asarray(errors, dtype=float)
    if n.size < 5 or e.size != n.size or err.size != n.size:
        raise ValueError("need at least five separations with matching values and errors")
    if np.any(e <= 0) or np.any(err < 0):
        raise ValueError("entanglement values must be positive and errors non-negative")
    # exact (zero-variance) points still get a finite weight
    sigma = np.maximum(err / e, 1e-6)
    w = 1.0 / sigma**2
    y = np.log(e)
    nm, ym = (w @ n) / w.sum(), (w @ y) / w.sum()
    sxx = w @ (n - nm) ** 2
    slope = (w @ ((n - nm) * (y - ym))) / sxx
    slope_err = 1.0 / np.sqrt(sxx)
    if abs(slope) <= n_sigma * slope_err or slope > 0:
        return EntanglementLength("infinite", float("inf"), float(slope), float(slope_err))
    return EntanglementLength("finite", float(-1.0 / slope), float(slope), float(slope_err))


# ---------------------------------------------------------------------------
# structure of the corrected pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiCharacterization:
    """Angles of near-maximal corrected pairs and the projected statistics.

    ``phi_samples`` holds ``Phi`` in ``(-pi/2, pi/2]`` for pairs passing the
    threshold and the family conditions; ``amplitude`` and ``phase`` are
    ``A`` and ``xi`` in ``<xz>_P = A cos(xi)`` after projection on the
    ``C00, C11`` plane.
    """

    phi_samples: np.ndarray
    p_yy: float
    amplitude: float
    phase: float
    n_near_maximal: int
    n_excluded: int
    max_violation: float
    phase_err: float = float("nan")
    amplitude_err: float = float("nan")


def phi_family_violation(pairs: np.ndarray) -> np.ndarray:
    """Largest deviation from ``yy = 1``, ``zx = xz``, ``xx = -zz`` and ``zx^2 + xx^2 = 1``."""
    c = pair_correlations(pairs)
    return np.max(
        np.abs(
            np.stack(
                [
                    c["yy"] - 1.0,
                    c["zx"] - c["xz"],
                    c["xx"] + c["zz"],
                    c["zx"] ** 2 + c["xx"] ** 2 - 1.0,
                ]
            )
        ),
        axis=0,
    )


def phi_angle(pairs: np.ndarray) -> np.ndarray:
    """``Phi = atan2(xx, zx) / 2``; exact for ``cos(Phi) C00 + sin(Phi) C11``."""
    c = pair_correlations(pairs)
    return 0.5 * np.arctan2(c["xx"], c["zx"])


def characterize_phi(
    corrected: np.ndarray,
    weights: np.ndarray | None = None,
    threshold: float = NEAR_MAXIMAL,
    tol: float = 1e-6,
) -> PhiCharacterization:
    """Summarize corrected pair states.

    ``weights`` are per-pair probabilities for exhaustive input; sampled
    input uses equal weights.
    """
    pairs = np.asarray(corrected, dtype=float)
    m = pairs.shape[0]
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float) / np.sum(weights)
    near = concurrence(pairs) > threshold
    viol = phi_family_violation(pairs)
    good = near & (viol <= tol)
    phis = phi_angle(pairs[good])

    # projection on span{C00, C11}
    u = pairs @ C00
    v = pairs @ C11
    p = u**2 + v**2
    p_yy = float(w @ p)
    # projected, normalized pair has angle atan2(v, u): (xz, xx) = (cos 2phi, sin 2phi) * p
    cx = w @ (u * u - v * v)
    sx = w @ (2 * u * v)
    norm = w @ p
    mx, my = cx / norm, sx / norm
    amp = float(np.hypot(mx, my))
    phase = float(np.arctan2(abs(my), abs(mx)))
    # spread of the per-record projected vectors, for error bars
    q = np.where(p > 0, p, 1.0)
    vx, vy = (u * u - v * v) / q, 2 * u * v / q
    ww = w * p / norm
    n_eff = 1.0 / np.sum(ww**2)
    sx2 = ww @ (vx - mx) ** 2
    sy2 = ww @ (vy - my) ** 2
    amp_err = float(np.sqrt((sx2 * mx**2 + sy2 * my**2) / max(amp**2, 1e-300) / n_eff))
    phase_err = float(np.sqrt((sx2 * my**2 + sy2 * mx**2) / max(amp**4, 1e-300) / n_eff))
    return PhiCharacterization(
        phi_samples=phis,
        p_yy=min(max(p_yy, 0.0), 1.0),
        amplitude=min(amp, 1.0),
        phase=phase,
        n_near_maximal=int(near.sum()),
        n_excluded=int((near & ~good).sum()),
        max_violation=float(viol[near].max()) if near.any() else 0.0,
        phase_err=phase_err,
        amplitude_err=amp_err,
    )


def transition_curve(j: np.ndarray, k: float, eta: float) -> np.ndarray:
    return np.pi / 4 * (np.tanh(k * (np.asarray(j) - eta)) + 1)


@dataclass(frozen=True)
class TransitionFit:
    k: float
    eta: float
    covariance: np.ndarray
    converged: bool


def fit_transition(
    j_values: Sequence[float],
    xi_values: Sequence[float],
    xi_errors: Sequence[float] | None = None,
    p0: tuple[float, float] = (10.0, 0.5),
) -> TransitionFit:
    """Weighted least squares for ``K`` and ``eta``."""
    j = np.asarray(j_values, dtype=float)
    xi = np.asarray(xi_values, dtype=float)
    sigma = None if xi_errors is None else np.maximum(np.asarray(xi_errors, dtype=float), 1e-12)
    try:
        popt, pcov = curve_fit(
            transition_curve, j, xi, p0=p0, sigma=sigma, absolute_sigma=sigma is not None, maxfev=20000
        )
        ok = bool(np.all(np.isfinite(pcov)))
    except (RuntimeError, ValueError):
        return TransitionFit(float("nan"), float("nan"), np.full((2, 2), np.nan), False)
    return TransitionFit(float(popt[0]), float(popt[1]), pcov, ok)


def guide_curve(j: np.ndarray) -> np.ndarray:
    """``(1 - J^2)^0.36``, the order-parameter shape of the B = 0 line."""
    j = np.asarray(j, dtype=float)
    return np.clip(1 - j**2, 0.0, None) ** 0.36
