"""Cooper-pair-box device model in reduced charging units.

The device Hamiltonian is tridiagonal in the charge basis n in [-n_max, n_max]:
diagonal (q_g - n)^2, off-diagonal -J/2.  Energies are reported relative to the
ground state (E_0 = 0); the charge-noise sensitivities A_i, B_i are first and
second derivatives of those shifted energies with respect to q_g.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericsError, TruncationError

# step for the dipole-element derivatives feeding the Rabi-fluctuation tiers
DIPOLE_FD_STEP = 1e-5


@dataclass(frozen=True)
class CPBModel:
    """Josephson strength J, gate charge q_g, charge-basis truncation n_max."""

    J: float
    q_g: float
    n_max: int = 10

    def __post_init__(self):
        if self.J < 0:
            raise ValueError(f"J must be non-negative, got {self.J}")
        if self.n_max < 3:
            raise ValueError(f"n_max must be at least 3, got {self.n_max}")


@dataclass(frozen=True)
class CPBSpectrum:
    """Lowest-levels eigendata: shifted energies, charge matrix elements,
    gate-charge sensitivities, and dipole-element derivatives."""

    model: CPBModel
    energies: np.ndarray        # (M,), E_i - E_0, ascending
    n_matrix: np.ndarray        # (M, M), <i|n|j> in the fixed real gauge
    A: np.ndarray               # (M,), d(E_i - E_0)/d q_g
    B: np.ndarray               # (M,), d^2(E_i - E_0)/d q_g^2
    dn_matrix: np.ndarray = None    # (M, M), d n_ij / d q_g
    d2n_matrix: np.ndarray = None   # (M, M), d^2 n_ij / d q_g^2


def _fix_gauge(evecs: np.ndarray) -> np.ndarray:
    """Largest-magnitude component positive, so matrix-element signs are
    reproducible run to run."""
    for k in range(evecs.shape[1]):
        i = np.argmax(np.abs(evecs[:, k]))
        if evecs[i, k] < 0:
            evecs[:, k] *= -1.0
    return evecs


def _solve(m: CPBModel, levels: int):
    ns = np.arange(-m.n_max, m.n_max + 1)
    diag = (m.q_g - ns) ** 2
    off = np.full(len(ns) - 1, -0.5 * m.J)
    try:
        evals, evecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:   # pragma: no cover
        raise NumericsError(f"charge-basis diagonalization failed: {exc}") from exc
    evecs = _fix_gauge(evecs)
    nmat_full = evecs.T @ (ns[:, None] * evecs)
    energies = evals[:levels] - evals[0]
    hf = 2.0 * (m.q_g - np.diag(nmat_full)[:levels])  # Hellmann-Feynman dE_i/dq_g
    A = hf - hf[0]
    # second-order perturbation over every eigenstate of the truncated matrix;
    # rows restricted to the retained levels (higher rows can hold degenerate
    # pairs at integer q_g)
    dE = evals[:levels, None] - evals[None, :]
    for i in range(levels):
        dE[i, i] = np.inf
    curv = 8.0 * np.sum(nmat_full[:levels, :] ** 2 / dE, axis=1)
    B = curv - curv[0]
    return energies, nmat_full[:levels, :levels], A, B


def cpb_spectrum(m: CPBModel, levels: int = 3, check_truncation: bool = True,
                 dipole_derivatives: bool = True) -> CPBSpectrum:
    """Diagonalize the truncated CPB Hamiltonian and assemble sensitivities.

    A_i comes from the Hellmann-Feynman identity (2(q_g - n_ii), referenced to
    level 0); B_i from second-order perturbation sums, exact for the truncated
    matrix.  With check_truncation the lowest three shifted energies must be
    stable to 1e-10 under n_max -> n_max + 1.
    """
    if levels > 2 * m.n_max - 1:
        raise ValueError(f"levels={levels} too large for n_max={m.n_max}")
    energies, nmat, A, B = _solve(m, levels)
    if check_truncation:
        bigger = CPBModel(J=m.J, q_g=m.q_g, n_max=m.n_max + 1)
        e_big, _, _, _ = _solve(bigger, min(levels, 3))
        drift = np.max(np.abs(e_big[:3] - energies[:3]))
        if drift > 1e-10:
            raise TruncationError(
                f"lowest-3 energies move by {drift:.2e} under n_max+1; "
                f"increase n_max={m.n_max}")
    dn = d2n = None
    if dipole_derivatives:
        h = DIPOLE_FD_STEP
        _, np_, _, _ = _solve(CPBModel(m.J, m.q_g + h, m.n_max), levels)
        _, nm_, _, _ = _solve(CPBModel(m.J, m.q_g - h, m.n_max), levels)
        dn = (np_ - nm_) / (2.0 * h)
        d2n = (np_ - 2.0 * nmat + nm_) / h ** 2
    return CPBSpectrum(model=m, energies=energies, n_matrix=nmat, A=A, B=B,
                       dn_matrix=dn, d2n_matrix=d2n)


def detuning_fluctuations(s: CPBSpectrum, x: float, order: str = "quadratic"):
    """Detuning shifts (delta, delta_p) for a gate-charge offset x, Eq.-style
    expansion delta = A_1 x + B_1 x^2 / 2, delta_p = A_2 x + B_2 x^2 / 2."""
    if order not in ("linear", "quadratic"):
        raise ValueError(f"order must be 'linear' or 'quadratic', got {order!r}")
    quad = 0.5 * x * x if order == "quadratic" else 0.0
    delta = s.A[1] * x + s.B[1] * quad
    delta_p = s.A[2] * x + s.B[2] * quad
    return delta, delta_p


def rabi_from_drive(s: CPBSpectrum, amp_p: float, amp_s: float):
    """Rabi frequencies from field amplitudes via the charge matrix elements:
    Omega_p = amp_p * n_02, Omega_s = amp_s * n_12."""
    return amp_p * s.n_matrix[0, 2], amp_s * s.n_matrix[1, 2]


def synthetic_sensitivities(a1: float, a2: float = 0.0, b1: float = 0.0,
                            b2: float = 0.0) -> CPBSpectrum:
    """Abstract device with prescribed detuning sensitivities and no couplings.

    Lets the noise machinery drive detuning-only fluctuation models (e.g. the
    Markov / non-Markov dephasing comparison) without a concrete band
    structure.
    """
    zeros = np.zeros((3, 3))
    return CPBSpectrum(model=CPBModel(J=0.0, q_g=0.0, n_max=3),
                       energies=np.zeros(3),
                       n_matrix=zeros, A=np.array([0.0, a1, a2]),
                       B=np.array([0.0, b1, b2]),
                       dn_matrix=zeros, d2n_matrix=zeros)


def calibrated_energy_scale(s: CPBSpectrum, charging_over_rabi: float) -> float:
    """Charging unit expressed in units of Omega_0 for the paper-style drive
    calibration Omega_0 = Omega_R |n_02(q_g)| / n_01(1/2).

    charging_over_rabi is the charging energy over (hbar * Omega_R); the
    default CLI figures are 13.75 GHz over 600 MHz.
    """
    half = cpb_spectrum(CPBModel(J=s.model.J, q_g=0.5, n_max=s.model.n_max),
                        levels=3, check_truncation=False,
                        dipole_derivatives=False)
    ratio = abs(s.n_matrix[0, 2]) / abs(half.n_matrix[0, 1])
    if ratio < 1e-9:
        raise ValueError("pump element vanishes at this bias (selection rule); "
                         "no finite drive calibration")
    return charging_over_rabi / ratio
