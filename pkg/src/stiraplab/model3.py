"""Driven three-level Lambda system: pulses, RWA Hamiltonian, dark state,
instantaneous eigen-decompositions.

Basis ordering is {|0>, |1>, |2>} with |2> the intermediate (upper) state.
The pump couples 0-2, the Stokes couples 1-2.  Sign convention: the Stokes
envelope peaks at t = -tau and the pump at t = +tau, so tau > 0 always means
the counterintuitive ordering (Stokes before pump).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Gaussian tails below e^-16 are truncated to zero; with the default window
# +-(tau + 4T) this changes transfer efficiencies by < 1e-9.
TAIL_EXPONENT = 16.0


@dataclass(frozen=True)
class PulseParams:
    """Gaussian pulse pair: Omega_k(t) = kappa_k * omega0 * exp(-((t -+ tau)/T)^2)."""

    omega0: float
    kappa_p: float = 1.0
    kappa_s: float = 1.0
    tau: float = 0.6
    T: float = 1.0
    t_start: float = None
    t_end: float = None

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.kappa_p < 0 or self.kappa_s < 0:
            raise ValueError("kappa_p and kappa_s must be non-negative")
        if self.t_start is None:
            object.__setattr__(self, "t_start", -(abs(self.tau) + 4.0 * self.T))
        if self.t_end is None:
            object.__setattr__(self, "t_end", abs(self.tau) + 4.0 * self.T)
        if not self.t_start < self.t_end:
            raise ValueError("t_start must precede t_end")
        if not (self.t_start <= -self.tau <= self.t_end
                and self.t_start <= self.tau <= self.t_end):
            raise ValueError("both pulse peaks must lie inside [t_start, t_end]")

    @classmethod
    def from_scaled(cls, omega0T, tau_over_T=0.6, kappa_p=1.0, kappa_s=1.0):
        """Pulse pair in protocol units (T = 1, frequencies in 1/T)."""
        return cls(omega0=float(omega0T), kappa_p=kappa_p, kappa_s=kappa_s,
                   tau=float(tau_over_T), T=1.0)


@dataclass(frozen=True)
class DetuningParams:
    """Two-photon detuning delta and pump detuning delta_p; delta_s is derived."""

    delta: float = 0.0
    delta_p: float = 0.0

    @property
    def delta_s(self) -> float:
        return self.delta_p - self.delta


@dataclass(frozen=True)
class ThreeLevelDrive:
    """Pulses plus detunings; fully determines H(t) over the protocol window."""

    pulses: PulseParams
    detunings: DetuningParams = field(default_factory=DetuningParams)


def pulse_envelopes(t, p: PulseParams):
    """Rabi envelopes (Omega_p, Omega_s) at time t (scalar or array).

    Pump peaks at +tau, Stokes at -tau; tails beyond 4 Gaussian widths are
    truncated to exactly zero.
    """
    t = np.asarray(t, dtype=float)
    xp = -(((t - p.tau) / p.T) ** 2)
    xs = -(((t + p.tau) / p.T) ** 2)
    omega_p = np.where(xp > -TAIL_EXPONENT, p.kappa_p * p.omega0 * np.exp(xp), 0.0)
    omega_s = np.where(xs > -TAIL_EXPONENT, p.kappa_s * p.omega0 * np.exp(xs), 0.0)
    if t.ndim == 0:
        return float(omega_p), float(omega_s)
    return omega_p, omega_s


def rwa_hamiltonian(t: float, d: ThreeLevelDrive) -> np.ndarray:
    """3x3 RWA Hamiltonian: diagonal (0, delta, delta_p), couplings Omega/2."""
    omega_p, omega_s = pulse_envelopes(t, d.pulses)
    det = d.detunings
    return np.array([
        [0.0, 0.0, 0.5 * np.conj(omega_p)],
        [0.0, det.delta, 0.5 * np.conj(omega_s)],
        [0.5 * omega_p, 0.5 * omega_s, det.delta_p],
    ], dtype=complex)


def dark_state(omega_p: float, omega_s: float) -> np.ndarray:
    """Zero-eigenvalue state (Omega_s, -Omega_p, 0)/norm; exact at delta = 0."""
    norm = np.hypot(abs(omega_p), abs(omega_s))
    if norm == 0.0:
        raise ValueError("dark state undefined for Omega_p = Omega_s = 0")
    return np.array([omega_s, -omega_p, 0.0], dtype=complex) / norm


def adiabatic_spectrum(t: float, d: ThreeLevelDrive):
    """Instantaneous eigenvalues (ascending) and orthonormal eigenvectors.

    Returns (eigenvalues, eigenvectors) with eigenvectors as columns.
    """
    evals, evecs = np.linalg.eigh(rwa_hamiltonian(t, d))
    return evals, evecs


def adiabatic_flow(times, d: ThreeLevelDrive):
    """Branch-continuous instantaneous eigenvalues along a time grid.

    Sorting ties are broken by eigenvector-overlap continuity with the previous
    grid point, so Landau-Zener patterns plot as smooth branches.  Before both
    pulses the branch order follows the diagonal (0, delta, delta_p).

    Returns an array of shape (len(times), 3).
    """
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), 3))
    det = d.detunings
    # permutation mapping branch index -> ascending-eigenvalue index at t[0]
    order = np.argsort(np.argsort([0.0, det.delta, det.delta_p], kind="stable"),
                       kind="stable")
    prev_vecs = None
    for k, t in enumerate(times):
        evals, evecs = adiabatic_spectrum(t, d)
        if prev_vecs is not None:
            # follow the branch whose eigenvector overlaps the previous one most
            overlap = np.abs(prev_vecs.conj().T @ evecs)
            order = np.argmax(overlap, axis=1)
            if len(set(order.tolist())) < 3:  # degenerate overlap, keep ascending
                order = np.arange(3)
        out[k] = evals[order]
        prev_vecs = evecs[:, order]
    return out
