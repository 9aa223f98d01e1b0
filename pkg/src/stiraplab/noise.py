"""Broadband-colored-noise machinery: static-path-approximation ensemble
averages over a Gaussian gate-charge offset, plus the closed-form Markovian
comparator for pure dephasing in the trapped subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from . import dynamics
from .cpb import CPBSpectrum, detuning_fluctuations
from .errors import ConfigError
from .model3 import DetuningParams, ThreeLevelDrive

BATCH = 128   # nodes per batched solver call; constant so results are
              # independent of worker count and machine


@dataclass(frozen=True)
class SPASpec:
    """Static-path average: Gaussian offset spread, quadrature method, and
    which fluctuation tiers enter the drive."""

    sigma_x: float
    method: str = "gauss-hermite"        # or "monte-carlo"
    order: int = 21
    samples: int = 1000
    seed: int = 12345
    fluct_detunings_linear: bool = True
    fluct_detunings_quadratic: bool = False
    fluct_rabi_linear: bool = False
    fluct_rabi_quadratic: bool = False

    def __post_init__(self):
        if self.sigma_x < 0:
            raise ConfigError(f"sigma_x must be non-negative, got {self.sigma_x}")
        if self.method not in ("gauss-hermite", "monte-carlo"):
            raise ConfigError(f"unknown SPA method {self.method!r}")
        if self.order < 3 or self.order % 2 == 0:
            raise ConfigError(f"quadrature order must be odd and >= 3, got {self.order}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.fluct_detunings_quadratic and not self.fluct_detunings_linear:
            raise ConfigError("quadratic detuning fluctuations require the linear tier")
        if self.fluct_rabi_quadratic and not self.fluct_rabi_linear:
            raise ConfigError("quadratic Rabi fluctuations require the linear tier")


@dataclass
class SPAResult:
    """Ensemble-averaged population history and final transfer efficiency."""

    times: np.ndarray
    populations: np.ndarray     # (N, 3), weighted average over nodes
    efficiency: float
    nodes: np.ndarray
    weights: np.ndarray


def gauss_hermite_nodes(order: int, sigma_x: float):
    """Nodes and probability weights for the Gaussian average over N(0, sigma_x^2).

    Exact for polynomial integrands up to degree 2*order - 1; weights sum to 1.
    sigma_x = 0 degenerates to a single node at the origin.
    """
    if order < 3 or order % 2 == 0:
        raise ValueError(f"order must be odd and >= 3, got {order}")
    if sigma_x == 0.0:
        return np.array([0.0]), np.array([1.0])
    t, w = hermgauss(order)
    return np.sqrt(2.0) * sigma_x * t, w / np.sqrt(np.pi)


def monte_carlo_nodes(samples: int, seed: int, sigma_x: float):
    """Seeded Gaussian sample stream with uniform weights."""
    if sigma_x == 0.0:
        return np.array([0.0]), np.array([1.0])
    rng = np.random.default_rng(seed)
    xs = rng.normal(0.0, sigma_x, samples)
    return xs, np.full(samples, 1.0 / samples)


def spa_nodes(spec: SPASpec):
    if spec.method == "gauss-hermite":
        return gauss_hermite_nodes(spec.order, spec.sigma_x)
    return monte_carlo_nodes(spec.samples, spec.seed, spec.sigma_x)


def _node_drives(base: ThreeLevelDrive, spectrum: CPBSpectrum, spec: SPASpec,
                 xs: np.ndarray, energy_scale: float):
    """Per-node detuning shifts and Rabi scale factors for offsets xs."""
    det = base.detunings
    deltas = np.full(len(xs), det.delta)
    delta_ps = np.full(len(xs), det.delta_p)
    if spec.fluct_detunings_linear:
        order = "quadratic" if spec.fluct_detunings_quadratic else "linear"
        dd, dp = detuning_fluctuations(spectrum, xs, order=order)
        deltas = deltas + energy_scale * dd
        delta_ps = delta_ps + energy_scale * dp
    scale_p = np.ones(len(xs))
    scale_s = np.ones(len(xs))
    if spec.fluct_rabi_linear:
        n02 = spectrum.n_matrix[0, 2]
        n12 = spectrum.n_matrix[1, 2]
        if n02 == 0.0 or n12 == 0.0:
            raise ConfigError("Rabi fluctuation tiers undefined where a coupling "
                              "matrix element vanishes (selection rule)")
        scale_p = 1.0 + spectrum.dn_matrix[0, 2] * xs / n02
        scale_s = 1.0 + spectrum.dn_matrix[1, 2] * xs / n12
        if spec.fluct_rabi_quadratic:
            scale_p = scale_p + 0.5 * spectrum.d2n_matrix[0, 2] * xs ** 2 / n02
            scale_s = scale_s + 0.5 * spectrum.d2n_matrix[1, 2] * xs ** 2 / n12
    return deltas, delta_ps, scale_p, scale_s


def spa_average(base: ThreeLevelDrive, spectrum: CPBSpectrum, spec: SPASpec,
                rates: dynamics.MarkovRates = None, psi0=None,
                energy_scale: float = 1.0, grid=None,
                tol: float = 1e-9) -> SPAResult:
    """Ensemble-average STIRAP over the static gate-charge offset.

    Each quadrature node / sample x shifts the detunings by the device
    sensitivities (times energy_scale, the charging-unit-to-drive-frequency
    conversion) and optionally rescales the Rabi amplitudes by the local
    matrix-element expansion.  Propagation is unitary when all Markov rates
    are zero, Lindblad otherwise.  The weighted reduction runs in node-index
    order, so results are deterministic for a fixed spec.
    """
    xs, ws = spa_nodes(spec)
    deltas, delta_ps, scale_p, scale_s = _node_drives(base, spectrum, spec, xs,
                                                      energy_scale)
    if grid is None:
        grid = dynamics.protocol_grid(base.pulses)
    markov = rates is not None and rates.any_active()
    rho0 = None
    if markov and psi0 is not None:
        psi0 = np.asarray(psi0, dtype=complex)
        rho0 = np.outer(psi0, psi0.conj())
    if len(xs) == 1:
        # degenerate distribution: exactly the single nominal run
        drive = ThreeLevelDrive(
            pulses=base.pulses,
            detunings=DetuningParams(float(deltas[0]), float(delta_ps[0])))
        if markov:
            traj = dynamics.propagate_lindblad(drive, rates, rho0=rho0,
                                               grid=grid, tol=tol)
        else:
            traj = dynamics.propagate_unitary(drive, psi0=psi0, grid=grid, tol=tol)
        return SPAResult(times=traj.times, populations=traj.populations,
                         efficiency=traj.efficiency, nodes=xs, weights=ws)

    avg = np.zeros((len(grid), 3))
    if markov:
        for k in range(len(xs)):
            drive = ThreeLevelDrive(
                pulses=_scaled_pulses(base.pulses, scale_p[k], scale_s[k]),
                detunings=DetuningParams(deltas[k], delta_ps[k]))
            traj = dynamics.propagate_lindblad(drive, rates, rho0=rho0,
                                               grid=grid, tol=tol)
            avg += ws[k] * traj.populations
    else:
        for s in range(0, len(xs), BATCH):
            sl = slice(s, min(s + BATCH, len(xs)))
            pops = dynamics.propagate_unitary_batch(
                base.pulses, deltas[sl], delta_ps[sl],
                scale_p=scale_p[sl], scale_s=scale_s[sl],
                psi0=psi0, grid=grid, tol=tol)
            avg += np.tensordot(ws[sl], pops, axes=1)
    return SPAResult(times=np.asarray(grid), populations=avg,
                     efficiency=float(avg[-1, 1]), nodes=xs, weights=ws)


def _scaled_pulses(p, scale_p, scale_s):
    from .model3 import PulseParams
    return PulseParams(omega0=p.omega0, kappa_p=p.kappa_p * scale_p,
                       kappa_s=p.kappa_s * scale_s, tau=p.tau, T=p.T,
                       t_start=p.t_start, t_end=p.t_end)


def markovian_final_populations(gamma_01: float, T: float, tau: float):
    """Closed-form end-of-protocol populations under Markovian pure dephasing
    of the trapped subspace: rho_11 = 1/3 + (2/3) exp(-3 gamma T^2 / (8 tau))."""
    if gamma_01 < 0:
        raise ValueError("gamma_01 must be non-negative")
    if T <= 0 or tau <= 0:
        raise ValueError("T and tau must be positive")
    decay = np.exp(-3.0 * gamma_01 * T ** 2 / (8.0 * tau))
    rho11 = 1.0 / 3.0 + 2.0 / 3.0 * decay
    rho00 = 1.0 / 3.0 - decay / 3.0
    return rho11, rho00, rho00


def gaussian_dephasing_equivalent(T2: float, A1: float) -> float:
    """Gaussian offset spread whose free-induction decay reaches 1/e at T2:
    sigma_x = sqrt(2) / (|A1| T2)."""
    if T2 <= 0:
        raise ValueError("T2 must be positive")
    if A1 == 0.0:
        raise ValueError("A1 = 0 (sweet spot): no finite sigma_x reproduces "
                         "the requested T2")
    return np.sqrt(2.0) / (abs(A1) * T2)
