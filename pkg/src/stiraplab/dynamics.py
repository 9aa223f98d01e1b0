"""Time propagation: unitary Schrodinger evolution and Lindblad master
equation with spontaneous decay and independent pure-dephasing rates.

The adaptive propagators wrap scipy's DOP853; `reference_rk4` is a hand-rolled
fixed-step fourth-order integrator kept as an independent cross-check and is
never used by the adaptive path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericsError
from .model3 import PulseParams, ThreeLevelDrive, pulse_envelopes

TOL_MIN, TOL_MAX = 1e-12, 1e-4


@dataclass(frozen=True)
class MarkovRates:
    """Markovian rates: decay |1>->|0> (1/T1), pure dephasing, optional |2> decay."""

    gamma_10: float = 0.0
    gamma_tilde_01: float = 0.0
    gamma_tilde_02: float = 0.0
    gamma_tilde_12: float = 0.0
    gamma_20: float = 0.0
    gamma_21: float = 0.0

    def __post_init__(self):
        for name in ("gamma_10", "gamma_tilde_01", "gamma_tilde_02",
                     "gamma_tilde_12", "gamma_20", "gamma_21"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def any_active(self) -> bool:
        return any((self.gamma_10, self.gamma_tilde_01, self.gamma_tilde_02,
                    self.gamma_tilde_12, self.gamma_20, self.gamma_21))


@dataclass
class Trajectory:
    """Time grid with population histories; states or density matrices optional."""

    times: np.ndarray
    populations: np.ndarray          # (N, 3), P_i(t)
    states: np.ndarray = None        # (N, 3) complex, unitary runs
    rhos: np.ndarray = None          # (N, 3, 3) complex, Lindblad runs
    trace: np.ndarray = None         # (N,), Lindblad runs

    @property
    def efficiency(self) -> float:
        """Transfer efficiency P_1 at the final grid point."""
        return float(self.populations[-1, 1])


def protocol_grid(p: PulseParams, n: int = 2000) -> np.ndarray:
    """Dense output grid spanning the protocol window."""
    return np.linspace(p.t_start, p.t_end, n)


def _check_tol(tol):
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ValueError(f"tol must lie in [{TOL_MIN}, {TOL_MAX}], got {tol}")


def _require_finite(name, *arrays):
    # DOP853's step controller loops on NaN input, so reject it up front
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericsError(f"non-finite {name}")


def _run_ivp(rhs, t_span, y0, grid, tol):
    sol = solve_ivp(rhs, t_span, y0, method="DOP853", t_eval=grid,
                    rtol=tol, atol=tol)
    if not sol.success:
        raise NumericsError(f"integrator failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise NumericsError("non-finite state during propagation")
    return sol


def propagate_unitary(d: ThreeLevelDrive, psi0=None, grid=None,
                      tol: float = 1e-9) -> Trajectory:
    """Solve i dpsi/dt = H(t) psi adaptively; no norm renormalization.

    Norm drift is a test observable: |norm(t_end) - 1| stays below ~10*tol.
    """
    _check_tol(tol)
    if psi0 is None:
        psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    if grid is None:
        grid = protocol_grid(d.pulses)
    p = d.pulses
    det = d.detunings
    delta, delta_p = det.delta, det.delta_p
    _require_finite("initial state", psi0)
    _require_finite("detunings", [delta, delta_p])

    def rhs(t, y):
        omega_p, omega_s = pulse_envelopes(t, p)
        h20 = 0.5 * omega_p
        h21 = 0.5 * omega_s
        return -1j * np.array([
            h20 * y[2],
            delta * y[1] + h21 * y[2],
            h20 * y[0] + h21 * y[1] + delta_p * y[2],
        ])

    sol = _run_ivp(rhs, (grid[0], grid[-1]), psi0, grid, tol)
    states = sol.y.T
    return Trajectory(times=sol.t, populations=np.abs(states) ** 2, states=states)


def propagate_unitary_batch(pulses: PulseParams, deltas, delta_ps,
                            scale_p=None, scale_s=None, psi0=None,
                            grid=None, tol: float = 1e-9):
    """Propagate many detuning/amplitude variants of one pulse pair at once.

    All variants share the adaptive steps of a single solver call, which is
    what makes dense parameter sweeps tractable; per-variant accuracy is still
    controlled by `tol`.  Returns populations of shape (K, N, 3) for a grid of
    N points, or (K, 3) when grid is None (final state only).
    """
    _check_tol(tol)
    deltas = np.asarray(deltas, dtype=float)
    delta_ps = np.asarray(delta_ps, dtype=float)
    K = len(deltas)
    sp = np.ones(K) if scale_p is None else np.asarray(scale_p, dtype=float)
    ss = np.ones(K) if scale_s is None else np.asarray(scale_s, dtype=float)
    if psi0 is None:
        psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    y0 = np.tile(np.asarray(psi0, dtype=complex), (K, 1))
    _require_finite("drive parameters", deltas, delta_ps, sp, ss, y0)
    final_only = grid is None
    t_span = (pulses.t_start, pulses.t_end)
    t_eval = [pulses.t_end] if final_only else grid
    cp = 0.5 * sp * pulses.kappa_p * pulses.omega0
    cs = 0.5 * ss * pulses.kappa_s * pulses.omega0
    tau, T = pulses.tau, pulses.T

    def rhs(t, y):
        y = y.reshape(K, 3)
        xp = -(((t - tau) / T) ** 2)
        xs = -(((t + tau) / T) ** 2)
        h20 = cp * (np.exp(xp) if xp > -16.0 else 0.0)
        h21 = cs * (np.exp(xs) if xs > -16.0 else 0.0)
        out = np.empty_like(y)
        out[:, 0] = h20 * y[:, 2]
        out[:, 1] = deltas * y[:, 1] + h21 * y[:, 2]
        out[:, 2] = h20 * y[:, 0] + h21 * y[:, 1] + delta_ps * y[:, 2]
        return (-1j * out).ravel()

    sol = _run_ivp(rhs, t_span, y0.ravel(), t_eval, tol)
    if final_only:
        return np.abs(sol.y[:, -1].reshape(K, 3)) ** 2
    states = sol.y.T.reshape(len(t_eval), K, 3)
    return np.abs(np.swapaxes(states, 0, 1)) ** 2


def _dissipator(rates: MarkovRates) -> np.ndarray:
    """9x9 superoperator on row-major vec(rho) for jumps plus pure dephasing."""
    eye = np.eye(3)
    D = np.zeros((9, 9), dtype=complex)
    jumps = [
        (rates.gamma_10, 0, 1),   # |0><1|
        (rates.gamma_20, 0, 2),
        (rates.gamma_21, 1, 2),
    ]
    for rate, i, j in jumps:
        if rate == 0.0:
            continue
        L = np.zeros((3, 3))
        L[i, j] = 1.0
        LdL = L.T @ L
        D += rate * (np.kron(L, L) - 0.5 * np.kron(LdL, eye)
                     - 0.5 * np.kron(eye, LdL))
    # independent off-diagonal decay: d rho_ij / dt -= gamma_tilde_ij rho_ij
    G = np.zeros((3, 3))
    G[0, 1] = G[1, 0] = rates.gamma_tilde_01
    G[0, 2] = G[2, 0] = rates.gamma_tilde_02
    G[1, 2] = G[2, 1] = rates.gamma_tilde_12
    D -= np.diag(G.ravel())
    return D


def _dephasing_is_cp(rates: MarkovRates) -> bool:
    """Whether the requested gamma_tilde set is realizable by projector
    dephasing, i.e. gamma_tilde_ij = (c_i + c_j)/2 with all c_i >= 0.

    Outside this cone (e.g. a single nonzero gamma_tilde_01) the generator is
    the phenomenological master equation of the dephasing literature, which is
    not completely positive: small transient negativity of rho is a property
    of the model, not an integrator defect.
    """
    g01, g02, g12 = (rates.gamma_tilde_01, rates.gamma_tilde_02,
                     rates.gamma_tilde_12)
    c0 = g01 + g02 - g12
    c1 = g01 + g12 - g02
    c2 = g02 + g12 - g01
    return min(c0, c1, c2) >= -1e-12


# positivity gates: strict for CP generators (scaled with the requested
# accuracy; 1e-7 at the default tol), loose blow-up guard otherwise
POSITIVITY_TOL_CP = 1e-7
POSITIVITY_TOL_PHENOM = 5e-2


def propagate_lindblad(d: ThreeLevelDrive, rates: MarkovRates, rho0=None,
                       grid=None, tol: float = 1e-9) -> Trajectory:
    """Integrate the Lindblad equation; returns rho_ii(t) histories.

    The pure-dephasing rates act directly on the bare-basis coherences, so
    rho_ij decays at exactly gamma_tilde_ij on top of any decay-channel
    contribution.  Trace is conserved to integration accuracy; positivity is
    checked at every stored point.
    """
    _check_tol(tol)
    if rho0 is None:
        rho0 = np.zeros((3, 3), dtype=complex)
        rho0[0, 0] = 1.0
    rho0 = np.asarray(rho0, dtype=complex)
    if not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise ValueError("rho0 must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-9:
        raise ValueError("rho0 must have unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-12:
        raise ValueError("rho0 must be positive semidefinite")
    if grid is None:
        grid = protocol_grid(d.pulses)
    p = d.pulses
    delta, delta_p = d.detunings.delta, d.detunings.delta_p
    _require_finite("detunings", [delta, delta_p])
    D = _dissipator(rates)

    def rhs(t, y):
        rho = y.reshape(3, 3)
        omega_p, omega_s = pulse_envelopes(t, p)
        H = np.array([
            [0.0, 0.0, 0.5 * omega_p],
            [0.0, delta, 0.5 * omega_s],
            [0.5 * omega_p, 0.5 * omega_s, delta_p],
        ], dtype=complex)
        drho = -1j * (H @ rho - rho @ H)
        return drho.ravel() + D @ y

    sol = _run_ivp(rhs, (grid[0], grid[-1]), rho0.ravel(), grid, tol)
    rhos = sol.y.T.reshape(-1, 3, 3)
    pops = np.real(rhos[:, (0, 1, 2), (0, 1, 2)])
    trace = pops.sum(axis=1)
    min_eig = min(np.linalg.eigvalsh(r).min() for r in rhos)
    gate = max(POSITIVITY_TOL_CP, 100.0 * tol) if _dephasing_is_cp(rates) \
        else POSITIVITY_TOL_PHENOM
    if min_eig < -gate:
        raise NumericsError(f"positivity lost: min eigenvalue {min_eig:.2e}")
    return Trajectory(times=sol.t, populations=pops, rhos=rhos, trace=trace)


def reference_rk4(d: ThreeLevelDrive, psi0=None, grid=None,
                  oversample: int = 10) -> Trajectory:
    """Fixed-step classical RK4 reference, `oversample` substeps per grid cell.

    Independent of the adaptive path by construction; used as the oracle in
    the oracle-equivalence tests.
    """
    if psi0 is None:
        psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    if grid is None:
        grid = protocol_grid(d.pulses)
    grid = np.asarray(grid, dtype=float)
    p = d.pulses
    delta, delta_p = d.detunings.delta, d.detunings.delta_p

    def f(t, y):
        omega_p, omega_s = pulse_envelopes(t, p)
        h20 = 0.5 * omega_p
        h21 = 0.5 * omega_s
        return -1j * np.array([
            h20 * y[2],
            delta * y[1] + h21 * y[2],
            h20 * y[0] + h21 * y[1] + delta_p * y[2],
        ])

    psi = np.asarray(psi0, dtype=complex).copy()
    states = np.empty((len(grid), 3), dtype=complex)
    states[0] = psi
    for k in range(len(grid) - 1):
        h = (grid[k + 1] - grid[k]) / oversample
        t = grid[k]
        for _ in range(oversample):
            k1 = f(t, psi)
            k2 = f(t + 0.5 * h, psi + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, psi + 0.5 * h * k2)
            k4 = f(t + h, psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        states[k + 1] = psi
    return Trajectory(times=grid, populations=np.abs(states) ** 2, states=states)
