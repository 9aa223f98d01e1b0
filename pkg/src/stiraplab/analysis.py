"""Sweep engine and derived quantities: efficiency diagrams over the detuning
plane, Landau-Zener pattern taxonomy, two-photon linewidths, the
symmetry-breaking figure of merit, and the Markov / non-Markov dephasing scan.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, noise
from .cpb import (CPBModel, CPBSpectrum, calibrated_energy_scale, cpb_spectrum,
                  synthetic_sensitivities)
from .errors import NumericsError
from .model3 import DetuningParams, PulseParams, ThreeLevelDrive

MAP_BLOCK = 128   # cells per batched solve; fixed so sweep output does not
                  # depend on worker count

# cumulative fluctuation tiers of the device-noise efficiency scan
SCAN_TIERS = ("detunings-linear", "detunings-quadratic", "rabi-linear",
              "rabi-quadratic")
_TIER_FLAGS = {
    "detunings-linear": {},
    "detunings-quadratic": {"fluct_detunings_quadratic": True},
    "rabi-linear": {"fluct_detunings_quadratic": True,
                    "fluct_rabi_linear": True},
    "rabi-quadratic": {"fluct_detunings_quadratic": True,
                       "fluct_rabi_linear": True,
                       "fluct_rabi_quadratic": True},
}


@dataclass
class EfficiencyMap:
    """Transfer efficiency over the (delta, delta_p) plane with level contours."""

    delta_axis: np.ndarray
    delta_p_axis: np.ndarray
    values: np.ndarray                      # (len(delta_axis), len(delta_p_axis))
    contours: dict = field(default_factory=dict)   # level -> list of (k, 2) arrays


@dataclass
class MeritMap:
    """Figure-of-merit grid over (J, q_g) with its ingredients."""

    j_axis: np.ndarray
    qg_axis: np.ndarray
    merit: np.ndarray
    sigma_delta: np.ndarray
    n02: np.ndarray                          # |<0|n|2>| per cell
    a1: np.ndarray
    b1: np.ndarray


def _cells_block(args):
    """Efficiencies for one block of (delta, delta_p) cells; NaN per failed cell."""
    pulses, d_arr, dp_arr, tol = args
    try:
        pops = dynamics.propagate_unitary_batch(pulses, d_arr, dp_arr, tol=tol)
        return pops[:, 1]
    except NumericsError:
        out = np.empty(len(d_arr))
        for k in range(len(d_arr)):
            try:
                drive = ThreeLevelDrive(pulses, DetuningParams(d_arr[k], dp_arr[k]))
                out[k] = dynamics.propagate_unitary(drive, tol=tol).efficiency
            except NumericsError:
                out[k] = np.nan
        return out


def sweep_cells(pulses: PulseParams, deltas, delta_ps, tol: float = 1e-8,
                workers: int = 1, block: int = MAP_BLOCK):
    """Efficiency for an arbitrary list of detuning cells.

    Cells are evaluated in fixed-size blocks and reassembled by index, so the
    result is identical for any worker count.
    """
    deltas = np.asarray(deltas, dtype=float)
    delta_ps = np.asarray(delta_ps, dtype=float)
    blocks = [(pulses, deltas[s:s + block], delta_ps[s:s + block], tol)
              for s in range(0, len(deltas), block)]
    if workers > 1 and len(blocks) > 1:
        with multiprocessing.Pool(workers) as pool:
            parts = pool.map(_cells_block, blocks)
    else:
        parts = [_cells_block(b) for b in blocks]
    return np.concatenate(parts) if parts else np.empty(0)


def efficiency_diagram(pulses: PulseParams, delta_axis, delta_p_axis,
                       levels=(0.9,), tol: float = 1e-8,
                       workers: int = 1) -> EfficiencyMap:
    """Propagate every cell of the detuning grid and extract level contours."""
    delta_axis = np.asarray(delta_axis, dtype=float)
    delta_p_axis = np.asarray(delta_p_axis, dtype=float)
    D, DP = np.meshgrid(delta_axis, delta_p_axis, indexing="ij")
    vals = sweep_cells(pulses, D.ravel(), DP.ravel(), tol=tol, workers=workers)
    values = vals.reshape(len(delta_axis), len(delta_p_axis))
    contours = {lv: contour_polylines(delta_axis, delta_p_axis, values, lv)
                for lv in levels}
    return EfficiencyMap(delta_axis=delta_axis, delta_p_axis=delta_p_axis,
                         values=values, contours=contours)


# ---------------------------------------------------------------------------
# marching squares

# cell-index lookup: bit k set when corner k lies above the level, corners
# ordered (x0,y0), (x1,y0), (x1,y1), (x0,y1); entries are edge pairs with
# edges 0=bottom, 1=right, 2=top, 3=left
_MS_TABLE = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)],
    7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)], 11: [(2, 1)], 12: [(1, 3)],
    13: [(1, 0)], 14: [(0, 3)],
}


def contour_polylines(x_axis, y_axis, values, level):
    """Marching-squares contours with linear interpolation.

    Each edge crossing is computed once and shared between the adjoining
    cells, so segments chain into polylines exactly; closed loops repeat
    their first vertex.  Cells containing NaN are skipped.
    """
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    crossings = {}

    def crossing(i0, j0, i1, j1):
        """Interpolated level crossing on the grid edge (i0,j0)-(i1,j1),
        keyed by the edge so shared endpoints are identical objects."""
        key = (i0, j0, i1, j1)
        if key not in crossings:
            va, vb = values[i0, j0], values[i1, j1]
            t = (level - va) / (vb - va)
            crossings[key] = (key, (x_axis[i0] + t * (x_axis[i1] - x_axis[i0]),
                                    y_axis[j0] + t * (y_axis[j1] - y_axis[j0])))
        return crossings[key]

    segments = []
    for i in range(len(x_axis) - 1):
        for j in range(len(y_axis) - 1):
            corners = (values[i, j], values[i + 1, j],
                       values[i + 1, j + 1], values[i, j + 1])
            if any(np.isnan(c) for c in corners):
                continue
            idx = ((corners[0] > level) | (corners[1] > level) << 1
                   | (corners[2] > level) << 2 | (corners[3] > level) << 3)
            if idx in (0, 15):
                continue
            edges = {
                0: lambda: crossing(i, j, i + 1, j),          # bottom
                1: lambda: crossing(i + 1, j, i + 1, j + 1),  # right
                2: lambda: crossing(i, j + 1, i + 1, j + 1),  # top
                3: lambda: crossing(i, j, i, j + 1),          # left
            }
            if idx in (5, 10):
                # saddle: disambiguate with the cell-centre average
                center_above = 0.25 * sum(corners) > level
                if idx == 5:
                    pairs = [(3, 2), (1, 0)] if center_above else [(3, 0), (1, 2)]
                else:
                    pairs = [(0, 3), (2, 1)] if center_above else [(0, 1), (2, 3)]
            else:
                pairs = _MS_TABLE[idx]
            for a, b in pairs:
                segments.append((edges[a](), edges[b]()))
    return _chain_segments(segments)


def _chain_segments(segments):
    """Join segments sharing edge keys into polylines of (x, y) vertices."""
    open_ends = {}
    chains = []
    for (ka, pa), (kb, pb) in segments:
        ca = open_ends.pop(ka, None)
        cb = open_ends.pop(kb, None)
        if ca is not None and cb is not None and ca is not cb:
            if ca[-1][0] != ka:
                ca.reverse()
            if cb[0][0] != kb:
                cb.reverse()
            ca.extend(cb)
            chains = [c for c in chains if c is not cb]
            chain = ca
        elif ca is not None and cb is not None:
            # segment closes the loop: repeat the first vertex
            if ca[-1][0] != ka:
                ca.reverse()
            ca.append(ca[0])
            chain = ca
        elif ca is not None:
            if ca[-1][0] != ka:
                ca.reverse()
            ca.append((kb, pb))
            chain = ca
        elif cb is not None:
            if cb[-1][0] != kb:
                cb.reverse()
            cb.append((ka, pa))
            chain = cb
        else:
            chain = [(ka, pa), (kb, pb)]
            chains.append(chain)
        if chain[0][0] != chain[-1][0]:      # closed loops take no more joins
            open_ends[chain[0][0]] = chain
            open_ends[chain[-1][0]] = chain
    return [np.array([p for _, p in c], dtype=float) for c in chains]


# ---------------------------------------------------------------------------

def lz_classify(delta: float, delta_p: float) -> str:
    """Landau-Zener pattern from the detuning ratio: 'a' for delta_p/delta >= 1,
    'b' for negative ratios, 'c' for [0, 1)."""
    if delta == 0.0:
        raise ValueError("delta = 0: two-photon resonance, no LZ classification")
    ratio = delta_p / delta
    if ratio >= 1.0:
        return "a"
    if ratio < 0.0:
        return "b"
    return "c"


def two_photon_linewidth(pulses: PulseParams, slope: float = 0.0,
                         level: float = 0.5, tol: float = 1e-8) -> float:
    """Half-width of the transfer window along the line delta_p = slope*delta.

    Locates the smallest |delta| where efficiency crosses below `level` by a
    coarse bracketing scan plus bisection to 1e-3 * omega0, and returns the
    average of the positive- and negative-delta crossings.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    omega0 = pulses.omega0

    def eff(delta):
        drive = ThreeLevelDrive(pulses, DetuningParams(delta, slope * delta))
        return dynamics.propagate_unitary(drive, tol=tol).efficiency

    if eff(0.0) <= level:
        raise ValueError("on-resonance efficiency does not exceed the level")
    halves = []
    n_scan = 40
    for sign in (1.0, -1.0):
        scan = sign * np.linspace(0.05, 2.0, n_scan) * omega0
        effs = dynamics.propagate_unitary_batch(pulses, scan, slope * scan,
                                                tol=tol)[:, 1]
        below = np.nonzero(effs < level)[0]
        if len(below) == 0:
            raise ValueError(f"no crossing below level within |delta| <= 2 omega0 "
                             f"(sign {sign:+.0f})")
        k = below[0]
        lo = 0.0 if k == 0 else abs(scan[k - 1])
        hi = abs(scan[k])
        while hi - lo > 1e-3 * omega0:
            mid = 0.5 * (lo + hi)
            if eff(sign * mid) < level:
                hi = mid
            else:
                lo = mid
        halves.append(0.5 * (lo + hi))
    return 0.5 * (halves[0] + halves[1])


def sigma_delta(sigma_x: float, a1: float, b1: float) -> float:
    """Two-photon detuning spread sqrt(A1^2 sx^2 + B1^2 sx^4 / 2)."""
    if sigma_x < 0:
        raise ValueError("sigma_x must be non-negative")
    return float(np.sqrt(a1 ** 2 * sigma_x ** 2 + 0.5 * b1 ** 2 * sigma_x ** 4))


def figure_of_merit(spectrum: CPBSpectrum, sigma_x: float) -> float:
    """Pump coupling over detuning spread, 2|n_02| / sigma_delta."""
    if sigma_x <= 0:
        raise ValueError("sigma_x must be positive")
    sd = sigma_delta(sigma_x, spectrum.A[1], spectrum.B[1])
    if sd == 0.0:
        raise ValueError("sigma_delta = 0 (exact sweet spot): merit out of domain")
    return 2.0 * abs(spectrum.n_matrix[0, 2]) / sd


def merit_map(j_axis, qg_axis, sigma_x: float, n_max: int = 10) -> MeritMap:
    """Figure of merit over a (J, q_g) grid; out-of-domain cells become NaN."""
    j_axis = np.asarray(j_axis, dtype=float)
    qg_axis = np.asarray(qg_axis, dtype=float)
    shape = (len(j_axis), len(qg_axis))
    merit = np.full(shape, np.nan)
    sd = np.full(shape, np.nan)
    n02 = np.full(shape, np.nan)
    a1 = np.full(shape, np.nan)
    b1 = np.full(shape, np.nan)
    for i, j in np.ndindex(shape):
        s = cpb_spectrum(CPBModel(J=j_axis[i], q_g=qg_axis[j], n_max=n_max),
                         check_truncation=False, dipole_derivatives=False)
        n02[i, j] = abs(s.n_matrix[0, 2])
        a1[i, j] = s.A[1]
        b1[i, j] = s.B[1]
        sd[i, j] = sigma_delta(sigma_x, s.A[1], s.B[1])
        if sd[i, j] > 0.0:
            merit[i, j] = 2.0 * n02[i, j] / sd[i, j]
    return MeritMap(j_axis=j_axis, qg_axis=qg_axis, merit=merit,
                    sigma_delta=sd, n02=n02, a1=a1, b1=b1)


def dephasing_scan(omega0T_list, T2: float, mode: str, a1: float = 1.0,
                   tau_over_T: float = 1.0, order: int = 21,
                   tol: float = 1e-8):
    """Final populations vs drive strength for one noise model.

    markov: Lindblad with gamma_tilde_01 = 1/T2 (exponential qubit dephasing).
    spa:    unitary ensemble average over a static two-photon detuning with
            sigma_x = sqrt(2)/(a1 T2) (Gaussian decay, same T2).

    Returns rows (omega0T, P0, P1, P2).
    """
    if mode not in ("markov", "spa"):
        raise ValueError(f"mode must be 'markov' or 'spa', got {mode!r}")
    if T2 <= 0:
        raise ValueError("T2 must be positive")
    rows = []
    for omega0T in omega0T_list:
        pulses = PulseParams.from_scaled(omega0T, tau_over_T=tau_over_T)
        drive = ThreeLevelDrive(pulses)
        if mode == "markov":
            rates = dynamics.MarkovRates(gamma_tilde_01=1.0 / T2)
            traj = dynamics.propagate_lindblad(drive, rates, tol=tol)
            pops = traj.populations[-1]
        else:
            sigma_x = noise.gaussian_dephasing_equivalent(T2, a1)
            spec = noise.SPASpec(sigma_x=sigma_x, order=order)
            res = noise.spa_average(drive, synthetic_sensitivities(a1=a1),
                                    spec, tol=tol)
            pops = res.populations[-1]
        rows.append((float(omega0T), float(pops[0]), float(pops[1]),
                     float(pops[2])))
    return rows


def cpb_efficiency_scan(j: float, qg_list, sigma_x: float,
                        omega0T_ref: float = 15.0, qg_ref: float = 0.48,
                        charging_over_rabi: float = 13.75 / 0.6,
                        tiers=SCAN_TIERS, t1_over_T_list=(),
                        tau_over_T: float = 0.6, n_max: int = 10,
                        order: int = 21, tol: float = 1e-8,
                        workers: int = 1):
    """Fixed-amplitude device scan: SPA-averaged efficiency vs gate charge.

    The drive amplitude is held at the value giving omega0T_ref at qg_ref, so
    Omega_0(q_g) scales with the pump element |n_02(q_g)|.  One row per
    (q_g, tier); the optional T1 entries add Markovian decay in the trapped
    subspace on top of the linear-detuning tier.

    Returns rows (q_g, tier, omega0T, efficiency).
    """
    ref = cpb_spectrum(CPBModel(J=j, q_g=qg_ref, n_max=n_max),
                       check_truncation=False, dipole_derivatives=False)
    n02_ref = abs(ref.n_matrix[0, 2])
    unknown = [t for t in tiers if t not in _TIER_FLAGS]
    if unknown:
        raise ValueError(f"unknown tiers: {unknown}")
    args = [(j, float(qg), sigma_x, omega0T_ref, n02_ref, charging_over_rabi,
             tuple(tiers), tuple(t1_over_T_list), tau_over_T, n_max, order, tol)
            for qg in qg_list]
    if workers > 1 and len(args) > 1:
        with multiprocessing.Pool(workers) as pool:
            parts = pool.map(_scan_point, args)
    else:
        parts = [_scan_point(a) for a in args]
    return [row for part in parts for row in part]


def _scan_point(args):
    (j, qg, sigma_x, omega0T_ref, n02_ref, charging_over_rabi, tiers,
     t1_list, tau_over_T, n_max, order, tol) = args
    spectrum = cpb_spectrum(CPBModel(J=j, q_g=qg, n_max=n_max),
                            check_truncation=False)
    omega0T = omega0T_ref * abs(spectrum.n_matrix[0, 2]) / n02_ref
    if omega0T == 0.0:
        return [(qg, t, 0.0, 0.0) for t in tiers]
    pulses = PulseParams.from_scaled(omega0T, tau_over_T=tau_over_T)
    drive = ThreeLevelDrive(pulses)
    es = calibrated_energy_scale(spectrum, charging_over_rabi) * pulses.omega0
    rows = []
    for tier in tiers:
        spec = noise.SPASpec(sigma_x=sigma_x, order=order, **_TIER_FLAGS[tier])
        res = noise.spa_average(drive, spectrum, spec, energy_scale=es, tol=tol)
        rows.append((qg, tier, omega0T, res.efficiency))
    for t1 in t1_list:
        spec = noise.SPASpec(sigma_x=sigma_x, order=order)
        rates = dynamics.MarkovRates(gamma_10=1.0 / t1)
        res = noise.spa_average(drive, spectrum, spec, rates=rates,
                                energy_scale=es, tol=tol)
        rows.append((qg, f"t1-{t1:g}", omega0T, res.efficiency))
    return rows
