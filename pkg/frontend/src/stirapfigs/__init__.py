"""Render figure analogues from stiraplab CSV outputs.

Pure CSV-to-image transforms: nothing here recomputes physics.  Every reader
validates the expected column set, so schema drift in the producing CLI fails
loudly instead of plotting garbage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__version__ = "0.1.0"

FIGURE_IDS = ("fig1b", "fig1c", "fig2", "fig3a", "fig3b", "fig4")

# fixed style so identical inputs render identical bytes
STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
}


class FigureError(RuntimeError):
    """Missing file, missing column, or empty input."""


@dataclass(frozen=True)
class FigureRecipe:
    """Input CSV paths, figure id, and output image path."""

    inputs: tuple
    figure_id: str
    output: str

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise FigureError(f"unknown figure id {self.figure_id!r}; "
                              f"expected one of {', '.join(FIGURE_IDS)}")
        if not self.inputs:
            raise FigureError(f"{self.figure_id}: at least one input CSV required")


def read_columns(path, required):
    """Load a CSV into float/str arrays, insisting on the required columns."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            rows = list(reader)
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise FigureError(f"{path}: empty file, no header")
    missing = [c for c in required if c not in header]
    if missing:
        raise FigureError(f"{path}: missing columns {missing} "
                          f"(found {header})")
    if not rows:
        raise FigureError(f"{path}: no data rows")
    out = {}
    for col in required:
        values = [r[col] for r in rows]
        try:
            out[col] = np.array([float(v) for v in values])
        except ValueError:
            out[col] = np.array(values)
    return out


def _finish(fig, output):
    fig.savefig(output)
    plt.close(fig)


def _render_fig1b(inputs, output):
    """Pulse envelopes: Stokes before pump."""
    data = read_columns(inputs[0], ("t", "omega_p", "omega_s"))
    fig, ax = plt.subplots(figsize=(4.2, 2.8))
    ax.plot(data["t"], data["omega_s"], label=r"$\Omega_s$", color="tab:blue")
    ax.plot(data["t"], data["omega_p"], label=r"$\Omega_p$", color="tab:red")
    ax.set_xlabel("t / T")
    ax.set_ylabel(r"$\Omega(t)$  [1/T]")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _finish(fig, output)


def _render_fig1c(inputs, output):
    """Population histories, one panel per run (ideal and detuned)."""
    runs = [read_columns(p, ("t", "P0", "P1", "P2")) for p in inputs]
    fig, axes = plt.subplots(1, len(runs), figsize=(4.2 * len(runs), 2.8),
                             squeeze=False)
    for ax, data in zip(axes[0], runs):
        for key, color in (("P0", "tab:blue"), ("P1", "tab:red"),
                           ("P2", "tab:green")):
            ax.plot(data["t"], data[key], label=f"$P_{key[1]}$", color=color)
        ax.set_xlabel("t / T")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="center left")
    axes[0][0].set_ylabel("population")
    fig.tight_layout()
    _finish(fig, output)


def _render_fig2(inputs, output):
    """Overlaid efficiency contours in the detuning plane."""
    fig, ax = plt.subplots(figsize=(3.6, 3.6))
    colors = ["black", "tab:gray", "tab:blue", "tab:red"]
    for k, path in enumerate(inputs):
        data = read_columns(path, ("level", "polyline", "delta", "delta_p"))
        color = colors[k % len(colors)]
        label_done = False
        for pid in np.unique(data["polyline"]):
            for level in np.unique(data["level"]):
                sel = (data["polyline"] == pid) & (data["level"] == level)
                if not np.any(sel):
                    continue
                ax.plot(data["delta"][sel], data["delta_p"][sel], color=color,
                        label=None if label_done else _stem(path))
                label_done = True
    ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)
    ax.axvline(0.0, color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel(r"$\delta$  [1/T]")
    ax.set_ylabel(r"$\delta_p$  [1/T]")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _finish(fig, output)


def _render_fig3a(inputs, output):
    """Device-noise efficiency scan: one curve per fluctuation tier."""
    data = read_columns(inputs[0], ("q_g", "tier", "omega0T", "efficiency"))
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    styles = {
        "detunings-linear": dict(color="black", ls="-"),
        "detunings-quadratic": dict(color="tab:orange", ls="none", marker="s",
                                    markersize=4),
        "rabi-linear": dict(color="tab:blue", ls="--"),
        "rabi-quadratic": dict(color="tab:green", ls="none", marker=".",
                               markersize=7),
    }
    for tier in sorted(set(data["tier"])):
        sel = data["tier"] == tier
        order = np.argsort(data["q_g"][sel])
        style = styles.get(tier, dict(color="0.6", ls="-", lw=0.8))
        ax.plot(data["q_g"][sel][order], data["efficiency"][sel][order],
                label=tier, **style)
    ax.set_xlabel(r"$q_g$")
    ax.set_ylabel("transfer efficiency")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="lower right")
    fig.tight_layout()
    _finish(fig, output)


def _render_fig3b(inputs, output):
    """Figure-of-merit map over gate charge and tunneling strength."""
    data = read_columns(inputs[0], ("J", "q_g", "merit"))
    j_axis = np.unique(data["J"])
    qg_axis = np.unique(data["q_g"])
    grid = np.full((len(j_axis), len(qg_axis)), np.nan)
    for j, qg, merit in zip(data["J"], data["q_g"], data["merit"]):
        grid[np.searchsorted(j_axis, j), np.searchsorted(qg_axis, qg)] = merit
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    mesh = ax.pcolormesh(qg_axis, j_axis, grid, shading="nearest",
                         cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="figure of merit")
    ax.set_xlabel(r"$q_g$")
    ax.set_ylabel("J")
    fig.tight_layout()
    _finish(fig, output)


def _render_fig4(inputs, output):
    """Final populations vs drive strength, Markov vs static-noise average."""
    data = read_columns(inputs[0], ("omega0T", "mode", "P0", "P1", "P2"))
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    for mode, ls in (("spa", "-"), ("markov", "--")):
        sel = data["mode"] == mode
        if not np.any(sel):
            raise FigureError(f"{inputs[0]}: no rows for mode {mode!r}")
        order = np.argsort(data["omega0T"][sel])
        x = data["omega0T"][sel][order]
        ax.plot(x, data["P1"][sel][order], ls=ls, color="tab:red",
                label=f"$P_1$ ({mode})")
        ax.plot(x, data["P0"][sel][order], ls=ls, color="tab:blue", lw=0.9,
                label=f"$P_0$ ({mode})")
        ax.plot(x, data["P2"][sel][order], ls=ls, color="tab:green", lw=0.9,
                label=f"$P_2$ ({mode})")
    ax.set_xlabel(r"$\Omega_0 T$")
    ax.set_ylabel("final population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right", ncol=1)
    fig.tight_layout()
    _finish(fig, output)


def _stem(path):
    name = str(path).replace("\\", "/").rsplit("/", 1)[-1]
    return name.rsplit(".", 1)[0]


_RENDERERS = {
    "fig1b": _render_fig1b,
    "fig1c": _render_fig1c,
    "fig2": _render_fig2,
    "fig3a": _render_fig3a,
    "fig3b": _render_fig3b,
    "fig4": _render_fig4,
}


def render(recipe: FigureRecipe):
    """Render one figure; raises FigureError before any file is written."""
    with plt.rc_context(STYLE):
        _RENDERERS[recipe.figure_id](recipe.inputs, recipe.output)


def run_script(figure_id, argv):
    """Shared entry point for the per-figure scripts: inputs... output."""
    import sys
    if len(argv) < 2:
        print(f"usage: {figure_id} INPUT_CSV [INPUT_CSV ...] OUTPUT_IMAGE",
              file=sys.stderr)
        return 2
    recipe = FigureRecipe(inputs=tuple(argv[:-1]), figure_id=figure_id,
                          output=argv[-1])
    try:
        render(recipe)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {argv[-1]}")
    return 0
