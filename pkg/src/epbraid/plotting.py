"""Figure emission from already-written delimited files.

Plots are a pure view layer: every renderer takes CSV paths produced by
the command-line tools, never live arrays, so re-plotting can never
change the numbers on disk.  SVG output is made byte-deterministic by
pinning the hash salt and dropping the creation date.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from .csvio import read_table
from .errors import ValidationError
from .exceptional import ep3_location

plt.rcParams["svg.hashsalt"] = "epbraid"

_PHASE_COLORS = ("#4878cf", "#d65f5f", "#eeeeee")
_STRAND_COLORS = ("#4878cf", "#6acc65", "#d65f5f")


def _save(fig, out_path) -> str:
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return str(out_path)


def _grid_metadata(table, *names) -> tuple:
    values = []
    for name in names:
        if name not in table.metadata:
            raise ValidationError(f"table {table.schema!r} is missing metadata {name!r}")
        values.append(table.metadata[name])
    return tuple(values)


def render_phase_diagram(grid_path, arcs_path, out_path) -> str:
    """Classification heatmap with the traced arcs and one EP3 marker."""
    grid = read_table(grid_path, expected_schema="phase-grid")
    arcs = read_table(arcs_path, expected_schema="phase-arcs")
    nx, ny, kappa = _grid_metadata(grid, "n_omega", "n_g", "kappa")
    nx, ny, kappa = int(nx), int(ny), float(kappa)
    omega = grid.float_column("omega").reshape(nx, ny)
    g = grid.float_column("g").reshape(nx, ny)
    codes = grid.float_column("code").reshape(nx, ny).astype(int)

    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    ax.pcolormesh(
        omega[:, 0], g[0, :], codes.T, cmap=ListedColormap(_PHASE_COLORS),
        vmin=-0.5, vmax=2.5, shading="nearest",
    )
    for branch, style in (("lower", "-"), ("upper", "--")):
        keep = [i for i, b in enumerate(arcs.string_column("branch")) if b == branch]
        if keep:
            ax.plot(
                arcs.float_column("omega")[keep], arcs.float_column("g")[keep],
                style, color="black", linewidth=1.2, label=f"{branch} arc",
            )
    om3, g3, _ = ep3_location(kappa)
    marker = ax.plot([om3], [g3], "*", color="#b8860b", markersize=12)[0]
    marker.set_gid("ep3-marker")
    ax.set_xlabel("omega")
    ax.set_ylabel("g")
    ax.set_title("zero-detuning spectral phases")
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, out_path)


def render_eigen_sweep(sweep_path, out_path) -> str:
    """Real and imaginary eigenvalue branches along a one-parameter sweep."""
    table = read_table(sweep_path, expected_schema="eigen-sweep")
    x = table.float_column("parameter")
    fig, (ax_re, ax_im) = plt.subplots(2, 1, figsize=(5.0, 5.6), sharex=True)
    for k in range(3):
        ax_re.plot(x, table.float_column(f"re_lambda_{k + 1}"), color=_STRAND_COLORS[k],
                   label=f"branch {k + 1}")
        ax_im.plot(x, table.float_column(f"im_lambda_{k + 1}"), color=_STRAND_COLORS[k])
    ax_re.set_ylabel("Re eigenvalue")
    ax_im.set_ylabel("Im eigenvalue")
    ax_im.set_xlabel(table.metadata.get("parameter_name", "parameter"))
    ax_re.legend(loc="best", fontsize=8)
    return _save(fig, out_path)


def render_strand_projection(strands_path, out_path) -> str:
    """Strand depth coordinate against loop fraction, crossings marked."""
    table = read_table(strands_path, expected_schema="braid-strands")
    s = table.float_column("s")
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    for k in range(3):
        ax.plot(s, table.float_column(f"re_lambda_{k + 1}"), color=_STRAND_COLORS[k],
                label=f"strand {k + 1}")
    crossings = table.metadata.get("crossings", "")
    for token in filter(None, crossings.split(",")):
        ax.axvline(float(token), color="gray", linestyle=":", linewidth=0.8)
    ax.set_xlabel("loop fraction")
    ax.set_ylabel("Re eigenvalue")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, out_path)


def render_fidelity_map(map_path, out_path) -> str:
    """Side-by-side F1 and F3 heatmaps over (period, start position)."""
    table = read_table(map_path, expected_schema="fidelity-map")
    n_omega0, n_t = (int(v) for v in _grid_metadata(table, "n_omega0", "n_t"))
    t = table.float_column("period").reshape(n_omega0, n_t)
    omega0 = table.float_column("omega0").reshape(n_omega0, n_t)
    ep = table.float_column("ep_count").reshape(n_omega0, n_t)[:, 0]

    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.6), sharey=True)
    for ax, channel in zip(axes, ("F_1", "F_3")):
        f = table.float_column(channel).reshape(n_omega0, n_t)
        mesh = ax.pcolormesh(
            t[0, :], omega0[:, 0], f, shading="nearest", vmin=0.0, vmax=1.0,
            cmap="magma",
        )
        for i in range(1, n_omega0):
            if ep[i] != ep[i - 1]:
                edge = 0.5 * (omega0[i, 0] + omega0[i - 1, 0])
                ax.axhline(edge, color="white", linestyle="--", linewidth=0.9)
        ax.set_xlabel("traversal period")
        ax.set_title(f"{channel} ({table.metadata.get('direction', '?')})")
    axes[0].set_ylabel("start omega0")
    fig.colorbar(mesh, ax=axes, fraction=0.04)
    return _save(fig, out_path)


def render_populations(trajectory_path, out_path) -> str:
    """The four population channels along one evolution."""
    table = read_table(trajectory_path, expected_schema="populations")
    t = table.float_column("time")
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    for name, label in (("p_e", "e,0"), ("p_f", "f,0"), ("p_g1", "g,1"), ("p_g0", "g,0")):
        ax.plot(t, table.float_column(name), label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, out_path)


def render_fit_residuals(residuals_path, out_path) -> str:
    """Observed-minus-model curves per channel after a fit."""
    table = read_table(residuals_path, expected_schema="fit-residuals")
    t = table.float_column("time")
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    for name in ("r_g", "r_e", "r_f"):
        ax.plot(t, table.float_column(name), label=name)
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("residual")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, out_path)
