"""Command-line interface: compute, persist, and render.

Every subcommand validates its merged configuration (JSON file first,
explicit flags override) before computing, writes delimited data files,
and then renders SVG figures from those files, never from live arrays.
All quantities entered with --units cyclic are multiplied by 2*pi at
ingest; files always store internal angular rate units.

Exit codes: 0 success, 2 validation error, 3 numeric failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .braiding import (
    BraidWord,
    canonical_loops,
    closure_invariants,
    extract_braid_word,
    normal_form,
    sample_strands,
    vorticity,
    words_equivalent,
)
from .csvio import read_observations, read_table, write_observations, write_table
from .dynamics import (
    RectangleLoopSchedule,
    enclosed_ep_count,
    fidelity_map,
    population_dynamics,
)
from .errors import NumericError, ValidationError
from .exceptional import ep3_location
from .fitting import fit_parameters, population_model, simulate_observations
from .loops import loop_from_json
from .params import TWO_PI, SystemParams
from .plotting import (
    render_eigen_sweep,
    render_fidelity_map,
    render_fit_residuals,
    render_phase_diagram,
    render_populations,
    render_strand_projection,
)
from .spectral import eigenvalues_cardano

_PSI0_PRESETS = {
    "excited": np.array([1.0, 0.0, 0.0], dtype=complex),
    "f": np.array([0.0, 1.0, 0.0], dtype=complex),
    "cavity": np.array([0.0, 0.0, 1.0], dtype=complex),
    "spread": np.array([1.0, 1.0, 1.0], dtype=complex) / np.sqrt(3.0),
}

_SWEEP_PRESETS = {
    # omega in units of kappa; every preset sweeps g over [0, 0.35 kappa]
    "red": 0.05,
    "blue": 1.0 / (6.0 * math.sqrt(3.0)),
    "green": 0.15,
}


def _parse_triple(name: str, text: str) -> tuple:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ValidationError(f"{name} must be three comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{name} has a non-numeric entry in {text!r}") from None


def _parse_psi0(text: str) -> np.ndarray:
    if text in _PSI0_PRESETS:
        return _PSI0_PRESETS[text]
    raise ValidationError(
        f"psi0 must be one of {sorted(_PSI0_PRESETS)}, got {text!r}"
    )


class Merged:
    """Per-command configuration: defaults, then JSON file, then flags."""

    def __init__(self, args: argparse.Namespace, defaults: dict):
        self.defaults = defaults
        config = {}
        if getattr(args, "config", None):
            with open(args.config, "r", encoding="utf-8") as handle:
                try:
                    config = json.load(handle)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"config is not valid JSON: {exc}") from exc
            if not isinstance(config, dict):
                raise ValidationError("config must be a JSON object")
            unknown = sorted(set(config) - set(defaults))
            if unknown:
                raise ValidationError(
                    f"unknown config keys {unknown}; allowed: {sorted(defaults)}"
                )
        self.config = config
        self.args = args

    def __getitem__(self, key: str):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.config:
            return self.config[key]
        return self.defaults[key]


def _rate_scale(merged: Merged) -> float:
    units = merged["units"]
    if units not in ("angular", "cyclic"):
        raise ValidationError(f"units must be 'angular' or 'cyclic', got {units!r}")
    return TWO_PI if units == "cyclic" else 1.0


def _out_dir(merged: Merged) -> str:
    path = str(merged["out_dir"])
    os.makedirs(path, exist_ok=True)
    return path


def _wrote(path: str) -> None:
    print(f"wrote {path}")


def _positive_int(name: str, value) -> int:
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be an integer, got {value!r}") from None
    if value <= 0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def cmd_phase_diagram(args: argparse.Namespace) -> None:
    merged = Merged(args, {
        "kappa": 1.0, "omega_max": None, "g_max": None,
        "n_omega": 200, "n_g": 200, "arc_points": 256,
        "out_dir": ".", "units": "angular",
    })
    scale = _rate_scale(merged)
    kappa = float(merged["kappa"]) * scale
    omega_max = merged["omega_max"]
    g_max = merged["g_max"]
    omega_max = 0.5 * kappa if omega_max is None else float(omega_max) * scale
    g_max = 0.5 * kappa if g_max is None else float(g_max) * scale
    shape = (_positive_int("n_omega", merged["n_omega"]), _positive_int("n_g", merged["n_g"]))

    from .exceptional import phase_diagram as build_diagram

    diagram = build_diagram(
        ((0.0, omega_max), (0.0, g_max)), shape, kappa,
        arc_points=_positive_int("arc_points", merged["arc_points"]),
    )
    out = _out_dir(merged)
    meta = {
        "kappa": kappa, "n_omega": shape[0], "n_g": shape[1],
        "input_units": merged["units"],
    }
    grid_path = os.path.join(out, "phase_grid.csv")
    rows = (
        (diagram.omega_values[i], diagram.g_values[j], int(diagram.codes[i, j]))
        for i in range(shape[0])
        for j in range(shape[1])
    )
    write_table(grid_path, "phase-grid", ("omega", "g", "code"), rows, meta)
    _wrote(grid_path)

    arcs_path = os.path.join(out, "phase_arcs.csv")
    lower, upper = diagram.arcs
    arc_rows = [("lower", om, g) for om, g in lower] + [("upper", om, g) for om, g in upper]
    write_table(arcs_path, "phase-arcs", ("branch", "omega", "g"), arc_rows,
                {"kappa": kappa, "input_units": merged["units"]})
    _wrote(arcs_path)

    svg_path = os.path.join(out, "phase_diagram.svg")
    render_phase_diagram(grid_path, arcs_path, svg_path)
    _wrote(svg_path)
    om3, g3, _ = ep3_location(kappa)
    print(f"ep3 at omega={om3:.6g} g={g3:.6g}")


def _min_gap_at(omega: float, g: float, kappa: float) -> float:
    return eigenvalues_cardano(SystemParams(0.0, omega, g, kappa)).min_gap()


def _refine_coalescence(omega: float, kappa: float, g_lo: float, g_hi: float) -> float:
    """Shrink toward the minimum eigenvalue gap along a vertical sweep."""
    for _ in range(5):
        grid = np.linspace(g_lo, g_hi, 101)
        gaps = [_min_gap_at(omega, float(g), kappa) for g in grid]
        k = int(np.argmin(gaps))
        g_lo = float(grid[max(0, k - 1)])
        g_hi = float(grid[min(len(grid) - 1, k + 1)])
    return 0.5 * (g_lo + g_hi)


def cmd_eigen_sweep(args: argparse.Namespace) -> None:
    merged = Merged(args, {
        "preset": "red", "kappa": 1.0, "samples": 801,
        "g_min": 0.0, "g_max": None, "omega": None,
        "out_dir": ".", "units": "angular",
    })
    scale = _rate_scale(merged)
    kappa = float(merged["kappa"]) * scale
    preset = merged["preset"]
    if preset not in _SWEEP_PRESETS and merged["omega"] is None:
        raise ValidationError(
            f"preset must be one of {sorted(_SWEEP_PRESETS)} unless omega is given"
        )
    if merged["omega"] is not None:
        preset = "custom"
        omega = float(merged["omega"]) * scale
    else:
        omega = _SWEEP_PRESETS[preset] * kappa
    g_min = float(merged["g_min"]) * scale
    g_max = 0.35 * kappa if merged["g_max"] is None else float(merged["g_max"]) * scale
    samples = _positive_int("samples", merged["samples"])
    if samples < 2 or g_max <= g_min:
        raise ValidationError("sweep needs samples >= 2 and g_max > g_min")

    g_values = np.linspace(g_min, g_max, samples)
    rows = []
    for g in g_values:
        lams = eigenvalues_cardano(SystemParams(0.0, omega, float(g), kappa)).lambdas
        rows.append((float(g), lams[0].real, lams[0].imag, lams[1].real, lams[1].imag,
                     lams[2].real, lams[2].imag))

    meta = {
        "preset": preset, "omega": omega, "kappa": kappa,
        "parameter_name": "g", "input_units": merged["units"],
    }
    if preset == "blue":
        coarse = min(rows, key=lambda r: _min_gap_at(omega, r[0], kappa))[0]
        width = (g_max - g_min) / (samples - 1)
        meta["coalescence_g"] = _refine_coalescence(
            omega, kappa, coarse - 2 * width, coarse + 2 * width
        )

    out = _out_dir(merged)
    csv_path = os.path.join(out, f"eigen_sweep_{preset}.csv")
    columns = ("parameter", "re_lambda_1", "im_lambda_1", "re_lambda_2", "im_lambda_2",
               "re_lambda_3", "im_lambda_3")
    write_table(csv_path, "eigen-sweep", columns, rows, meta)
    _wrote(csv_path)
    svg_path = os.path.join(out, f"eigen_sweep_{preset}.svg")
    render_eigen_sweep(csv_path, svg_path)
    _wrote(svg_path)
    if "coalescence_g" in meta:
        print(f"coalescence at g={meta['coalescence_g']:.9g}")


def _crossing_fractions(strands) -> list:
    """Loop fractions where the damping order of the strands changes."""
    values = strands.values
    out = []
    previous = None
    for k in range(values.shape[1]):
        order = tuple(np.lexsort((values[:, k].real, -values[:, k].imag)))
        if previous is not None and order != previous:
            out.append(0.5 * (strands.samples[k - 1] + strands.samples[k]))
        previous = order
    return out


def cmd_braid(args: argparse.Namespace) -> None:
    if getattr(args, "equivalent", None):
        word_a = BraidWord.from_text(args.equivalent[0])
        word_b = BraidWord.from_text(args.equivalent[1])
        print("equivalent" if words_equivalent(word_a, word_b) else "different")
        return

    merged = Merged(args, {
        "loop": "red", "loop_json": None, "kappa": 1.0, "samples": 1024,
        "out_dir": ".", "units": "angular",
    })
    scale = _rate_scale(merged)
    kappa = float(merged["kappa"]) * scale
    if merged["loop_json"] is not None:
        with open(merged["loop_json"], "r", encoding="utf-8") as handle:
            loop = loop_from_json(json.load(handle))
        loop_name = "custom"
    else:
        loop_name = merged["loop"]
        loops = canonical_loops(kappa)
        if loop_name not in loops:
            raise ValidationError(f"loop must be one of {sorted(loops)}, got {loop_name!r}")
        loop = loops[loop_name]

    strands = sample_strands(loop, n_initial=_positive_int("samples", merged["samples"]))
    word = extract_braid_word(strands)
    invariants = closure_invariants(word)
    canonical = normal_form(word)
    twist = vorticity(loop, n_samples=max(1024, _positive_int("samples", merged["samples"])))

    out = _out_dir(merged)
    csv_path = os.path.join(out, "braid_strands.csv")
    crossings = _crossing_fractions(strands)
    meta = {
        "kappa": kappa, "loop": loop_name, "input_units": merged["units"],
        "crossings": ",".join(format(s, ".6f") for s in crossings),
    }
    columns = ("s", "re_lambda_1", "im_lambda_1", "re_lambda_2", "im_lambda_2",
               "re_lambda_3", "im_lambda_3")
    rows = (
        (strands.samples[k],
         strands.values[0, k].real, strands.values[0, k].imag,
         strands.values[1, k].real, strands.values[1, k].imag,
         strands.values[2, k].real, strands.values[2, k].imag)
        for k in range(len(strands.samples))
    )
    write_table(csv_path, "braid-strands", columns, rows, meta)
    _wrote(csv_path)

    report_path = os.path.join(out, "braid_report.txt")
    lines = [
        f"loop: {loop_name}",
        f"word: {word.to_text()}",
        f"normal form: delta^{canonical.delta_power} {canonical.as_word().to_text()}",
        f"exponent sum: {word.exponent_sum()}",
        f"closure permutation: {invariants.permutation}",
        f"closure components: {invariants.component_count}",
        f"vorticity total: {twist.nu_total}",
    ]
    for pair, value in sorted(twist.nu_pairs.items()):
        lines.append(f"vorticity {pair[0] + 1}{pair[1] + 1}: {value}")
    with open(report_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    _wrote(report_path)

    svg_path = os.path.join(out, "braid_strands.svg")
    render_strand_projection(csv_path, svg_path)
    _wrote(svg_path)
    print(f"word {word.to_text()}")


def _write_fidelity_csv(path, chart, extra_meta: dict) -> None:
    error_map = {(i, j): msg for i, j, msg in chart.errors}
    rows = []
    for i, omega0 in enumerate(chart.omega0_grid):
        for j, period in enumerate(chart.t_grid):
            f1, f2, f3 = chart.values[i, j]
            rows.append((float(omega0), float(period), int(chart.ep_count[i]),
                         float(f1), float(f2), float(f3), error_map.get((i, j), "")))
    meta = {
        "n_omega0": len(chart.omega0_grid), "n_t": len(chart.t_grid),
        "direction": chart.direction, **extra_meta,
    }
    columns = ("omega0", "period", "ep_count", "F_1", "F_2", "F_3", "error")
    write_table(path, "fidelity-map", columns, rows, meta)


def cmd_encircle(args: argparse.Namespace) -> None:
    merged = Merged(args, {
        "g": 0.26, "omega_m": 5.0, "a": 5.0, "kappa": 1.0,
        "t_min": 0.4, "t_max": 7.8, "n_t": 40,
        "omega0_min": 0.01, "omega0_max": 0.30, "n_omega0": 40,
        "direction": "both", "dt_denominator": 8192,
        "single": None, "single_direction": "ccw",
        "out_dir": ".", "units": "angular",
    })
    scale = _rate_scale(merged)
    kappa = float(merged["kappa"]) * scale
    g = float(merged["g"]) * scale
    omega_m = float(merged["omega_m"]) * scale
    a = float(merged["a"]) * scale
    out = _out_dir(merged)

    if merged["single"] is not None:
        period, omega0 = (float(v) for v in str(merged["single"]).split(",", 1))
        schedule = RectangleLoopSchedule(
            omega0 * scale, omega_m, a, g, kappa, period, merged["single_direction"]
        )
        from .dynamics import launch_state

        series = population_dynamics(schedule, launch_state(schedule.start_params))
        csv_path = os.path.join(out, "encircle_trajectory.csv")
        rows = zip(series.times, series.p_e, series.p_f, series.p_g1, series.p_g0)
        write_table(csv_path, "populations", ("time", "p_e", "p_f", "p_g1", "p_g0"), rows, {
            "omega0": schedule.omega0, "omega_m": omega_m, "a": a, "g": g,
            "kappa": kappa, "period": period, "direction": schedule.direction,
            "enclosed_eps": int(enclosed_ep_count(schedule)),
            "input_units": merged["units"],
        })
        _wrote(csv_path)
        svg_path = os.path.join(out, "encircle_trajectory.svg")
        render_populations(csv_path, svg_path)
        _wrote(svg_path)
        return

    t_grid = np.linspace(float(merged["t_min"]), float(merged["t_max"]),
                         _positive_int("n_t", merged["n_t"]))
    omega0_grid = np.linspace(float(merged["omega0_min"]) * scale,
                              float(merged["omega0_max"]) * scale,
                              _positive_int("n_omega0", merged["n_omega0"]))
    direction = merged["direction"]
    if direction not in ("both", "cw", "ccw"):
        raise ValidationError(f"direction must be both, cw, or ccw, got {direction!r}")
    directions = ("cw", "ccw") if direction == "both" else (direction,)

    charts = {}
    extra = {
        "g": g, "omega_m": omega_m, "a": a, "kappa": kappa,
        "dt_denominator": int(merged["dt_denominator"]), "input_units": merged["units"],
    }
    for d in directions:
        chart = fidelity_map(g, omega_m, a, kappa, t_grid, omega0_grid, d,
                             dt_denominator=int(merged["dt_denominator"]))
        charts[d] = chart
        csv_path = os.path.join(out, f"fidelity_map_{d}.csv")
        _write_fidelity_csv(csv_path, chart, extra)
        _wrote(csv_path)
        svg_path = os.path.join(out, f"fidelity_map_{d}.svg")
        render_fidelity_map(csv_path, svg_path)
        _wrote(svg_path)
        if chart.errors:
            print(f"{d}: {len(chart.errors)} cells failed and were recorded")

    if len(charts) == 2:
        zero = charts["cw"].ep_count == 0
        cw3 = np.argmax(np.nan_to_num(charts["cw"].values[zero], nan=-1.0), axis=-1) == 2
        ccw1 = np.argmax(np.nan_to_num(charts["ccw"].values[zero], nan=-1.0), axis=-1) == 0
        flag = bool(np.any(cw3)) and bool(np.any(ccw1))
        print(f"chirality flag: {'raised' if flag else 'absent'}")


def cmd_fit(args: argparse.Namespace) -> None:
    merged = Merged(args, {
        "data": None, "kappa": None, "guess": None, "psi0": None,
        "out_dir": ".", "units": "angular",
    })
    if merged["data"] is None:
        raise ValidationError("fit needs a data file (--data or config key 'data')")
    if merged["guess"] is None:
        raise ValidationError("fit needs an initial guess (--guess 'delta,omega,g')")
    table = read_table(merged["data"], expected_schema="observations")
    data = read_observations(merged["data"])

    scale = _rate_scale(merged)
    kappa = merged["kappa"]
    if kappa is None:
        if "kappa" not in table.metadata:
            raise ValidationError("kappa not given and not recorded in the data file")
        kappa = float(table.metadata["kappa"])
    else:
        kappa = float(kappa) * scale
    psi0_name = merged["psi0"] or table.metadata.get("psi0", "excited")
    psi0 = _parse_psi0(psi0_name)
    guess = tuple(v * scale for v in _parse_triple("guess", merged["guess"]))

    result = fit_parameters(data, kappa, psi0, guess)
    out = _out_dir(merged)
    json_path = os.path.join(out, "fit_result.json")
    payload = dict(result.to_json_dict(), psi0=psi0_name, input_units=merged["units"])
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    _wrote(json_path)

    model = population_model(result.params, kappa, psi0, data.times)
    residual = model - data.observed
    csv_path = os.path.join(out, "fit_residuals.csv")
    rows = zip(data.times, residual[:, 0], residual[:, 1], residual[:, 2])
    write_table(csv_path, "fit-residuals", ("time", "r_g", "r_e", "r_f"), rows, {
        "kappa": kappa, "psi0": psi0_name, "residual_rms": result.residual_rms,
        "converged": result.converged, "ill_posed": result.ill_posed,
        "input_units": merged["units"],
    })
    _wrote(csv_path)
    svg_path = os.path.join(out, "fit_residuals.svg")
    render_fit_residuals(csv_path, svg_path)
    _wrote(svg_path)
    print(
        f"fitted delta={result.params[0]:.9g} omega={result.params[1]:.9g} "
        f"g={result.params[2]:.9g} rms={result.residual_rms:.3g} "
        f"converged={str(result.converged).lower()}"
    )
    if result.ill_posed:
        print("warning: ill-posed fit (jacobian condition exceeds 1e12)")


def cmd_synth(args: argparse.Namespace) -> None:
    merged = Merged(args, {
        "truth": None, "kappa": 1.0, "psi0": "spread",
        "t_min": 0.005, "t_max": 1.0, "n_times": 200,
        "noise_sd": 0.0, "seed": 0,
        "out_dir": ".", "units": "angular",
    })
    if merged["truth"] is None:
        raise ValidationError("synth needs the true parameters (--truth 'delta,omega,g')")
    scale = _rate_scale(merged)
    kappa = float(merged["kappa"]) * scale
    truth = tuple(v * scale for v in _parse_triple("truth", merged["truth"]))
    psi0 = _parse_psi0(merged["psi0"])
    times = np.linspace(float(merged["t_min"]), float(merged["t_max"]),
                        _positive_int("n_times", merged["n_times"]))
    data = simulate_observations(truth, kappa, psi0, times,
                                 noise_sd=float(merged["noise_sd"]), seed=int(merged["seed"]))
    out = _out_dir(merged)
    csv_path = os.path.join(out, "observations.csv")
    write_observations(csv_path, data, {
        "kappa": kappa, "psi0": merged["psi0"], "noise_sd": float(merged["noise_sd"]),
        "seed": int(merged["seed"]), "delta_ef": truth[0], "omega": truth[1],
        "g": truth[2], "input_units": merged["units"],
    })
    _wrote(csv_path)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with configuration keys")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory (default '.')")
    parser.add_argument("--units", choices=("angular", "cyclic"),
                        help="unit convention of the entered rates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epbraid",
        description="Spectra, eigenvalue braids, and state transfer near a third-order"
                    " exceptional point",
    )
    parser.add_argument("--version", action="version", version=f"epbraid {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("phase-diagram", help="classify the zero-detuning plane")
    _add_common(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--omega-max", dest="omega_max", type=float)
    p.add_argument("--g-max", dest="g_max", type=float)
    p.add_argument("--n-omega", dest="n_omega", type=int)
    p.add_argument("--n-g", dest="n_g", type=int)
    p.add_argument("--arc-points", dest="arc_points", type=int)
    p.set_defaults(handler=cmd_phase_diagram)

    p = sub.add_parser("eigen-sweep", help="eigenvalue branches along a coupling sweep")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(_SWEEP_PRESETS))
    p.add_argument("--omega", type=float, help="fixed omega for a custom sweep")
    p.add_argument("--kappa", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--g-min", dest="g_min", type=float)
    p.add_argument("--g-max", dest="g_max", type=float)
    p.set_defaults(handler=cmd_eigen_sweep)

    p = sub.add_parser("braid", help="extract the eigenvalue braid of a control loop")
    _add_common(p)
    p.add_argument("--loop", help="canonical loop name (red, blue, green, brown, purple)")
    p.add_argument("--loop-json", dest="loop_json", help="path to a JSON loop definition")
    p.add_argument("--kappa", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--equivalent", nargs=2, metavar=("WORD_A", "WORD_B"),
                   help="compare two braid words and print the verdict")
    p.set_defaults(handler=cmd_braid)

    p = sub.add_parser("encircle", help="state transfer around rectangle loops")
    _add_common(p)
    p.add_argument("--g", type=float)
    p.add_argument("--omega-m", dest="omega_m", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-t", dest="n_t", type=int)
    p.add_argument("--omega0-min", dest="omega0_min", type=float)
    p.add_argument("--omega0-max", dest="omega0_max", type=float)
    p.add_argument("--n-omega0", dest="n_omega0", type=int)
    p.add_argument("--direction", choices=("both", "cw", "ccw"))
    p.add_argument("--dt-denominator", dest="dt_denominator", type=int)
    p.add_argument("--single", help="'period,omega0' for one trajectory instead of a map")
    p.add_argument("--single-direction", dest="single_direction", choices=("cw", "ccw"))
    p.set_defaults(handler=cmd_encircle)

    p = sub.add_parser("fit", help="recover parameters from a population record")
    _add_common(p)
    p.add_argument("--data", help="observations CSV path")
    p.add_argument("--kappa", type=float)
    p.add_argument("--guess", help="initial 'delta,omega,g'")
    p.add_argument("--psi0", help="launch state name (default: recorded in the file)")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("synth", help="synthesize a noisy observation record")
    _add_common(p)
    p.add_argument("--truth", help="true 'delta,omega,g'")
    p.add_argument("--kappa", type=float)
    p.add_argument("--psi0", choices=sorted(_PSI0_PRESETS))
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-times", dest="n_times", type=int)
    p.add_argument("--noise-sd", dest="noise_sd", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 2
    try:
        args.handler(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
