"""End-to-end tests of the command-line interface.

Each test drives main() with an argv list, then checks exit codes, the
files on disk, and the printed verdicts.  Figures are asserted to be
SVG documents derived from the CSVs, not recomputed.
"""

import json
import math

import numpy as np
import pytest

from epbraid import arc_crossings_at_g, ep3_location, trace_ep2_arcs
from epbraid.braiding import canonical_loops
from epbraid.cli import main
from epbraid.csvio import read_table

G_STAR = math.sqrt(2.0 / 27.0)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPhaseDiagram:
    def test_writes_three_files_with_one_ep3_marker(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "phase-diagram", "--n-omega", "40", "--n-g", "40",
            "--arc-points", "32", "--out-dir", str(tmp_path),
        )
        assert code == 0
        grid = read_table(tmp_path / "phase_grid.csv", expected_schema="phase-grid")
        assert len(grid.rows) == 1600
        assert grid.metadata["input_units"] == "angular"
        arcs = read_table(tmp_path / "phase_arcs.csv", expected_schema="phase-arcs")
        assert set(arcs.string_column("branch")) == {"lower", "upper"}
        svg = (tmp_path / "phase_diagram.svg").read_text()
        assert svg.lstrip().startswith("<?xml")
        assert svg.count('id="ep3-marker"') == 1

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        argv = ("phase-diagram", "--n-omega", "25", "--n-g", "25",
                "--arc-points", "16", "--out-dir", str(tmp_path))
        assert run(capsys, *argv)[0] == 0
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert run(capsys, *argv)[0] == 0
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second

    def test_zero_grid_fails_validation_before_output(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "phase-diagram", "--n-omega", "0", "--out-dir", str(tmp_path / "o"),
        )
        assert code == 2
        assert "n_omega" in err
        assert not (tmp_path / "o" / "phase_grid.csv").exists()


class TestEigenSweep:
    def test_blue_preset_finds_the_triple_coalescence(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "eigen-sweep", "--preset", "blue", "--samples", "401",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        table = read_table(tmp_path / "eigen_sweep_blue.csv", expected_schema="eigen-sweep")
        assert abs(float(table.metadata["coalescence_g"]) - G_STAR) < 1e-6
        assert (tmp_path / "eigen_sweep_blue.svg").exists()

    def test_red_preset_shows_two_pitchforks(self, tmp_path, capsys):
        assert run(
            capsys, "eigen-sweep", "--preset", "red", "--samples", "801",
            "--out-dir", str(tmp_path),
        )[0] == 0
        table = read_table(tmp_path / "eigen_sweep_red.csv")
        spread = np.abs(table.float_column("re_lambda_1")) + np.abs(
            table.float_column("re_lambda_3")
        )
        split = spread > 1e-8
        edges = int(np.sum(np.abs(np.diff(split.astype(int)))))
        assert edges == 2
        crossings = arc_crossings_at_g(0.26, 1.0)
        assert crossings  # the sweep geometry shares the lens the slice test uses

    def test_green_preset_keeps_a_finite_gap(self, tmp_path, capsys):
        assert run(
            capsys, "eigen-sweep", "--preset", "green", "--samples", "401",
            "--out-dir", str(tmp_path),
        )[0] == 0
        table = read_table(tmp_path / "eigen_sweep_green.csv")
        lams = np.stack(
            [
                table.float_column(f"re_lambda_{k}") + 1j * table.float_column(f"im_lambda_{k}")
                for k in (1, 2, 3)
            ],
            axis=1,
        )
        gaps = [
            np.abs(lams[:, i] - lams[:, j]) for i in range(3) for j in range(i + 1, 3)
        ]
        assert float(np.min(gaps)) > 0.01

    def test_unknown_preset_rejected(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as info:
            main(["eigen-sweep", "--preset", "pink", "--out-dir", str(tmp_path)])
        assert info.value.code == 2


class TestBraid:
    def test_red_loop_reads_s1(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "braid", "--loop", "red", "--samples", "512",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert "word s1" in out
        report = (tmp_path / "braid_report.txt").read_text()
        assert "word: s1" in report
        assert "closure permutation: (1, 0, 2)" in report
        assert "vorticity total: -1" in report
        table = read_table(tmp_path / "braid_strands.csv", expected_schema="braid-strands")
        assert len(table.rows) >= 512
        assert (tmp_path / "braid_strands.svg").exists()

    def test_brown_loop_reads_s2_s1(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "braid", "--loop", "brown", "--samples", "512",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert "word s2 s1" in out

    def test_equivalence_queries(self, capsys):
        code, out, _ = run(capsys, "braid", "--equivalent", "s1 s2 s1", "s2 s1 s2")
        assert code == 0 and out.strip() == "equivalent"
        code, out, _ = run(capsys, "braid", "--equivalent", "s1 s2", "s2 s1")
        assert code == 0 and out.strip() == "different"

    def test_custom_loop_json(self, tmp_path, capsys):
        loop_path = tmp_path / "loop.json"
        loop_path.write_text(json.dumps(canonical_loops(1.0)["blue"].to_json_dict()))
        code, out, _ = run(
            capsys, "braid", "--loop-json", str(loop_path), "--samples", "512",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert "word s2" in out

    def test_loop_through_an_arc_exits_numeric(self, tmp_path, capsys):
        lower, _ = trace_ep2_arcs(1.0, n_points=513)
        om, g = lower[256]
        loop = {
            "kappa": 1.0,
            "segments": [
                {"type": "line", "start": [0.0, om, g - 0.03], "end": [0.0, om, g + 0.03]},
                {"type": "line", "start": [0.0, om, g + 0.03], "end": [0.0, om, g - 0.03]},
            ],
        }
        loop_path = tmp_path / "bad_loop.json"
        loop_path.write_text(json.dumps(loop))
        code, _, err = run(
            capsys, "braid", "--loop-json", str(loop_path), "--out-dir", str(tmp_path),
        )
        assert code == 3
        assert "numeric failure" in err


class TestEncircle:
    def test_small_map_single_direction(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "encircle", "--direction", "cw", "--n-t", "4", "--n-omega0", "4",
            "--t-min", "0.5", "--t-max", "2.0", "--omega0-min", "0.05",
            "--omega0-max", "0.3", "--dt-denominator", "1024",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        table = read_table(tmp_path / "fidelity_map_cw.csv", expected_schema="fidelity-map")
        assert len(table.rows) == 16
        assert table.metadata["direction"] == "cw"
        counts = table.float_column("ep_count").astype(int)
        crossings = [c.omega for c in arc_crossings_at_g(0.26, 1.0)]
        for omega0, count in zip(table.float_column("omega0"), counts):
            assert count == sum(1 for c in crossings if omega0 <= c <= 5.0)
        assert not (tmp_path / "fidelity_map_ccw.csv").exists()

    def test_both_directions_raise_the_chirality_flag(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "encircle", "--n-t", "3", "--n-omega0", "3",
            "--t-min", "1.0", "--t-max", "3.0", "--omega0-min", "0.1",
            "--omega0-max", "0.3", "--dt-denominator", "1024",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert "chirality flag: raised" in out
        assert (tmp_path / "fidelity_map_cw.svg").exists()
        assert (tmp_path / "fidelity_map_ccw.svg").exists()

    def test_single_trajectory(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "encircle", "--single", "3.0,0.15", "--single-direction", "cw",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        table = read_table(tmp_path / "encircle_trajectory.csv", expected_schema="populations")
        total = sum(
            table.float_column(c) for c in ("p_e", "p_f", "p_g1", "p_g0")
        )
        assert np.allclose(total, 1.0, atol=1e-9)
        assert (tmp_path / "encircle_trajectory.svg").exists()


class TestFitCommands:
    def synth(self, capsys, tmp_path, *extra):
        return run(
            capsys, "synth", "--truth", "0.5,1.2,0.8", "--kappa", "5",
            "--out-dir", str(tmp_path), *extra,
        )

    def test_noiseless_round_trip(self, tmp_path, capsys):
        assert self.synth(capsys, tmp_path)[0] == 0
        code, out, _ = run(
            capsys, "fit", "--data", str(tmp_path / "observations.csv"),
            "--guess", "0.6,1.4,0.9", "--out-dir", str(tmp_path),
        )
        assert code == 0
        result = json.loads((tmp_path / "fit_result.json").read_text())
        assert result["converged"] is True
        assert result["residual_rms"] < 1e-9
        assert abs(result["delta_ef"] - 0.5) < 1e-6
        assert abs(result["omega"] - 1.2) < 1e-6
        assert abs(result["g"] - 0.8) < 1e-6
        assert result["kappa_fixed"] == 5.0
        assert (tmp_path / "fit_residuals.csv").exists()
        assert (tmp_path / "fit_residuals.svg").exists()

    def test_kappa_and_psi0_recovered_from_the_file(self, tmp_path, capsys):
        assert self.synth(capsys, tmp_path, "--psi0", "excited")[0] == 0
        code, out, _ = run(
            capsys, "fit", "--data", str(tmp_path / "observations.csv"),
            "--guess", "0.5,1.2,0.8", "--out-dir", str(tmp_path),
        )
        assert code == 0
        result = json.loads((tmp_path / "fit_result.json").read_text())
        assert result["psi0"] == "excited" and result["kappa_fixed"] == 5.0

    def test_missing_column_is_a_validation_error(self, tmp_path, capsys):
        path = tmp_path / "broken.csv"
        path.write_text("# epbraid-csv 1 schema=observations\r\ntime,P_g,P_e\r\n0.1,0.5,0.3\r\n")
        code, _, err = run(
            capsys, "fit", "--data", str(path), "--guess", "1,1,1",
            "--out-dir", str(tmp_path),
        )
        assert code == 2
        assert "P_f" in err

    def test_malformed_row_names_the_line(self, tmp_path, capsys):
        assert self.synth(capsys, tmp_path)[0] == 0
        path = tmp_path / "observations.csv"
        content = path.read_bytes().split(b"\r\n")
        content[5] = content[5] + b",extra"
        path.write_bytes(b"\r\n".join(content))
        code, _, err = run(
            capsys, "fit", "--data", str(path), "--guess", "1,1,1",
            "--out-dir", str(tmp_path),
        )
        assert code == 2
        assert "line 6" in err

    def test_missing_file_is_an_io_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "fit", "--data", str(tmp_path / "absent.csv"), "--guess", "1,1,1",
        )
        assert code == 4
        assert "i/o error" in err


class TestConfigAndUnits:
    def test_cyclic_units_scale_rates_at_ingest(self, tmp_path, capsys):
        a_dir, c_dir = tmp_path / "a", tmp_path / "c"
        two_pi = 2.0 * math.pi
        assert run(
            capsys, "synth", "--truth", f"{0.5 * two_pi},{1.2 * two_pi},{0.8 * two_pi}",
            "--kappa", str(5 * two_pi), "--out-dir", str(a_dir),
        )[0] == 0
        assert run(
            capsys, "synth", "--truth", "0.5,1.2,0.8", "--kappa", "5",
            "--units", "cyclic", "--out-dir", str(c_dir),
        )[0] == 0
        a = read_table(a_dir / "observations.csv")
        c = read_table(c_dir / "observations.csv")
        assert c.metadata["input_units"] == "cyclic"
        assert float(c.metadata["kappa"]) == pytest.approx(5 * two_pi, rel=1e-15)
        assert a.rows == c.rows

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"n_omega": 30, "n_g": 30, "arc_points": 16}))
        code, _, _ = run(
            capsys, "phase-diagram", "--config", str(config), "--n-g", "20",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        grid = read_table(tmp_path / "phase_grid.csv")
        assert int(grid.metadata["n_omega"]) == 30
        assert int(grid.metadata["n_g"]) == 20

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"resolution": 10}))
        code, _, err = run(
            capsys, "phase-diagram", "--config", str(config), "--out-dir", str(tmp_path),
        )
        assert code == 2
        assert "resolution" in err

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2

    def test_ep3_report_matches_the_atlas(self, tmp_path, capsys):
        _, out, _ = run(
            capsys, "phase-diagram", "--n-omega", "20", "--n-g", "20",
            "--arc-points", "16", "--out-dir", str(tmp_path),
        )
        om, g, _ = ep3_location(1.0)
        assert f"{om:.6g}" in out and f"{g:.6g}" in out
