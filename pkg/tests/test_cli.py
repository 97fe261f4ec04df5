"""Command-line interface: artifacts, determinism, and exit codes."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from geomstates.cli import DEFAULT_SEED, REGISTRY, main, run_scenario

BUILTINS = [
    "bloch-field",
    "phase-damping",
    "qubit-dissipation",
    "massive-decoherence",
    "pure-decoherence",
    "three-level-decay",
    "gisin",
    "double-bracket",
    "kaufman-morrison",
]


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRegistry:
    def test_builtin_names(self):
        assert list(REGISTRY) == BUILTINS

    def test_list_command(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == BUILTINS


class TestArtifacts:
    def test_phase_damping_run(self, tmp_path, capsys):
        code = main(
            ["run", "phase-damping", "--out", str(tmp_path), "--report", "--points", "40"]
        )
        assert code == 0
        log = capsys.readouterr().out
        assert "verdict: limit" in log
        assert "{x1,x3} = -x2" in log

        field = tmp_path / "phase_damping_field_generator.csv"
        traj = tmp_path / "phase_damping_trajectory.csv"
        report = tmp_path / "phase_damping_report.json"
        tables = tmp_path / "phase_damping_tables.json"
        for p in (field, traj, report, tables):
            assert p.is_file(), p

        rows = _read_rows(field)
        assert rows[0] == ["x_1", "x_2", "x_3", "v_1", "v_2", "v_3"]
        assert len(rows) >= 41  # header + anchors + grid
        rows_t = _read_rows(traj)
        assert rows_t[0] == ["t", "x_1", "x_2", "x_3", "purity"]
        assert float(rows_t[1][0]) == 0.0

        rep = json.loads(report.read_text())
        assert rep["model"] == "phase-damping"
        assert rep["verdict"] == "limit"
        assert rep["sectors"]["poisson"]["verdict"] == "limit"
        residuals = {k: v for k, v in rep["axioms"].items() if k != "trials"}
        assert max(residuals.values()) < 1e-9
        tab = json.loads(tables.read_text())
        assert "poisson" in tab and "jordan" in tab
        assert len(tab["poisson"]) == 3  # full static grids
        assert tab["jordan"][0][0]["c0"] == 1.0

    def test_dephasing_field_values_on_grid(self, tmp_path):
        main(["run", "phase-damping", "--out", str(tmp_path), "--points", "25"])
        rows = _read_rows(tmp_path / "phase_damping_field_generator.csv")[1:]
        for row in rows:
            x = np.array([float(v) for v in row[:3]])
            v = np.array([float(v) for v in row[3:]])
            assert np.abs(v - [-2 * x[0], -2 * x[1], 0.0]).max() < 1e-12

    def test_bloch_anchor_rows_exactly_stationary(self, tmp_path):
        main(["run", "bloch-field", "--out", str(tmp_path), "--points", "30"])
        ham = _read_rows(tmp_path / "bloch_field_field_hamiltonian.csv")[1:]
        # anchors are written first: origin then +/- the field axis
        axis_rows = [r for r in ham[:5] if abs(abs(float(r[2])) - 1.0) < 1e-15]
        assert len(axis_rows) == 2
        for r in axis_rows:
            assert r[3:] == ["0", "0", "0"]
        grad = _read_rows(tmp_path / "bloch_field_field_gradient_descent.csv")[1:]
        pole_rows = [r for r in grad[:5] if abs(abs(float(r[2])) - 1.0) < 1e-15]
        assert len(pole_rows) == 2
        for r in pole_rows:
            assert all(float(c) == 0.0 for c in r[3:])

    def test_trajectory_matches_closed_form(self, tmp_path):
        main(
            [
                "run", "phase-damping", "--out", str(tmp_path),
                "--x0", "0.4,-0.2,0.5", "--t-end", "2.0", "--dt", "0.5",
            ]
        )
        rows = _read_rows(tmp_path / "phase_damping_trajectory.csv")[1:]
        for row in rows:
            t = float(row[0])
            x = np.array([float(v) for v in row[1:4]])
            want = np.array(
                [0.4 * np.exp(-2 * t), -0.2 * np.exp(-2 * t), 0.5]
            )
            assert np.abs(x - want).max() < 1e-12

    def test_three_level_decay_report(self, tmp_path, capsys):
        code = main(
            ["run", "three-level-decay", "--out", str(tmp_path), "--report", "--points", "30"]
        )
        assert code == 0
        log = capsys.readouterr().out
        assert "verdict: divergent" in log
        assert "matches a 2-level system" in log
        rep = json.loads((tmp_path / "three_level_decay_report.json").read_text())
        assert rep["verdict"] == "divergent"
        modes = rep["sectors"]["poisson"]["modes"]
        assert modes and all(m["growth_rate"] == pytest.approx(3.0) for m in modes)
        ls = rep["limit_set"]
        assert ls["free_coordinates"] == ["x_1", "x_2", "x_3"]
        assert ls["isomorphic_to_level"] == 2


class TestDeterminism:
    def test_reruns_are_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            assert main(["run", "qubit-dissipation", "--out", str(d), "--points", "50"]) == 0
        for p1 in sorted(d1.iterdir()):
            p2 = d2 / p1.name
            assert p2.is_file()
            assert p1.read_bytes() == p2.read_bytes()

    def test_seed_changes_grid(self, tmp_path, monkeypatch):
        d1, d2, d3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        main(["run", "phase-damping", "--out", str(d1), "--points", "40"])
        monkeypatch.setenv("GEOM_SEED", "123")
        main(["run", "phase-damping", "--out", str(d2), "--points", "40"])
        main(["run", "phase-damping", "--out", str(d3), "--points", "40"])
        f = "phase_damping_field_generator.csv"
        assert (d1 / f).read_bytes() != (d2 / f).read_bytes()
        assert (d2 / f).read_bytes() == (d3 / f).read_bytes()

    def test_invalid_seed_is_usage_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("GEOM_SEED", "not-a-number")
        assert main(["run", "phase-damping", "--out", str(tmp_path)]) == 2
        assert "GEOM_SEED" in capsys.readouterr().err


class TestScenarioFiles:
    def _write(self, path, data):
        path.write_text(json.dumps(data))
        return str(path)

    def test_custom_model_all_outputs(self, tmp_path, capsys):
        scen = {
            "name": "custom-damping",
            "n": 2,
            "model": {
                "H": [[0.5, 0.0], [0.0, -0.5]],
                "V": [[[0.0, 0.7], [0.0, 0.0]], [[0.0, 0.0], [0.7, 0.0]]],
            },
            "outputs": ["field-samples", "trajectory", "tensor-family", "contraction", "tables"],
            "parameters": {"points": 30, "t_end": 2.0},
        }
        code = main(["run", self._write(tmp_path / "scen.json", scen), "--out", str(tmp_path)])
        assert code == 0
        fam = json.loads((tmp_path / "custom_damping_tensor_family.json").read_text())
        assert len(fam["times"]) == 11
        assert set(fam) == {"poisson", "symmetric", "times"}
        assert len(fam["poisson"]) == len(fam["times"])
        rep = json.loads((tmp_path / "custom_damping_report.json").read_text())
        assert rep["verdict"] in {"limit", "divergent", "oscillatory"}

    def test_complex_entries_parse(self, tmp_path):
        scen = {
            "name": "complex-jump",
            "n": 2,
            "model": {"V": [[[0.5, [0.0, -0.5]], [[0.0, 0.5], -0.5]]]},
            "outputs": ["trajectory"],
        }
        assert main(["run", self._write(tmp_path / "s.json", scen), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "complex_jump_trajectory.csv").is_file()

    def test_explicit_flag_beats_file_parameter(self, tmp_path):
        scen = {
            "name": "tuned",
            "n": 2,
            "model": "phase-damping",
            "parameters": {"gamma": 2.0, "points": 20},
        }
        p = self._write(tmp_path / "tuned.json", scen)
        d1, d2 = tmp_path / "file-gamma", tmp_path / "cli-gamma"
        main(["run", p, "--out", str(d1)])
        main(["run", p, "--out", str(d2), "--gamma", "3.0"])
        rows1 = _read_rows(d1 / "tuned_field_generator.csv")[1:]
        rows2 = _read_rows(d2 / "tuned_field_generator.csv")[1:]
        x = np.array([float(v) for v in rows1[3][:3]])
        v1 = np.array([float(v) for v in rows1[3][3:]])
        v2 = np.array([float(v) for v in rows2[3][3:]])
        assert np.abs(v1 - [-4 * x[0], -4 * x[1], 0.0]).max() < 1e-12
        assert np.abs(v2 - [-6 * x[0], -6 * x[1], 0.0]).max() < 1e-12


class TestExitCodes:
    def test_unknown_builtin(self, capsys):
        assert main(["run", "does-not-exist"]) == 2
        err = capsys.readouterr().err
        assert "unknown scenario" in err
        for name in BUILTINS:
            assert name in err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_malformed_json_reports_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"name": "x",\n  "n": oops}\n')
        assert main(["run", str(bad), "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err

    def test_quadratic_generator_report_fails_cleanly(self, tmp_path, capsys):
        code = main(["run", "gisin", "--out", str(tmp_path), "--report", "--points", "20"])
        assert code == 1
        assert "affine" in capsys.readouterr().err

    def test_invalid_output_kind_rejected(self, tmp_path, capsys):
        scen = {"name": "bad-out", "n": 2, "model": "phase-damping", "outputs": ["nope"]}
        p = tmp_path / "bad-out.json"
        p.write_text(json.dumps(scen))
        assert main(["run", str(p), "--out", str(tmp_path)]) == 1
        assert "output" in capsys.readouterr().err


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "geomstates.cli", "run", "phase-damping",
             "--out", str(tmp_path), "--points", "10"],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "phase_damping_trajectory.csv").is_file()

    def test_in_process_matches_subprocess(self, tmp_path):
        d1, d2 = tmp_path / "inproc", tmp_path / "subproc"
        assert main(["run", "bloch-field", "--out", str(d1), "--points", "15"]) == 0
        subprocess.run(
            [sys.executable, "-m", "geomstates.cli", "run", "bloch-field",
             "--out", str(d2), "--points", "15"],
            capture_output=True, timeout=120, check=True,
        )
        for p1 in sorted(d1.iterdir()):
            assert p1.read_bytes() == (d2 / p1.name).read_bytes()
