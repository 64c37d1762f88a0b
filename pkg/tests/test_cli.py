from __future__ import annotations

import csv
import json

import pytest

from qmetro.cli import main
from qmetro.scenarios import build_scenario, parse_scenario
from qmetro.states import save_family


def run_cli(args):
    return main(list(args))


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestBounds:
    def test_qubit_cp_value(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = run_cli(
            ["bounds", "--preset", "qubit3", "--delta", "0", "--p", "1", "--bounds", "cp",
             "--output", str(out)]
        )
        assert code == 0
        rows = read_rows(out)
        assert len(rows) == 1
        assert float(rows[0]["value"]) == pytest.approx(2.25, abs=1e-10)
        assert rows[0]["tightest"] == "true"

    def test_qutrit_subset_p2(self, tmp_path):
        out = tmp_path / "r.csv"
        assert run_cli(
            ["bounds", "--preset", "qutrit:1,2,5", "--p", "2", "--bounds", "cp",
             "--output", str(out)]
        ) == 0
        rows = read_rows(out)
        assert float(rows[0]["value"]) == pytest.approx(17 / 6, abs=1e-9)

    def test_three_bounds_tightest_flag(self, tmp_path):
        out = tmp_path / "r.csv"
        assert run_cli(
            ["bounds", "--preset", "qubit3", "--delta", "0", "--p", "1",
             "--bounds", "cp,tp,fbar", "--output", str(out)]
        ) == 0
        rows = {r["bound_name"]: r for r in read_rows(out)}
        assert float(rows["cp"]["value"]) == pytest.approx(2.25, abs=1e-10)
        assert float(rows["tp"]["value"]) == pytest.approx(2.75, abs=1e-10)
        assert float(rows["fbar"]["value"]) == pytest.approx(2.5, abs=1e-10)
        assert rows["cp"]["tightest"] == "true"
        assert rows["tp"]["tightest"] == "false"
        assert rows["fbar"]["tightest"] == "false"

    def test_csv_schema(self, tmp_path):
        out = tmp_path / "r.csv"
        run_cli(
            ["bounds", "--preset", "qubit3", "--p", "1,2", "--bounds", "cp,refs,lower",
             "--output", str(out)]
        )
        with open(out) as fh:
            header = fh.readline().strip()
        assert header == "scenario,delta,p,bound_name,value,tightest,meta"

    def test_json_format(self, tmp_path):
        out = tmp_path / "r.json"
        run_cli(
            ["bounds", "--preset", "qubit3", "--p", "1", "--bounds", "cp",
             "--format", "json", "--output", str(out)]
        )
        rows = json.loads(out.read_text())
        assert isinstance(rows, list) and rows[0]["bound_name"] == "cp"

    def test_input_json_family(self, tmp_path):
        fam = build_scenario(parse_scenario("qubit3", delta=0.0))
        path = tmp_path / "fam.json"
        save_family(str(path), fam)
        out = tmp_path / "r.csv"
        assert run_cli(
            ["bounds", "--input", str(path), "--p", "1", "--bounds", "cp",
             "--output", str(out)]
        ) == 0
        assert float(read_rows(out)[0]["value"]) == pytest.approx(2.25, abs=1e-10)

    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["bounds", "--preset", "qubit3", "--delta", "0.4", "--p", "1,2",
                "--bounds", "cp,tp_mc", "--seed", "7", "--mc-samples", "2000"]
        run_cli(args + ["--output", str(a)])
        run_cli(args + ["--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_bad_config_exit_1(self, capsys):
        assert run_cli(["bounds", "--preset", "nosuch", "--p", "1"]) == 1
        assert run_cli(["bounds", "--preset", "qubit3", "--p", "0"]) == 1
        assert run_cli(["bounds", "--preset", "qubit3", "--bounds", "bogus"]) == 1
        assert run_cli(["bounds", "--p", "1"]) == 1  # neither preset nor input

    def test_computation_error_exit_2(self, tmp_path, capsys):
        # A pure state has no RLD: requesting the RLD bound is a
        # computation error, reported as exit code 2.
        doc = {
            "dim": 2,
            "n": 2,
            "rho0": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
            "generators": [
                [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.0, -0.5]], [[0.0, 0.5], [0.0, 0.0]]],
            ],
            "x0": [0.0, 0.0],
            "labels": ["x1", "x2"],
        }
        path = tmp_path / "pure.json"
        path.write_text(json.dumps(doc))
        assert run_cli(
            ["bounds", "--input", str(path), "--p", "1", "--bounds", "rld"]
        ) == 2

    def test_error_json(self, tmp_path, capsys):
        doc_path = tmp_path / "pure.json"
        doc_path.write_text(json.dumps({
            "dim": 2, "n": 2,
            "rho0": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
            "generators": [
                [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.0, -0.5]], [[0.0, 0.5], [0.0, 0.0]]],
            ],
        }))
        code = run_cli(
            ["bounds", "--input", str(doc_path), "--p", "1", "--bounds", "rld",
             "--error-json"]
        )
        assert code == 2
        payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert payload["error"] == "RldUndefined"

    def test_config_file_flags_win(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preset": "qubit3", "p": "1", "bounds": "cp",
                                   "delta": 0.0}))
        out1 = tmp_path / "one.csv"
        run_cli(["bounds", "--config", str(cfg), "--output", str(out1)])
        assert float(read_rows(out1)[0]["value"]) == pytest.approx(2.25, abs=1e-10)
        out2 = tmp_path / "two.csv"
        run_cli(["bounds", "--config", str(cfg), "--p", "2", "--output", str(out2)])
        assert float(read_rows(out2)[0]["value"]) == pytest.approx(45 / 16, abs=1e-9)

    def test_max_dim_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QMETRO_MAX_DIM", "4")
        code = run_cli(["bounds", "--preset", "qubit3", "--p", "3", "--bounds", "cp"])
        assert code == 2  # computation refused beyond the cap

    def test_cov_transforms(self, tmp_path):
        out = tmp_path / "r.csv"
        assert run_cli(
            ["bounds", "--preset", "qubit3", "--delta", "0", "--p", "1",
             "--bounds", "cp", "--cov-transforms", "--output", str(out)]
        ) == 0
        rows = {r["bound_name"]: r for r in read_rows(out)}
        # nu Tr[F_Q Cov] >= n^2 / (9/4) = 4
        assert float(rows["nu_fq_cov_from_cp"]["value"]) == pytest.approx(4.0, abs=1e-10)


class TestSweep:
    def test_p_sweep_monotone(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli(
            ["sweep", "--preset", "qubit3", "--delta", "0", "--p", "1-8",
             "--bounds", "cp", "--output", str(out)]
        ) == 0
        rows = [r for r in read_rows(out) if r["bound_name"] == "cp"]
        vals = [float(r["value"]) for r in sorted(rows, key=lambda r: int(r["p"]))]
        assert all(vals[i + 1] >= vals[i] - 1e-9 for i in range(len(vals) - 1))
        assert all(v < 3.0 for v in vals)
        # weak-commutative at delta = 0: the QCRB/Holevo line is emitted
        ref = [r for r in read_rows(out) if r["bound_name"] == "qcrb_holevo"]
        assert len(ref) == 1 and float(ref[0]["value"]) == 3.0

    def test_delta_sweep_matches_formula(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli(
            ["sweep", "--preset", "qubit3", "--delta-sweep", "0:0.9:7", "--p", "2",
             "--bounds", "cp", "--output", str(out)]
        ) == 0
        rows = [r for r in read_rows(out) if r["bound_name"] == "cp"]
        assert len(rows) == 7
        for r in rows:
            d = float(r["delta"])
            assert float(r["value"]) == pytest.approx(
                45 / 16 - d**2 / 4 - d**4 / 16, abs=1e-9
            )

    def test_gamma_sandwich_rows_when_not_weak(self, tmp_path):
        out = tmp_path / "s.csv"
        run_cli(
            ["sweep", "--preset", "qubit3", "--delta-sweep", "0.2:0.4:2", "--p", "1",
             "--bounds", "cp", "--output", str(out)]
        )
        names = {r["bound_name"] for r in read_rows(out)}
        assert "gamma_inf_lower" in names and "gamma_inf_upper" in names
        assert "qcrb_holevo" not in names

    def test_mc_sweep_reproducible(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["sweep", "--preset", "qubit3", "--delta", "0.3", "--p", "1-3",
                "--bounds", "tp_mc", "--seed", "5", "--mc-samples", "1000"]
        run_cli(args + ["--output", str(a)])
        run_cli(args + ["--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_needs_grid(self):
        assert run_cli(["sweep", "--preset", "qubit3", "--p", "1"]) == 1


class TestCheckCommand:
    def test_paper_values_pass(self, capsys):
        assert run_cli(["check", "--only", "paper-values"]) == 0
        out = capsys.readouterr().out
        assert "PASS 01-qubit-p1-values" in out
        assert "5/5 criteria passed" in out

    def test_unknown_tag(self):
        assert run_cli(["check", "--only", "bogus"]) == 1

    def test_corrupted_criterion_fails_by_name(self, capsys, monkeypatch):
        # Breaking one tolerance must surface as a named FAIL line and a
        # nonzero exit, not a silent pass.
        from qmetro import checks as checks_mod

        def broken():
            return checks_mod.CheckResult(
                name="01-qubit-p1-values", passed=False, detail="tolerance corrupted"
            )

        crit = checks_mod.CRITERIA[0]
        patched = (checks_mod.Criterion(crit.name, crit.tags, broken),) + tuple(
            checks_mod.CRITERIA[1:5]
        )
        monkeypatch.setattr(checks_mod, "CRITERIA", patched)
        assert run_cli(["check", "--only", "paper-values"]) == 2
        out = capsys.readouterr().out
        assert "FAIL 01-qubit-p1-values" in out


class TestExportScenario:
    def test_roundtrip(self, tmp_path):
        out = tmp_path / "fam.json"
        assert run_cli(
            ["export-scenario", "--preset", "qutrit:1,2,5", "--output", str(out)]
        ) == 0
        doc = json.loads(out.read_text())
        assert doc["dim"] == 3 and doc["n"] == 3
        res = tmp_path / "r.csv"
        assert run_cli(
            ["bounds", "--input", str(out), "--p", "1", "--bounds", "cp",
             "--output", str(res)]
        ) == 0
        assert float(read_rows(res)[0]["value"]) == pytest.approx(21 / 8, abs=1e-9)

    def test_requires_preset(self):
        assert run_cli(["export-scenario"]) == 1
