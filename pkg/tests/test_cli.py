"""Command line behaviour and exit codes."""

from __future__ import annotations

import csv
import io
import json
import math

import pytest

from rcmi import ghz_state
from rcmi.cli import main
from rcmi.io import write_state


@pytest.fixture
def ghz_file(tmp_path):
    path = tmp_path / "ghz.json"
    write_state(ghz_state().density(), path)
    return path


def _rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


class TestCompute:
    """``rcmi compute``."""

    def test_ghz_cmi(self, ghz_file, capsys):
        assert main(["compute", str(ghz_file), "--partition", "A|B|C", "--quantities", "cmi"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert len(rows) == 1
        assert rows[0]["quantity"] == "cmi" and rows[0]["alpha"] == ""
        assert float(rows[0]["value"]) == pytest.approx(math.log(2.0), abs=1e-12)
        assert f"{float(rows[0]['value']):.6f}" == "0.693147"

    def test_default_quantities_over_alpha_grid(self, ghz_file, capsys):
        assert main(["compute", str(ghz_file), "--partition", "A|B|C", "--alpha", "0.5,2"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert [(r["quantity"], r["alpha"]) for r in rows] == [
            ("cmi", ""),
            ("sibson", "0.5"),
            ("sibson", "2"),
            ("delta", "0.5"),
            ("delta", "2"),
            ("delta-tilde", "0.5"),
            ("delta-tilde", "2"),
        ]
        assert all(r["support_violated"] == "false" for r in rows)

    def test_out_file(self, ghz_file, tmp_path):
        out = tmp_path / "rows.csv"
        assert main(["compute", str(ghz_file), "--partition", "A|B|C", "--quantities", "i-max", "--out", str(out)]) == 0
        assert _rows(out.read_text())[0]["quantity"] == "i-max"

    @pytest.mark.parametrize(
        "args",
        [
            ["--partition", "A|Z|C"],
            ["--partition", "A"],
            ["--partition", "A|B|C", "--quantities", "bogus"],
            ["--partition", "A|B|C", "--alpha", "x"],
            ["--partition", "A|B|C", "--alpha", "-1"],
            ["--partition", "A|B|C", "--ordering", "tau-tau-tau"],
            ["--partition", "A|B|C", "--restarts", "0"],
        ],
    )
    def test_bad_arguments_exit_2(self, ghz_file, args, capsys):
        assert main(["compute", str(ghz_file), *args]) == 2
        assert "input error" in capsys.readouterr().err

    def test_malformed_state_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"layout": {"systems": [{"label": "A", "dim": 2}]}, "matrix": [1, 0, 0]}')
        assert main(["compute", str(bad), "--partition", "A|B"]) == 2
        assert "field 'matrix'" in capsys.readouterr().err

    def test_missing_state_exit_2(self, tmp_path):
        assert main(["compute", str(tmp_path / "none.json"), "--partition", "A|B|C"]) == 2

    def test_unknown_subcommand_exit_2(self):
        assert main(["frobnicate"]) == 2


class TestVerify:
    """``rcmi verify``."""

    def test_duality_passes(self, capsys):
        assert main(["verify", "duality", "--trials", "5"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("PASS duality/")
        assert out.rstrip().endswith("all properties passed")

    def test_impossible_tolerance_exits_1(self, capsys):
        assert main(["verify", "duality", "--trials", "5", "--tol", "1e-30"]) == 1
        assert "FAIL duality/" in capsys.readouterr().out

    def test_unknown_suite_exit_2(self, capsys):
        assert main(["verify", "nosuch"]) == 2
        assert "UnknownSuite" in capsys.readouterr().err

    def test_negative_tolerance_exit_2(self):
        assert main(["verify", "duality", "--tol", "-1"]) == 2


class TestSweep:
    """``rcmi sweep``."""

    ARGS = ["sweep", "--preset", "smoke", "--trials", "3", "--seed", "5"]

    def test_byte_identical_reruns(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("RCMI_THREADS", "1")
        assert main([*self.ARGS, "--out", str(a)]) == 0
        monkeypatch.setenv("RCMI_THREADS", "4")
        assert main([*self.ARGS, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "family,ordering,gamma,trial,seed,numerator,trace,tagged,violation"
        assert lines[-1].startswith("# total trials=15 ")

    def test_config_file_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preset": "smoke", "family": "sandwiched", "trials_per_gamma": 2}))
        assert main(["sweep", str(cfg), "--classical", "--fail-on-violation"]) == 0
        rows = [r for r in capsys.readouterr().out.splitlines() if r and not r.startswith("#")][1:]
        assert rows and all(r.startswith("sandwiched,") for r in rows)

    @pytest.mark.parametrize(
        "args",
        [
            ["--gamma-step", "0"],
            ["--gamma-step", "-1"],
            ["--dims", "2,x,2"],
            ["--dims", "2,2"],
            ["--family", "other"],
            ["--preset", "smoke", "--gamma-start", "-2"],
        ],
    )
    def test_bad_flags_exit_2(self, args):
        assert main(["sweep", *args]) == 2

    def test_config_and_preset_conflict(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{}")
        assert main(["sweep", str(cfg), "--preset", "smoke"]) == 2
