"""Command-line interface: exit codes, formats, and report round-trips."""

from __future__ import annotations

import csv
import io
import json

import pytest

from exactq import __version__
from exactq.cli import main


def run(capsys, *argv: str) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestVerifyCommand:
    def test_gap_two_plan_passes(self, capsys):
        code, out = run(capsys, "verify", "--family", "unb", "--d", "2", "--n", "8")
        assert code == 0
        payload = json.loads(out)
        assert payload["exact"] is True
        assert payload["worst_case_queries"] == 4
        assert payload["claimed_bound"] == 4
        assert payload["tool_version"] == __version__

    def test_padded_reduction(self, capsys):
        code, out = run(capsys, "verify", "--family", "exactkl",
                        "--n", "5", "--k", "1", "--l", "3")
        assert code == 0
        payload = json.loads(out)
        assert payload["exact"] is True
        assert payload["worst_case_queries"] <= 3

    def test_invalid_gap_exits_2(self, capsys):
        assert main(["verify", "--family", "unb", "--d", "0", "--n", "4"]) == 2

    def test_missing_required_param_exits_2(self, capsys):
        assert main(["verify", "--family", "unb", "--n", "8"]) == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--family", "unb", "--d", "1", "--n", "3", "--bogus"])
        assert exc.value.code == 2

    def test_verbose_includes_inputs_checked(self, capsys):
        code, out = run(capsys, "verify", "--family", "equality", "--n", "3", "--verbose")
        assert code == 0
        assert json.loads(out)["inputs_checked"] == 8

    def test_csv_is_rfc4180(self, capsys):
        code, out = run(capsys, "verify", "--family", "equality", "--n", "3",
                        "--format", "csv")
        assert code == 0
        assert out.count("\r\n") == 2
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][0] == "family"
        assert rows[1][0] == "equality"

    def test_parallel_output_byte_identical(self, capsys):
        _, seq = run(capsys, "verify", "--family", "unb", "--d", "1", "--n", "5")
        _, par = run(capsys, "verify", "--family", "unb", "--d", "1", "--n", "5",
                     "--parallel", "4")
        assert seq == par

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out = run(capsys, "verify", "--family", "equality", "--n", "2",
                        "--out", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["exact"] is True

    def test_sym_family(self, capsys):
        code, out = run(capsys, "verify", "--family", "sym", "--a", "00100")
        assert code == 0
        payload = json.loads(out)
        assert payload["exact"] is True
        assert payload["params"]["strategy"] == "two-sided-center-sweep"

    def test_env_tolerance_is_honored(self, capsys, monkeypatch):
        monkeypatch.setenv("EXACTQ_TOL", "not-a-float")
        with pytest.raises(ValueError):
            main(["verify", "--family", "equality", "--n", "2"])
        monkeypatch.setenv("EXACTQ_TOL", "1e-6")
        assert main(["verify", "--family", "equality", "--n", "2"]) == 0
        capsys.readouterr()


class TestGammaCommand:
    def test_gap_one_table(self, capsys):
        code, out = run(capsys, "gamma", "--d", "1", "--n-max", "9")
        assert code == 0
        payload = json.loads(out)
        rows = {r["n"]: r["gamma"] for r in payload["rows"]}
        assert rows[5] == pytest.approx(1 / 126)
        assert rows[9] == pytest.approx(1 / 325)
        assert payload["valid"] and payload["decays"]

    def test_matching_base_k0(self, capsys):
        code, out = run(capsys, "gamma", "--d", "3", "--k0", "1", "--n-max", "23")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert rows[-1]["n"] == 23
        assert rows[-1]["gamma"] == pytest.approx(0.0304, abs=1e-3)

    def test_short_gap_two_table(self, capsys):
        code, out = run(capsys, "gamma", "--d", "2", "--n-max", "4")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert rows[-1] == {"n": 4, "gamma": pytest.approx(1 / 9), "decayed": True}

    def test_diverging_start_exits_1(self, capsys):
        code, _ = run(capsys, "gamma", "--d", "2", "--k0", "4", "--gamma0", "0.9")
        assert code == 1

    def test_custom_k0_without_gamma0_exits_2(self, capsys):
        assert main(["gamma", "--d", "2", "--k0", "7"]) == 2

    def test_csv_rows(self, capsys):
        code, out = run(capsys, "gamma", "--d", "1", "--n-max", "5", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["n", "gamma", "decayed"]
        assert float(rows[-1][1]) == pytest.approx(1 / 126)


class TestPolyCommand:
    def test_audit_reported(self, capsys):
        code, out = run(capsys, "poly", "--family", "unbr", "--n", "3", "--d", "1")
        assert code == 0
        payload = json.loads(out)
        assert payload["audit_ok"] is True
        assert payload["degree"] == 2
        assert payload["q_values"] == pytest.approx([0.0, 1.0, 1.0, 0.0])

    def test_large_n_exits_2(self, capsys):
        assert main(["poly", "--family", "equality", "--n", "15"]) == 2


class TestConstantsCommand:
    def test_first_step_closed_forms(self, capsys):
        code, out = run(capsys, "constants", "--n", "3", "--d", "1")
        assert code == 0
        payload = json.loads(out)
        assert payload["constants"]["c1"] == pytest.approx(-1 / 8)
        assert payload["max_residual"] < 1e-12

    def test_printed_table(self, capsys):
        code, out = run(capsys, "constants", "--appendix-a")
        assert code == 0
        payload = json.loads(out)
        assert len(payload["constants"]) == 18
        assert payload["max_residual"] < 1e-12
        assert payload["queries"] == 2
        assert payload["gamma"] == pytest.approx(1 / 112)

    def test_degenerate_point_exits_2(self, capsys):
        assert main(["constants", "--n", "3", "--d", "3"]) == 2
