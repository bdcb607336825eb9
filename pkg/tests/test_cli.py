"""Command-line interface: parsing, config files, rendering, determinism."""

from __future__ import annotations

import json

import pytest

from selhaz.cli import (
    ConfigError,
    ExperimentConfig,
    build_estimator,
    main,
    read_config_file,
    serialize_config,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL = ("--scales", "0.3,0.2;1,1", "--reps", "400", "--seed", "11")


class TestRiskTable:
    def test_header_and_shape(self, capsys):
        code, out, err = run_cli(capsys, "risk-table", *SMALL)
        assert code == 0 and err == ""
        lines = out.strip().splitlines()
        assert lines[0] == (
            "scale_1,scale_2,R_N1,SE_N1,R_N2,SE_N2,R_N2I,SE_N2I,"
            "R_ML,SE_ML,R_MLI,SE_MLI"
        )
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "0.3" and first[1] == "0.2"
        # Risk cells print with six decimals.
        assert all("." in cell and len(cell.split(".")[1]) == 6 for cell in first[2:])

    def test_repeat_runs_byte_identical(self, capsys):
        _, out1, _ = run_cli(capsys, "risk-table", *SMALL)
        _, out2, _ = run_cli(capsys, "risk-table", *SMALL)
        assert out1 == out2

    def test_worker_count_invariant(self, capsys):
        outputs = []
        for workers in ("1", "2", "8"):
            _, out, _ = run_cli(capsys, "risk-table", *SMALL, "--workers", workers)
            outputs.append(out)
        assert outputs[0] == outputs[1] == outputs[2]

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "table.csv"
        code, out, _ = run_cli(capsys, "risk-table", *SMALL, "--out", str(target))
        assert code == 0 and out == ""
        _, stdout_text, _ = run_cli(capsys, "risk-table", *SMALL)
        assert target.read_text(encoding="utf-8") == stdout_text

    def test_json_meta(self, capsys):
        code, out, _ = run_cli(capsys, "risk-table", *SMALL, "--format", "json")
        assert code == 0
        payload = json.loads(out)
        meta = payload["meta"]
        assert meta["command"] == "risk-table"
        assert meta["n"] == 5 and meta["k"] == 2
        assert meta["replications"] == 400 and meta["seed"] == 11
        assert meta["estimators"] == ["N1", "N2", "N2I", "ML", "MLI"]
        assert len(payload["rows"]) == 2
        assert payload["rows"][0]["scale_1"] == "0.3"

    def test_markdown(self, capsys):
        code, out, _ = run_cli(capsys, "risk-table", *SMALL, "--format", "markdown")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("| scale_1 | scale_2 |")
        assert set(lines[1]) <= {"|", "-", " "}

    def test_custom_estimators(self, capsys):
        code, out, _ = run_cli(
            capsys, "risk-table", *SMALL, "--estimators", "N2,c4.5,i4:0.1:2"
        )
        assert code == 0
        assert out.splitlines()[0] == (
            "scale_1,scale_2,R_N2,SE_N2,R_c4.5,SE_c4.5,R_i4:0.1:2,SE_i4:0.1:2"
        )

    def test_default_grid_size(self, capsys):
        code, out, _ = run_cli(capsys, "risk-table", "--reps", "50", "--estimators", "N2")
        assert code == 0
        assert len(out.strip().splitlines()) == 26

    def test_empty_scales_rejected(self, capsys):
        code, out, err = run_cli(capsys, "risk-table", "--scales", "", "--reps", "50")
        assert code == 1 and out == ""
        assert "at least one scale vector" in err

    def test_malformed_scales_rejected(self, capsys):
        code, _, err = run_cli(capsys, "risk-table", "--scales", "0.3,oops")
        assert code == 1
        assert "cannot parse scale vector" in err

    def test_unknown_estimator_rejected(self, capsys):
        code, _, err = run_cli(capsys, "risk-table", *SMALL, "--estimators", "XX")
        assert code == 1
        assert "unknown estimator" in err

    def test_alpha_above_bound_rejected(self, capsys):
        code, _, err = run_cli(capsys, "risk-table", *SMALL, "--alpha", "0.5")
        assert code == 1
        assert "alpha" in err


class TestConfigFile:
    def test_round_trip_reproduces_output(self, capsys, tmp_path):
        _, stdout_text, _ = run_cli(capsys, "risk-table", *SMALL)
        cfg = ExperimentConfig(
            n=5,
            k=2,
            scales_grid=((0.3, 0.2), (1.0, 1.0)),
            estimators=("N1", "N2", "N2I", "ML", "MLI"),
            replications=400,
            seed=11,
            output_format="csv",
            workers=1,
        )
        path = tmp_path / "run.cfg"
        path.write_text(serialize_config(cfg), encoding="utf-8")
        code, out, _ = run_cli(capsys, "risk-table", "--config", str(path))
        assert code == 0
        assert out == stdout_text

    def test_flags_override_file(self, capsys, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("reps = 400\nseed = 11\nscales = 0.3,0.2;1,1\n", encoding="utf-8")
        _, baseline, _ = run_cli(capsys, "risk-table", *SMALL)
        _, overridden, _ = run_cli(
            capsys, "risk-table", "--config", str(path), "--seed", "12"
        )
        assert overridden != baseline
        _, same, _ = run_cli(capsys, "risk-table", "--config", str(path))
        assert same == baseline

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("repz = 400\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unknown key"):
            read_config_file(str(path))

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("just some words\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="expected key=value"):
            read_config_file(str(path))

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "ok.cfg"
        path.write_text("# comment\n\nreps = 250\n", encoding="utf-8")
        assert read_config_file(str(path)) == {"reps": "250"}

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "risk-table", "--config", "/nonexistent.cfg")
        assert code == 1
        assert "cannot read" in err


class TestBounds:
    def test_text_output(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--n", "5")
        assert code == 0
        assert "admissible c interval: [4, 5.505376344]" in out
        assert "minimax value: 0.1198233073" in out
        assert "c = n-1 = 4: 0.2727272727" in out
        assert "c = n = 5: 0.09090909091" in out

    def test_n2_drops_nonpositive_c(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--n", "2")
        assert code == 0
        assert "n-2" not in out
        assert "admissible c interval: [1, 2]" in out

    def test_json_structure(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--n", "8", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["c_lower"] == 7.0
        assert payload["c_upper"] > 7.0
        assert payload["minimax_value"] == pytest.approx(0.0697313, abs=5e-8)
        assert [row["c_label"] for row in payload["sup_risk_bounds"]] == [
            "n-2",
            "n-1",
            "n",
        ]

    def test_rejects_n1(self, capsys):
        code, _, err = run_cli(capsys, "bounds", "--n", "1")
        assert code == 1
        assert "n >= 2" in err


class TestDominance:
    def test_n2_dominates_n1(self, capsys):
        code, out, _ = run_cli(
            capsys, "dominance", "N1", "N2", "--scales", "0.3,0.2;1,1",
            "--reps", "4000", "--seed", "5",
        )
        assert code == 0
        assert "# verdict: N2 dominates N1 at 3 std errors" in out
        header = out.splitlines()[0]
        assert header == "scale_1,scale_2,mean_diff,std_error_diff,replications"

    def test_self_comparison_inconclusive_with_exact_zeros(self, capsys):
        code, out, _ = run_cli(
            capsys, "dominance", "N2", "N2", "--scales", "1,1", "--reps", "500"
        )
        assert code == 0
        row = out.splitlines()[1].split(",")
        assert row[2] == "0.000000" and row[3] == "0.000000"
        assert "inconclusive at 3 std errors" in out

    def test_unknown_name(self, capsys):
        code, _, err = run_cli(capsys, "dominance", "N1", "QQ", "--scales", "1,1")
        assert code == 1
        assert "unknown estimator" in err


class TestPlotData:
    def test_shape_and_sort(self, capsys):
        code, out, _ = run_cli(
            capsys, "plot-data", "--scales", "0.9,0.3;0.2,0.4;1,1",
            "--reps", "200", "--estimators", "N2,ML",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "ratio,estimator,risk,std_error"
        assert len(lines) == 7
        keys = [(row.split(",")[1], float(row.split(",")[0])) for row in lines[1:]]
        assert keys == sorted(keys)
        ratios = sorted({row.split(",")[0] for row in lines[1:]})
        assert ratios == ["0.5", "1", "3"]

    def test_rejects_k3(self, capsys):
        code, _, err = run_cli(
            capsys, "plot-data", "--k", "3", "--scales", "1,1,1", "--reps", "100"
        )
        assert code == 1
        assert "k=2" in err

    def test_rejects_other_formats(self, capsys):
        code, _, err = run_cli(
            capsys, "plot-data", "--scales", "1,1", "--reps", "100",
            "--format", "json",
        )
        assert code == 1
        assert "CSV" in err


class TestExact:
    def test_symmetric_point(self, capsys):
        code, out, _ = run_cli(
            capsys, "exact", "--c", "4", "--scales", "1,1", "--reps", "500"
        )
        assert code == 0
        assert "h(q) = 0.181640625" in out
        assert "q (rate ratio) = 1" in out

    def test_scale_invariance_of_report(self, capsys):
        _, out_a, _ = run_cli(
            capsys, "exact", "--c", "4", "--scales", "1,2", "--reps", "200"
        )
        _, out_b, _ = run_cli(
            capsys, "exact", "--c", "4", "--scales", "2,4", "--reps", "200"
        )
        pick = lambda text, key: next(
            line for line in text.splitlines() if line.startswith(key)
        )
        assert pick(out_a, "h(q)") == pick(out_b, "h(q)")
        assert pick(out_a, "exact risk") == pick(out_b, "exact risk")

    def test_json_fields(self, capsys):
        code, out, _ = run_cli(
            capsys, "exact", "--c", "4", "--scales", "1,1", "--reps", "200",
            "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["h_of_q"] == pytest.approx(93.0 / 512.0, abs=1e-12)
        assert payload["exact_risk"] == pytest.approx(0.109519967, abs=1e-6)

    def test_needs_scales(self, capsys):
        code, _, err = run_cli(capsys, "exact", "--c", "4", "--reps", "100")
        assert code == 1
        assert "--scales" in err

    def test_rejects_nonpositive_c(self, capsys):
        code, _, err = run_cli(
            capsys, "exact", "--c", "-1", "--scales", "1,1", "--reps", "100"
        )
        assert code == 1
        assert "must be positive" in err

    def test_rejects_three_scales(self, capsys):
        code, _, err = run_cli(
            capsys, "exact", "--c", "4", "--scales", "1,1,1", "--reps", "100"
        )
        assert code == 1
        assert "scale" in err


class TestBuildEstimator:
    def test_named_case_insensitive(self):
        assert build_estimator("ml", 5, 2, None, None).label() == "ML"
        assert build_estimator("n2i", 5, 2, None, None).label() == "N2I"

    def test_explicit_constant(self):
        spec = build_estimator("c4.5", 5, 2, None, None)
        assert spec.c == 4.5 and spec.label() == "c4.5"

    def test_explicit_improved_validated(self):
        with pytest.raises(ConfigError):
            build_estimator("i4:0.9:2", 5, 2, None, None)

    def test_named_improved_honors_overrides(self):
        spec = build_estimator("N2I", 5, 2, 0.05, None)
        assert spec.alpha == 0.05

    def test_garbage_token(self):
        with pytest.raises(ConfigError, match="unknown estimator"):
            build_estimator("zzz", 5, 2, None, None)
