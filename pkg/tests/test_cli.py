import csv
import io
import json
import math

import pytest

from binomcat.cli import main
from binomcat.comparator import IndeterminateBandError, find_crossings


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    assert len(rows) == 1
    return rows[0]


class TestEval:
    def test_model_a_interval(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "A", "--lambda", "1", "--p", "0.5", "--M", "64")
        assert code == 0
        assert out.startswith("# schema=1")
        row = parse_csv(out)
        assert row["regime"] == "finite"
        assert float(row["mean_lo"]) <= 3.768462058062743 <= float(row["mean_hi"])

    def test_model_a_adaptive(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "A", "--lambda", "1", "--p", "0.5")
        row = parse_csv(out)
        assert float(row["mean_hi"]) - float(row["mean_lo"]) < 1e-9

    def test_star_value(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "star", "--lambda", "1", "--p", "0.25")
        assert code == 0
        row = parse_csv(out)
        assert float(row["mean_lo"]) == pytest.approx(1.8109302162163288, rel=1e-12)

    def test_rational_boundary_is_infinite(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "d2", "--lambda", "1/2", "--p", "4/5")
        assert code == 0
        row = parse_csv(out)
        assert row["regime"] == "infinite"
        assert row["mean_lo"] == "inf"
        assert row["p"] == "4/5"

    def test_supercritical_message(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "d2", "--lambda", "1/2", "--p", "0.9")
        row = parse_csv(out)
        assert row["regime"] == "survives-with-positive-probability"
        assert row["mean_lo"] == ""

    def test_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--model", "star", "--lambda", "1", "--p", "1/2",
                               "--format", "json")
        payload = json.loads(out)
        assert payload["schema"] == 1
        assert payload["regime"] == "infinite"
        assert payload["mean_lo"] == "inf"

    def test_invalid_p_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--model", "A", "--lambda", "1", "--p", "1.2")
        assert code == 2
        assert "invalid" in err

    def test_bad_fraction_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["eval", "--model", "A", "--lambda", "1", "--p", "4/0"])
        assert exc_info.value.code == 2


class TestCompare:
    def test_dispersion_shorter(self, capsys):
        code, out, _ = run_cli(capsys, "compare", "--d", "2", "--lambda", "0.5", "--p", "0.5")
        assert code == 0
        row = parse_csv(out)
        assert row["verdict"] == "dispersion-shorter"
        assert float(row["lhs_lo"]) > float(row["rhs"])
        assert "non-dispersion is the better longevity strategy" in out

    def test_free_always_no_dispersion_shorter(self, capsys):
        code, out, _ = run_cli(capsys, "compare", "--d", "star", "--lambda", "1", "--p", "0.3")
        row = parse_csv(out)
        assert row["verdict"] == "no-dispersion-shorter"
        assert "dispersion is the better longevity strategy" in out

    def test_out_of_regime_exit_3(self, capsys):
        code, _, err = run_cli(capsys, "compare", "--d", "star", "--lambda", "1", "--p", "0.6")
        assert code == 3
        assert "out of regime" in err

    def test_strict_indeterminate_exit_4(self, capsys):
        with pytest.raises(IndeterminateBandError) as exc_info:
            find_crossings(0.5, 2, tol=1e-15)
        p_star = repr(0.5 * (exc_info.value.lo + exc_info.value.hi))
        capsys.readouterr()
        code, out, _ = run_cli(capsys, "compare", "--d", "2", "--lambda", "0.5", "--p", p_star, "--strict")
        assert code == 4
        assert parse_csv(out)["verdict"] == "indeterminate"
        code, _, _ = run_cli(capsys, "compare", "--d", "2", "--lambda", "0.5", "--p", p_star)
        assert code == 0  # without --strict the honest row is still a success


class TestScan:
    def test_csv_file(self, capsys, tmp_path):
        out_file = tmp_path / "region.csv"
        code, _, _ = run_cli(
            capsys, "scan", "--d", "2", "--lambda-min", "0.5", "--lambda-max", "0.5",
            "--p-min", "0.1", "--p-max", "0.9", "--steps", "9", "--out", str(out_file),
        )
        assert code == 0
        text = out_file.read_text()
        assert text.startswith("# schema=1")
        rows = list(csv.DictReader(io.StringIO("\n".join(ln for ln in text.splitlines() if not ln.startswith("#")))))
        assert len(rows) == 81  # steps x steps grid, degenerate lambda range
        regions = [r["region"] for r in rows[:9]]
        assert regions[0] == "gray" and regions[4] == "yellow" and regions[-1] == "white"

    def test_single_cell_grid(self, capsys):
        code, out, _ = run_cli(
            capsys, "scan", "--d", "2", "--lambda-min", "0.5", "--lambda-max", "0.5",
            "--p-min", "0.5", "--p-max", "0.5", "--steps", "1", "--out", "-",
        )
        assert code == 0
        assert parse_csv(out)["region"] == "yellow"

    def test_rejects_p_one(self, capsys):
        code, _, err = run_cli(
            capsys, "scan", "--d", "2", "--lambda-min", "0.5", "--lambda-max", "1",
            "--p-min", "0.1", "--p-max", "1.0", "--steps", "5", "--out", "-",
        )
        assert code == 2


class TestTrace:
    def test_example_crossings(self, capsys):
        code, out, _ = run_cli(capsys, "trace", "--d", "2", "--lambda", "0.5", "--tol", "0.005")
        assert code == 0
        row = parse_csv(out)
        assert abs(float(row["p_l"]) - 0.388184220004325) <= 0.005
        assert abs(float(row["p_u"]) - 0.756133911341248) <= 0.005

    def test_d3_example(self, capsys):
        code, out, _ = run_cli(capsys, "trace", "--d", "3", "--lambda", "0.2", "--tol", "0.005")
        row = parse_csv(out)
        assert abs(float(row["p_l"]) - 0.581379975590632) <= 0.005
        assert abs(float(row["p_u"]) - 0.804630101347415) <= 0.005

    def test_no_crossing_recorded(self, capsys):
        code, out, _ = run_cli(capsys, "trace", "--d", "2", "--lambda", "100", "--tol", "0.005")
        assert code == 0
        row = parse_csv(out)
        if row["p_l"] == "":
            assert "no crossing found" in out


class TestSimulate:
    def test_star_brackets_closed_form(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "star", "--lambda", "1", "--p", "0.25",
            "--replicates", "4000", "--seed", "42",
        )
        assert code == 0
        row = parse_csv(out)
        mean, se = float(row["mean"]), float(row["std_error"])
        assert abs(mean - 1.8109302162163288) < 3 * se

    def test_seed_determinism(self, capsys):
        args = ("simulate", "--model", "d2", "--lambda", "0.5", "--p", "0.5",
                "--replicates", "500", "--seed", "7")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_tiny_p_mean_one(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "A", "--lambda", "1", "--p", "0.000001",
            "--replicates", "4000", "--seed", "1",
        )
        row = parse_csv(out)
        assert float(row["mean"]) == pytest.approx(1.0, abs=0.05)

    def test_supercritical_survival_fraction(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "d2", "--lambda", "0.5", "--p", "0.9",
            "--replicates", "300", "--seed", "7", "--colony-cap", "200",
        )
        row = parse_csv(out)
        assert float(row["survival_fraction"]) > 0
        assert "within 2% of the critical threshold" not in out  # 0.9 is 12.5% above

    def test_near_threshold_warning(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "d2", "--lambda", "0.5", "--p", "0.79",
            "--replicates", "200", "--seed", "7", "--time-cap", "100",
        )
        assert "within 2% of the critical threshold" in out

    def test_trace_file(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        run_cli(
            capsys, "simulate", "--model", "star", "--lambda", "1", "--p", "0.25",
            "--replicates", "50", "--seed", "2", "--trace-file", str(trace),
        )
        lines = trace.read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == "replicate,extinction_time,max_colonies,censored"
        assert len(lines) == 52

    def test_general_d_model(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "d5", "--lambda", "0.5", "--p", "0.3",
            "--replicates", "500", "--seed", "3",
        )
        assert code == 0
        assert float(parse_csv(out)["mean"]) > 1.0

    def test_unknown_model_rejected(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["simulate", "--model", "q", "--lambda", "1", "--p", "0.5"])
        assert exc_info.value.code == 2
