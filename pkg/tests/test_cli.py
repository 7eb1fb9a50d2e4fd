import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from heavytail.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, format_value, main, read_sample, read_table, write_csv

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def write_lines(path, lines):
    path.write_text("".join(f"{v}\n" for v in lines))
    return path


@pytest.fixture
def pareto_file(tmp_path, run):
    path = tmp_path / "pareto.csv"
    code, _, _ = run("dist", "--dist", "pareto:1", "--op", "sample", "--n", 500, "--seed", 3, "-o", path)
    assert code == EXIT_OK
    return path


class TestFormat:
    def test_values(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(3) == "3"
        assert format_value(float("nan")) == "nan"
        assert format_value(1e-300) == "1e-300"

    def test_round_trip_exact(self):
        for v in np.random.default_rng(0).standard_normal(200) * 10.0 ** np.arange(-100, 100):
            assert float(format_value(float(v))) == v


class TestFit:
    def test_golden(self, run, tmp_path):
        out = tmp_path / "fit.csv"
        code, _, _ = run("fit", GOLDEN / "fit_input.csv", "--k", 3, "--rho", -1, "-o", out)
        assert code == EXIT_OK
        assert out.read_bytes() == (GOLDEN / "fit_k3_rho-1.csv").read_bytes()

    def test_hill_hand_value(self, run):
        _, out, _ = run("fit", GOLDEN / "fit_input.csv", "--k", 3, "--rho", -1)
        row = dict(zip(*(line.split(",") for line in out.splitlines())))
        assert float(row["gamma_hill"]) == pytest.approx(1.3862944, abs=5e-8)

    def test_estimated_rho(self, run, pareto_file):
        code, out, _ = run("fit", pareto_file, "--k", 100)
        assert code == EXIT_OK
        row = dict(zip(*(line.split(",") for line in out.splitlines())))
        assert float(row["rho_hat"]) < 0

    def test_empty(self, run, tmp_path):
        (tmp_path / "e.csv").write_text("")
        code, _, err = run("fit", tmp_path / "e.csv", "--k", 1, "--rho", -1)
        assert code == EXIT_USAGE and "no observations" in err

    @pytest.mark.parametrize("k", [4, 10, 0])
    def test_k_out_of_range(self, run, k):
        code, _, err = run("fit", GOLDEN / "fit_input.csv", "--k", k, "--rho", -1)
        assert code == EXIT_USAGE and "n-1 = 3" in err

    def test_bad_rows_listed(self, run, tmp_path):
        path = write_lines(tmp_path / "bad.csv", ["1", "abc", "2", "-3", "4"])
        code, _, err = run("fit", path, "--k", 2, "--rho", -1)
        assert code == EXIT_USAGE
        assert "line 2" in err and "line 4" in err and "2 invalid rows" in err

    def test_missing_file(self, run, tmp_path):
        code, _, _ = run("fit", tmp_path / "nope.csv", "--k", 2, "--rho", -1)
        assert code == EXIT_USAGE

    def test_rho_flags_exclusive(self, run):
        with pytest.raises(SystemExit) as exc:
            main(["fit", str(GOLDEN / "fit_input.csv"), "--k", "2", "--rho", "-1", "--estimate-rho"])
        assert exc.value.code == EXIT_USAGE

    def test_positive_rho_rejected(self, run):
        code, _, _ = run("fit", GOLDEN / "fit_input.csv", "--k", 2, "--rho", 0.5)
        assert code == EXIT_USAGE

    def test_degenerate_sample_is_numeric_failure(self, run, tmp_path):
        path = write_lines(tmp_path / "ties.csv", [1, 5, 5, 5, 5])
        code, _, err = run("fit", path, "--k", 3, "--rho", -1)
        assert code == EXIT_NUMERIC and "numerical failure" in err

    def test_column(self, run, tmp_path):
        path = tmp_path / "claims.csv"
        path.write_text("id,amount\na,1\nb,2\nc,4\nd,8\n")
        code, out, _ = run("fit", path, "--column", "amount", "--k", 3, "--rho", -1)
        assert code == EXIT_OK
        assert out == (GOLDEN / "fit_k3_rho-1.csv").read_text()
        code, _, err = run("fit", path, "--column", "size", "--k", 3, "--rho", -1)
        assert code == EXIT_USAGE and "size" in err


class TestTrajectory:
    def test_rows_threshold_and_round_trip(self, run, pareto_file, tmp_path):
        out = tmp_path / "traj.csv"
        code, _, _ = run("trajectory", pareto_file, "--k-grid", "10:200:10", "--x-star", 1e4, "-o", out)
        assert code == EXIT_OK
        cols = read_table(out)
        header = list(cols)
        assert header[0] == "k" and len(header) == 14
        assert len(cols["k"]) == 20
        assert np.all(np.diff(cols["threshold"]) <= 0)
        # reread and rewrite yields identical bytes
        rows = list(zip(*(cols[h] for h in header)))
        again = tmp_path / "again.csv"
        with again.open("w", newline="") as fh:
            write_csv(fh, header, [[int(r[0]), *r[1:]] for r in rows])
        assert again.read_bytes() == out.read_bytes()

    def test_x_star_too_low(self, run, pareto_file):
        lowest = np.sort(read_sample(pareto_file))[-201]
        code, _, err = run("trajectory", pareto_file, "--k-grid", "10:200:10", "--x-star", lowest)
        assert code == EXIT_USAGE and "x_star" in err

    def test_bad_grid(self, run, pareto_file):
        code, _, _ = run("trajectory", pareto_file, "--k-grid", "10-200", "--x-star", 1e4)
        assert code == EXIT_USAGE

    def test_svg_deterministic(self, run, pareto_file, tmp_path):
        paths = [tmp_path / f"t{i}.svg" for i in range(2)]
        for p in paths:
            code, _, _ = run("trajectory", pareto_file, "--k-grid", "10:200:10", "--x-star", 1e4, "--svg", p)
            assert code == EXIT_OK
        text = paths[0].read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text and "xlink:href=\"http" not in text
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestSimulate:
    ARGS = ("simulate", "--model", "frechet:1", "--n", 200, "--reps", 20, "--k-grid", "20:60:20", "--seed", 1)

    def test_golden(self, run, tmp_path):
        out = tmp_path / "sim.csv"
        code, _, _ = run(*self.ARGS, "--rho", -1, "--workers", 1, "-o", out)
        assert code == EXIT_OK
        assert out.read_bytes() == (GOLDEN / "simulate_frechet.csv").read_bytes()

    def test_rerun_identical_across_workers(self, run, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(*self.ARGS, "--workers", 1, "-o", a)
        run(*self.ARGS, "--workers", 2, "-o", b)
        assert a.read_bytes() == b.read_bytes()

    def test_theory_var_frechet(self, run):
        _, out, _ = run(*self.ARGS, "--rho", -1, "--workers", 1)
        lines = [line.split(",") for line in out.splitlines()[1:]]
        assert {line[6] for line in lines if line[0] in ("epd", "gpd")} == {"4"}

    def test_single_rep(self, run):
        _, out, _ = run("simulate", "--model", "student-t:4", "--n", 300, "--reps", 1, "--k-grid", "20,40")
        assert all(line.split(",")[3] == "0" for line in out.splitlines()[1:])

    @pytest.mark.parametrize("model", ["cauchy:1", "frechet", "frechet:x"])
    def test_unknown_model(self, run, model):
        code, _, _ = run("simulate", "--model", model, "--reps", 2, "--k-grid", "20")
        assert code == EXIT_USAGE

    def test_svg(self, run, tmp_path):
        svg = tmp_path / "s.svg"
        code, _, _ = run(*self.ARGS, "--rho", -1, "--workers", 1, "--svg", svg)
        assert code == EXIT_OK and "<svg" in svg.read_text()


class TestDist:
    def test_cdf(self, run):
        code, out, _ = run("dist", "--dist", "epd:1,0,-1", "--op", "cdf", 2)
        assert code == EXIT_OK and out == "0.5\n"

    def test_golden_sf(self, run):
        _, out, _ = run("dist", "--dist", "epd:0.5,0.5,-1", "--op", "sf", 1, 2, 4)
        assert out == (GOLDEN / "dist_epd_sf.csv").read_text()

    def test_inadmissible(self, run):
        code, _, err = run("dist", "--dist", "epd:1,-2,-1", "--op", "cdf", 2)
        assert code == EXIT_USAGE and "delta" in err

    def test_mixture_sample(self, run, tmp_path):
        out = tmp_path / "mix.csv"
        code, _, _ = run("dist", "--dist", "pareto-mixture:2,2", "--op", "sample", "--n", 1000, "--seed", 7, "-o", out)
        assert code == EXIT_OK
        x = read_sample(out)
        assert len(x) == 1000 and x.min() >= 1.0
        assert b"\r" not in out.read_bytes()

    def test_egpd_quantile_round_trip(self, run):
        _, out, _ = run("dist", "--dist", "egpd:0.5,0.2,-1", "--op", "quantile", 0.5)
        x = float(out)
        _, out, _ = run("dist", "--dist", "egpd:0.5,0.2,-1", "--op", "cdf", x)
        assert float(out) == pytest.approx(0.5, rel=1e-12)

    def test_missing_values(self, run):
        code, _, _ = run("dist", "--dist", "epd:1,0,-1", "--op", "cdf")
        assert code == EXIT_USAGE


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "heavytail", "dist", "--dist", "epd:1,0,-1", "--op", "sf", "4"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "0.25\n"
