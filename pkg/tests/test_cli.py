import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from kquant import discretize_quantile, write_csv, from_samples


def run_cli(*args, env=None):
    merged = dict(os.environ)
    if env:
        merged.update(env)
    proc = subprocess.run(
        [sys.executable, "-m", "kquant.cli", *args],
        capture_output=True, text=True, env=merged,
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    tri = root / "tri.csv"
    write_csv(from_samples([-1, 0, 1], [1 / 3, 1 / 3, 1 / 3]), tri)
    uni = root / "uniform.csv"
    write_csv(discretize_quantile(lambda q: q, 10 ** 4), uni)
    pair = root / "pair.csv"
    write_csv(from_samples([0.0, 1.0], [1.0, 1.0]), pair)
    batch = root / "batch"
    batch.mkdir()
    rng = np.random.default_rng(7)
    for i in range(6):
        x = np.unique(rng.normal(0, 2, rng.integers(2, 9)))
        write_csv(from_samples(x, rng.uniform(0.2, 2, x.size)),
                  batch / f"case{i}.csv")
    return {"root": root, "tri": tri, "uni": uni, "pair": pair, "batch": batch}


class TestQuantize:
    def test_uniform_levels(self, fixtures):
        rc, out, err = run_cli("quantize", "--input", str(fixtures["uni"]),
                               "--p", "2", "--k", "3", "--solver", "dp")
        assert rc == 0, err
        report = json.loads(out)
        assert set(report) == {"config", "measure_summary", "result"}
        result = report["result"]
        assert np.allclose(result["levels"], [1 / 6, 1 / 2, 5 / 6], atol=2e-4)
        assert set(result) >= {"levels", "boundaries", "q", "error",
                               "error_pow", "iterations", "converged", "ties",
                               "special_form"}

    def test_sup_norm_fixture(self, fixtures):
        # plateau step function: range {[0,1/3], [2/3,1]} via merge tolerance
        n = 300
        xs = (np.arange(n) + 0.5) / n
        fv = np.where((xs > 1 / 3) & (xs < 2 / 3), 1 / 3, xs)
        path = fixtures["root"] / "plateau.csv"
        write_csv(from_samples(fv, np.full(n, 1.0 / n)), path)
        rc, out, _ = run_cli("quantize", "--input", str(path), "--p", "inf",
                             "--k", "3", "--merge-tol", str(2.0 / n))
        assert rc == 0
        r3 = json.loads(out)["result"]["radius"]
        rc2, out2, _ = run_cli("quantize", "--input", str(path), "--p", "inf",
                               "--k", "2", "--merge-tol", str(2.0 / n))
        assert rc2 == 0
        r2 = json.loads(out2)["result"]["radius"]
        # both close to the continuous value 1/6; grid asymmetry separates
        # them by at most the discretization step
        assert abs(r3 - 1 / 6) < 2.0 / n and abs(r2 - 1 / 6) < 2.0 / n
        assert r3 <= r2

    def test_lloyd_and_sweep_run(self, fixtures):
        for solver in ("lloyd", "sweep"):
            rc, out, err = run_cli("quantize", "--input", str(fixtures["uni"]),
                                   "--p", "2", "--k", "2", "--solver", solver)
            assert rc == 0, err
            result = json.loads(out)["result"]
            assert abs(result["error_pow"] - 1 / 48) < 1e-3

    def test_infinite_mode(self, fixtures):
        rc, out, err = run_cli("quantize", "--input", str(fixtures["pair"]),
                               "--p", "2", "--k", "2", "--mode", "infinite")
        assert rc == 0, err
        result = json.loads(out)["result"]
        assert 0.0 in result["levels"]
        assert result["zero_index"] is not None

    def test_csv_format(self, fixtures):
        rc, out, _ = run_cli("quantize", "--input", str(fixtures["tri"]),
                             "--p", "2", "--k", "2", "--format", "csv")
        assert rc == 0
        lines = out.strip().splitlines()
        assert lines[0] == "input,index,level,boundary_upper"
        assert len(lines) == 3


class TestExitCodes:
    def test_missing_input_is_io_error(self, fixtures):
        rc, _, err = run_cli("quantize", "--input",
                             str(fixtures["root"] / "nope.csv"),
                             "--p", "2", "--k", "2")
        assert rc == 3
        assert err.strip()

    def test_bad_p_is_config_error(self, fixtures):
        rc, _, _ = run_cli("quantize", "--input", str(fixtures["tri"]),
                           "--p", "0.5", "--k", "2")
        assert rc == 2

    def test_sweep_with_inf_p_is_config_error(self, fixtures):
        rc, _, _ = run_cli("quantize", "--input", str(fixtures["tri"]),
                           "--p", "inf", "--k", "2", "--solver", "sweep")
        assert rc == 2

    def test_missing_k_is_config_error(self, fixtures):
        rc, _, _ = run_cli("quantize", "--input", str(fixtures["tri"]),
                           "--p", "2")
        assert rc == 2

    def test_malformed_csv_is_parse_error(self, fixtures):
        bad = fixtures["root"] / "bad.csv"
        bad.write_text("value,weight\noops,1\n")
        rc, _, _ = run_cli("quantize", "--input", str(bad), "--p", "2", "--k", "1")
        assert rc == 3


class TestDeterminism:
    CASES = (
        ("quantize", "--p", "2", "--k", "3", "--solver", "dp"),
        ("quantize", "--p", "1", "--k", "2", "--solver", "lloyd"),
        ("quantize", "--p", "inf", "--k", "2"),
        ("variation", "--p", "2", "--k-max", "3"),
        ("covering", "--eps", "0.25", "--eps", "0.1"),
    )

    @pytest.mark.parametrize("case", CASES, ids=lambda c: "-".join(c[:3]))
    def test_byte_identical_reruns(self, fixtures, tmp_path, case):
        outs = []
        for i in range(2):
            target = tmp_path / f"out{i}.json"
            rc, _, err = run_cli(*case, "--input", str(fixtures["tri"]),
                                 "--output", str(target))
            assert rc == 0, err
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_ua_family_reruns(self, fixtures, tmp_path):
        outs = []
        for i in range(2):
            target = tmp_path / f"ua{i}.json"
            rc, _, err = run_cli("ua", "--input", str(fixtures["tri"]),
                                 "--input", str(fixtures["pair"]),
                                 "--p", "2", "--k-max", "3", "--eps", "0.3",
                                 "--output", str(target))
            assert rc == 0, err
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_stamp_adds_metadata(self, fixtures):
        rc, out, _ = run_cli("quantize", "--input", str(fixtures["tri"]),
                             "--p", "2", "--k", "2", "--stamp")
        assert rc == 0
        assert "timestamp" in json.loads(out)["metadata"]

    def test_float_round_trip_precision(self, fixtures):
        rc, out, _ = run_cli("quantize", "--input", str(fixtures["uni"]),
                             "--p", "2", "--k", "3")
        report = json.loads(out)
        from kquant import read_csv, solve_dp

        rep = solve_dp(read_csv(fixtures["uni"]), 3, 2.0)
        assert report["result"]["error_pow"] == rep.error_pow  # exact via 17 digits


class TestBatchAndFamilies:
    def test_variation_batch_directory(self, fixtures):
        rc, out, err = run_cli("variation", "--input", str(fixtures["batch"]),
                               "--p", "2", "--k", "2")
        assert rc == 0, err
        report = json.loads(out)
        assert report["aggregate"]["checks"] == 6
        assert report["aggregate"]["passed"] == 6

    def test_threaded_batch_matches_serial(self, fixtures, tmp_path):
        args = ("variation", "--input", str(fixtures["batch"]),
                "--p", "2", "--k", "2")
        a = tmp_path / "serial.json"
        b = tmp_path / "threads.json"
        rc1, _, _ = run_cli(*args, "--output", str(a))
        rc2, _, _ = run_cli(*args, "--output", str(b),
                            env={"KQUANT_THREADS": "4"})
        assert rc1 == rc2 == 0
        assert a.read_bytes() == b.read_bytes()

    def test_ua_sup_norm_table(self, fixtures):
        rc, out, err = run_cli("ua", "--input", str(fixtures["tri"]),
                               "--input", str(fixtures["pair"]),
                               "--p", "inf", "--eps", "0.25")
        assert rc == 0, err
        report = json.loads(out)
        assert report["n_table"][0]["N"] == report["covering_table"][0]["max_covering"]

    def test_ua_adversarial(self):
        rc, out, err = run_cli("ua", "adversarial", "--r", "4", "--N", "20",
                               "--k", "2", "--p", "1")
        assert rc == 0, err
        adv = json.loads(out)["adversarial"]
        assert adv["lower_bound"] == pytest.approx(0.525)
        assert adv["relative_error_pow"] >= 0.525
        assert adv["bound_holds"] is True

    def test_ua_decay_csv(self, fixtures):
        rc, out, err = run_cli("ua", "--input", str(fixtures["tri"]),
                               "--p", "2", "--k-max", "3", "--format", "csv")
        assert rc == 0, err
        lines = out.strip().splitlines()
        assert lines[0] == "k,sup_distance,sup_variation"
        assert len(lines) == 4
