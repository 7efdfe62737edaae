import json

import numpy as np
import pytest

from isodarboux.catalog import read_columns, write_csv
from isodarboux.cli import main
from isodarboux.grid import build_grid

OSC = ["--potential", "oscillator"]
PT = ["--potential", "poschl_teller"]


def run(cmd, tmp_path, *extra, sub="out"):
    out = tmp_path / sub
    code = main([cmd, *extra, "--out-dir", str(out)])
    return code, out


def report(out, cmd):
    return json.loads((out / f"{cmd}.json").read_text())


def lams(*values):
    return [a for v in values for a in ("--lambda", str(v))]


class TestFamily:
    def test_member_files(self, tmp_path):
        code, out = run("family", tmp_path, *OSC, *lams(1))
        assert code == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == sorted([
            "family.json", "parent_potential.csv", "parent_ground_state.csv",
            "parent_superpotential.csv", "family_lambda_1.csv",
            "family_lambda_1_ground_state.csv", "family_lambda_1_superpotential.csv",
        ])
        cols = read_columns(out / "parent_potential.csv")
        x = cols["x"]
        assert np.max(np.abs(cols["value"] - (x ** 2 - 1))) < 1e-12
        r = report(out, "family")
        assert r["passed"] and r["diagnostics"]["1"]["partner_deviation"] < 1e-4
        assert r["manifest"]["outputs"][-1] == "family.json"

    @pytest.mark.parametrize("lam", ["0", "-0.5", "-1"])
    def test_band_rejected(self, tmp_path, capsys, lam):
        code, out = run("family", tmp_path, *OSC, "--lambda", lam)
        assert code == 2
        err = capsys.readouterr().err
        assert "limiting values -1 and 0" in err
        assert not out.joinpath("family.json").exists()

    def test_parent_only(self, tmp_path):
        code, out = run("family", tmp_path, *OSC)
        assert code == 0
        assert not list(out.glob("family_lambda_*"))

    def test_json_format_bundles_arrays(self, tmp_path):
        code, out = run("family", tmp_path, *OSC, *lams(2), "--format", "json")
        assert code == 0
        assert [p.name for p in out.iterdir()] == ["family.json"]
        arrays = report(out, "family")["arrays"]
        assert "family_lambda_2_superpotential" in arrays
        assert len(arrays["parent_potential"]["x"]) == 2001

    def test_loose_tolerance_controls_verdict(self, tmp_path):
        code, _ = run("family", tmp_path, *OSC, *lams(1), "--n", "201", "--xmin", "-8", "--xmax", "8", "--tol", "1e-12")
        assert code == 1


def test_repeated_runs_are_byte_identical(tmp_path):
    args = ["family", *PT, *lams(0.5, 3)]
    _, a = run(*args[:1], tmp_path, *args[1:], sub="a")
    _, b = run(*args[:1], tmp_path, *args[1:], sub="b")
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        # files never record the output directory, so even the JSON matches
        assert (a / name).read_bytes() == (b / name).read_bytes()


class TestSuperpose:
    def test_cross_ratio(self, tmp_path):
        code, out = run("superpose", tmp_path, *OSC, *lams(2, 1, 3, 4))
        r = report(out, "superpose")
        assert code == 0
        assert r["k_closed_form"] == pytest.approx(-1 / 3, abs=1e-12)
        assert r["k_estimate"] == pytest.approx(-1 / 3, abs=1e-6)
        assert r["constancy"] < 1e-6 and r["reconstruction_error"] < 1e-6
        assert list(read_columns(out / "superpose.csv", allow_nan=True)) == ["x", "w1", "w2", "w3", "w", "w_superposed"]

    def _override(self, tmp_path, k):
        code, out = run("superpose", tmp_path, *OSC, *lams(2, 1, 3, 4), "--k-override", str(k))
        assert code == 0
        return read_columns(out / "superpose.csv", allow_nan=True)

    def test_override_one_gives_third(self, tmp_path):
        c = self._override(tmp_path, 1)
        ok = np.isfinite(c["w3"]) & np.isfinite(c["w_superposed"])
        assert np.max(np.abs(c["w_superposed"][ok] - c["w3"][ok])) < 1e-9

    def test_override_zero_gives_first(self, tmp_path):
        c = self._override(tmp_path, 0)
        ok = np.isfinite(c["w1"]) & np.isfinite(c["w_superposed"])
        assert np.max(np.abs(c["w_superposed"][ok] - c["w1"][ok])) < 1e-9

    @pytest.mark.xfail(strict=True, reason="k = 0 is the first member under this cross-ratio convention")
    def test_override_zero_gives_second(self, tmp_path):
        c = self._override(tmp_path, 0)
        ok = np.isfinite(c["w2"]) & np.isfinite(c["w_superposed"])
        assert np.max(np.abs(c["w_superposed"][ok] - c["w2"][ok])) < 1e-6

    @pytest.mark.parametrize("values", [(2, 1, 1, 4), (2, 1, 3)])
    def test_bad_lambda_sets(self, tmp_path, values):
        code, _ = run("superpose", tmp_path, *OSC, *lams(*values))
        assert code == 2


class TestOtherCommands:
    def test_solve_epsilon(self, tmp_path):
        code, out = run("solve", tmp_path, *OSC, "--epsilon", "-1")
        assert code == 0 and report(out, "solve")["factorization"]["nodeless"]
        assert report(out, "solve")["energies"][:2] == pytest.approx([0, 2], abs=1e-3)

    def test_solve_epsilon_above_ground(self, tmp_path):
        code, _ = run("solve", tmp_path, *OSC, "--epsilon", "0.5")
        assert code == 2

    def test_partner(self, tmp_path):
        code, out = run("partner", tmp_path, *PT, *lams(1, -2))
        assert code == 0
        plus = read_columns(out / "partner_plus.csv", allow_nan=True)
        ok = np.isfinite(plus["value"]) & (np.abs(plus["x"]) < 5)
        # removing the only bound state of -2 sech^2 leaves the flat partner V+ = 1 after the shift
        assert np.max(np.abs(plus["value"][ok] - 1.0)) < 1e-3

    def test_iterate(self, tmp_path):
        code, out = run("iterate", tmp_path, *OSC, *lams(1, 2))
        orders = report(out, "iterate")["orders"]
        assert code == 0 and sorted(orders) == ["0", "1", "2"]
        assert orders["2"]["lambda_chain"] == [1.0, 2.0]
        assert (out / "iterate_order_2_factor.csv").exists()

    def test_verify_default(self, tmp_path):
        code, out = run("verify", tmp_path, *OSC)
        r = report(out, "verify")["report"]
        assert code == 0 and r["passed"]
        assert sorted(float(k) for k in r["spectrum_deltas"]) == [-2, 0.5, 1, 5]

    def test_verify_coarse_grid_warns(self, tmp_path, capsys):
        code, out = run("verify", tmp_path, *OSC, "--n", "51")
        assert code == 1
        assert "convergence" in capsys.readouterr().err
        assert any(w.startswith("convergence") for w in report(out, "verify")["report"]["warnings"])

    def test_scatter(self, tmp_path):
        code, out = run("scatter", tmp_path, *PT, *lams(1))
        r = report(out, "scatter")
        assert code == 0
        for row in r["invariance"]["1"].values():
            assert row["delta_R"] < 5e-4 and row["delta_T"] < 5e-4

    def test_scatter_confining_potential_is_numerical_failure(self, tmp_path):
        code, _ = run("scatter", tmp_path, *OSC)
        assert code == 3

    def test_tabulated_round_trip(self, tmp_path):
        _, out = run("solve", tmp_path, *OSC, sub="src")
        code, out2 = run("solve", tmp_path, "--potential", "tabulated", "--table",
                         str(out / "potential.csv"), sub="tab")
        assert code == 0
        e1, e2 = report(out, "solve")["energies"], report(out2, "solve")["energies"]
        assert e1 == e2


class TestConfiguration:
    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"potential": "harmonic", "params": {"omega": 2}, "lambdas": [1.0], "n": 1001}))
        code, out = run("family", tmp_path, "--config", str(cfg), "--n", "4001")
        m = report(out, "family")["manifest"]
        assert code == 0
        assert m["grid"]["n"] == 4001 and m["spec"]["params"]["omega"] == 2.0 and m["lambdas"] == [1.0]
        assert m["shift"] == pytest.approx(2.0)

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"potential": "harmonic", "colour": "red"}))
        assert run("solve", tmp_path, "--config", str(cfg))[0] == 2

    @pytest.mark.parametrize("extra", [
        ["--potential", "coulomb"],
        [],
        ["--potential", "morse", "--param", "width=1"],
        ["--potential", "harmonic", "--n", "3"],
        ["--potential", "harmonic", "--levels", "0"],
        ["--potential", "tabulated"],
    ])
    def test_usage_errors(self, tmp_path, extra):
        assert run("solve", tmp_path, *extra)[0] == 2

    def test_bad_flag_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--bogus"])
        assert exc.value.code == 2

    def test_table_with_three_columns(self, tmp_path):
        g = build_grid(-1, 1, 11)
        p = write_csv(tmp_path / "t.csv", g.x, {"a": g.x, "b": g.x})
        assert run("solve", tmp_path, "--potential", "tabulated", "--table", str(p))[0] == 2
