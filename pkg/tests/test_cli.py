import csv
import io
import json
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from iterdeteq import experiments
from iterdeteq.cli import main
from iterdeteq.mac import rayleigh_product_closed_form

SPECS = pathlib.Path(__file__).resolve().parents[1] / "specs"

RELAY = {
    "model": "relay",
    "config": {"dims": [4, 8, 12, 8, 4], "alphas": [1.0, 0.7, 0.5, 0.7], "rho_ratios": [1.0, 0.7, 0.5, 0.7]},
    "sweep": {"variable": "rho0_db", "start": -10, "stop": 30, "step": 10},
}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("path", sorted(SPECS.glob("*.json")), ids=lambda p: p.name)
def test_shipped_specs_validate(path):
    code, out, err = call("validate", str(path))
    assert code == 0, err
    assert "ok" in out


class TestValidate:
    def test_negative_power(self, tmp_path):
        doc = json.loads(json.dumps(RELAY))
        doc["config"]["rho_ratios"][2] = -0.5
        code, _, err = call("validate", write(tmp_path, doc))
        assert code == 2
        assert "config.rho_ratios[2]" in err

    def test_non_square_matrix(self, tmp_path):
        doc = json.loads((SPECS / "keyhole.json").read_text())
        doc["config"]["transmitters"][0]["R"] = [[1, 0, 0], [0, 1, 0]]
        code, _, err = call("validate", write(tmp_path, doc))
        assert code == 2
        assert "transmitters[0].R" in err and "not square" in err

    def test_recursion_cap(self, tmp_path):
        doc = {
            "model": "relay",
            "config": {"dims": [2] * 13, "alphas": [1.0] * 12},
            "sweep": {"grid": [0.0]},
        }
        code, _, err = call("validate", write(tmp_path, doc))
        assert code == 2
        assert "max_hops=8" in err and "config.max_hops" in err

    def test_every_problem_listed(self, tmp_path):
        doc = {"model": "relay", "config": {"dims": [4, 4], "alphas": [-1]}, "sweep": {"grid": [3, 1]}, "units": "bytes"}
        code, _, err = call("validate", write(tmp_path, doc))
        assert code == 2
        lines = err.strip().splitlines()
        assert len(lines) == 3
        assert any("alphas[0]" in l for l in lines)
        assert any("strictly increasing" in l for l in lines)
        assert any("units" in l for l in lines)

    def test_bad_json_reports_position(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text('{\n  "model": "relay",\n  "config": {,}\n}')
        code, _, err = call("validate", str(p))
        assert code == 2
        assert "line 3" in err

    def test_missing_file(self, tmp_path):
        code, _, err = call("validate", str(tmp_path / "nope.json"))
        assert code == 2

    def test_non_psd_correlation(self, tmp_path):
        doc = json.loads((SPECS / "keyhole.json").read_text())
        doc["config"]["transmitters"][0]["T"] = {"type": "diag", "values": [1, 1, -1, 1]}
        code, _, err = call("validate", write(tmp_path, doc))
        assert code == 2 and "T_1" in err


class TestRun:
    def test_relay_rows(self, tmp_path):
        out = tmp_path / "relay.csv"
        code, _, err = call("run", write(tmp_path, RELAY), "--out", str(out))
        assert code == 0, err
        rows = read_csv(out)
        assert list(rows[0]) == ["rho0_db", "hop", "deteq"]
        assert len(rows) == 5 * 4
        for i in range(0, len(rows), 4):
            vals = [float(r["deteq"]) for r in rows[i : i + 4]]
            assert [int(r["hop"]) for r in rows[i : i + 4]] == [1, 2, 3, 4]
            assert all(v >= 0 for v in vals)
            assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_twelve_significant_digits(self, tmp_path):
        out = tmp_path / "relay.csv"
        call("run", write(tmp_path, RELAY), "--out", str(out))
        v = read_csv(out)[-1]["deteq"]
        assert len(v.replace(".", "").lstrip("0")) <= 12

    def test_rayleigh_passthrough(self, tmp_path):
        doc = {
            "model": "rayleigh-product",
            "config": {"N": 4, "S": 4, "K": 1},
            "sweep": {"grid": [-5.0, 0.0, 7.5, 20.0]},
            "output": {"format": "json"},
        }
        code, out, _ = call("run", write(tmp_path, doc))
        assert code == 0
        rows = [r for r in json.loads(out)["rows"] if r["metric"] == "mutual_info"]
        for r in rows:
            assert r["deteq"] == rayleigh_product_closed_form(4, 4, 1, 10 ** (r["rho_db"] / 10)).ibar

    def test_waterfill_budget_echo(self, tmp_path):
        doc = json.loads((SPECS / "mac_fig4_waterfill.json").read_text())
        doc.pop("mc")
        doc["sweep"] = {"grid": [0.0, 20.0]}
        out = tmp_path / "wf.json"
        code, _, err = call("run", write(tmp_path, doc), "--out", str(out))
        assert code == 0, err
        data = json.loads(out.read_text())
        assert len(data["waterfill"]) == 2
        for point in data["waterfill"]:
            for p, budget, total in zip(point["powers"], point["budgets"], point["power_sums"]):
                assert abs(np.mean(p) - budget) < 1e-10
                assert abs(total - budget) < 1e-10
        metrics = {r["metric"] for r in data["rows"]}
        assert metrics == {"mutual_info", "sum_rate", "mutual_info_opt", "sum_rate_opt"}

    def test_bits_are_nats_over_ln2(self):
        doc = json.loads((SPECS / "keyhole.json").read_text())
        doc["mc"]["trials"] = 20
        spec = experiments.parse_spec(doc)
        nats = experiments.run(spec, units="nats")
        bits = experiments.run(spec, units="bits")
        for a, b in zip(nats.rows, bits.rows):
            for col in ("deteq", "mc_mean", "mc_std", "mc_stderr"):
                assert b[col] == a[col] / math.log(2.0)

    def test_same_seed_same_bytes(self, tmp_path):
        doc = json.loads((SPECS / "relay_fig2.json").read_text())
        doc["mc"]["trials"] = 30
        spec = write(tmp_path, doc)
        call("run", spec, "--out", str(tmp_path / "a.csv"))
        call("run", spec, "--out", str(tmp_path / "b.csv"))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_nonconvergence_exit_code(self, tmp_path):
        code, _, err = call("run", write(tmp_path, RELAY), "--max-iter", "2")
        assert code == 3
        assert "rho0_db=" in err

    def test_mac_nonconvergence_names_point(self, tmp_path):
        doc = json.loads((SPECS / "keyhole.json").read_text())
        doc.pop("mc")
        code, _, err = call("run", write(tmp_path, doc), "--max-iter", "1")
        assert code == 3 and "rho_db=0" in err


class TestFigure:
    def test_fig4_small(self, tmp_path):
        code, out, err = call("figure", "fig4", "--trials", "20", "--seed", "3", "--out", str(tmp_path))
        assert code == 0, err
        rows = read_csv(tmp_path / "fig4.csv")
        det = {(r["rho_db"], r["metric"]): float(r["deteq"]) for r in rows}
        for x in {r["rho_db"] for r in rows}:
            assert det[(x, "mutual_info_opt")] >= det[(x, "mutual_info")]
        assert (tmp_path / "fig4_waterfill.json").exists()

    def test_fig3_deteq_only(self, tmp_path):
        code, _, _ = call("figure", "fig3", "--trials", "0", "--out", str(tmp_path))
        assert code == 0
        rows = read_csv(tmp_path / "fig3.csv")
        assert len(rows) == 5 * 7
        assert set(rows[0]) == {"n_scatterers", "rho_db", "metric", "deteq"}

    def test_trials_must_allow_std(self, tmp_path):
        code, _, _ = call("figure", "fig2", "--trials", "1", "--out", str(tmp_path))
        assert code == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "iterdeteq", "validate", str(SPECS / "rayleigh_product.json")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert "ok" in res.stdout
