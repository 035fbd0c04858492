import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from neumark.cli import bench_rows, main, repro_table
from neumark.circuit import QASM_HEADER
from neumark.povm import povm_to_json
from neumark.presets import trine_plan, trine_povm, two_element_plan
from neumark.synthesis import plan_to_json


def call(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def trine_file(tmp_path):
    p = tmp_path / "trine.json"
    p.write_text(json.dumps(povm_to_json(trine_povm())))
    return str(p)


class TestValidate:
    def test_trine_valid(self, trine_file):
        code, text = call("validate", "--input", trine_file)
        report = json.loads(text)
        assert code == 0 and report["valid"] and report["completeness_residual"] < 1e-12
        assert report["singular_values"][0] == pytest.approx([math.sqrt(2 / 3), 0.0], abs=1e-15)

    def test_identity_pair_invalid(self, tmp_path):
        p = tmp_path / "ii.json"
        p.write_text(json.dumps(povm_to_json([np.eye(2), np.eye(2)])))
        code, text = call("validate", "--input", str(p))
        assert code == 1 and not json.loads(text)["valid"]

    def test_single_operator_invalid(self, tmp_path):
        p = tmp_path / "one.json"
        p.write_text(json.dumps(povm_to_json([np.eye(2)])))
        assert call("validate", "--input", str(p))[0] == 1

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        assert call("validate", "--input", str(p))[0] == 2

    def test_wrong_shape(self, tmp_path):
        p = tmp_path / "shape.json"
        p.write_text('{"operators": [[1, 2]]}')
        assert call("validate", "--input", str(p))[0] == 2

    def test_missing_file(self, tmp_path):
        assert call("validate", "--input", str(tmp_path / "nope.json"))[0] == 2

    def test_tolerance_flag(self, tmp_path):
        p = tmp_path / "near.json"
        ops = [m * (1 + 1e-7) for m in trine_povm()]
        p.write_text(json.dumps(povm_to_json(ops)))
        assert call("validate", "--input", str(p))[0] == 1
        assert call("validate", "--input", str(p), "--tol", "1e-6")[0] == 0


class TestRun:
    def test_two_element_plan_input(self, tmp_path):
        p = tmp_path / "plan.json"
        p.write_text(json.dumps(plan_to_json(two_element_plan())))
        out = tmp_path / "report.json"
        code, _ = call("run", "--input", str(p), "--json-out", str(out))
        doc = json.loads(out.read_text())
        assert code == 0
        assert doc["distribution"] == pytest.approx([0.5, 0.5])
        for b in doc["report"]["branches"]:
            (ar, ai), (br, bi) = b["state"]
            assert abs(complex(ar, ai) * 0.5 + complex(br, bi) * math.sqrt(3) / 2) ** 2 == pytest.approx(1.0)

    def test_trine(self, trine_file):
        code, text = call("run", "--input", trine_file, "--mode", "linear")
        assert code == 0 and text.rstrip().endswith("PASS")

    @pytest.mark.parametrize("mode", ["exp", "linear"])
    def test_random_five(self, mode, tmp_path):
        out = tmp_path / "r.json"
        code, _ = call("run", "--random", "5", "--seed", "3", "--mode", mode, "--json-out", str(out))
        doc = json.loads(out.read_text())
        assert code == 0 and doc["report"]["min_fidelity"] > 1 - 1e-8

    def test_artifacts_and_determinism(self, tmp_path):
        paths = {}
        for run_id in ("a", "b"):
            names = ["plan", "circuit", "qasm", "json"]
            paths[run_id] = {k: tmp_path / f"{run_id}.{k}" for k in names}
            code, _ = call(
                "run", "--random", "4", "--seed", "12", "--bloch", "1.0,0.5",
                "--plan-out", str(paths[run_id]["plan"]),
                "--circuit-out", str(paths[run_id]["circuit"]),
                "--qasm-out", str(paths[run_id]["qasm"]),
                "--json-out", str(paths[run_id]["json"]),
            )
            assert code == 0
        for k in paths["a"]:
            assert paths["a"][k].read_bytes() == paths["b"][k].read_bytes()
        assert paths["a"]["qasm"].read_text().startswith(QASM_HEADER)

    def test_explicit_state(self):
        code, text = call("run", "--random", "3", "--state", "0,0,1,0")
        assert code == 0

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--random", "3", "--state", "1,0,0,0", "--bloch", "0,0"],
            ["run", "--random", "3", "--state", "1,0"],
            ["run"],
            ["run", "--random", "3", "--mode", "cubic"],
            ["run", "--random", "3", "--seed", "-1"],
            ["run", "--random", "3", "--tol", "0"],
        ],
    )
    def test_usage_errors(self, argv):
        assert call(*argv)[0] == 2

    def test_unnormalized_state_is_domain_error(self):
        assert call("run", "--random", "3", "--state", "1,0,1,0")[0] == 1

    def test_invalid_povm_is_domain_error(self, tmp_path):
        p = tmp_path / "ii.json"
        p.write_text(json.dumps(povm_to_json([np.eye(2), np.eye(2)])))
        assert call("run", "--input", str(p))[0] == 1

    def test_unwritable_output(self, tmp_path):
        assert call("run", "--random", "2", "--qasm-out", str(tmp_path / "missing" / "x.qasm"))[0] == 2


class TestRepro:
    def test_fig2(self):
        t = repro_table("fig2")
        assert [r["state"] for r in t["rows"]] == ["00", "10", "01", "11"]
        assert [r["simulated"] for r in t["rows"]] == pytest.approx([1 / 8, 3 / 8, 1 / 8, 3 / 8], abs=1e-9)
        assert t["max_deviation"] < 1e-9

    @pytest.mark.parametrize("mode", ["exp", "linear"])
    def test_fig3(self, mode):
        t = repro_table("fig3", mode)
        assert t["zero_probability_states"] == ["100", "011", "111"]
        assert t["max_deviation"] < 1e-9

    def test_device_data_is_reference_only(self):
        t = repro_table("fig3")
        assert "cannot be reproduced" in t["device_reference"]["note"]
        assert sorted(d["fidelity"] for d in t["device_reference"]["devices"]) == [0.466, 0.802]

    def test_command(self, tmp_path):
        code, text = call("repro", "fig3", "--csv-out", str(tmp_path / "f.csv"), "--json-out", str(tmp_path / "f.json"))
        assert code == 0
        assert "zero-probability states: |100>, |011>, |111>" in text
        assert "NOT reproducible" in text
        assert (tmp_path / "f.csv").read_text().splitlines()[0] == "state,ideal,simulated"

    def test_unknown_figure(self):
        assert call("repro", "fig9")[0] == 2


class TestBench:
    def test_rows(self):
        rows = bench_rows(16, ["exp", "linear"], 0)
        assert [(r["n"], r["mode"]) for r in rows] == [(n, m) for m in ("exp", "linear") for n in (2, 4, 8, 16)]
        two = [r for r in rows if r["n"] == 2]
        assert two[0]["cnots"] == two[1]["cnots"] and two[0]["rotations"] == two[1]["rotations"]

    def test_exponential_ratio(self):
        rows = {r["n"]: r["cnots"] for r in bench_rows(32, ["exp"], 0)}
        assert 3.2 <= rows[32] / rows[16] <= 4.8

    def test_csv_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert call("bench", "--max-n", "8", "--csv-out", str(a))[0] == 0
        assert call("bench", "--max-n", "8", "--csv-out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0].startswith("n,mode,qubits,cnots")

    def test_ratios_printed(self):
        code, text = call("bench", "--max-n", "8", "--mode", "linear")
        assert code == 0 and "# linear cnots(8)/cnots(4)" in text

    def test_cap(self):
        assert call("bench", "--max-n", "4096")[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "neumark.cli", "repro", "fig2"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "|11>" in proc.stdout
