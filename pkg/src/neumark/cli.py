"""Command-line front end: ``neumark validate|run|repro|bench``.

Exit codes: 0 success, 1 domain failure (invalid POVM, fidelity miss),
2 I/O, parse or resource-cap failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

from . import presets
from .circuit import LoweringMode, circuit_to_json, cost, emit_qasm
from .compiler import compile_plan
from .errors import NeumarkError, TooManyQubits
from .numerics import svd2
from .povm import (
    DEFAULT_TOLERANCE,
    ZERO,
    Qubit1State,
    completeness_residual,
    decode_operators,
    povm_from_json,
    random_povm,
    validate,
)
from .simulator import ancilla_distribution, compare_to_analytic, run, work_leakage
from .synthesis import extract_modules, plan_from_json, plan_to_json, reconstruct_kraus

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
BENCH_MAX_N = 128

# closed-form ideal bars, keyed by basis label (qubit 0 written first)
IDEAL_BARS = {
    "fig2": {"00": 1 / 8, "10": 3 / 8, "01": 1 / 8, "11": 3 / 8},
    "fig3": {
        "000": 2 / 3,
        "100": 0.0,
        "010": 1 / 24,
        "110": 1 / 8,
        "001": 1 / 24,
        "101": 1 / 8,
        "011": 0.0,
        "111": 0.0,
    },
}


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def _floats(text: str, count: int, flag: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{flag} expects {count} comma-separated numbers")
    return vals


def _initial_state(args) -> Qubit1State:
    if args.state and args.bloch:
        raise UsageError("give at most one of --state and --bloch")
    if args.state:
        are, aim, bre, bim = _floats(args.state, 4, "--state")
        return Qubit1State(complex(are, aim), complex(bre, bim))
    if args.bloch:
        theta, phi = _floats(args.bloch, 2, "--bloch")
        return Qubit1State.from_bloch(theta, phi)
    return ZERO


def _state_json(psi: Qubit1State) -> list:
    return [[psi.a.real, psi.a.imag], [psi.b.real, psi.b.imag]]


def _load_povm(args):
    """POVM from ``--input`` (POVM or plan JSON) or ``--random``; returns ``(povm, plan_or_None)``."""
    if (args.input is None) == (args.random is None):
        raise UsageError("give exactly one of --input and --random")
    if args.random is not None:
        return random_povm(args.random, args.seed), None
    doc = _read_json(args.input)
    try:
        if isinstance(doc, dict) and "modules" in doc:
            plan = plan_from_json(doc)
            return reconstruct_kraus(plan, args.tol), plan
        return povm_from_json(doc, args.tol), None
    except NeumarkError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.input}: {exc}") from exc


# -- commands -------------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    doc = _read_json(args.input)
    try:
        ops = decode_operators(doc)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{args.input}: {exc}") from exc
    report = {
        "n": len(ops),
        "completeness_residual": completeness_residual(ops),
        "tolerance": args.tol,
        "singular_values": [list(svd2(m).singulars) for m in ops],
    }
    try:
        validate(ops, args.tol)
        report["valid"] = True
    except NeumarkError as exc:
        report["valid"], report["error"] = False, str(exc)
    text = _dump(report)
    out.write(text)
    if args.json_out:
        _write(args.json_out, text)
    return EXIT_OK if report["valid"] else EXIT_DOMAIN


def _pipeline(povm, plan, mode, psi0):
    plan = plan if plan is not None else extract_modules(povm)
    circuit = compile_plan(plan, mode)
    state = run(circuit, psi0)
    report = compare_to_analytic(state, povm, psi0)
    return plan, circuit, state, report


def cmd_run(args, out) -> int:
    psi0 = _initial_state(args)
    povm, plan = _load_povm(args)
    plan, circuit, state, report = _pipeline(povm, plan, LoweringMode(args.mode), psi0)
    dist = ancilla_distribution(state, plan)
    result = {
        "n": plan.n,
        "mode": circuit.mode.value,
        "qubits": circuit.num_qubits,
        "initial_state": _state_json(psi0),
        "cost": cost(circuit).as_dict(),
        "distribution": dist.probabilities,
        "label_leakage": dist.leakage,
        "work_leakage": work_leakage(state, plan),
        "report": report.as_dict(),
    }
    ok = report.min_fidelity >= 1.0 - args.fidelity_tol
    result["passed"] = ok
    if args.plan_out:
        _write(args.plan_out, _dump(plan_to_json(plan)))
    if args.circuit_out:
        _write(args.circuit_out, _dump(circuit_to_json(circuit)))
    if args.qasm_out:
        _write(args.qasm_out, emit_qasm(circuit))
    if args.json_out:
        _write(args.json_out, _dump(result))

    out.write(f"outcomes {plan.n}  mode {circuit.mode.value}  qubits {circuit.num_qubits}\n")
    c = result["cost"]
    out.write(f"cnots {c['cnot_count']}  rotations {c['rotation_count']}  depth {c['total_depth']}\n")
    for b in report.branches:
        fid = "n/a" if b.fidelity is None else f"{b.fidelity:.12f}"
        out.write(f"outcome {b.outcome}: p={b.probability:.12f} expected={b.expected_probability:.12f} fidelity={fid}\n")
    out.write(f"max amplitude error {report.max_amplitude_error:.3e}\n")
    out.write("PASS\n" if ok else "FAIL: branch fidelity below 1 - tol\n")
    return EXIT_OK if ok else EXIT_DOMAIN


def _reference_data() -> dict:
    text = resources.files("neumark").joinpath("data/device_reference.json").read_text(encoding="utf-8")
    return json.loads(text)


def _basis_label(index: int, qubits: int) -> str:
    return "".join(str((index >> k) & 1) for k in range(qubits))


def repro_table(figure: str, mode=LoweringMode.EXPONENTIAL) -> dict:
    """Ideal and simulated basis-state probabilities for one of the two worked examples."""
    if figure == "fig2":
        plan, povm = presets.two_element_plan(), presets.two_element_povm()
    elif figure == "fig3":
        plan, povm = presets.trine_plan(), presets.trine_povm()
    else:
        raise UsageError(f"unknown figure {figure!r}")
    _, circuit, state, report = _pipeline(povm, plan, LoweringMode(mode), ZERO)
    qubits = 1 + plan.ancilla_count
    # fold work ancillas (linear mode) into their all-zero block
    probs = state.probabilities().reshape(-1, 2**qubits).sum(axis=0)
    ideal = IDEAL_BARS[figure]
    rows = []
    for k in range(2**qubits):
        label = _basis_label(k, qubits)
        rows.append({"state": label, "ideal": ideal[label], "simulated": float(probs[k])})
    ref = _reference_data()
    return {
        "figure": figure,
        "mode": circuit.mode.value,
        "rows": rows,
        "zero_probability_states": [r["state"] for r in rows if r["ideal"] == 0.0],
        "max_deviation": max(abs(r["ideal"] - r["simulated"]) for r in rows),
        "min_branch_fidelity": report.min_fidelity,
        "device_reference": {"note": ref["note"], **ref[figure]},
    }


def cmd_repro(args, out) -> int:
    table = repro_table(args.figure, args.mode)
    out.write(f"{table['figure']}: ideal vs simulated (basis label lists qubit 0 first)\n")
    out.write(f"{'state':>6}  {'ideal':>14}  {'simulated':>14}\n")
    for r in table["rows"]:
        out.write(f"{'|' + r['state'] + '>':>6}  {r['ideal']:>14.12f}  {r['simulated']:>14.12f}\n")
    zeros = ", ".join(f"|{s}>" for s in table["zero_probability_states"]) or "none"
    out.write(f"zero-probability states: {zeros}\n")
    out.write(f"max deviation {table['max_deviation']:.3e}  min branch fidelity {table['min_branch_fidelity']:.12f}\n")
    dev = table["device_reference"]
    out.write("device reference (external, NOT reproducible here):\n")
    for d in dev["devices"]:
        out.write(f"  {d['name']}: fidelity {100 * d['fidelity']:.1f}% from {d['shots']} shots\n")
    if args.json_out:
        _write(args.json_out, _dump(table))
    if args.csv_out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state", "ideal", "simulated"])
        for r in table["rows"]:
            w.writerow([r["state"], repr(r["ideal"]), repr(r["simulated"])])
        _write(args.csv_out, buf.getvalue())
    return EXIT_OK if table["max_deviation"] <= 1e-9 else EXIT_DOMAIN


def bench_rows(max_n: int, modes, seed: int) -> list[dict]:
    if max_n < 2:
        raise UsageError("--max-n must be at least 2")
    if max_n > BENCH_MAX_N:
        raise TooManyQubits(f"--max-n {max_n} exceeds the benchmark cap of {BENCH_MAX_N}")
    sizes = [2**k for k in range(1, max_n.bit_length()) if 2**k <= max_n]
    rows = []
    for mode in modes:
        for n in sizes:
            plan = extract_modules(random_povm(n, seed))
            c = compile_plan(plan, mode)
            r = cost(c)
            rows.append(
                {
                    "n": n,
                    "mode": LoweringMode(mode).value,
                    "qubits": c.num_qubits,
                    "cnots": r.cnot_count,
                    "rotations": r.rotation_count,
                    "x_gates": r.x_count,
                    "depth": r.total_depth,
                    "cnot_depth": r.cnot_depth,
                    "per_module_cnots": list(r.per_module_cnots),
                }
            )
    return rows


def growth_ratios(rows) -> list[str]:
    lines = []
    by_mode = {}
    for r in rows:
        by_mode.setdefault(r["mode"], []).append(r)
    for mode, rs in by_mode.items():
        for prev, cur in zip(rs, rs[1:]):
            lines.append(f"{mode} cnots({cur['n']})/cnots({prev['n']}) = {cur['cnots'] / prev['cnots']:.4f}")
        for r in rs:
            if r["n"] > 2:
                lines.append(f"{mode} cnots({r['n']})/(n log2 n) = {r['cnots'] / (r['n'] * math.log2(r['n'])):.4f}")
    return lines


def cmd_bench(args, out) -> int:
    modes = ["exp", "linear"] if args.mode == "both" else [args.mode]
    rows = bench_rows(args.max_n, modes, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["n", "mode", "qubits", "cnots", "rotations", "x_gates", "depth", "cnot_depth", "per_module_cnots"]
    w.writerow(cols)
    for r in rows:
        w.writerow([*(r[c] for c in cols[:-1]), ";".join(map(str, r["per_module_cnots"]))])
    text = buf.getvalue()
    if args.csv_out:
        _write(args.csv_out, text)
    out.write(text)
    for line in growth_ratios(rows):
        out.write(f"# {line}\n")
    if args.json_out:
        _write(args.json_out, _dump(rows))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        v = -1.0
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = -1
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json-out", metavar="PATH")
    common.add_argument("--tol", type=_positive, default=DEFAULT_TOLERANCE, help="completeness tolerance")

    p = argparse.ArgumentParser(prog="neumark", description="Neumark-dilation circuits for single-qubit POVMs.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a POVM JSON file")
    v.add_argument("--input", required=True, metavar="PATH")

    r = sub.add_parser("run", parents=[common], help="synthesize, compile, simulate and report")
    r.add_argument("--input", metavar="PATH", help="POVM JSON or plan JSON")
    r.add_argument("--random", type=int, metavar="N", help="use a seeded random N-element POVM")
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--mode", choices=["exp", "linear"], default="exp")
    r.add_argument("--state", metavar="A_RE,A_IM,B_RE,B_IM")
    r.add_argument("--bloch", metavar="THETA,PHI")
    r.add_argument("--fidelity-tol", type=_positive, default=1e-8)
    r.add_argument("--qasm-out", metavar="PATH")
    r.add_argument("--plan-out", metavar="PATH")
    r.add_argument("--circuit-out", metavar="PATH")

    f = sub.add_parser("repro", parents=[common], help="ideal bar values for the worked examples")
    f.add_argument("figure", choices=["fig2", "fig3"])
    f.add_argument("--mode", choices=["exp", "linear"], default="exp")
    f.add_argument("--csv-out", metavar="PATH")

    b = sub.add_parser("bench", parents=[common], help="gate counts versus n")
    b.add_argument("--max-n", type=int, default=32)
    b.add_argument("--mode", choices=["exp", "linear", "both"], default="both")
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--csv-out", metavar="PATH")
    return p


_COMMANDS = {"validate": cmd_validate, "run": cmd_run, "repro": cmd_repro, "bench": cmd_bench}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; keep --help at 0
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except (UsageError, TooManyQubits) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NeumarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
