"""Acceptance criteria 1-9.

Each test prints one ``[criterion N] PASS|FAIL`` line (even when output is
captured) and then asserts. ``conftest.py`` repeats the lines in the
terminal summary. Run standalone with ``python3 tests/test_acceptance.py``.
"""

import math
import re
import sys
import time

import numpy as np
import pytest

from neumark.circuit import CNOT, QASM_HEADER, RY, RZ, X, LoweringMode, cost, emit_qasm
from neumark.compiler import compile_plan
from neumark.lowering import lower_mc_rotation
from neumark.numerics import ry, rz
from neumark.povm import ZERO, Qubit1State, random_povm
from neumark.presets import trine_plan, trine_povm, two_element_plan, two_element_povm
from neumark.simulator import (
    align_phase,
    ancilla_distribution,
    compare_to_analytic,
    conditional_target_state,
    expected_statevector,
    run,
    work_leakage,
)
from neumark.synthesis import extract_modules, reconstruct_kraus

from oracles import controlled_matrix, embed, lowered_unitary, trine_module2_states

RESULTS = {}
MODES = [LoweringMode.EXPONENTIAL, LoweringMode.LINEAR]
PHI_PLUS = np.array([1.0, math.sqrt(3)]) / 2


def report(number, ok, detail):
    line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[number] = line
    capman = getattr(report, "capture_manager", None)
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    return ok


@pytest.fixture(autouse=True)
def _uncaptured(request):
    report.capture_manager = request.config.pluginmanager.getplugin("capturemanager")
    yield
    report.capture_manager = None


def _random_plans(count, max_n=8):
    for k in range(count):
        n = 2 + k % (max_n - 1)
        povm = random_povm(n, 5000 + k)
        yield povm, extract_modules(povm)


# -- 1 --------------------------------------------------------------------------------


def test_criterion_1_two_element_example():
    t0 = time.perf_counter()
    povm = two_element_povm()
    worst_p, worst_f = 0.0, 1.0
    for plan in (two_element_plan(), extract_modules(povm)):
        for mode in MODES:
            s = run(compile_plan(plan, mode), ZERO)
            # work ancillas (if any) are folded in by summing over the high bits
            probs = s.probabilities().reshape(-1, 4).sum(axis=0)
            worst_p = max(worst_p, float(np.max(np.abs(probs - [1 / 8, 3 / 8, 1 / 8, 3 / 8]))))
            for k in (1, 2):
                state, _ = conditional_target_state(s, k, plan)
                worst_f = min(worst_f, abs(np.vdot(state.vector, PHI_PLUS)) ** 2)
    elapsed = time.perf_counter() - t0
    ok = worst_p <= 1e-9 and worst_f >= 1 - 1e-9 and elapsed < 1.0
    report(1, ok, f"max prob error {worst_p:.2e}, min fidelity {worst_f:.12f}, {elapsed:.3f}s")
    assert ok


# -- 2 --------------------------------------------------------------------------------


def test_criterion_2_trine_example():
    t0 = time.perf_counter()
    allowed = {0b000: 2 / 3, 0b010: 1 / 24, 0b011: 1 / 8, 0b100: 1 / 24, 0b101: 1 / 8}
    forbidden = [0b001, 0b110, 0b111]  # |t a1 a2> = |100>, |011>, |111>
    worst_allowed = worst_forbidden = worst_marginal = 0.0
    for plan in (trine_plan(), extract_modules(trine_povm())):
        for mode in MODES:
            s = run(compile_plan(plan, mode), ZERO)
            probs = s.probabilities().reshape(-1, 8).sum(axis=0)
            worst_allowed = max(worst_allowed, max(abs(probs[k] - p) for k, p in allowed.items()))
            worst_forbidden = max(worst_forbidden, max(probs[k] for k in forbidden))
            dist = ancilla_distribution(s, plan).probabilities
            worst_marginal = max(worst_marginal, float(np.max(np.abs(np.array(dist) - [2 / 3, 1 / 6, 1 / 6]))))
    elapsed = time.perf_counter() - t0
    ok = worst_allowed <= 1e-9 and worst_forbidden < 1e-10 and worst_marginal <= 1e-9 and elapsed < 1.0
    report(
        2,
        ok,
        f"allowed-state error {worst_allowed:.2e}, forbidden mass {worst_forbidden:.2e}, "
        f"marginal error {worst_marginal:.2e}, {elapsed:.3f}s",
    )
    assert ok


# -- 3 --------------------------------------------------------------------------------


def test_criterion_3_module_two_intermediate_states():
    plan = trine_plan()
    rng = np.random.default_rng(3)
    states = [ZERO, *(Qubit1State.random(rng) for _ in range(4))]
    worst = 0.0
    for mode in MODES:
        c = compile_plan(plan, mode)
        bounds = [c.marker(2, "rotate"), c.marker(2, "relabel"), c.marker(2, "unitaries"), c.marker(0, "end")]
        for psi in states:
            for marker, ref in zip(bounds, trine_module2_states(plan, psi)):
                _, err = align_phase(run(c.prefix(marker), psi).amplitudes, embed(ref, c.num_qubits))
                worst = max(worst, err)
    ok = worst < 1e-9
    report(3, ok, f"4 step boundaries x {len(states)} states x 2 modes, max amplitude error {worst:.2e}")
    assert ok


# -- 4 --------------------------------------------------------------------------------


def test_criterion_4_round_trip():
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(200):
        p = random_povm(2 + k % 7, k)
        back = reconstruct_kraus(extract_modules(p))
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(back, p)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 10.0
    report(4, ok, f"200 POVMs, max elementwise error {worst:.2e}, {elapsed:.2f}s")
    assert ok


# -- 5 --------------------------------------------------------------------------------


def test_criterion_5_circuit_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    worst_err = worst_leak = 0.0
    max_q = 0
    for povm, plan in _random_plans(100):
        for mode in MODES:
            c = compile_plan(plan, mode)
            max_q = max(max_q, c.num_qubits)
            for _ in range(10):
                psi = Qubit1State.random(rng)
                s = run(c, psi)
                _, err = align_phase(s.amplitudes, expected_statevector(povm, psi, c.num_qubits))
                worst_err = max(worst_err, err)
                if mode is LoweringMode.LINEAR:
                    # leakage as amplitude: sqrt of the probability outside work = 0
                    worst_leak = max(worst_leak, math.sqrt(work_leakage(s, plan)))
    elapsed = time.perf_counter() - t0
    ok = worst_err < 1e-9 and worst_leak < 1e-10 and max_q <= 7 and elapsed < 60.0
    report(
        5,
        ok,
        f"2000 runs, max amplitude error {worst_err:.2e}, work leakage {worst_leak:.2e}, "
        f"max qubits {max_q}, {elapsed:.1f}s",
    )
    assert ok


# -- 6 --------------------------------------------------------------------------------


def test_criterion_6_mc_rotation_oracle():
    rng = np.random.default_rng(6)
    worst = 0.0
    cases = 0
    for m in (1, 2, 3, 4):
        for mode in MODES:
            ctrl = list(range(1, m + 1))
            work = list(range(m + 1, 2 * m)) if mode is LoweringMode.LINEAR else []
            q = 1 + m + len(work)
            for axis in ("y", "z"):
                for _ in range(20):
                    theta = float(rng.uniform(-2 * math.pi, 2 * math.pi))
                    controls = list(zip(ctrl, rng.integers(0, 2, m).tolist()))
                    low = lower_mc_rotation(axis, theta, controls, 0, mode, work)
                    full = lowered_unitary(low, q)
                    ideal = controlled_matrix(ry(theta) if axis == "y" else rz(theta), controls, 0, q)
                    # work ancillas start in |0>: compare the columns where they are clean
                    clean = [k for k in range(2**q) if all(not (k >> w) & 1 for w in work)]
                    worst = max(worst, float(np.max(np.abs(full[:, clean] - ideal[:, clean]))))
                    cases += 1
    ok = worst < 1e-10
    report(6, ok, f"{cases} lowered rotations, max unitary error {worst:.2e}")
    assert ok


# -- 7 --------------------------------------------------------------------------------


def _total_cnots(n, mode, seed=7):
    return cost(compile_plan(extract_modules(random_povm(n, seed)), mode)).cnot_count


def test_criterion_7_scaling():
    ratio = _total_cnots(32, "exp") / _total_cnots(16, "exp")
    exp_ok = 3.2 <= ratio <= 4.8
    c = {n: _total_cnots(n, "linear") / (n * math.log2(n)) for n in (8, 16, 32, 64)}
    mean = sum(c.values()) / len(c)
    spread = {n: v / mean - 1 for n, v in c.items()}
    lin_ok = all(abs(d) <= 0.30 for d in spread.values())
    ok = exp_ok and lin_ok
    detail = (
        f"exp count(32)/count(16) = {ratio:.3f} ({'ok' if exp_ok else 'out of [3.2, 4.8]'}); "
        "linear count/(n log2 n) = "
        + ", ".join(f"{n}:{v:.2f}({spread[n]:+.0%})" for n, v in c.items())
        + ("" if lin_ok else " exceeds +-30% of the mean")
    )
    report(7, ok, detail)
    assert exp_ok, detail
    assert lin_ok, detail


# -- 8 --------------------------------------------------------------------------------


def test_criterion_8_reference_counts():
    unmerged = [cost(compile_plan(extract_modules(random_povm(2, s)), "exp", merged=False)) for s in range(10)]
    merged = [cost(compile_plan(extract_modules(random_povm(2, s)), "exp")) for s in range(10)]
    max_cx = max(r.cnot_count for r in unmerged)
    max_rot = max(r.rotation_count for r in unmerged)
    opt_cx = sorted({r.cnot_count for r in merged})
    ok_cx, ok_rot, ok_opt = max_cx <= 12, max_rot <= 14, opt_cx == [6]
    ok = ok_cx and ok_rot and ok_opt
    report(
        8,
        ok,
        f"unoptimized module {max_cx} CNOTs (<= 12 {'ok' if ok_cx else 'FAIL'}), "
        f"{max_rot} rotations (<= 14 {'ok' if ok_rot else 'FAIL'}); optimized CNOTs {opt_cx} "
        f"(exactly 6 {'ok' if ok_opt else 'FAIL'})",
    )
    assert ok_cx and ok_opt
    assert ok_rot, f"unoptimized 2-element module uses {max_rot} rotations"


# -- 9 --------------------------------------------------------------------------------


_GATE = re.compile(r"^(x|ry|rz|cx)\b")


def _suite_circuits():
    for plan in (two_element_plan(), trine_plan()):
        for mode in MODES:
            for merged in (True, False):
                yield compile_plan(plan, mode, merged)
    for _, plan in _random_plans(100):
        for mode in MODES:
            yield compile_plan(plan, mode)
    for n in (16, 32, 64):
        for mode in MODES:
            yield compile_plan(extract_modules(random_povm(n, 7)), mode)


def test_criterion_9_qasm_self_consistency():
    mismatches = header_bad = total = 0
    for c in _suite_circuits():
        text = emit_qasm(c)
        total += 1
        if not text.encode().startswith(b'OPENQASM 2.0;\ninclude "qelib1.inc";\n') or not text.startswith(QASM_HEADER):
            header_bad += 1
        tally = {"x": 0, "ry": 0, "rz": 0, "cx": 0}
        for line in text.splitlines():
            m = _GATE.match(line)
            if m:
                tally[m.group(1)] += 1
        r = cost(c)
        kinds = [g.kind for g in c.gates]
        if (
            tally["cx"] != r.cnot_count
            or tally["ry"] + tally["rz"] != r.rotation_count
            or tally["x"] != r.x_count
            or tally["ry"] != kinds.count(RY)
            or tally["rz"] != kinds.count(RZ)
            or tally["cx"] != kinds.count(CNOT)
            or tally["x"] != kinds.count(X)
        ):
            mismatches += 1
    ok = mismatches == 0 and header_bad == 0
    report(9, ok, f"{total} circuits, {mismatches} tally mismatches, {header_bad} bad headers")
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
