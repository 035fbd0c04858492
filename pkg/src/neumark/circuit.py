"""Gate-level circuit representation over {X, Ry, Rz, CNOT} with a tracked global phase."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import TooManyQubits
from .numerics import ry, rz

X, RY, RZ, CNOT = "X", "RY", "RZ", "CNOT"
ROTATIONS = (RY, RZ)
UNITARY_QUBIT_CAP = 12


class LoweringMode(str, enum.Enum):
    """How multi-controlled operations are decomposed.

    ``EXPONENTIAL`` recursively halves the rotation angle and needs no extra
    qubits; ``LINEAR`` accumulates the control conjunction into work ancillas
    with a Toffoli ladder.
    """

    EXPONENTIAL = "exp"
    LINEAR = "linear"


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == CNOT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"CNOT needs distinct control and target, got {self.qubits}")
        elif self.kind in (X, RY, RZ):
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on exactly one qubit")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError("rotation angle must be finite")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def matrix(self) -> np.ndarray:
        """Local matrix; for CNOT the basis order is |control target> with control as high bit."""
        if self.kind == X:
            return np.array([[0, 1], [1, 0]], dtype=np.complex128)
        if self.kind == RY:
            return ry(self.angle)
        if self.kind == RZ:
            return rz(self.angle)
        m = np.eye(4, dtype=np.complex128)
        m[2:, 2:] = [[0, 1], [1, 0]]
        return m


class Lowered(NamedTuple):
    """Gate sequence plus the global phase it contributes."""

    gates: list
    phase: float = 0.0


class Marker(NamedTuple):
    """Start of a construction step: ``gates[index:]`` begins step ``step`` of ``module``."""

    module: int
    step: str
    index: int
    phase: float


@dataclass(frozen=True)
class Layout:
    target: int
    ancillas: tuple
    work: tuple

    @property
    def num_qubits(self) -> int:
        return 1 + len(self.ancillas) + len(self.work)

    @classmethod
    def for_povm(cls, n_ancillas: int, n_work: int) -> "Layout":
        anc = tuple(range(1, 1 + n_ancillas))
        work = tuple(range(1 + n_ancillas, 1 + n_ancillas + n_work))
        return cls(0, anc, work)


@dataclass(frozen=True)
class Circuit:
    layout: Layout
    gates: tuple = ()
    global_phase: float = 0.0
    mode: LoweringMode = LoweringMode.EXPONENTIAL
    markers: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "markers", tuple(self.markers))
        q = self.num_qubits
        for g in self.gates:
            if any(not 0 <= k < q for k in g.qubits):
                raise ValueError(f"gate {g} addresses a qubit outside 0..{q - 1}")

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def prefix(self, marker: Marker) -> "Circuit":
        """Circuit truncated just before ``marker``, carrying the phase accumulated so far."""
        return Circuit(self.layout, self.gates[: marker.index], marker.phase, self.mode)

    def marker(self, module: int, step: str) -> Marker:
        for m in self.markers:
            if m.module == module and m.step == step:
                return m
        raise KeyError((module, step))


# -- cost model ---------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    cnot_count: int
    rotation_count: int
    x_count: int
    total_depth: int
    cnot_depth: int
    per_qubit_gate_count: tuple
    per_qubit_cnot_count: tuple
    per_module_cnots: tuple

    def as_dict(self) -> dict:
        return {
            "cnot_count": self.cnot_count,
            "rotation_count": self.rotation_count,
            "x_count": self.x_count,
            "total_depth": self.total_depth,
            "cnot_depth": self.cnot_depth,
            "per_qubit_gate_count": list(self.per_qubit_gate_count),
            "per_qubit_cnot_count": list(self.per_qubit_cnot_count),
            "per_module_cnots": list(self.per_module_cnots),
        }


def _depth(gates, q: int, only=None) -> int:
    level = [0] * q
    for g in gates:
        if only is not None and g.kind not in only:
            continue
        d = max(level[k] for k in g.qubits) + 1
        for k in g.qubits:
            level[k] = d
    return max(level, default=0)


def cost(c: Circuit) -> CostReport:
    """Gate tallies and ASAP-scheduled depths.

    ``total_depth`` counts every gate; ``cnot_depth`` counts only CNOT layers.
    Per-module CNOT counts are taken between consecutive module markers.
    """
    q = c.num_qubits
    kinds = [g.kind for g in c.gates]
    per_qubit = [0] * q
    per_qubit_cx = [0] * q
    for g in c.gates:
        for k in g.qubits:
            per_qubit[k] += 1
            if g.kind == CNOT:
                per_qubit_cx[k] += 1

    starts = {}
    for m in c.markers:
        if m.module > 0:
            starts.setdefault(m.module, m.index)
    bounds = sorted(starts.items())
    per_module = []
    for j, (_, start) in enumerate(bounds):
        stop = bounds[j + 1][1] if j + 1 < len(bounds) else len(c.gates)
        per_module.append(sum(1 for g in c.gates[start:stop] if g.kind == CNOT))

    return CostReport(
        cnot_count=kinds.count(CNOT),
        rotation_count=kinds.count(RY) + kinds.count(RZ),
        x_count=kinds.count(X),
        total_depth=_depth(c.gates, q),
        cnot_depth=_depth(c.gates, q, only=(CNOT,)),
        per_qubit_gate_count=tuple(per_qubit),
        per_qubit_cnot_count=tuple(per_qubit_cx),
        per_module_cnots=tuple(per_module),
    )


# -- dense unitary oracle -------------------------------------------------------


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of the whole circuit, including its global phase.

    Works on the unitary reshaped as a rank-(q+1) tensor and contracts each
    gate matrix into the relevant axes; this is deliberately a different code
    path from the simulator's in-place amplitude-pair updates.
    """
    q = c.num_qubits
    if q > UNITARY_QUBIT_CAP:
        raise TooManyQubits(f"{q} qubits exceeds the dense-unitary cap of {UNITARY_QUBIT_CAP}")
    dim = 2**q
    t = np.eye(dim, dtype=np.complex128).reshape((2,) * q + (dim,))

    def axis(k):
        return q - 1 - k

    for g in c.gates:
        if g.kind == CNOT:
            ctl, tgt = g.qubits
            m = g.matrix().reshape(2, 2, 2, 2)
            axes = [axis(ctl), axis(tgt)]
            t = np.tensordot(m, t, axes=([2, 3], axes))
            t = np.moveaxis(t, [0, 1], axes)
        else:
            ax = axis(g.qubits[0])
            t = np.tensordot(g.matrix(), t, axes=([1], [ax]))
            t = np.moveaxis(t, 0, ax)
    return np.exp(1j * c.global_phase) * t.reshape(dim, dim)


# -- OpenQASM 2.0 -------------------------------------------------------------

QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
_QASM_NAMES = {X: "x", RY: "ry", RZ: "rz", CNOT: "cx"}


def emit_qasm(c: Circuit) -> str:
    lines = [QASM_HEADER.rstrip("\n"), f"qreg q[{c.num_qubits}];"]
    if c.global_phase != 0.0:
        lines.append(f"// global_phase {c.global_phase:.17g}")
    for g in c.gates:
        name = _QASM_NAMES[g.kind]
        args = ",".join(f"q[{k}]" for k in g.qubits)
        if g.kind in ROTATIONS:
            lines.append(f"{name}({g.angle:.17g}) {args};")
        else:
            lines.append(f"{name} {args};")
    return "\n".join(lines) + "\n"


_GATE_LINE = re.compile(r"^(x|ry|rz|cx)(?:\(([^)]*)\))?\s+(.+);$")
_QREG_LINE = re.compile(r"^qreg\s+q\[(\d+)\];$")
_PHASE_LINE = re.compile(r"^//\s*global_phase\s+(\S+)$")


def parse_qasm(text: str) -> Circuit:
    """Read back the subset of OpenQASM 2.0 produced by :func:`emit_qasm`.

    The layout comes back as a single target plus anonymous ancillas, and
    construction markers are not preserved.
    """
    if not text.startswith(QASM_HEADER):
        raise ValueError("missing OpenQASM 2.0 header")
    inverse = {v: k for k, v in _QASM_NAMES.items()}
    n_qubits, phase, gates = None, 0.0, []
    for raw in text[len(QASM_HEADER) :].splitlines():
        line = raw.strip()
        if not line:
            continue
        if m := _QREG_LINE.match(line):
            n_qubits = int(m.group(1))
        elif m := _PHASE_LINE.match(line):
            phase = float(m.group(1))
        elif m := _GATE_LINE.match(line):
            name, angle, args = m.groups()
            qubits = [int(a) for a in re.findall(r"q\[(\d+)\]", args)]
            gates.append(Gate(inverse[name], qubits, float(angle) if angle is not None else None))
        else:
            raise ValueError(f"unrecognised QASM line: {line!r}")
    if n_qubits is None:
        raise ValueError("no qreg declaration")
    layout = Layout(0, tuple(range(1, n_qubits)), ())
    return Circuit(layout, gates, phase)


# -- JSON ---------------------------------------------------------------------


def circuit_to_json(c: Circuit) -> dict:
    return {
        "num_qubits": c.num_qubits,
        "layout": {
            "target": c.layout.target,
            "ancillas": list(c.layout.ancillas),
            "work": list(c.layout.work),
        },
        "mode": c.mode.value,
        "global_phase": c.global_phase,
        "gates": [
            {"kind": g.kind, "qubits": list(g.qubits), **({"angle": g.angle} if g.angle is not None else {})}
            for g in c.gates
        ],
        "markers": [m._asdict() for m in c.markers],
    }


def circuit_from_json(doc: dict) -> Circuit:
    lay = doc["layout"]
    layout = Layout(int(lay["target"]), tuple(lay["ancillas"]), tuple(lay["work"]))
    gates = [Gate(g["kind"], g["qubits"], g.get("angle")) for g in doc["gates"]]
    markers = [Marker(**m) for m in doc.get("markers", [])]
    return Circuit(layout, gates, float(doc["global_phase"]), LoweringMode(doc["mode"]), markers)
