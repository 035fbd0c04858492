"""Decomposition of multi-controlled operations into {X, Ry, Rz, CNOT}.

Controls are given as ``(qubit, polarity)`` pairs; a polarity-0 control fires
on ``|0>`` and is realized by conjugating that qubit with X. Every function
returns a :class:`~neumark.circuit.Lowered` pair, the gate list plus the
global phase that the gates leave behind, so the result is exact rather than
exact up to phase.

Exponential mode uses the angle-halving recursion

    CR(t; q1..qm) = CNOT(q1) CR(-t/2; q2..qm) CNOT(q1) CR(t/2; q2..qm)

which costs ``2**(m+1) - 2`` CNOTs and ``2**m`` rotations. Linear mode ANDs
the ``m`` controls into a work ancilla with ``m - 1`` 6-CNOT Toffolis, applies
the singly-controlled operation from there and uncomputes the ladder. The one
exception is multi-controlled X, whose last Toffoli writes straight into the
target so it needs only ``m - 2`` work ancillas.
"""

from __future__ import annotations

import math

from .circuit import CNOT, RY, RZ, X, Gate, LoweringMode, Lowered
from .errors import InsufficientAncillas
from .numerics import zyz_decompose

_ZERO_ANGLE = 1e-14


class _Emitter:
    def __init__(self):
        self.gates: list[Gate] = []
        self.phase = 0.0

    def x(self, q):
        self.gates.append(Gate(X, (q,)))

    def cx(self, c, t):
        self.gates.append(Gate(CNOT, (c, t)))

    def rot(self, axis, q, angle):
        self.gates.append(Gate(RY if axis == "y" else RZ, (q,), angle))

    def rot_nonzero(self, axis, q, angle):
        if abs(angle) > _ZERO_ANGLE:
            self.rot(axis, q, angle)

    def h(self, q):
        # H = i * Ry(pi/2) Rz(pi)
        self.rot("z", q, math.pi)
        self.rot("y", q, math.pi / 2)
        self.phase += math.pi / 2

    def t(self, q, sign=1):
        # T = exp(i pi/8) Rz(pi/4)
        self.rot("z", q, sign * math.pi / 4)
        self.phase += sign * math.pi / 8

    def toffoli(self, c1, c2, tgt):
        self.h(tgt)
        self.cx(c2, tgt)
        self.t(tgt, -1)
        self.cx(c1, tgt)
        self.t(tgt)
        self.cx(c2, tgt)
        self.t(tgt, -1)
        self.cx(c1, tgt)
        self.t(c2)
        self.t(tgt)
        self.h(tgt)
        self.cx(c1, c2)
        self.t(c1)
        self.t(c2, -1)
        self.cx(c1, c2)

    def result(self) -> Lowered:
        return Lowered(self.gates, self.phase)


def _check(controls, target, work=()):
    qubits = [q for q, _ in controls]
    for _, pol in controls:
        if pol not in (0, 1):
            raise ValueError(f"control polarity must be 0 or 1, got {pol!r}")
    if len(set(qubits)) != len(qubits):
        raise ValueError("duplicate control qubits")
    if target is not None and target in qubits:
        raise ValueError("target is also a control")
    overlap = set(work) & (set(qubits) | {target})
    if overlap:
        raise ValueError(f"work ancillas {sorted(overlap)} overlap controls/target")
    return qubits


def _flip_zero_controls(em, controls):
    for q, pol in controls:
        if pol == 0:
            em.x(q)


def _need_work(work, count):
    if len(work) < count:
        raise InsufficientAncillas(f"need {count} work ancillas, have {len(work)}")


def _ladder(em, ctrls, work):
    """AND ``ctrls`` (at least two) into ``work[len(ctrls) - 2]``."""
    em.toffoli(ctrls[0], ctrls[1], work[0])
    for j in range(2, len(ctrls)):
        em.toffoli(work[j - 2], ctrls[j], work[j - 1])
    return work[len(ctrls) - 2]


def _unladder(em, ctrls, work):
    for j in range(len(ctrls) - 1, 1, -1):
        em.toffoli(work[j - 2], ctrls[j], work[j - 1])
    em.toffoli(ctrls[0], ctrls[1], work[0])


def _exp_rot(em, axis, theta, ctrls, target):
    if not ctrls:
        em.rot(axis, target, theta)
        return
    first, rest = ctrls[0], ctrls[1:]
    _exp_rot(em, axis, theta / 2, rest, target)
    em.cx(first, target)
    _exp_rot(em, axis, -theta / 2, rest, target)
    em.cx(first, target)


def _exp_phase(em, phi, ctrls):
    # diag(1, e^{i phi}) on the last control == e^{i phi/2} Rz(phi)
    if not ctrls:
        em.phase += phi
        return
    _exp_rot(em, "z", phi, ctrls[:-1], ctrls[-1])
    _exp_phase(em, phi / 2, ctrls[:-1])


def _rot(em, axis, theta, ctrls, target, mode, work):
    if mode is LoweringMode.EXPONENTIAL or len(ctrls) <= 1:
        _exp_rot(em, axis, theta, ctrls, target)
        return
    _need_work(work, len(ctrls) - 1)
    w = _ladder(em, ctrls, work)
    _exp_rot(em, axis, theta, [w], target)
    _unladder(em, ctrls, work)


def _phase(em, phi, ctrls, mode, work):
    if mode is LoweringMode.EXPONENTIAL or len(ctrls) <= 1:
        _exp_phase(em, phi, ctrls)
        return
    _need_work(work, len(ctrls) - 1)
    w = _ladder(em, ctrls, work)
    _exp_phase(em, phi, [w])
    _unladder(em, ctrls, work)


def _mcx(em, ctrls, target, mode, work):
    m = len(ctrls)
    if m == 0:
        em.x(target)
    elif m == 1:
        em.cx(ctrls[0], target)
    elif m == 2:
        em.toffoli(ctrls[0], ctrls[1], target)
    elif mode is LoweringMode.EXPONENTIAL:
        # X = H Z H and Z = i Rz(pi)
        em.h(target)
        _exp_rot(em, "z", math.pi, ctrls, target)
        _exp_phase(em, math.pi / 2, ctrls)
        em.h(target)
    else:
        _need_work(work, m - 2)
        w = _ladder(em, ctrls[:-1], work)
        em.toffoli(w, ctrls[-1], target)
        _unladder(em, ctrls[:-1], work)


def _abc(em, angles, control, target):
    """Singly-controlled unitary with two CNOTs: ``u = e^{i delta} A X B X C``, ``ABC = I``."""
    alpha, beta, gamma, delta = angles
    if max(abs(alpha), abs(beta), abs(gamma)) > _ZERO_ANGLE:
        em.rot_nonzero("z", target, 0.5 * (gamma - alpha))
        em.cx(control, target)
        em.rot_nonzero("z", target, -0.5 * (gamma + alpha))
        em.rot_nonzero("y", target, -0.5 * beta)
        em.cx(control, target)
        em.rot_nonzero("y", target, 0.5 * beta)
        em.rot_nonzero("z", target, alpha)
    if abs(delta) > _ZERO_ANGLE:
        em.rot("z", control, delta)
        em.phase += 0.5 * delta


def toffoli(c1: int, c2: int, target: int) -> Lowered:
    """Standard 6-CNOT Toffoli; H and T are rewritten as Ry/Rz plus phase."""
    em = _Emitter()
    em.toffoli(c1, c2, target)
    return em.result()


def lower_mc_rotation(axis, theta, controls, target, mode=LoweringMode.EXPONENTIAL, work=()) -> Lowered:
    """Rotation ``R_axis(theta)`` on ``target`` conditioned on all ``controls``.

    Raises:
        InsufficientAncillas: linear mode with fewer than ``m - 1`` work qubits.
    """
    if axis not in ("y", "z"):
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")
    mode = LoweringMode(mode)
    ctrls = _check(controls, target, work)
    em = _Emitter()
    _flip_zero_controls(em, controls)
    _rot(em, axis, theta, ctrls, target, mode, list(work))
    _flip_zero_controls(em, controls)
    return em.result()


def lower_mcx(controls, target, mode=LoweringMode.EXPONENTIAL, work=()) -> Lowered:
    mode = LoweringMode(mode)
    ctrls = _check(controls, target, work)
    em = _Emitter()
    _flip_zero_controls(em, controls)
    _mcx(em, ctrls, target, mode, list(work))
    _flip_zero_controls(em, controls)
    return em.result()


def lower_mc_phase(phi, controls, mode=LoweringMode.EXPONENTIAL, work=()) -> Lowered:
    """Multiply the amplitude of every basis state that satisfies ``controls`` by ``e^{i phi}``."""
    mode = LoweringMode(mode)
    ctrls = _check(controls, None, work)
    em = _Emitter()
    _flip_zero_controls(em, controls)
    _phase(em, phi, ctrls, mode, list(work))
    _flip_zero_controls(em, controls)
    return em.result()


def lower_controlled_unitary(u, controls, target, mode=LoweringMode.EXPONENTIAL, work=()) -> Lowered:
    """Apply the 2x2 unitary ``u`` (determinant phase included) on ``target`` when all ``controls`` fire.

    One control uses the two-CNOT ``A X B X C`` form. With more controls,
    exponential mode emits three multi-controlled rotations and a
    multi-controlled phase; linear mode ANDs every control into one work
    ancilla and reuses the two-CNOT form on it.

    Raises:
        NotUnitary: ``u`` is not unitary.
        InsufficientAncillas: linear mode with fewer than ``m - 1`` work qubits.
    """
    mode = LoweringMode(mode)
    angles = zyz_decompose(u)
    alpha, beta, gamma, delta = angles
    ctrls = _check(controls, target, work)
    work = list(work)
    em = _Emitter()
    if not ctrls:
        em.rot_nonzero("z", target, gamma)
        em.rot_nonzero("y", target, beta)
        em.rot_nonzero("z", target, alpha)
        em.phase += delta
        return em.result()
    if max(abs(alpha), abs(beta), abs(gamma), abs(delta)) <= _ZERO_ANGLE:
        return em.result()

    _flip_zero_controls(em, controls)
    if len(ctrls) == 1:
        _abc(em, angles, ctrls[0], target)
    elif mode is LoweringMode.LINEAR:
        _need_work(work, len(ctrls) - 1)
        w = _ladder(em, ctrls, work)
        _abc(em, angles, w, target)
        _unladder(em, ctrls, work)
    else:
        for axis, theta in (("z", gamma), ("y", beta), ("z", alpha)):
            if abs(theta) > _ZERO_ANGLE:
                _exp_rot(em, axis, theta, ctrls, target)
        if abs(delta) > _ZERO_ANGLE:
            _exp_phase(em, delta, ctrls)
    _flip_zero_controls(em, controls)
    return em.result()
