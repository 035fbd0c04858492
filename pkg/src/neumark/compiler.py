"""Lower a :class:`~neumark.synthesis.SynthesisPlan` to a gate-level circuit.

Qubit 0 is the target, qubits ``1..A`` hold the ancilla register (qubit 1 is
its least significant bit) and, in linear mode, ``A - 1`` work ancillas
follow. Outcome ``k`` ends up entangled with register value ``k - 1``.

Module ``i`` receives the unfinished branch on register value ``i - 1`` and:

1. (module 1 only) applies ``U`` to the target;
2. splits that branch with a y-rotation pair on register bit ``b``, the
   lowest clear bit of ``i - 1``, so the second half lands on
   ``(i - 1) | 2**b``;
3. moves the second half down to value ``i`` by clearing bits ``0..b-1``
   with multi-controlled X gates;
4. applies ``V1`` on value ``i - 1`` and ``V2`` on value ``i``.
"""

from __future__ import annotations

from .circuit import Circuit, Layout, LoweringMode, Lowered, Marker
from .lowering import lower_controlled_unitary, lower_mc_rotation, lower_mcx
from .numerics import wrap_angle
from .synthesis import SynthesisPlan

STEPS = ("u", "rotate", "relabel", "unitaries")
_ZERO_ANGLE = 1e-14


def _bit(value: int, j: int) -> int:
    return (value >> j) & 1


def _lowest_clear_bit(value: int) -> int:
    return (~value & (value + 1)).bit_length() - 1


class _Builder:
    def __init__(self):
        self.gates = []
        self.phase = 0.0
        self.markers = []

    def mark(self, module, step):
        self.markers.append(Marker(module, step, len(self.gates), self.phase))

    def add(self, lowered: Lowered):
        self.gates.extend(lowered.gates)
        self.phase += lowered.phase


def _label_controls(anc, label, width, skip=None):
    return [(anc[j], _bit(label, j)) for j in range(width) if j != skip]


def compile_plan(plan: SynthesisPlan, mode=LoweringMode.EXPONENTIAL, merged: bool = True) -> Circuit:
    """Build the circuit whose action on ``|psi>|0...0>`` is ``sum_k (M_k|psi>)|k-1>|0...0>``.

    ``merged`` selects the two-CNOT form of the rotation pair
    (``CNOT . Ry(t1 - t2) . CNOT . Ry(t1 + t2)`` on the split bit, the extra
    register controls applied to the rotations only); with ``merged=False``
    each rotation is lowered separately with the target as an extra control.
    """
    mode = LoweringMode(mode)
    n_anc = plan.ancilla_count
    layout = Layout.for_povm(n_anc, n_anc - 1 if mode is LoweringMode.LINEAR else 0)
    anc, work, tq = layout.ancillas, layout.work, layout.target
    b = _Builder()

    for mod in plan.modules:
        i = mod.index
        if i == 1:
            b.mark(1, "u")
            b.add(lower_controlled_unitary(plan.u, [], tq, mode, work))

        b.mark(i, "rotate")
        o1 = i - 1
        split = _lowest_clear_bit(o1)
        o2 = o1 | (1 << split)
        ctrls = _label_controls(anc, o1, o1.bit_length(), skip=split)
        a = anc[split]
        t1, t2 = 2 * mod.theta1, 2 * mod.theta2
        if merged:
            half_diff = 0.5 * (t1 - t2)
            if abs(half_diff) > _ZERO_ANGLE:
                b.add(_cx(tq, a))
                b.add(lower_mc_rotation("y", half_diff, ctrls, a, mode, work))
                b.add(_cx(tq, a))
            pairs = [(0.5 * (t1 + t2), ctrls)]
        else:
            pairs = [(t1, ctrls + [(tq, 0)]), (t2, ctrls + [(tq, 1)])]
        for angle, cs in pairs:
            if abs(angle) > _ZERO_ANGLE:
                b.add(lower_mc_rotation("y", angle, cs, a, mode, work))

        b.mark(i, "relabel")
        x, width = o2, o2.bit_length()
        for k in range(split):
            b.add(lower_mcx(_label_controls(anc, x, width, skip=k), anc[k], mode, work))
            x ^= 1 << k
        assert x == i, (x, i)

        b.mark(i, "unitaries")
        width = i.bit_length()
        b.add(lower_controlled_unitary(mod.v1, _label_controls(anc, i - 1, width), tq, mode, work))
        b.add(lower_controlled_unitary(mod.v2, _label_controls(anc, i, width), tq, mode, work))

    b.mark(0, "end")
    return Circuit(layout, b.gates, wrap_angle(b.phase), mode, b.markers)


def _cx(c, t) -> Lowered:
    return lower_mcx([(c, 1)], t)
