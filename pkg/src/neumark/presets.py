"""Reference POVMs used by the examples, the repro command and the tests."""

import math

import numpy as np

from .povm import KrausSet
from .synthesis import SynthesisPlan, make_plan, reconstruct_kraus

SQRT3 = math.sqrt(3.0)
_I = np.eye(2, dtype=np.complex128)


def two_element_plan() -> SynthesisPlan:
    """Symmetric 2-outcome POVM with ``M_1 = M_2 = U / sqrt(2)``.

    ``U`` is the real rotation taking ``|0>`` to ``(|0> + sqrt(3)|1>) / 2``,
    so both outcomes leave ``|0>`` in that state with probability 1/2.
    """
    u = 0.5 * np.array([[1.0, -SQRT3], [SQRT3, 1.0]])
    return make_plan(u, [(math.pi / 4, math.pi / 4, _I, _I)])


def two_element_povm() -> KrausSet:
    return reconstruct_kraus(two_element_plan())


def trine_plan() -> SynthesisPlan:
    """Trine POVM: projectors onto three Bloch x-z states 120 degrees apart."""
    v2_1 = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2)
    v1_2 = 0.5 * np.array([[1.0, -SQRT3], [SQRT3, 1.0]])
    v2_2 = -0.5 * np.array([[SQRT3, -1.0], [1.0, SQRT3]])
    return make_plan(
        _I,
        [
            (math.acos(math.sqrt(2 / 3)), math.pi / 2, _I, v2_1),
            (0.0, math.pi / 2, v1_2, v2_2),
        ],
    )


def trine_povm() -> KrausSet:
    """Operators ``+-sqrt(2/3)|phi_k><phi_k|``; the third carries a sign of -1."""
    return reconstruct_kraus(trine_plan())


def trine_projector_povm() -> list[np.ndarray]:
    """The trine written directly as ``sqrt(2/3)`` times rank-one projectors (unvalidated)."""
    states = [np.array([1.0, 0.0]), np.array([1.0, SQRT3]) / 2, np.array([1.0, -SQRT3]) / 2]
    return [math.sqrt(2 / 3) * np.outer(s, s) for s in states]
