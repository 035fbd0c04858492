"""Modular Neumark parameterization of single-qubit POVMs.

An ``n``-element POVM is produced by ``n - 1`` two-outcome modules. Module
``i`` splits the branch it receives with the diagonal pair

    D1 = diag(cos t1, cos t2),   D2 = diag(sin t1, sin t2)

and rotates each half with its own unitary, so that

    M_1 = V1(1) D1(1) U
    M_i = V1(i) D1(i) [V2(i-1) D2(i-1) ... V2(1) D2(1)] U     (1 < i < n)
    M_n = [V2(n-1) D2(n-1) ... V2(1) D2(1)] U

:func:`reconstruct_kraus` evaluates this forward map and
:func:`extract_modules` inverts it by a chain of 2x2 SVDs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotContraction
from .numerics import UNITARY_TOL, Svd2Result, as_mat2, svd2, unitarity_error
from .povm import DEFAULT_TOLERANCE, KrausSet, Qubit1State, decode_mat2, encode_mat2, validate

PINV_THRESHOLD = 1e-12
CONTRACTION_SLACK = 1e-9


def ancilla_count(n: int) -> int:
    """Qubits needed to hold ``n`` outcome labels, ``ceil(log2 n)``."""
    return max(1, (n - 1).bit_length())


def outcome_labels(n: int) -> list[int]:
    """Ancilla-register value of each outcome: outcome ``i`` maps to ``i - 1``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return list(range(n))


@dataclass(frozen=True)
class ModuleParams:
    index: int
    theta1: float
    theta2: float
    v1: np.ndarray
    v2: np.ndarray
    outcome1_label: int
    outcome2_label: int

    def __post_init__(self):
        for name in ("v1", "v2"):
            m = as_mat2(getattr(self, name))
            if unitarity_error(m) > UNITARY_TOL:
                raise ValueError(f"module {self.index}: {name} is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        for t in (self.theta1, self.theta2):
            if not -1e-12 <= t <= math.pi / 2 + 1e-12:
                raise ValueError(f"module {self.index}: angle {t} outside [0, pi/2]")

    @property
    def d1(self) -> np.ndarray:
        return np.diag([math.cos(self.theta1), math.cos(self.theta2)]).astype(np.complex128)

    @property
    def d2(self) -> np.ndarray:
        return np.diag([math.sin(self.theta1), math.sin(self.theta2)]).astype(np.complex128)


@dataclass(frozen=True)
class SynthesisPlan:
    n: int
    u: np.ndarray
    modules: tuple

    def __post_init__(self):
        u = as_mat2(self.u)
        if unitarity_error(u) > UNITARY_TOL:
            raise ValueError("initial unitary is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "modules", tuple(self.modules))
        if len(self.modules) != self.n - 1:
            raise ValueError(f"{self.n}-element plan needs {self.n - 1} modules")
        for i, mod in enumerate(self.modules, start=1):
            if (mod.index, mod.outcome1_label, mod.outcome2_label) != (i, i - 1, i):
                raise ValueError(f"module {i} has inconsistent index or labels")

    @property
    def ancilla_count(self) -> int:
        return ancilla_count(self.n)


def make_plan(u, params) -> SynthesisPlan:
    """Build a plan from ``u`` and a sequence of ``(theta1, theta2, v1, v2)``."""
    modules = [
        ModuleParams(i, t1, t2, v1, v2, i - 1, i)
        for i, (t1, t2, v1, v2) in enumerate(params, start=1)
    ]
    return SynthesisPlan(len(modules) + 1, u, modules)


def _pinv(m: np.ndarray) -> np.ndarray:
    left, s, right = svd2(m)
    inv = [1.0 / x if x > PINV_THRESHOLD else 0.0 for x in s]
    return right.conj().T @ np.diag(inv) @ left.conj().T


def _angles(split: Svd2Result, rest: np.ndarray, what: str) -> tuple[float, float]:
    """Module angles for ``B = V diag(c) V'`` given the stacked later operators ``rest``.

    ``cos`` comes from the singular values of ``B``; ``sin`` is read off as
    the norm of ``rest`` along each right singular vector. ``arccos`` alone
    loses half the significant digits near ``c = 1``.
    """
    c = split.singulars
    if c[0] > 1.0 + CONTRACTION_SLACK:
        raise NotContraction(f"{what} has singular value {c[0]:.12g} > 1")
    cols = rest @ split.right.conj().T
    out = []
    for k in range(2):
        s = float(np.linalg.norm(cols[:, k]))
        if max(c[k], s) <= PINV_THRESHOLD:
            # direction already exhausted by earlier modules
            out.append(math.pi / 2)
        else:
            out.append(math.atan2(s, c[k]))
    return out[0], out[1]


def extract_modules(povm: KrausSet) -> SynthesisPlan:
    """Recover module parameters from measurement operators.

    The first SVD fixes ``U``, ``V1(1)`` and both angles of module 1. Each later
    operator, with the accumulated residual ``R`` divided out (pseudo-inverse),
    is again a ``V D V'`` product whose right factor is the previous module's
    ``V2``. The last operator divided by ``R`` is a partial isometry whose
    unitary polar factor is ``V2(n-1)``.

    Raises:
        NotContraction: an intermediate factor has a singular value above
            ``1 + 1e-9`` (the operators are not a consistent POVM).
    """
    ops = list(povm.operators)
    n = len(ops)
    resid_inv = np.eye(2, dtype=np.complex128)
    resid = np.eye(2, dtype=np.complex128)
    thetas, v1s, rights = [], [], []
    for i in range(1, n):
        b = svd2(ops[i - 1] @ resid_inv)
        rest = np.vstack(ops[i:]) @ resid_inv
        t = _angles(b, rest, f"M_{i} R^+")
        thetas.append(t)
        v1s.append(b.left)
        rights.append(b.right)
        resid = np.diag([math.sin(x) for x in t]) @ b.right @ resid
        resid_inv = _pinv(resid)
    last = svd2(ops[-1] @ resid_inv)
    if last.singulars[0] > 1.0 + CONTRACTION_SLACK:
        raise NotContraction(f"M_{n} R^+ has singular value {last.singulars[0]:.12g} > 1")
    # the right factor found at module i + 1 is V2 of module i
    u = rights[0]
    v2s = rights[1:] + [last.left @ last.right]
    return make_plan(u, [(t[0], t[1], a, b) for t, a, b in zip(thetas, v1s, v2s)])


def reconstruct_kraus(plan: SynthesisPlan, tolerance: float = DEFAULT_TOLERANCE) -> KrausSet:
    """Evaluate the forward map from module parameters to measurement operators."""
    acc = plan.u
    ops = []
    for mod in plan.modules:
        ops.append(mod.v1 @ mod.d1 @ acc)
        acc = mod.v2 @ mod.d2 @ acc
    ops.append(acc)
    return validate(ops, tolerance)


def dilation_isometry(povm: KrausSet, psi: Qubit1State) -> np.ndarray:
    """``sum_i (M_i|psi>) (x) |i-1>`` with the target as the least significant bit.

    Entry ``t + 2*(i-1)`` holds component ``t`` of ``M_i|psi>``.
    """
    return np.concatenate([m @ psi.vector for m in povm.operators])


# -- JSON codec ---------------------------------------------------------------


def plan_to_json(plan: SynthesisPlan) -> dict:
    return {
        "n": plan.n,
        "u": encode_mat2(plan.u),
        "modules": [
            {
                "theta1": m.theta1,
                "theta2": m.theta2,
                "v1": encode_mat2(m.v1),
                "v2": encode_mat2(m.v2),
                "outcome1": m.outcome1_label,
                "outcome2": m.outcome2_label,
            }
            for m in plan.modules
        ],
    }


def plan_from_json(doc: dict) -> SynthesisPlan:
    modules = [
        ModuleParams(
            i,
            float(m["theta1"]),
            float(m["theta2"]),
            decode_mat2(m["v1"]),
            decode_mat2(m["v2"]),
            int(m["outcome1"]),
            int(m["outcome2"]),
        )
        for i, m in enumerate(doc["modules"], start=1)
    ]
    return SynthesisPlan(int(doc["n"]), decode_mat2(doc["u"]), modules)
