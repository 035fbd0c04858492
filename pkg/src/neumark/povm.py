"""POVMs on a single qubit: validation, outcome statistics, random generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IncompletePovm, NotNormalized, TooFewElements, ZeroProbabilityOutcome
from .numerics import NORM_TOL, as_mat2, dagger, max_abs, random_isometry

DEFAULT_TOLERANCE = 1e-9
ZERO_PROBABILITY = 1e-14


@dataclass(frozen=True)
class Qubit1State:
    """Pure single-qubit state ``a|0> + b|1>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"|a|^2 + |b|^2 = {norm!r}")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=np.complex128)

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "Qubit1State":
        v = np.asarray(v, dtype=np.complex128).ravel()
        if v.shape != (2,):
            raise ValueError("a qubit state has exactly two amplitudes")
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(v[0], v[1])

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "Qubit1State":
        return cls(math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Qubit1State":
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        return cls.from_vector(v, normalize=True)


ZERO = Qubit1State(1, 0)
ONE = Qubit1State(0, 1)


@dataclass(frozen=True)
class KrausSet:
    """Validated, ordered measurement operators. Outcome ``i`` is ``operators[i - 1]``."""

    operators: tuple
    residual: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def n(self) -> int:
        return len(self.operators)

    def effects(self) -> list[np.ndarray]:
        return [dagger(m) @ m for m in self.operators]

    def __iter__(self):
        return iter(self.operators)

    def __len__(self):
        return len(self.operators)

    def __getitem__(self, i):
        return self.operators[i]


def completeness_residual(ops) -> float:
    total = sum(dagger(m) @ m for m in ops)
    return max_abs(total - np.eye(2))


def validate(ops, tolerance: float = DEFAULT_TOLERANCE) -> KrausSet:
    """Check the completeness relation and freeze the operators.

    Raises:
        TooFewElements: fewer than two operators.
        IncompletePovm: ``max|sum M^dag M - I| > tolerance``; the exception
            carries the residual.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    mats = [as_mat2(m) for m in ops]
    if len(mats) < 2:
        raise TooFewElements(f"a POVM needs at least 2 elements, got {len(mats)}")
    residual = completeness_residual(mats)
    if residual > tolerance:
        raise IncompletePovm(residual, tolerance)
    for m in mats:
        m.setflags(write=False)
    return KrausSet(tuple(mats), residual, tolerance)


def outcome_probabilities(povm: KrausSet, psi: Qubit1State) -> list[float]:
    v = psi.vector
    return [float(np.vdot(v, e @ v).real) for e in povm.effects()]


def post_measurement_state(povm: KrausSet, i: int, psi: Qubit1State) -> tuple[Qubit1State, float]:
    """State after observing outcome ``i`` (1-based) and its probability."""
    if not 1 <= i <= povm.n:
        raise IndexError(f"outcome {i} out of range 1..{povm.n}")
    out = povm[i - 1] @ psi.vector
    p = float(np.vdot(out, out).real)
    if p <= ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(f"outcome {i} has probability {p:.3e}")
    return Qubit1State.from_vector(out / math.sqrt(p)), p


def random_povm(n: int, seed: int) -> KrausSet:
    """Random ``n``-element POVM sliced out of a Haar-random ``2n x 2`` isometry."""
    if n < 2:
        raise TooFewElements("n must be at least 2")
    w = random_isometry(2 * n, 2, seed)
    return validate([w[2 * k : 2 * k + 2, :] for k in range(n)])


def projective_z() -> KrausSet:
    return validate([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


# -- JSON codec ---------------------------------------------------------------


def encode_mat2(m) -> list:
    m = as_mat2(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_mat2(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape != (2, 2, 2):
        raise ValueError(f"a 2x2 complex matrix must have shape (2, 2, 2), got {arr.shape}")
    return as_mat2(arr[..., 0] + 1j * arr[..., 1])


def povm_to_json(ops) -> dict:
    return {"operators": [encode_mat2(m) for m in ops]}


def decode_operators(doc) -> list[np.ndarray]:
    """Operators of a ``{"operators": [...]}`` document, without validation."""
    if not isinstance(doc, dict) or not isinstance(doc.get("operators"), list):
        raise ValueError('POVM document must be an object with an "operators" list')
    return [decode_mat2(m) for m in doc["operators"]]


def povm_from_json(doc: dict, tolerance: float = DEFAULT_TOLERANCE) -> KrausSet:
    """Parse ``{"operators": [...]}`` and validate it.

    Raises ``ValueError`` for malformed documents and
    ``IncompletePovm``/``TooFewElements`` for well-formed but invalid ones.
    """
    return validate(decode_operators(doc), tolerance)
