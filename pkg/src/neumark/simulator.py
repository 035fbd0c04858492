"""Dense statevector execution of compiled circuits.

Basis index bit ``k`` is qubit ``k``: the target is the least significant bit,
the ancilla register follows (its least significant bit on qubit 1) and any
work ancillas sit above it. Gates are applied in place on a ``(2,) * q`` view
of the amplitude array, so each gate only reads and writes the amplitude
pairs that differ on its own qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .circuit import CNOT, X, Circuit
from .errors import DimensionMismatch, LayoutMismatch, TooManyQubits, ZeroProbabilityOutcome
from .numerics import fidelity
from .povm import ZERO_PROBABILITY, KrausSet, Qubit1State, outcome_probabilities, post_measurement_state
from .synthesis import SynthesisPlan, ancilla_count, dilation_isometry

SIM_QUBIT_CAP = 24


@dataclass
class Statevector:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        if self.amplitudes.shape != (2**self.qubit_count,):
            raise DimensionMismatch(
                f"{self.amplitudes.size} amplitudes for {self.qubit_count} qubits"
            )

    @classmethod
    def product(cls, psi0: Qubit1State, qubit_count: int) -> "Statevector":
        """``|psi0> (x) |0...0>``."""
        if qubit_count > SIM_QUBIT_CAP:
            raise TooManyQubits(f"{qubit_count} qubits exceeds the simulator cap of {SIM_QUBIT_CAP}")
        amps = np.zeros(2**qubit_count, dtype=np.complex128)
        amps[0], amps[1] = psi0.a, psi0.b
        return cls(amps, qubit_count)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def apply(self, gate) -> None:
        q = self.qubit_count
        view = self.amplitudes.reshape((2,) * q)

        def sl(qubit, bit, base=()):
            # index tuple selecting one value of ``qubit`` on the reshaped view
            idx = list(base) if base else [slice(None)] * q
            idx[q - 1 - qubit] = bit
            return idx

        if gate.kind == CNOT:
            ctl, tgt = gate.qubits
            on = sl(ctl, 1)
            i0, i1 = tuple(sl(tgt, 0, on)), tuple(sl(tgt, 1, on))
            tmp = view[i0].copy()
            view[i0] = view[i1]
            view[i1] = tmp
            return
        (k,) = gate.qubits
        i0, i1 = tuple(sl(k, 0)), tuple(sl(k, 1))
        if gate.kind == X:
            tmp = view[i0].copy()
            view[i0] = view[i1]
            view[i1] = tmp
            return
        m = gate.matrix()
        a0 = view[i0].copy()
        a1 = view[i1]
        view[i0] = m[0, 0] * a0 + m[0, 1] * a1
        view[i1] = m[1, 0] * a0 + m[1, 1] * a1


def steps(c: Circuit, psi0: Qubit1State) -> Iterator[Statevector]:
    """Yield the state after every gate (the same object, mutated in place).

    The circuit's global phase is not applied here.
    """
    s = Statevector.product(psi0, c.num_qubits)
    for g in c.gates:
        s.apply(g)
        yield s


def run(c: Circuit, psi0: Qubit1State) -> Statevector:
    """Evolve ``|psi0>|0...0>`` through ``c`` and apply its global phase once.

    Raises:
        TooManyQubits: the circuit has more than 24 qubits.
    """
    s = Statevector.product(psi0, c.num_qubits)
    for g in c.gates:
        s.apply(g)
    if c.global_phase:
        s.amplitudes *= np.exp(1j * c.global_phase)
    return s


# -- outcome statistics ---------------------------------------------------------


class AncillaDistribution(NamedTuple):
    probabilities: list
    leakage: float


def _register_bits(s: Statevector, plan: SynthesisPlan) -> int:
    a = ancilla_count(plan.n)
    # exponential layout: target + register; linear adds a - 1 work qubits
    if s.qubit_count not in (1 + a, 2 * a):
        raise LayoutMismatch(
            f"{s.qubit_count} qubits does not fit a {plan.n}-outcome layout "
            f"({1 + a} or {2 * a} qubits)"
        )
    return a


def _by_register(s: Statevector, a: int) -> np.ndarray:
    # axes after reshape: (work..., register, target)
    return s.amplitudes.reshape(-1, 2**a, 2)


def ancilla_distribution(s: Statevector, plan: SynthesisPlan) -> AncillaDistribution:
    """Probability of each register value ``0..n-1``, summed over target and work qubits.

    Mass on register values ``n..2**A - 1`` is returned as ``leakage``.
    """
    a = _register_bits(s, plan)
    mass = np.sum(np.abs(_by_register(s, a)) ** 2, axis=(0, 2))
    return AncillaDistribution([float(p) for p in mass[: plan.n]], float(np.sum(mass[plan.n :])))


def work_leakage(s: Statevector, plan: SynthesisPlan) -> float:
    """Probability that any work ancilla is left in ``|1>``."""
    a = _register_bits(s, plan)
    blocks = _by_register(s, a)
    return float(np.sum(np.abs(blocks[1:]) ** 2))


def conditional_target_state(s: Statevector, outcome: int, plan: SynthesisPlan) -> tuple[Qubit1State, float]:
    """Target state given register value ``outcome - 1`` (work ancillas at ``|0>``), with its probability.

    Raises:
        ZeroProbabilityOutcome: the branch has probability at most 1e-14.
    """
    a = _register_bits(s, plan)
    if not 1 <= outcome <= plan.n:
        raise IndexError(f"outcome {outcome} out of range 1..{plan.n}")
    branch = _by_register(s, a)[0, outcome - 1]
    p = float(np.vdot(branch, branch).real)
    if p <= ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(f"outcome {outcome} has probability {p:.3e}")
    return Qubit1State.from_vector(branch / math.sqrt(p)), p


# -- comparison against the analytic output ----------------------------------------


@dataclass(frozen=True)
class Branch:
    outcome: int
    probability: float
    expected_probability: float
    state: Qubit1State | None
    fidelity: float | None

    def as_dict(self) -> dict:
        st = None
        if self.state is not None:
            st = [[self.state.a.real, self.state.a.imag], [self.state.b.real, self.state.b.imag]]
        return {
            "outcome": self.outcome,
            "probability": self.probability,
            "expected_probability": self.expected_probability,
            "state": st,
            "fidelity": self.fidelity,
        }


@dataclass(frozen=True)
class BranchReport:
    branches: tuple
    global_phase: float
    max_amplitude_error: float
    leakage: float

    @property
    def min_fidelity(self) -> float:
        fids = [b.fidelity for b in self.branches if b.fidelity is not None]
        return min(fids, default=1.0)

    @property
    def max_probability_error(self) -> float:
        return max(abs(b.probability - b.expected_probability) for b in self.branches)

    def as_dict(self) -> dict:
        return {
            "branches": [b.as_dict() for b in self.branches],
            "global_phase": self.global_phase,
            "max_amplitude_error": self.max_amplitude_error,
            "max_probability_error": self.max_probability_error,
            "min_fidelity": self.min_fidelity,
            "leakage": self.leakage,
        }


def expected_statevector(povm: KrausSet, psi0: Qubit1State, qubit_count: int) -> np.ndarray:
    """``dilation_isometry`` padded with zeros for unused labels and work ancillas."""
    iso = dilation_isometry(povm, psi0)
    if iso.size > 2**qubit_count:
        raise DimensionMismatch(f"{povm.n} outcomes do not fit in {qubit_count} qubits")
    out = np.zeros(2**qubit_count, dtype=np.complex128)
    out[: iso.size] = iso
    return out


def align_phase(actual: np.ndarray, expected: np.ndarray) -> tuple[float, float]:
    """Global phase ``phi`` that best matches ``actual`` to ``e^{i phi} expected`` and the residual max error.

    The phase is read off the largest-magnitude expected amplitude.
    """
    k = int(np.argmax(np.abs(expected)))
    if abs(expected[k]) == 0.0 or abs(actual[k]) == 0.0:
        phi = 0.0
    else:
        phi = float(np.angle(actual[k] / expected[k]))
    err = float(np.max(np.abs(actual - np.exp(1j * phi) * expected)))
    return phi, err


def compare_to_analytic(s: Statevector, povm: KrausSet, psi0: Qubit1State) -> BranchReport:
    """Check a simulated state against ``sum_i (M_i|psi0>)|i-1>``.

    Per outcome the report holds the simulated probability, the analytic one
    and the phase-insensitive fidelity of the conditional target state. Branches
    that are empty in both are reported with ``fidelity=None``.
    """
    plan_like = _Shape(povm.n)
    expected = expected_statevector(povm, psi0, s.qubit_count)
    phi, err = align_phase(s.amplitudes, expected)
    probs, leakage = ancilla_distribution(s, plan_like)
    want = outcome_probabilities(povm, psi0)
    branches = []
    for i in range(1, povm.n + 1):
        state = fid = None
        try:
            state, _ = conditional_target_state(s, i, plan_like)
        except ZeroProbabilityOutcome:
            pass
        if want[i - 1] > ZERO_PROBABILITY:
            ideal, _ = post_measurement_state(povm, i, psi0)
            fid = fidelity(state.vector, ideal.vector) if state is not None else 0.0
        branches.append(Branch(i, probs[i - 1], want[i - 1], state, fid))
    return BranchReport(tuple(branches), phi, err, leakage)


class _Shape(NamedTuple):
    # the statistics helpers only need the outcome count
    n: int
