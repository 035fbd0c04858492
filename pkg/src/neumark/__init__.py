"""Neumark-dilation circuits for general single-qubit POVMs."""

from .circuit import Circuit, CostReport, Gate, LoweringMode, circuit_unitary, cost, emit_qasm
from .compiler import compile_plan
from .numerics import fidelity, random_unitary, svd2, zyz_decompose
from .povm import KrausSet, Qubit1State, outcome_probabilities, post_measurement_state, random_povm, validate
from .simulator import BranchReport, Statevector, ancilla_distribution, compare_to_analytic, conditional_target_state, run
from .synthesis import SynthesisPlan, dilation_isometry, extract_modules, outcome_labels, reconstruct_kraus

__all__ = [
    "BranchReport",
    "Statevector",
    "ancilla_distribution",
    "compare_to_analytic",
    "conditional_target_state",
    "run",
    "Circuit",
    "CostReport",
    "Gate",
    "KrausSet",
    "LoweringMode",
    "Qubit1State",
    "SynthesisPlan",
    "circuit_unitary",
    "compile_plan",
    "cost",
    "dilation_isometry",
    "emit_qasm",
    "extract_modules",
    "fidelity",
    "outcome_labels",
    "outcome_probabilities",
    "post_measurement_state",
    "random_povm",
    "random_unitary",
    "reconstruct_kraus",
    "svd2",
    "validate",
    "zyz_decompose",
]
