"""Post-selected linear-optical gates on dual-rail qubits, and the SWAP test.

NS gate layout (signal mode 0, ancilla modes 1 and 2 prepared in |1, 0>):

    BS(eta1) on (1, 2)  ->  BS(eta2) on (0, 1)  ->  BS(eta1) on (1, 2)

with intensity transmissions ``eta1 = 1/(4 - 2 sqrt 2)`` and ``eta2 = 3 - 2 sqrt 2``.
The eta1 splitters are ``[[t, r], [r, -t]]`` and the eta2 splitter is
``[[-t, r], [r, t]]``. These reflection signs are the choice under which
heralding ``(1, 0)`` on the ancillas gives amplitude ``+1/2`` for ``|0>`` and
``|1>`` and ``-1/2`` for ``|2>``, i.e. ``a|0> + b|1> + c|2> -> a|0> + b|1> - c|2>``
with success probability 1/4 for every input.

Dual-rail mode layout for two-qubit gates: control rails (0, 1), target
rails (2, 3), NS ancillas (4, 5) on mode 1 and (6, 7) on mode 3. Logical
``'0'`` is a photon in the first rail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from homsim.detection import PostselectedResult
from homsim.fock import ModeSpace, SparseState, normalize, project_ports, tensor_product
from homsim.interferometer import (
    ModeUnitary,
    apply_unitary,
    balanced_bs,
    beamsplitter,
    compose,
    embed,
    phase_shifter,
)
from homsim.wavepacket import Wavepacket, simulated_hom_coincidence

ETA1 = 1 / (4 - 2 * math.sqrt(2))
ETA2 = 3 - 2 * math.sqrt(2)
P_NS = 0.25

# reference values for alternative constructions, not implemented
P_NS_TWO_BS = (3 - math.sqrt(2)) / 7
P_NS_ALT = 1 / 5
P_NS_BOUND = 1 / 2
P_CZ_OPTIMAL = 2 / 27

ANCILLA = (1, 0)
N_GATE_MODES = 8
CONTROL_RAILS = (0, 1)
TARGET_RAILS = (2, 3)
NS_ANCILLAS = ((4, 5), (6, 7))
LOGICAL_BASIS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class DualRailQubit:
    rail0: int
    rail1: int
    alpha: complex = 1.0
    beta: complex = 0.0

    def __post_init__(self):
        if self.rail0 == self.rail1:
            raise ValueError("dual-rail qubit needs two distinct rails")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > 1e-9:
            raise ValueError("qubit amplitudes must be normalised")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


def _theta(eta: float) -> float:
    return math.acos(math.sqrt(eta))


def ns_unitary() -> ModeUnitary:
    """3x3 NS-gate matrix built from the three beam splitters above."""
    outer = compose([beamsplitter(_theta(ETA1), 0.0, (1, 2), 3), phase_shifter(math.pi, 2, 3)])
    inner = compose([beamsplitter(-_theta(ETA2), 0.0, (0, 1), 3), phase_shifter(math.pi, 0, 3)])
    return ModeUnitary(compose([outer, inner, outer]).matrix, "NS")


def ns_gate(state: SparseState) -> PostselectedResult:
    """Apply the heralded nonlinear sign shift to a single-mode state with <= 2 photons."""
    if state.n_modes != 1:
        raise ValueError("NS gate acts on a single signal mode")
    if max(state.particle_numbers(), default=0) > 2:
        raise ValueError("NS gate is defined for at most two signal photons")
    full = tensor_product(state, SparseState.basis(ANCILLA, ModeSpace(2)))
    out = apply_unitary(full, ns_unitary())
    return PostselectedResult.from_branch(project_ports(out, (1, 2), ANCILLA), herald=ANCILLA)


def cz_unitary() -> ModeUnitary:
    """8-mode CZ: BS on the '1' rails, NS on each output, BS back."""
    ns = ns_unitary().matrix
    bs = balanced_bs((CONTROL_RAILS[1], TARGET_RAILS[1]), N_GATE_MODES)
    ns_c = embed(ns, (CONTROL_RAILS[1], *NS_ANCILLAS[0]), N_GATE_MODES, "NS(control)")
    ns_t = embed(ns, (TARGET_RAILS[1], *NS_ANCILLAS[1]), N_GATE_MODES, "NS(target)")
    return ModeUnitary(compose([bs, ns_c, ns_t, bs]).matrix, "CZ")


def cnot_unitary() -> ModeUnitary:
    """CZ sandwiched between balanced beam splitters on the target rails."""
    h = balanced_bs(TARGET_RAILS, N_GATE_MODES)
    return ModeUnitary(compose([h, cz_unitary(), h]).matrix, "CNOT")


def _rail_occupation(q1: int, q2: int) -> tuple:
    return (1 - q1, q1, 1 - q2, q2)


def two_qubit_state(logical: Sequence[complex]) -> SparseState:
    """Four-rail Fock state for logical amplitudes ordered ``00, 01, 10, 11``."""
    v = np.asarray(logical, dtype=complex)
    if v.shape != (4,):
        raise ValueError("two-qubit logical state needs 4 amplitudes")
    terms = {_rail_occupation(q1, q2): v[2 * q1 + q2] for q1 in (0, 1) for q2 in (0, 1)}
    return normalize(SparseState(terms, ModeSpace(4)))


def logical_amplitudes(state: SparseState) -> np.ndarray:
    """Read the four logical amplitudes off a four-rail state (leakage ignored)."""
    return np.array([state.amplitude(_rail_occupation(q1, q2)) for q1 in (0, 1) for q2 in (0, 1)])


def run_two_qubit_gate(unitary: ModeUnitary, logical: Sequence[complex]) -> tuple:
    """Herald both NS gates and return ``(PostselectedResult, unnormalised branch)``."""
    ancillas = SparseState.basis(ANCILLA * 2, ModeSpace(4))
    out = apply_unitary(tensor_product(two_qubit_state(logical), ancillas), unitary)
    branch = project_ports(out, (*NS_ANCILLAS[0], *NS_ANCILLAS[1]), ANCILLA * 2)
    return PostselectedResult.from_branch(branch, herald=ANCILLA * 2), branch


def conditional_process(unitary: ModeUnitary) -> np.ndarray:
    """4x4 map on logical amplitudes implemented by the heralded branch (not renormalised)."""
    cols = []
    for k in range(4):
        _, branch = run_two_qubit_gate(unitary, np.eye(4)[k])
        cols.append(logical_amplitudes(branch))
    return np.array(cols).T


def _logical_of(q1: DualRailQubit, q2: DualRailQubit) -> np.ndarray:
    return np.kron(q1.amplitudes, q2.amplitudes)


def cz_gate(q1: DualRailQubit, q2: DualRailQubit) -> PostselectedResult:
    return run_two_qubit_gate(cz_unitary(), _logical_of(q1, q2))[0]


def cnot_gate(control: DualRailQubit, target: DualRailQubit) -> PostselectedResult:
    return run_two_qubit_gate(cnot_unitary(), _logical_of(control, target))[0]


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError(f"{name} must be normalised")
    return v


def swap_test(phi: Sequence[complex], psi: Sequence[complex]) -> float:
    """Probability that the ancilla reads '0' after H, controlled-SWAP, H.

    Simulated as a dense state vector on ancilla x register x register.
    """
    phi, psi = _unit(phi, "phi"), _unit(psi, "psi")
    if phi.shape != psi.shape:
        raise ValueError(f"dimension mismatch: {phi.size} vs {psi.size}")
    d = phi.size
    state = np.kron(np.array([1, 0], dtype=complex), np.kron(phi, psi)).reshape(2, d, d)
    hadamard = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    state = np.einsum("ab,bij->aij", hadamard, state)
    state = np.stack([state[0], state[1].T])  # controlled SWAP of the two registers
    state = np.einsum("ab,bij->aij", hadamard, state)
    return float(np.sum(np.abs(state[0]) ** 2))


@dataclass(frozen=True)
class SwapEquivalence:
    circuit_fail: float
    hom_coincidence: float

    @property
    def delta(self) -> float:
        return abs(self.circuit_fail - self.hom_coincidence)


def destructive_swap_equivalence(phi: Sequence[complex], psi: Sequence[complex]) -> SwapEquivalence:
    """Compare the SWAP-test fail probability with the simulated HOM coincidence rate."""
    fail = 1.0 - swap_test(phi, psi)
    hom = simulated_hom_coincidence(Wavepacket.from_vector(phi), Wavepacket.from_vector(psi))
    return SwapEquivalence(fail, hom)
