"""Protocols built on two-photon interference: cloning, universal NOT, N00N fringes.

Mixed inputs are ensemble averages over pure branches. A clone's fidelity is
the expectation of the input projector on one photon of the bunched pair,
symmetrised over both photons: ``<N_s> / 2`` in the post-selected port.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from homsim.bell import BellKind, bell_state
from homsim.fock import (
    ModeSpace,
    SparseState,
    Statistics,
    apply_annihilation_combination,
    normalize,
    port_distribution,
    tensor_product,
)
from homsim.interferometer import (
    OutcomeDistribution,
    apply_unitary,
    balanced_bs,
    compose,
    output_distribution,
    phase_shifter,
)
from homsim.wavepacket import Curve, lift_to_internal

CARDINAL_STATES = {
    "H": (1, 0),
    "V": (0, 1),
    "D": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "A": (1 / math.sqrt(2), -1 / math.sqrt(2)),
    "R": (1 / math.sqrt(2), 1j / math.sqrt(2)),
    "L": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}


def optimal_clone_fidelity(d: int) -> float:
    """Optimal symmetric 1 -> 2 cloning fidelity for a qudit, 1/2 + 1/(d + 1)."""
    return 0.5 + 1.0 / (d + 1)


def orthogonal_complement(v: Sequence[complex]) -> np.ndarray:
    """The qubit state orthogonal to ``v`` (up to phase)."""
    a, b = np.asarray(v, dtype=complex) / np.linalg.norm(v)
    return np.array([-np.conj(b), np.conj(a)])


def _port_mode_vector(space: ModeSpace, port: int, v: Sequence[complex]) -> np.ndarray:
    out = np.zeros(space.n_modes, dtype=complex)
    out[space.index(port, 0):space.index(port, 0) + len(v)] = v
    return out


def _number_in(state: SparseState, space: ModeSpace, ports: Sequence[int], v) -> float:
    """Expectation of the number of photons in internal state ``v`` summed over ``ports``."""
    return sum(apply_annihilation_combination(state, _port_mode_vector(space, p, v)).norm ** 2 for p in ports)


def _pair_in(state: SparseState, space: ModeSpace, port: int, v) -> float:
    """Probability that both photons sit in ``port`` with internal state ``v``."""
    mode = _port_mode_vector(space, port, v)
    return apply_annihilation_combination(apply_annihilation_combination(state, mode), mode).norm ** 2 / 2.0


def _bunched(state: SparseState, port_count: int = 2) -> SparseState:
    """Branch with both photons in the same output port among the first ``port_count``."""
    space = state.space
    return state._with_terms({
        occ: a for occ, a in state.terms.items()
        if max(space.port_counts(occ)[:port_count]) == 2
    })


@dataclass(frozen=True)
class CloningReport:
    fidelity: float
    same_polarization_fraction: float
    postselection_probability: float


def hom_clone(input_qubit: Sequence[complex], ancilla: Sequence[tuple] | None = None) -> CloningReport:
    """Interfere the input with an ancilla photon and keep bunched events.

    ``ancilla`` is a list of ``(weight, internal vector)`` branches; the default
    is the maximally mixed state written as ``{s, s_perp}`` with equal weights.
    """
    s = np.asarray(input_qubit, dtype=complex)
    s = s / np.linalg.norm(s)
    s_perp = orthogonal_complement(s)
    if ancilla is None:
        ancilla = [(0.5, s), (0.5, s_perp)]
    total_w = sum(w for w, _ in ancilla)
    space = ModeSpace(2, 2)
    bs = balanced_bs()
    p_post = fid = same = 0.0
    for w, v in ancilla:
        v = np.asarray(v, dtype=complex) / np.linalg.norm(v)
        branch = _bunched(apply_unitary(lift_to_internal([(0, s), (1, v)], space), bs))
        w = w / total_w
        p_post += w * branch.norm ** 2
        fid += w * _number_in(branch, space, (0, 1), s) / 2.0
        same += w * sum(_pair_in(branch, space, p, u) for p in (0, 1) for u in (s, s_perp))
    return CloningReport(fid / p_post, same / p_post, p_post)


@dataclass(frozen=True)
class UniversalNotReport:
    anti_clone_fidelity: float  # partner vs the orthogonal state
    same_state_fidelity: float  # partner vs the input
    postselection_probability: float


def universal_not(input_qubit: Sequence[complex]) -> UniversalNotReport:
    """Clone with one photon of a singlet and read out its retained partner.

    Ports: input 0, singlet ancilla 1, singlet partner 2; the beam splitter
    acts on ports 0 and 1.
    """
    s = np.asarray(input_qubit, dtype=complex)
    s = s / np.linalg.norm(s)
    one = lift_to_internal([(0, s)], ModeSpace(1, 2))
    state = tensor_product(one, bell_state(BellKind.PSI_MINUS, (0, 1), ModeSpace(2, 2)))
    space = state.space
    branch = _bunched(apply_unitary(state, balanced_bs((0, 1), 3)))
    p = branch.norm ** 2
    post = normalize(branch)
    anti = _number_in(post, space, (2,), orthogonal_complement(s))
    same = _number_in(post, space, (2,), s)
    return UniversalNotReport(anti, same, p)


def noon2_state() -> SparseState:
    """Output of a balanced BS fed with |1, 1>: the two-photon N00N state."""
    return apply_unitary(SparseState.basis((1, 1)), balanced_bs())


def _mach_zehnder(phi: float):
    # quarter-wave bias on the second arm puts the coincidence null at phi = 0
    return compose([balanced_bs(), phase_shifter(phi, 0, 2), phase_shifter(math.pi / 2, 1, 2), balanced_bs()])


def noon2_fringe(phi_grid: Sequence[float]) -> Curve:
    """Coincidence probability after BS, phase on one arm, BS, for input |1, 1>."""
    phis = np.asarray(phi_grid, dtype=float)
    probs = [port_distribution(apply_unitary(SparseState.basis((1, 1)), _mach_zehnder(p))).get((1, 1), 0.0)
             for p in phis]
    return Curve(phis, np.array(probs), "noon-fringe")


def single_photon_fringe(phi_grid: Sequence[float]) -> Curve:
    """Probability that a lone photon entering port 0 leaves port 1 of the same interferometer."""
    phis = np.asarray(phi_grid, dtype=float)
    probs = [port_distribution(apply_unitary(SparseState.basis((1, 0)), _mach_zehnder(p))).get((0, 1), 0.0)
             for p in phis]
    return Curve(phis, np.array(probs), "single-photon-fringe")


def fringe_period(curve: Curve) -> float:
    """Mean spacing between successive interior minima of a sampled fringe."""
    y = curve.probability
    depth = y.min() + 1e-9 * max(1.0, abs(y.max()))
    minima = [i for i in range(len(y)) if y[i] <= depth
              and (i == 0 or y[i] <= y[i - 1]) and (i == len(y) - 1 or y[i] <= y[i + 1])]
    if len(minima) < 2:
        raise ValueError("fringe scan must cover at least two minima")
    return float(np.mean(np.diff(curve.parameter[minima])))


@dataclass(frozen=True)
class StatisticsReport:
    boson: OutcomeDistribution
    fermion: OutcomeDistribution
    boson_distinguishable_coincidence: float
    fermion_distinguishable_coincidence: float

    @property
    def boson_coincidence(self) -> float:
        return self.boson[(1, 1)]

    @property
    def fermion_coincidence(self) -> float:
        return self.fermion[(1, 1)]


def statistics_demo() -> StatisticsReport:
    """|1, 1> through a balanced BS for bosons and fermions, plus a distinguishable control."""
    bs = balanced_bs()
    dist = {}
    for stats in Statistics:
        state = lift_to_internal([(0, (1, 0)), (1, (0, 1))], ModeSpace(2, 2), stats)
        dist[stats] = port_distribution(apply_unitary(state, bs)).get((1, 1), 0.0)
    return StatisticsReport(
        output_distribution(bs, (1, 1), Statistics.BOSON),
        output_distribution(bs, (1, 1), Statistics.FERMION),
        dist[Statistics.BOSON],
        dist[Statistics.FERMION],
    )
