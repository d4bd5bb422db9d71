"""Bell states at a beam splitter: Bell-state measurement, filtering and swapping.

Polarisation is the internal label: ``H = 0``, ``V = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from homsim.detection import DetectionPattern, PostselectedResult
from homsim.fock import (
    ModeSpace,
    SparseState,
    canonical_phase,
    fidelity,
    normalize,
    project_ports,
    tensor_product,
)
from homsim.interferometer import apply_unitary, balanced_bs

H, V = 0, 1


class BellKind(Enum):
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"


class BsmOutcome(Enum):
    PSI_MINUS = "IdentifiedPsiMinus"
    PSI_PLUS = "IdentifiedPsiPlus"
    AMBIGUOUS_PHI = "AmbiguousPhi"


_IDENTIFIES = {BsmOutcome.PSI_MINUS: BellKind.PSI_MINUS, BsmOutcome.PSI_PLUS: BellKind.PSI_PLUS}

_BELL_TERMS = {
    BellKind.PSI_PLUS: ((H, V, 1), (V, H, 1)),
    BellKind.PSI_MINUS: ((H, V, 1), (V, H, -1)),
    BellKind.PHI_PLUS: ((H, H, 1), (V, V, 1)),
    BellKind.PHI_MINUS: ((H, H, 1), (V, V, -1)),
}


def _two_port_space(ports: Sequence[int], space: ModeSpace | None) -> ModeSpace:
    space = ModeSpace(max(ports) + 1, 2) if space is None else space
    if space.internal_dim < 2:
        raise ValueError("Bell states need at least two internal labels (H, V)")
    if len(ports) != 2 or ports[0] == ports[1]:
        raise ValueError(f"need two distinct ports, got {tuple(ports)}")
    return space


def bell_state(kind: BellKind, ports: Sequence[int] = (0, 1), space: ModeSpace | None = None) -> SparseState:
    """``(|x>_a |y>_b +- |x'>_a |y'>_b) / sqrt(2)`` with one photon per port."""
    space = _two_port_space(ports, space)
    a, b = ports
    terms = {}
    for la, lb, sign in _BELL_TERMS[kind]:
        occ = [0] * space.n_modes
        occ[space.index(a, la)] += 1
        occ[space.index(b, lb)] += 1
        terms[tuple(occ)] = sign / math.sqrt(2)
    return SparseState(terms, space)


def qubit_pair_state(coeffs, ports: Sequence[int] = (0, 1), space: ModeSpace | None = None) -> SparseState:
    """One photon per port with internal amplitudes ``coeffs[i, j]`` for ``|i>_a |j>_b``."""
    c = np.asarray(coeffs, dtype=complex)
    space = ModeSpace(max(ports) + 1, c.shape[0]) if space is None else space
    a, b = ports
    terms = {}
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            occ = [0] * space.n_modes
            occ[space.index(a, i)] += 1
            occ[space.index(b, j)] += 1
            terms[tuple(occ)] = terms.get(tuple(occ), 0j) + c[i, j]
    return normalize(SparseState(terms, space))


def pair_coefficients(state: SparseState, ports: Sequence[int] = (0, 1)) -> np.ndarray:
    """Inverse of ``qubit_pair_state`` for a state with exactly one photon per port."""
    k = state.space.internal_dim
    a, b = ports
    c = np.zeros((k, k), dtype=complex)
    for occ, amp in state.terms.items():
        counts = state.space.port_counts(occ)
        if counts[a] != 1 or counts[b] != 1:
            raise ValueError("state is not one photon per port")
        i = next(l for l in range(k) if occ[a * k + l])
        j = next(l for l in range(k) if occ[b * k + l])
        c[i, j] += amp
    return c


def reduced_purity(state: SparseState, ports: Sequence[int] = (0, 1)) -> float:
    c = pair_coefficients(state, ports)
    rho = c @ c.conj().T
    return float(np.real(np.trace(rho @ rho)))


def bell_fidelity(state: SparseState, ports: Sequence[int] = (0, 1)) -> tuple:
    """Best-matching Bell state and its fidelity with ``state``."""
    scores = {k: fidelity(bell_state(k, ports, state.space), state) for k in BellKind}
    best = max(scores, key=scores.get)
    return best, scores[best]


def bsm_transform(state: SparseState, ports: Sequence[int] = (0, 1)) -> SparseState:
    """Send the two BSM input ports through a balanced beam splitter."""
    if state.particle_numbers() != {2}:
        raise ValueError(f"BSM expects exactly two photons, got {state.particle_numbers()}")
    return apply_unitary(state, balanced_bs(ports, state.space.external_ports))


def bsm_classify(pattern: DetectionPattern) -> BsmOutcome:
    """Classify a two-photon detection pattern behind the beam splitter."""
    if pattern.total != 2:
        raise ValueError(f"BSM classification needs exactly two photons, got {pattern.total}")
    if len(pattern.ports) == 2:
        return BsmOutcome.PSI_MINUS
    if len(pattern.labels) == 2:
        return BsmOutcome.PSI_PLUS
    return BsmOutcome.AMBIGUOUS_PHI


def detection_distribution(state: SparseState, ports: Sequence[int] | None = None) -> dict:
    """Probability of every detection pattern (number- and label-resolving)."""
    out: dict = {}
    for occ, amp in state.terms.items():
        pattern = DetectionPattern.from_occupation(occ, state.space, ports)
        out[pattern] = out.get(pattern, 0.0) + abs(amp) ** 2
    return out


def bsm_outcome_probabilities(state: SparseState, ports: Sequence[int] = (0, 1)) -> dict:
    out = {o: 0.0 for o in BsmOutcome}
    for pattern, p in detection_distribution(bsm_transform(state, ports), ports).items():
        out[bsm_classify(pattern)] += p
    return out


def bsm_success_rate(ensemble: Mapping[BellKind, float] | None = None) -> float:
    """Probability of correctly identifying a Bell state drawn from ``ensemble``.

    Only the two outcomes that single out a Bell state count as successes.
    The default ensemble is uniform over the four Bell states.
    """
    ensemble = {k: 1.0 for k in BellKind} if ensemble is None else dict(ensemble)
    total = sum(ensemble.values())
    rate = 0.0
    for kind, w in ensemble.items():
        probs = bsm_outcome_probabilities(bell_state(kind))
        rate += w / total * sum(p for o, p in probs.items() if _IDENTIFIES.get(o) is kind)
    return rate


def antisymmetric_filter(state: SparseState, ports: Sequence[int] = (0, 1)) -> PostselectedResult:
    """Keep only the antisymmetric internal component via coincidence post-selection.

    The beam splitter sends the antisymmetric part of a one-photon-per-port
    state to coincidences and the symmetric part to bunched outputs. Projecting
    on coincidences and undoing the (self-inverse) beam splitter returns the
    antisymmetric part on the input labelling.
    """
    a, b = ports
    for occ in state.terms:
        counts = state.space.port_counts(occ)
        if counts[a] != 1 or counts[b] != 1:
            raise ValueError("antisymmetric filter expects one photon in each input port")
    bs = balanced_bs(ports, state.space.external_ports)
    out = apply_unitary(state, bs)
    coincident = out._with_terms({
        occ: amp for occ, amp in out.terms.items()
        if out.space.port_counts(occ)[a] == 1 and out.space.port_counts(occ)[b] == 1
    })
    result = PostselectedResult.from_branch(apply_unitary(coincident, bs), herald=(1, 1))
    if result.succeeded:
        return PostselectedResult(canonical_phase(result.state), result.success_probability, result.herald)
    return result


@dataclass(frozen=True)
class SwapBranch:
    """All detection patterns that map to one BSM outcome in a swapping run."""

    outcome: BsmOutcome
    probability: float
    state: SparseState | None  # conditional A'B' state when every pattern agrees
    patterns: dict = field(default_factory=dict)  # pattern -> (probability, state)


def entanglement_swap(kind_a: BellKind = BellKind.PSI_MINUS, kind_b: BellKind = BellKind.PSI_MINUS) -> dict:
    """Bell measurement on A and B of the pairs AA' and BB'.

    Ports are ``A=0, A'=1, B=2, B'=3``. Returns ``{BsmOutcome: SwapBranch}``
    whose states live on the two remaining ports ``(A', B')``.
    """
    pair = ModeSpace(2, 2)
    state = tensor_product(bell_state(kind_a, (0, 1), pair), bell_state(kind_b, (0, 1), pair))
    state = apply_unitary(state, balanced_bs((0, 2), state.space.external_ports))
    k = state.space.internal_dim
    measured = sorted({tuple(occ[p * k + l] for p in (0, 2) for l in range(k)) for occ in state.terms})
    grouped: dict = {o: {} for o in BsmOutcome}
    for counts in measured:
        occ = list(counts[:k]) + [0] * k + list(counts[k:]) + [0] * k
        pattern = DetectionPattern.from_occupation(occ, state.space, (0, 2))
        branch = project_ports(state, (0, 2), counts)
        p = branch.norm ** 2
        if p > 1e-15:
            grouped[bsm_classify(pattern)][pattern] = (p, canonical_phase(normalize(branch)))
    out = {}
    for outcome, patterns in grouped.items():
        states = [s for _, s in patterns.values()]
        agree = bool(states) and all(fidelity(states[0], s) > 1 - 1e-9 for s in states)
        out[outcome] = SwapBranch(
            outcome,
            sum(p for p, _ in patterns.values()),
            states[0] if agree else None,
            patterns,
        )
    return out
