"""Sparse multimode Fock states and the ladder-operator algebra.

A state is a map from occupation tuples to complex amplitudes. Modes are
indexed port-major, internal-minor: mode ``port * internal_dim + label``.

Fermionic sign convention: a basis vector is the ascending-order product
``c†_{j1} c†_{j2} ... c†_{jk} |0>`` with ``j1 < j2 < ... < jk``. Acting with
``c†_m`` or ``c_m`` therefore picks up ``(-1)**(number of occupied modes below m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from homsim.errors import CapacityError, ShapeError

N_MAX = 10
MAX_MODES = 16
PRUNE_TOL = 1e-12
NORM_TOL = 1e-9

OccupationState = tuple  # tuple[int, ...], one count per mode


class Statistics(Enum):
    BOSON = "boson"
    FERMION = "fermion"


@dataclass(frozen=True)
class ModeSpace:
    """External ports times internal labels (polarisation, time bin, ...)."""

    external_ports: int
    internal_dim: int = 1

    def __post_init__(self):
        if self.external_ports < 1 or self.internal_dim < 1:
            raise ValueError("ModeSpace needs at least one port and one internal label")
        if self.n_modes > MAX_MODES:
            raise CapacityError(f"{self.n_modes} modes exceeds the limit of {MAX_MODES}")

    @property
    def n_modes(self) -> int:
        return self.external_ports * self.internal_dim

    def index(self, port: int, label: int = 0) -> int:
        if not (0 <= port < self.external_ports and 0 <= label < self.internal_dim):
            raise IndexError(f"(port={port}, label={label}) outside {self}")
        return port * self.internal_dim + label

    def port_of(self, mode: int) -> int:
        return mode // self.internal_dim

    def port_counts(self, occ: Sequence[int]) -> tuple:
        """Collapse an occupation over all modes to photon counts per port."""
        k = self.internal_dim
        return tuple(sum(occ[p * k:(p + 1) * k]) for p in range(self.external_ports))


def check_occupation(counts: Sequence[int], statistics: Statistics, n_max: int = N_MAX) -> tuple:
    occ = tuple(int(c) for c in counts)
    if any(c < 0 for c in occ):
        raise ValueError(f"negative occupation in {occ}")
    if statistics is Statistics.FERMION and any(c > 1 for c in occ):
        raise ValueError(f"fermionic occupation must be 0/1, got {occ}")
    if sum(occ) > n_max:
        raise CapacityError(f"{sum(occ)} particles exceeds N_max={n_max}")
    return occ


@dataclass(frozen=True)
class SparseState:
    """Complex superposition of occupation-number basis vectors.

    Instances are treated as immutable values; every operation returns a new
    state. Amplitudes below ``PRUNE_TOL`` in magnitude are never stored.
    """

    terms: Mapping[tuple, complex]
    space: ModeSpace
    statistics: Statistics = Statistics.BOSON
    n_max: int = N_MAX
    norm_tol: float = field(default=NORM_TOL, compare=False)

    def __post_init__(self):
        clean = {}
        for occ, amp in self.terms.items():
            if len(occ) != self.space.n_modes:
                raise ShapeError(f"occupation {occ} does not match {self.space.n_modes} modes")
            if abs(amp) >= PRUNE_TOL:
                clean[check_occupation(occ, self.statistics, self.n_max)] = complex(amp)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def vacuum(cls, space: ModeSpace, statistics: Statistics = Statistics.BOSON, **kw) -> "SparseState":
        return cls({(0,) * space.n_modes: 1.0}, space, statistics, **kw)

    @classmethod
    def basis(cls, counts: Sequence[int], space: ModeSpace | None = None,
              statistics: Statistics = Statistics.BOSON, **kw) -> "SparseState":
        if space is None:
            space = ModeSpace(len(counts))
        return cls({tuple(counts): 1.0}, space, statistics, **kw)

    def _with_terms(self, terms: Mapping[tuple, complex]) -> "SparseState":
        return SparseState(terms, self.space, self.statistics, self.n_max, self.norm_tol)

    @property
    def n_modes(self) -> int:
        return self.space.n_modes

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= self.norm_tol

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def particle_numbers(self) -> set:
        return {sum(occ) for occ in self.terms}

    def probabilities(self) -> dict:
        return {occ: abs(a) ** 2 for occ, a in self.terms.items()}

    def _check_compatible(self, other: "SparseState"):
        if self.space != other.space or self.statistics != other.statistics:
            raise ShapeError(
                f"incompatible states: {self.space}/{self.statistics.value} vs "
                f"{other.space}/{other.statistics.value}"
            )

    def __add__(self, other: "SparseState") -> "SparseState":
        self._check_compatible(other)
        out = dict(self.terms)
        for occ, a in other.terms.items():
            out[occ] = out.get(occ, 0j) + a
        return self._with_terms(out)

    def __sub__(self, other: "SparseState") -> "SparseState":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "SparseState":
        return self._with_terms({occ: scalar * a for occ, a in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "SparseState":
        return (-1.0) * self

    def __repr__(self) -> str:
        body = " + ".join(f"({a:.4g})|{','.join(map(str, occ))}>" for occ, a in sorted(self.terms.items()))
        return f"SparseState[{self.statistics.value}, M={self.n_modes}]({body or '0'})"


def _fermion_sign(occ: Sequence[int], mode: int) -> int:
    return -1 if sum(occ[:mode]) % 2 else 1


def _check_mode(state: SparseState, mode: int):
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode} outside 0..{state.n_modes - 1}")


def apply_creation(state: SparseState, mode: int) -> SparseState:
    """Apply a†_mode (or c†_mode) term-wise. The result is not renormalised."""
    _check_mode(state, mode)
    fermion = state.statistics is Statistics.FERMION
    out: dict = {}
    for occ, amp in state.terms.items():
        n = occ[mode]
        if sum(occ) + 1 > state.n_max:
            raise CapacityError(f"creation would exceed N_max={state.n_max}")
        if fermion:
            if n:
                continue
            factor = _fermion_sign(occ, mode)
        else:
            factor = math.sqrt(n + 1)
        new = occ[:mode] + (n + 1,) + occ[mode + 1:]
        out[new] = out.get(new, 0j) + factor * amp
    return state._with_terms(out)


def apply_annihilation(state: SparseState, mode: int) -> SparseState:
    """Apply a_mode (or c_mode) term-wise; annihilating an empty mode drops the term."""
    _check_mode(state, mode)
    fermion = state.statistics is Statistics.FERMION
    out: dict = {}
    for occ, amp in state.terms.items():
        n = occ[mode]
        if n == 0:
            continue
        factor = _fermion_sign(occ, mode) if fermion else math.sqrt(n)
        new = occ[:mode] + (n - 1,) + occ[mode + 1:]
        out[new] = out.get(new, 0j) + factor * amp
    return state._with_terms(out)


def apply_creation_combination(state: SparseState, coeffs: Sequence[complex]) -> SparseState:
    """Apply the linear combination sum_i coeffs[i] a†_i."""
    if len(coeffs) != state.n_modes:
        raise ShapeError(f"{len(coeffs)} coefficients for {state.n_modes} modes")
    terms: dict = {}
    for i, c in enumerate(coeffs):
        if abs(c) < PRUNE_TOL:
            continue
        for occ, a in apply_creation(state, i).terms.items():
            terms[occ] = terms.get(occ, 0j) + c * a
    return state._with_terms(terms)


def apply_annihilation_combination(state: SparseState, vector: Sequence[complex]) -> SparseState:
    """Apply the annihilator of the mode function ``vector``: sum_i conj(vector[i]) a_i."""
    if len(vector) != state.n_modes:
        raise ShapeError(f"{len(vector)} coefficients for {state.n_modes} modes")
    terms: dict = {}
    for i, c in enumerate(vector):
        if abs(c) < PRUNE_TOL:
            continue
        for occ, a in apply_annihilation(state, i).terms.items():
            terms[occ] = terms.get(occ, 0j) + np.conj(c) * a
    return state._with_terms(terms)


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    a._check_compatible(b)
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    total = 0j
    for occ in small:
        if occ in large:
            total += np.conj(a.terms[occ]) * b.terms[occ]
    return complex(total)


def normalize(state: SparseState) -> SparseState:
    nrm = state.norm
    if nrm < PRUNE_TOL:
        raise ValueError("cannot normalise the zero state")
    return state * (1.0 / nrm)


def tensor_product(a: SparseState, b: SparseState) -> SparseState:
    """Concatenate mode blocks, ``a`` first.

    With ascending normal order the a-block creation string already precedes
    the b-block string, so no fermionic sign arises.
    """
    if a.statistics != b.statistics:
        raise ShapeError("cannot tensor bosonic and fermionic states")
    if a.space.internal_dim == b.space.internal_dim:
        space = ModeSpace(a.space.external_ports + b.space.external_ports, a.space.internal_dim)
    else:
        space = ModeSpace(a.n_modes + b.n_modes)
    terms = {}
    for oa, xa in a.terms.items():
        for ob, xb in b.terms.items():
            terms[oa + ob] = xa * xb
    return SparseState(terms, space, a.statistics, max(a.n_max, b.n_max), a.norm_tol)


def fidelity(a: SparseState, b: SparseState) -> float:
    """|<a|b>|^2 for normalised states."""
    return abs(inner_product(a, b)) ** 2


def canonical_phase(state: SparseState) -> SparseState:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    if state.is_zero:
        return state
    occ = max(sorted(state.terms), key=lambda o: round(abs(state.terms[o]), 12))
    a = state.terms[occ]
    return state * (abs(a) / a)


def port_distribution(state: SparseState) -> dict:
    """Photon-number distribution per external port, summed over internal labels."""
    out: dict = {}
    for occ, a in state.terms.items():
        key = state.space.port_counts(occ)
        out[key] = out.get(key, 0.0) + abs(a) ** 2
    return out


def project_ports(state: SparseState, ports: Iterable[int], counts: Sequence[int]) -> SparseState:
    """Condition on a number-resolved detection of every mode in ``ports``.

    ``counts`` lists the detected occupation of each mode of the measured
    ports (port order as given, internal labels ascending). Returns the
    unnormalised state of the remaining ports; its squared norm is the
    probability of the detection event.
    """
    if state.statistics is Statistics.FERMION:
        raise NotImplementedError("port projection is implemented for bosons only")
    ports = list(ports)
    k = state.space.internal_dim
    measured = [p * k + j for p in ports for j in range(k)]
    if len(counts) != len(measured):
        raise ShapeError(f"expected {len(measured)} counts, got {len(counts)}")
    keep_ports = [p for p in range(state.space.external_ports) if p not in ports]
    if not keep_ports:
        raise ValueError("at least one port must remain unmeasured")
    kept = [p * k + j for p in keep_ports for j in range(k)]
    target = tuple(counts)
    terms: dict = {}
    for occ, a in state.terms.items():
        if tuple(occ[m] for m in measured) == target:
            rest = tuple(occ[m] for m in kept)
            terms[rest] = terms.get(rest, 0j) + a
    return SparseState(terms, ModeSpace(len(keep_ports), k), state.statistics, state.n_max, state.norm_tol)
