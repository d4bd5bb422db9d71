"""Linear-optical mode unitaries and their action on Fock states.

Convention: column ``j`` of a ``ModeUnitary`` is the image of input mode ``j``,

    a_j^dagger  ->  sum_i U[i, j] b_i^dagger,

so the bosonic transition amplitude between occupations ``S`` (in) and
``T`` (out) is ``Per(U[T, S]) / sqrt(prod S! prod T!)`` with rows repeated
per output photon and columns per input photon. For fermions it is
``Det(U[T, S])`` in ascending normal order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from homsim.errors import CapacityError, ShapeError
from homsim.fock import (
    MAX_MODES,
    N_MAX,
    PRUNE_TOL,
    ModeSpace,
    SparseState,
    Statistics,
    apply_creation_combination,
    check_occupation,
)

UNITARITY_TOL = 1e-9
PERMANENT_MAX_N = 20


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """Square unitary acting on creation operators of external ports."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"mode unitary must be square, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) if m.size else 0.0
        if err >= UNITARITY_TOL:
            raise ValueError(f"matrix {self.label!r} is not unitary (max deviation {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T, f"{self.label}^dagger")

    def on(self, space: ModeSpace) -> np.ndarray:
        """Matrix on the full port x internal mode space.

        A unitary sized to the external ports is tensored with identity on the
        internal labels; one sized to every mode is used as is.
        """
        if self.dim == space.n_modes:
            return self.matrix
        if self.dim != space.external_ports:
            raise ShapeError(f"{self.dim}-port unitary cannot act on {space}")
        return np.kron(self.matrix, np.eye(space.internal_dim))


def _dimension(ports: Sequence[int], n_modes: int | None) -> int:
    n = max(ports) + 1 if n_modes is None else n_modes
    if len(set(ports)) != len(ports):
        raise ValueError(f"ports must be distinct, got {tuple(ports)}")
    if min(ports) < 0 or max(ports) >= n:
        raise ValueError(f"ports {tuple(ports)} outside a {n}-mode space")
    return n


def embed(block: np.ndarray, ports: Sequence[int], n_modes: int | None = None, label: str = "") -> ModeUnitary:
    """Place a k x k block on the given ports of an identity."""
    n = _dimension(ports, n_modes)
    u = np.eye(n, dtype=complex)
    u[np.ix_(ports, ports)] = block
    return ModeUnitary(u, label)


def balanced_bs(ports: Sequence[int] = (0, 1), n_modes: int | None = None) -> ModeUnitary:
    """50:50 beam splitter ``[[1, 1], [1, -1]] / sqrt(2)``.

    Input ``a`` goes to ``(c + d)/sqrt(2)``, input ``b`` to ``(c - d)/sqrt(2)``.
    This block is its own inverse. It equals ``beamsplitter(pi/4)`` followed by
    ``phase_shifter(pi)`` on the second port.
    """
    if len(ports) != 2:
        raise ValueError("a beam splitter couples exactly two ports")
    block = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    return embed(block, ports, n_modes, f"BS{tuple(ports)}")


def beamsplitter(theta: float, phi: float = 0.0, ports: Sequence[int] = (0, 1),
                 n_modes: int | None = None) -> ModeUnitary:
    """General lossless beam splitter ``[[cos t, e^{i phi} sin t], [-e^{-i phi} sin t, cos t]]``.

    Intensity transmission is ``cos(theta)**2``.
    """
    if len(ports) != 2:
        raise ValueError("a beam splitter couples exactly two ports")
    c, s = math.cos(theta), math.sin(theta)
    block = np.array([[c, np.exp(1j * phi) * s], [-np.exp(-1j * phi) * s, c]], dtype=complex)
    return embed(block, ports, n_modes, f"BS(theta={theta:.6g}, phi={phi:.6g}){tuple(ports)}")


def phase_shifter(phi: float, port: int, n_modes: int | None = None) -> ModeUnitary:
    return embed(np.array([[np.exp(1j * phi)]]), [port], n_modes, f"PS({phi:.6g})[{port}]")


def tritter(ports: Sequence[int] = (0, 1, 2), n_modes: int | None = None) -> ModeUnitary:
    """Balanced three-port (Bell tritter): entries ``exp(2 pi i j k / 3) / sqrt(3)``."""
    if len(ports) != 3:
        raise ValueError("a tritter couples exactly three ports")
    jk = np.outer(np.arange(3), np.arange(3))
    return embed(np.exp(2j * np.pi * jk / 3) / math.sqrt(3), ports, n_modes, "tritter")


def compose(circuit: Sequence[ModeUnitary]) -> ModeUnitary:
    """Product of unitaries in application order (first element acts first)."""
    if not circuit:
        raise ValueError("cannot compose an empty circuit")
    dims = {u.dim for u in circuit}
    if len(dims) != 1:
        raise ShapeError(f"dimension mismatch in circuit: {sorted(dims)}")
    if len(circuit) == 1:
        return circuit[0]
    total = np.eye(circuit[0].dim, dtype=complex)
    for u in circuit:
        total = u.matrix @ total
    return ModeUnitary(total, " -> ".join(u.label for u in circuit))


def random_unitary(n: int, rng: np.random.Generator) -> ModeUnitary:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return ModeUnitary(q * (d / np.abs(d)), f"haar({n})")


def apply_unitary(state: SparseState, unitary: ModeUnitary) -> SparseState:
    """Evolve a Fock state by substituting every creation operator.

    Each basis term ``prod_j (a_j^dagger)^{n_j} / sqrt(n_j!) |0>`` is rebuilt
    from the vacuum with ``a_j^dagger -> sum_i U[i, j] a_i^dagger``. Fermionic
    terms are rebuilt right to left (highest mode first) so the ascending
    normal order carries the signs.
    """
    u = unitary.on(state.space)
    vac = SparseState.vacuum(state.space, state.statistics, n_max=state.n_max, norm_tol=state.norm_tol)
    out: dict = {}
    fermion = state.statistics is Statistics.FERMION
    for occ, amp in state.terms.items():
        branch = vac * amp
        modes = [j for j, n in enumerate(occ) for _ in range(n)]
        for j in (reversed(modes) if fermion else modes):
            branch = apply_creation_combination(branch, u[:, j])
        if not fermion:
            branch = branch * (1.0 / math.sqrt(math.prod(math.factorial(n) for n in occ)))
        for o, a in branch.terms.items():
            out[o] = out.get(o, 0j) + a
    return state._with_terms(out)


def permanent(matrix) -> complex:
    """Matrix permanent by Ryser's formula with Gray-code subset updates, O(2^n n).

        Per(A) = (-1)^n sum_{S subset cols} (-1)^{|S|} prod_i sum_{j in S} A[i, j]

    Subsets are visited in binary-reflected Gray-code order: step ``k`` toggles
    column ``j = ctz(k)``, so the row-sum vector changes by a single column and
    ``(-1)^{|S|}`` alternates every step starting from ``|S| = 1``.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > PERMANENT_MAX_N:
        raise CapacityError(f"permanent of a {n}x{n} matrix exceeds the n<={PERMANENT_MAX_N} cap")
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(a[0, 0])
    row_sums = np.zeros(n, dtype=complex)
    chosen = np.zeros(n, dtype=bool)
    total = 0j
    sign = 1
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if chosen[j]:
            row_sums -= a[:, j]
        else:
            row_sums += a[:, j]
        chosen[j] = not chosen[j]
        sign = -sign
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


def determinant(matrix) -> complex:
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1 + 0j
    return complex(np.linalg.det(a))


def _as_matrix(unitary) -> np.ndarray:
    return unitary.matrix if isinstance(unitary, ModeUnitary) else np.asarray(unitary, dtype=complex)


def transition_amplitude(unitary, in_occ: Sequence[int], out_occ: Sequence[int],
                         statistics: Statistics = Statistics.BOSON) -> complex:
    """<out| U |in> from the permanent (bosons) or determinant (fermions)."""
    u = _as_matrix(unitary)
    if len(in_occ) != u.shape[0] or len(out_occ) != u.shape[0]:
        raise ShapeError("occupation length does not match the unitary")
    in_occ = check_occupation(in_occ, statistics)
    out_occ = check_occupation(out_occ, statistics)
    if sum(in_occ) != sum(out_occ):
        return 0j
    cols = [j for j, n in enumerate(in_occ) for _ in range(n)]
    rows = [i for i, n in enumerate(out_occ) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    if statistics is Statistics.FERMION:
        return determinant(sub)
    norm = math.prod(math.factorial(n) for n in in_occ) * math.prod(math.factorial(n) for n in out_occ)
    return permanent(sub) / math.sqrt(norm)


def occupations(n_particles: int, n_modes: int, statistics: Statistics = Statistics.BOSON) -> list:
    """All occupation tuples with the given particle number, in ascending tuple order."""
    if statistics is Statistics.FERMION:
        combos = itertools.combinations(range(n_modes), n_particles)
    else:
        combos = itertools.combinations_with_replacement(range(n_modes), n_particles)
    out = []
    for combo in combos:
        occ = [0] * n_modes
        for m in combo:
            occ[m] += 1
        out.append(tuple(occ))
    return sorted(out)


@dataclass(frozen=True)
class OutcomeDistribution:
    entries: dict
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        probs = np.array(list(self.entries.values()), dtype=float)
        if probs.size and (probs.min() < -1e-12 or abs(probs.sum() - 1.0) > 1e-9):
            raise ValueError(f"not a probability distribution (sum={probs.sum():.12g})")

    def __getitem__(self, occ) -> float:
        return self.entries.get(tuple(occ), 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> float:
        return float(sum(self.entries.values()))

    def nonzero(self, tol: float = 1e-12) -> dict:
        return {k: p for k, p in self.entries.items() if p > tol}

    def items(self) -> list:
        return sorted(self.entries.items())


def _check_capacity(u: np.ndarray, in_occ: Sequence[int]):
    if u.shape[0] > MAX_MODES:
        raise CapacityError(f"{u.shape[0]} modes exceeds the limit of {MAX_MODES}")
    if sum(in_occ) > N_MAX:
        raise CapacityError(f"{sum(in_occ)} particles exceeds N_max={N_MAX}")


def output_distribution(unitary, in_occ: Sequence[int],
                        statistics: Statistics = Statistics.BOSON) -> OutcomeDistribution:
    """Exact distribution over every output occupation, zero entries included.

    Amplitudes below the sparse-state prune threshold count as exact zeros,
    matching what ``apply_unitary`` keeps.
    """
    u = _as_matrix(unitary)
    _check_capacity(u, in_occ)
    entries = {}
    for out in occupations(sum(in_occ), u.shape[0], statistics):
        amp = transition_amplitude(u, in_occ, out, statistics)
        entries[out] = abs(amp) ** 2 if abs(amp) > PRUNE_TOL else 0.0
    return OutcomeDistribution(entries, statistics)


def sample(unitary, in_occ: Sequence[int], n_samples: int, seed: int,
           statistics: Statistics = Statistics.BOSON) -> list:
    """Draw i.i.d. outcomes by inverse-CDF over the exact distribution.

    Deterministic for a given seed: outcomes are ordered as tuples before the
    cumulative sum, and uniforms come from ``numpy.random.default_rng(seed)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    items = output_distribution(unitary, in_occ, statistics).items()
    outcomes = [o for o, _ in items]
    cdf = np.cumsum([p for _, p in items])
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(n_samples)
    idx = np.searchsorted(cdf, u, side="right")
    return [outcomes[min(i, len(outcomes) - 1)] for i in idx]
