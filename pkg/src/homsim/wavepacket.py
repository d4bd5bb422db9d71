"""Photon internal states, HOM dips and partial distinguishability.

Gaussian packets use the normalised amplitude spectrum

    phi(w) = (pi sigma^2)^(-1/4) exp(-(w - omega0)^2 / (2 sigma^2)) exp(i w tau),

so two packets with equal ``sigma`` and ``omega0`` overlap as
``exp(-sigma^2 dtau^2 / 4) exp(i omega0 dtau)`` and the balanced-BS dip is
``(1 - exp(-sigma^2 tau^2 / 2)) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from homsim.errors import CapacityError, NumericalGuardError
from homsim.fock import (
    ModeSpace,
    SparseState,
    Statistics,
    apply_creation_combination,
    normalize,
    port_distribution,
)
from homsim.interferometer import ModeUnitary, apply_unitary, balanced_bs, tritter

VECTOR_NORM_TOL = 1e-9
JSA_NORM_TOL = 1e-6
JSA_MAX_K = 256


@dataclass(frozen=True)
class Gaussian:
    omega0: float  # rad/s
    sigma: float  # rad/s
    tau: float = 0.0  # s

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class Wavepacket:
    """A photon's internal state: a finite complex vector or a Gaussian pulse."""

    vector: np.ndarray | None = None
    gaussian: Gaussian | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.gaussian is None):
            raise ValueError("a Wavepacket is either a vector or a Gaussian")
        if self.vector is not None:
            v = np.array(self.vector, dtype=complex).ravel()
            if abs(np.linalg.norm(v) - 1.0) > VECTOR_NORM_TOL:
                raise ValueError(f"internal vector must be normalised, |v|={np.linalg.norm(v):.12g}")
            v.setflags(write=False)
            object.__setattr__(self, "vector", v)

    @classmethod
    def from_vector(cls, v: Sequence[complex], normalize: bool = False) -> "Wavepacket":
        v = np.asarray(v, dtype=complex)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(vector=v)

    @classmethod
    def pulse(cls, omega0: float, sigma: float, tau: float = 0.0) -> "Wavepacket":
        return cls(gaussian=Gaussian(omega0, sigma, tau))

    @property
    def is_vector(self) -> bool:
        return self.vector is not None

    def delayed(self, dt: float) -> "Wavepacket":
        if self.gaussian is None:
            raise ValueError("only Gaussian packets carry a delay")
        return Wavepacket(gaussian=replace(self.gaussian, tau=self.gaussian.tau + dt))


def _gaussian_overlap(a: Gaussian, b: Gaussian) -> complex:
    # closed-form integral of conj(phi_a) phi_b for the amplitude spectra above
    A = 1 / (2 * a.sigma**2) + 1 / (2 * b.sigma**2)
    B = a.omega0 / a.sigma**2 + b.omega0 / b.sigma**2 + 1j * (b.tau - a.tau)
    C = a.omega0**2 / (2 * a.sigma**2) + b.omega0**2 / (2 * b.sigma**2)
    pref = (math.pi * a.sigma**2 * math.pi * b.sigma**2) ** -0.25 * math.sqrt(math.pi / A)
    return complex(pref * np.exp(B**2 / (4 * A) - C))


def overlap(a: Wavepacket, b: Wavepacket) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.is_vector != b.is_vector:
        raise ValueError("cannot overlap a vector packet with a Gaussian packet")
    if a.is_vector:
        if a.vector.shape != b.vector.shape:
            raise ValueError(f"internal dimensions differ: {a.vector.size} vs {b.vector.size}")
        return complex(np.vdot(a.vector, b.vector))
    return _gaussian_overlap(a.gaussian, b.gaussian)


def hom_coincidence(a: Wavepacket, b: Wavepacket) -> float:
    """Coincidence probability at a balanced BS, ``(1 - |<a|b>|^2) / 2``."""
    return (1.0 - abs(overlap(a, b)) ** 2) / 2.0


def bunching_probability(a: Wavepacket, b: Wavepacket) -> float:
    return (1.0 + abs(overlap(a, b)) ** 2) / 2.0


@dataclass(frozen=True, eq=False)
class Curve:
    """A scanned quantity: probability against one parameter."""

    parameter: np.ndarray
    probability: np.ndarray
    label: str = ""

    def __len__(self) -> int:
        return len(self.parameter)


def dip_scan(source: Wavepacket, tau_grid: Sequence[float], static_overlap: complex = 1.0) -> Curve:
    """Coincidence probability as one photon of an identical pair is delayed.

    ``static_overlap`` models any additional, delay-independent mismatch of
    the internal states (e.g. polarisation).
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0:
        raise ValueError("empty delay grid")
    if source.gaussian is None:
        raise ValueError("dip_scan needs a Gaussian source")
    s = abs(static_overlap) ** 2
    probs = np.array([(1.0 - s * abs(overlap(source, source.delayed(t))) ** 2) / 2.0 for t in taus])
    return Curve(taus, probs, "dip-scan")


def visibility(curve: Curve) -> float:
    """(C_max - C_min) / C_max of a coincidence scan."""
    if len(curve) < 2:
        raise ValueError("visibility needs at least two grid points")
    cmax, cmin = float(np.max(curve.probability)), float(np.min(curve.probability))
    if cmax <= 0:
        raise NumericalGuardError("coincidence curve is identically zero")
    return (cmax - cmin) / cmax


def dip_center(curve: Curve) -> float:
    return float(curve.parameter[int(np.argmin(curve.probability))])


def dip_fwhm(curve: Curve) -> float:
    """Full width of the dip at half depth, by linear interpolation between grid points."""
    p, y = curve.parameter, curve.probability
    i0 = int(np.argmin(y))
    half = (float(np.max(y)) + float(y[i0])) / 2.0

    def crossing(indices):
        for i, j in zip(indices[:-1], indices[1:]):
            if (y[i] - half) * (y[j] - half) <= 0 and y[i] != y[j]:
                return p[i] + (half - y[i]) * (p[j] - p[i]) / (y[j] - y[i])
        raise NumericalGuardError("dip does not reach half depth inside the scanned range")

    left = crossing(list(range(i0, -1, -1)))
    right = crossing(list(range(i0, len(y))))
    return float(right - left)


def lift_to_internal(photons: Sequence[tuple], space: ModeSpace,
                     statistics: Statistics = Statistics.BOSON) -> SparseState:
    """Fock state with one photon per ``(port, internal vector)`` entry.

    Builds ``prod_k (sum_l v_k[l] a_{port_k, l}^dagger) |0>`` and normalises it
    (the product is already normalised unless photons share a port).
    """
    state = SparseState.vacuum(space, statistics)
    if len(photons) > state.n_max:
        raise CapacityError(f"{len(photons)} photons exceeds N_max={state.n_max}")
    for port, packet in photons:
        v = packet.vector if isinstance(packet, Wavepacket) else np.asarray(packet, dtype=complex)
        if v.size > space.internal_dim:
            raise ValueError(f"internal vector of length {v.size} exceeds internal_dim={space.internal_dim}")
        coeffs = np.zeros(space.n_modes, dtype=complex)
        start = space.index(port, 0)
        coeffs[start:start + v.size] = v
        state = apply_creation_combination(state, coeffs)
    return normalize(state)


def simulated_hom_coincidence(a: Wavepacket, b: Wavepacket,
                              statistics: Statistics = Statistics.BOSON) -> float:
    """Coincidence probability from the full Fock-space simulation of a balanced BS."""
    d = max(a.vector.size, b.vector.size)
    space = ModeSpace(2, d)
    state = apply_unitary(lift_to_internal([(0, a), (1, b)], space, statistics), balanced_bs())
    return port_distribution(state).get((1, 1), 0.0)


def gram_vectors(gram: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rows ``v_i`` with ``<v_i|v_j> = gram[i, j]``; raises if the Gram matrix is not PSD."""
    g = np.asarray(gram, dtype=complex)
    if not np.allclose(g, g.conj().T, atol=1e-12):
        raise ValueError("Gram matrix must be Hermitian")
    w, vecs = np.linalg.eigh(g)
    if w.min() < -tol:
        raise ValueError(f"overlaps are not realisable (Gram eigenvalue {w.min():.3g} < 0)")
    factor = vecs * np.sqrt(np.clip(w, 0.0, None))
    # g = factor @ factor^H, so <v_i|v_j> = sum_k conj(v_i[k]) v_j[k] needs v_i = conj(factor[i])
    return factor.conj()


def triad_vectors(magnitudes: Sequence[float], triad_phase: float) -> list:
    """Three unit vectors in C^3 with pairwise overlap magnitudes and a triad phase.

    ``magnitudes = (|<1|2>|, |<2|3>|, |<1|3>|)``; the phase sits on ``<1|3>`` so
    that ``arg(<1|2><2|3><3|1>) = triad_phase``. Fully indistinguishable
    photons have no triad phase (it is identically zero), so it is ignored
    when every magnitude is 1.
    """
    r12, r23, r13 = (float(m) for m in magnitudes)
    if any(not 0.0 <= r <= 1.0 for r in (r12, r23, r13)):
        raise ValueError(f"overlap magnitudes must lie in [0, 1], got {tuple(magnitudes)}")
    if min(r12, r23, r13) == 1.0:
        triad_phase = 0.0
    g = np.array([
        [1, r12, r13 * np.exp(-1j * triad_phase)],
        [r12, 1, r23],
        [r13 * np.exp(1j * triad_phase), r23, 1],
    ], dtype=complex)
    return [Wavepacket.from_vector(v, normalize=True) for v in gram_vectors(g)]


def three_photon_probability(packets: Sequence[Wavepacket], outcome=(1, 1, 1),
                             unitary: ModeUnitary | None = None) -> float:
    unitary = tritter() if unitary is None else unitary
    space = ModeSpace(3, max(p.vector.size for p in packets))
    state = lift_to_internal([(i, p) for i, p in enumerate(packets)], space)
    return port_distribution(apply_unitary(state, unitary)).get(tuple(outcome), 0.0)


def triad_phase_scan(magnitudes: Sequence[float], phase_grid: Sequence[float],
                     unitary: ModeUnitary | None = None) -> Curve:
    """Exact P_111 through a tritter as the triad phase is varied."""
    phases = np.asarray(phase_grid, dtype=float)
    probs = np.array([three_photon_probability(triad_vectors(magnitudes, ph), (1, 1, 1), unitary)
                      for ph in phases])
    return Curve(phases, probs, "triad-scan")


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    """Biphoton spectrum sampled on a uniform, centred K x K grid.

    ``grid[i, j]`` is the amplitude at ``(omega_center + offsets[i], omega_center + offsets[j])``.
    """

    grid: np.ndarray
    domega: float
    omega_center: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.grid, dtype=complex)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError(f"JSA grid must be square, got {f.shape}")
        if f.shape[0] > JSA_MAX_K:
            raise CapacityError(f"JSA grid K={f.shape[0]} exceeds {JSA_MAX_K}")
        w = _trapezoid_weights(f.shape[0], self.domega)
        total = float(np.sum(np.outer(w, w) * np.abs(f) ** 2))
        if abs(total - 1.0) > JSA_NORM_TOL:
            raise ValueError(f"JSA must be normalised, sum |f|^2 domega^2 = {total:.9g}")
        object.__setattr__(self, "grid", f)

    @property
    def K(self) -> int:
        return self.grid.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return (np.arange(self.K) - (self.K - 1) / 2.0) * self.domega

    @classmethod
    def from_function(cls, func, K: int, domega: float, omega_center: float = 0.0) -> "JointSpectralAmplitude":
        d = (np.arange(K) - (K - 1) / 2.0) * domega
        f = np.asarray(func(d[:, None], d[None, :]), dtype=complex)
        w = _trapezoid_weights(K, domega)
        f = f / math.sqrt(float(np.sum(np.outer(w, w) * np.abs(f) ** 2)))
        return cls(f, domega, omega_center)

    @classmethod
    def anticorrelated_gaussian(cls, sigma: float, sigma_pump: float, K: int = 128,
                                half_span: float | None = None, omega_center: float = 0.0):
        """``f ~ exp(-(d1 - d2)^2 / (4 sigma^2) - (d1 + d2)^2 / (4 sigma_pump^2))``.

        ``sigma`` is the rms width of the frequency difference, which makes the
        dip ``(1 - exp(-sigma^2 tau^2 / 2)) / 2`` as in the Gaussian packet model.
        """
        half_span = 4.0 * sigma if half_span is None else half_span
        return cls.from_function(
            lambda d1, d2: np.exp(-(d1 - d2) ** 2 / (4 * sigma**2) - (d1 + d2) ** 2 / (4 * sigma_pump**2)),
            K, 2 * half_span / (K - 1), omega_center,
        )

    @classmethod
    def separable_gaussian(cls, sigma: float, K: int = 128, half_span: float | None = None,
                           omega_center: float = 0.0):
        """Uncorrelated pair ``g(d1) g(d2)`` with the same difference-frequency width."""
        half_span = 4.0 * sigma if half_span is None else half_span
        return cls.from_function(
            lambda d1, d2: np.exp(-(d1**2 + d2**2) / (2 * sigma**2)),
            K, 2 * half_span / (K - 1), omega_center,
        )


def _trapezoid_weights(K: int, d: float) -> np.ndarray:
    w = np.full(K, d)
    w[0] = w[-1] = d / 2.0
    return w


def jsa_dip_scan(jsa: JointSpectralAmplitude, arm_phase: Sequence[float], tau_grid: Sequence[float]) -> Curve:
    """HOM dip for a biphoton spectrum with a spectral phase on the first arm.

    The first photon acquires ``exp(i sum_k beta_k (w - w_center)^k / k!)``;
    ``arm_phase`` lists ``beta_0, beta_1, ...``. Evaluates

        P(tau) = (1 - Re sum f(w1, w2) f*(w2, w1) e^{i (w2 - w1) tau} / sum |f|^2) / 2

    with trapezoidal weights. The sum depends on ``w1 - w2`` only through grid
    multiples of ``domega``, so it is accumulated per diagonal.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0:
        raise ValueError("empty delay grid")
    d = jsa.offsets
    theta = sum(b * d**k / math.factorial(k) for k, b in enumerate(arm_phase))
    f = jsa.grid * np.exp(1j * theta)[:, None]
    w = _trapezoid_weights(jsa.K, jsa.domega)
    ww = np.outer(w, w)
    density = ww * np.abs(f) ** 2
    norm = float(density.sum())

    # resolution guard: rms frequency difference must span several grid steps
    diff = d[:, None] - d[None, :]
    mean = float((density * diff).sum() / norm)
    rms = math.sqrt(float((density * (diff - mean) ** 2).sum() / norm))
    if rms < 4 * jsa.domega:
        raise NumericalGuardError(f"dip bandwidth {rms:.3g} is under 4 grid steps ({jsa.domega:.3g})")
    if np.max(np.abs(taus)) >= math.pi / jsa.domega:
        raise NumericalGuardError("delay grid reaches the aliasing limit pi / domega")

    g = ww * f * f.T.conj()
    offsets = np.arange(-(jsa.K - 1), jsa.K)
    # diagonal m of g collects i1 - i2 = m, i.e. w1 - w2 = m domega
    h = np.array([np.trace(g, offset=-m) for m in offsets])
    phase = np.exp(-1j * np.outer(taus, offsets * jsa.domega))
    interference = np.real(phase @ h) / norm
    return Curve(taus, (1.0 - interference) / 2.0, "jsa-scan")
