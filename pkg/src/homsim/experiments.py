"""Experiment runners behind the command-line harness.

Each runner takes validated parameters and a seed and returns a table plus
named metrics ``{name: (expected, computed)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from homsim import applications, bell, klm
from homsim.fock import ModeSpace, SparseState, Statistics
from homsim.interferometer import balanced_bs, output_distribution, random_unitary, sample, tritter
from homsim.wavepacket import (
    JointSpectralAmplitude,
    Wavepacket,
    dip_center,
    dip_fwhm,
    dip_scan,
    hom_coincidence,
    jsa_dip_scan,
    triad_phase_scan,
    visibility,
)


@dataclass(frozen=True)
class Param:
    default: Any
    kind: type
    choices: tuple = ()
    doc: str = ""
    item: type | None = None  # element type for list parameters


@dataclass
class Table:
    header: list
    rows: list
    metrics: dict = field(default_factory=dict)
    distribution_column: str | None = None  # column that must sum to 1


@dataclass(frozen=True)
class Experiment:
    name: str
    params: dict
    runner: Callable[[dict, int], Table]
    doc: str


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 2:
        raise ValueError("grid needs at least 2 points")
    if not hi > lo:
        raise ValueError(f"grid upper bound {hi} must exceed lower bound {lo}")
    return np.linspace(lo, hi, points)


def _curve_rows(curve) -> list:
    return [[float(x), float(y)] for x, y in zip(curve.parameter, curve.probability)]


def _run_dip(p: dict, seed: int) -> Table:
    src = Wavepacket.pulse(p["omega0"], p["sigma"])
    curve = dip_scan(src, _grid(p["tau_min"], p["tau_max"], p["points"]), p["static_overlap"])
    s = abs(p["static_overlap"]) ** 2
    # with a wide enough scan the shoulders reach 1/2, so V = s
    metrics = {
        "p_cc_zero_delay": ((1 - s) / 2, float(dip_scan(src, [0.0], p["static_overlap"]).probability[0])),
        "visibility": (s, visibility(curve)),
        "p_cc_orthogonal": (0.5, hom_coincidence(Wavepacket.from_vector((1, 0)), Wavepacket.from_vector((0, 1)))),
    }
    return Table(["parameter", "probability"], _curve_rows(curve), metrics)


def _run_bsm(p: dict, seed: int) -> Table:
    rows = []
    for kind in bell.BellKind:
        for outcome, prob in bell.bsm_outcome_probabilities(bell.bell_state(kind)).items():
            rows.append([kind.value, outcome.value, prob / len(bell.BellKind)])
    rate = bell.bsm_success_rate()
    return Table(["bell_state", "outcome", "probability"], rows,
                 {"bsm_success_rate": (0.5, rate)}, "probability")


def _run_klm(p: dict, seed: int) -> Table:
    rng = np.random.default_rng(seed)
    rows = []
    ns_probs = []
    for i in range(p["random_inputs"]):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        c /= np.linalg.norm(c)
        state = SparseState({(0,): c[0], (1,): c[1], (2,): c[2]}, ModeSpace(1))
        ns_probs.append(klm.ns_gate(state).success_probability)
        rows.append(["ns", f"random_{i:03d}", ns_probs[-1]])
    cz = klm.conditional_process(klm.cz_unitary())
    cnot = klm.conditional_process(klm.cnot_unitary())
    for k, label in enumerate(klm.LOGICAL_BASIS):
        rows.append(["cz", label, float(np.sum(np.abs(cz[:, k]) ** 2))])
        rows.append(["cnot", label, float(np.sum(np.abs(cnot[:, k]) ** 2))])
    expected_cz = np.diag([1, 1, 1, -1]) / 4
    expected_cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]) / 4
    metrics = {
        "p_ns": (klm.P_NS, float(np.mean(ns_probs)) if ns_probs else klm.P_NS),
        "p_ns_worst": (0.0, float(max(abs(q - klm.P_NS) for q in ns_probs)) if ns_probs else 0.0),
        "p_cz": (klm.P_NS**2, float(np.sum(np.abs(cz[:, 3]) ** 2))),
        "p_cnot": (klm.P_NS**2, float(np.sum(np.abs(cnot[:, 2]) ** 2))),
        "cz_process_error": (0.0, float(np.max(np.abs(cz - expected_cz)))),
        "cnot_process_error": (0.0, float(np.max(np.abs(cnot - expected_cnot)))),
    }
    return Table(["gate", "input", "success_probability"], rows, metrics)


def _unitary(p: dict, seed: int):
    name = p["unitary"]
    if name == "tritter":
        return tritter()
    if name == "balanced-bs":
        return balanced_bs()
    return random_unitary(p["modes"], np.random.default_rng(seed))


def _stats(p: dict) -> Statistics:
    return Statistics(p["statistics"])


def _check_input(p: dict, u) -> tuple:
    occ = tuple(p["input"])
    if len(occ) != u.dim:
        raise ValueError(f"input occupation has {len(occ)} modes, unitary has {u.dim}")
    return occ


def _run_multiport(p: dict, seed: int) -> Table:
    u = _unitary(p, seed)
    occ = _check_input(p, u)
    dist = output_distribution(u, occ, _stats(p))
    rows = [[*out, prob] for out, prob in dist.items()]
    metrics = {"total_probability": (1.0, dist.total)}
    if p["unitary"] == "tritter" and occ == (1, 1, 1) and _stats(p) is Statistics.BOSON:
        metrics["p_111"] = (1 / 3, dist[(1, 1, 1)])
        metrics["p_300"] = (2 / 9, dist[(3, 0, 0)])
        metrics["nonzero_outcomes"] = (4, len(dist.nonzero(1e-12)))
    return Table([f"mode_{i}" for i in range(u.dim)] + ["probability"], rows, metrics, "probability")


def _run_sample(p: dict, seed: int) -> Table:
    u = _unitary(p, seed)
    occ = _check_input(p, u)
    draws = sample(u, occ, p["samples"], seed, _stats(p))
    counts: dict = {}
    for o in draws:
        counts[o] = counts.get(o, 0) + 1
    exact = output_distribution(u, occ, _stats(p))
    rows = [[*o, c, c / len(draws)] for o, c in counts.items()]
    tvd = 0.5 * sum(abs(counts.get(o, 0) / len(draws) - q) for o, q in exact.items())
    # the distance to the exact law shrinks as 1/sqrt(samples); it has no fixed target
    metrics = {"total_count": (p["samples"], len(draws)), "total_variation_distance": (None, tvd)}
    return Table([f"mode_{i}" for i in range(u.dim)] + ["count", "frequency"], rows, metrics, "frequency")


def _run_clone(p: dict, seed: int) -> Table:
    if not p["states"]:
        raise ValueError("states must list at least one cardinal state")
    rows = []
    worst_clone = worst_not = 0.0
    target = applications.optimal_clone_fidelity(2)
    for name in p["states"]:
        if name not in applications.CARDINAL_STATES:
            raise ValueError(f"unknown state {name!r}; choose from {sorted(applications.CARDINAL_STATES)}")
        v = applications.CARDINAL_STATES[name]
        c = applications.hom_clone(v)
        u = applications.universal_not(v)
        rows.append([name, c.fidelity, c.same_polarization_fraction, c.postselection_probability,
                     u.anti_clone_fidelity])
        worst_clone = max(worst_clone, abs(c.fidelity - target))
        worst_not = max(worst_not, abs(u.anti_clone_fidelity - 2 / 3))
    metrics = {
        "clone_fidelity": (target, float(np.mean([r[1] for r in rows]))),
        "clone_fidelity_worst_error": (0.0, worst_clone),
        "unot_fidelity_worst_error": (0.0, worst_not),
    }
    return Table(["state", "clone_fidelity", "same_polarization_fraction", "postselection_probability",
                  "unot_fidelity"], rows, metrics)


def _run_noon(p: dict, seed: int) -> Table:
    phis = _grid(p["phi_min"], p["phi_max"], p["points"])
    noon = applications.noon2_fringe(phis)
    single = applications.single_photon_fringe(phis)
    rows = [[float(x), float(a), float(b)] for x, a, b in zip(phis, noon.probability, single.probability)]
    step = float(phis[1] - phis[0])
    metrics = {
        "noon_period": (math.pi, applications.fringe_period(noon)),
        "single_photon_period": (2 * math.pi, applications.fringe_period(single)),
        "grid_step": (step, step),
    }
    return Table(["parameter", "probability", "single_photon_probability"], rows, metrics)


def _make_jsa(p: dict) -> JointSpectralAmplitude:
    if p["jsa"] == "anticorrelated":
        return JointSpectralAmplitude.anticorrelated_gaussian(p["sigma"], p["sigma_pump"], p["grid_size"])
    return JointSpectralAmplitude.separable_gaussian(p["sigma"], p["grid_size"])


def _run_jsa(p: dict, seed: int) -> Table:
    jsa = _make_jsa(p)
    taus = _grid(p["tau_min"], p["tau_max"], p["points"])
    curve = jsa_dip_scan(jsa, p["arm_phase"], taus)
    ref = jsa_dip_scan(jsa, [0.0], taus)
    beta1 = p["arm_phase"][1] if len(p["arm_phase"]) > 1 else 0.0
    w0 = dip_fwhm(ref)
    metrics = {
        "fwhm_relative_change": (0.0, abs(dip_fwhm(curve) - w0) / w0),
        "dip_center": (beta1, dip_center(curve)),
        "grid_step": (float(taus[1] - taus[0]), float(taus[1] - taus[0])),
    }
    return Table(["parameter", "probability"], _curve_rows(curve), metrics)


def _run_triad(p: dict, seed: int) -> Table:
    phases = _grid(p["phase_min"], p["phase_max"], p["points"])
    curve = triad_phase_scan(p["magnitudes"], phases)
    y = curve.probability
    metrics = {"p111_range": (None, float(y.max() - y.min()))}
    if all(m == 1.0 for m in p["magnitudes"]):
        metrics["p111_identical"] = (1 / 3, float(y[0]))
    if all(m == 0.0 for m in p["magnitudes"]):
        metrics["p111_distinguishable"] = (2 / 9, float(y[0]))
    return Table(["parameter", "probability"], _curve_rows(curve), metrics)


def _run_swap(p: dict, seed: int) -> Table:
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for i in range(p["pairs"]):
        d = int(rng.integers(p["min_dim"], p["max_dim"] + 1))
        a = rng.normal(size=d) + 1j * rng.normal(size=d)
        b = rng.normal(size=d) + 1j * rng.normal(size=d)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        eq = klm.destructive_swap_equivalence(a, b)
        worst = max(worst, eq.delta)
        rows.append([i, d, abs(np.vdot(a, b)) ** 2, eq.circuit_fail, eq.hom_coincidence])
    return Table(["pair", "dimension", "overlap_squared", "circuit_fail", "hom_coincidence"], rows,
                 {"max_abs_difference": (0.0, worst)})


_MULTIPORT = {
    "unitary": Param("tritter", str, ("tritter", "balanced-bs", "random")),
    "modes": Param(3, int, doc="size of the random unitary"),
    "input": Param([1, 1, 1], list, item=int),
    "statistics": Param("boson", str, ("boson", "fermion")),
}

EXPERIMENTS = {
    e.name: e for e in [
        Experiment("dip-scan", {
            "sigma": Param(1.0, float), "omega0": Param(0.0, float),
            "tau_min": Param(-4.0, float), "tau_max": Param(4.0, float), "points": Param(81, int),
            "static_overlap": Param(1.0, float, doc="extra delay-independent overlap of the internal states"),
        }, _run_dip, "HOM dip of two identical Gaussian photons versus delay"),
        Experiment("bell-bsm", {}, _run_bsm, "Bell-state measurement statistics for the four Bell states"),
        Experiment("klm-verify", {"random_inputs": Param(20, int)}, _run_klm,
                   "NS gate success on random inputs and CZ/CNOT conditional processes"),
        Experiment("multiport-dist", dict(_MULTIPORT), _run_multiport, "exact output distribution"),
        Experiment("sample", {**_MULTIPORT, "samples": Param(1000, int)}, _run_sample,
                   "seeded samples from the exact output distribution"),
        Experiment("clone-verify", {"states": Param(["H", "V", "D", "A", "R", "L"], list, item=str)}, _run_clone,
                   "HOM cloning and universal-NOT fidelities"),
        Experiment("noon-fringe", {
            "phi_min": Param(0.0, float), "phi_max": Param(4 * math.pi, float), "points": Param(401, int),
        }, _run_noon, "two-photon N00N fringe with a single-photon control"),
        Experiment("jsa-scan", {
            "jsa": Param("anticorrelated", str, ("anticorrelated", "separable")),
            "sigma": Param(1.0, float), "sigma_pump": Param(0.02, float), "grid_size": Param(128, int),
            "arm_phase": Param([0.0, 0.0, 5.0], list, item=float, doc="beta_0, beta_1, ... applied to the first arm"),
            "tau_min": Param(-4.0, float), "tau_max": Param(4.0, float), "points": Param(161, int),
        }, _run_jsa, "HOM dip from a sampled joint spectrum with arm dispersion"),
        Experiment("triad-scan", {
            "magnitudes": Param([0.5, 0.5, 0.5], list, item=float, doc="|r12|, |r23|, |r13|"),
            "phase_min": Param(-math.pi, float), "phase_max": Param(math.pi, float), "points": Param(73, int),
        }, _run_triad, "three-photon coincidence through a tritter versus triad phase"),
        Experiment("swap-equiv", {
            "pairs": Param(100, int), "min_dim": Param(1, int), "max_dim": Param(4, int),
        }, _run_swap, "SWAP-test fail probability against HOM coincidence"),
    ]
}
