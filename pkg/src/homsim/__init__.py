"""Simulation of multi-photon interference in linear optics.

Sparse Fock states, passive interferometers, wavepacket distinguishability,
Bell-state analysis, post-selected gates and the applications built on them.
"""

__version__ = "0.1.0"

from homsim.errors import CapacityError, NumericalGuardError, ShapeError
from homsim.fock import (
    ModeSpace,
    SparseState,
    Statistics,
    apply_annihilation,
    apply_creation,
    inner_product,
    normalize,
    port_distribution,
    tensor_product,
)
from homsim.interferometer import (
    ModeUnitary,
    apply_unitary,
    balanced_bs,
    beamsplitter,
    compose,
    output_distribution,
    permanent,
    phase_shifter,
    random_unitary,
    sample,
    transition_amplitude,
    tritter,
)
from homsim.wavepacket import Wavepacket, dip_scan, hom_coincidence, overlap, visibility

__all__ = [
    "CapacityError", "NumericalGuardError", "ShapeError",
    "ModeSpace", "SparseState", "Statistics",
    "apply_annihilation", "apply_creation", "inner_product", "normalize", "port_distribution", "tensor_product",
    "ModeUnitary", "apply_unitary", "balanced_bs", "beamsplitter", "compose", "output_distribution",
    "permanent", "phase_shifter", "random_unitary", "sample", "transition_amplitude", "tritter",
    "Wavepacket", "dip_scan", "hom_coincidence", "overlap", "visibility",
]
