"""Ideal number-resolving detection and post-selected results."""

from __future__ import annotations

from dataclasses import dataclass

from homsim.fock import ModeSpace, SparseState


@dataclass(frozen=True)
class DetectionPattern:
    """Clicks as sorted ``(port, internal label, count)`` triples, counts >= 1."""

    clicks: tuple

    def __post_init__(self):
        clicks = tuple(sorted((int(p), int(l), int(c)) for p, l, c in self.clicks))
        if any(c < 1 for _, _, c in clicks):
            raise ValueError(f"click counts must be >= 1, got {clicks}")
        object.__setattr__(self, "clicks", clicks)

    @classmethod
    def from_occupation(cls, occ, space: ModeSpace, ports=None) -> "DetectionPattern":
        k = space.internal_dim
        ports = range(space.external_ports) if ports is None else ports
        return cls(tuple((p, l, occ[p * k + l]) for p in ports for l in range(k) if occ[p * k + l]))

    @property
    def total(self) -> int:
        return sum(c for _, _, c in self.clicks)

    @property
    def ports(self) -> set:
        return {p for p, _, _ in self.clicks}

    @property
    def labels(self) -> set:
        return {l for _, l, _ in self.clicks}

    def __str__(self) -> str:
        return " ".join(f"{p}:{l}x{c}" for p, l, c in self.clicks)


@dataclass(frozen=True)
class PostselectedResult:
    """Conditional output of a heralded circuit.

    ``state`` is the normalised conditional state, or ``None`` when the
    herald has zero probability. ``herald`` is the detected occupation of
    the heralding modes.
    """

    state: SparseState | None
    success_probability: float
    herald: tuple = ()

    @property
    def succeeded(self) -> bool:
        return self.state is not None

    @classmethod
    def from_branch(cls, branch: SparseState, herald: tuple = (), tol: float = 1e-12) -> "PostselectedResult":
        """Wrap an unnormalised post-selected branch; its squared norm is the success probability."""
        p = branch.norm ** 2
        if p <= tol:
            return cls(None, 0.0, herald)
        return cls(branch * (1.0 / branch.norm), p, herald)
