"""Exception types shared across the simulator."""


class CapacityError(RuntimeError):
    """Raised when a state would exceed the exact-simulation bounds."""


class ShapeError(ValueError):
    """Raised when states or matrices live on incompatible mode spaces."""


class NumericalGuardError(RuntimeError):
    """Raised when a discretisation or tolerance guard is violated."""
