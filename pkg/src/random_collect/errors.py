"""Exception types raised by the library."""


class TopologyError(ValueError):
    """Invalid topology parameters, or a graph that violates the network model."""


class SingularSystemError(ArithmeticError):
    """A linear system could not be solved (usually a disconnected input)."""


class BruteForceLimitError(ValueError):
    """Subset enumeration requested above the configured node cap."""


class NonReversibleError(ValueError):
    """Spectral analysis requested for a chain that fails detailed balance."""
