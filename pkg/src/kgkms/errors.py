"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KGraphError(Exception):
    """Base class for all errors raised by kgkms."""


class InvalidKGraph(KGraphError):
    """Raised by validation; carries every violated check."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} violation(s): {lines}")


class NotComposable(KGraphError):
    pass


class OutOfRange(KGraphError):
    pass


class CapExceeded(KGraphError):
    pass


class ParseError(KGraphError):
    pass


class BadParams(KGraphError):
    pass


class CommutationFailure(KGraphError):
    pass


class NotIrreducible(KGraphError):
    pass


class NoConvergence(KGraphError):
    def __init__(self, iterations: int, residual: float | None = None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"power iteration did not converge after {iterations} iterations")


class NotCoordinatewiseIrreducible(KGraphError):
    def __init__(self, colors):
        self.colors = tuple(colors)
        super().__init__(f"vertex matrices of colors {list(self.colors)} are not irreducible")


class DegenerateCriticalBeta(KGraphError):
    pass


class InconsistentPartition(KGraphError):
    pass


class HypothesisUnchecked(KGraphError):
    pass


class DegreeMismatch(KGraphError):
    pass


class ConstraintViolated(KGraphError):
    pass


class Diverges(KGraphError):
    pass


class KGraphIsCycle(KGraphError):
    def __init__(self, color: int):
        self.color = color
        super().__init__(f"the coordinate graph of color {color} is a cycle (spectral radius 1)")


class PreconditionViolated(KGraphError):
    pass


class OutOfScope(KGraphError):
    """The requested regime is deliberately not covered (e.g. empty J)."""


class NotExact(KGraphError):
    """An exact-arithmetic request cannot be honoured for these inputs."""
