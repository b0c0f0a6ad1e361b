"""Exception hierarchy.

Three families, matching the CLI exit codes: bad input (2), numerically
degenerate evaluation (3), and internal inconsistency (4).
"""

from __future__ import annotations


class AnnularGreenError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(AnnularGreenError, ValueError):
    """Arguments outside the documented domain."""


class NonPositiveArgument(InvalidInput):
    pass


class OrderOutOfRange(InvalidInput):
    pass


class ArgumentOverflow(InvalidInput):
    """Bessel argument too large, or Y_l overflows double precision."""


class NonPositiveRadius(InvalidInput):
    pass


class InvalidProfile(InvalidInput):
    pass


class NotDiffusionRegime(InvalidInput):
    """E <= V0: the bound-state regime, which is not implemented."""


class CrossRegionUnsupported(InvalidInput):
    """Source and observer radii lie in different regions."""


class DegenerateRange(InvalidInput):
    pass


class DegenerateNumerics(AnnularGreenError, ArithmeticError):
    """Evaluation is ill-conditioned; the result would be meaningless."""


class NearPole(DegenerateNumerics):
    """A denominator of the coefficient cascade is (relatively) zero.

    ``quantity`` names the denominator that degenerated, e.g. ``"g"`` or
    ``"T"``; ``ratio`` is |q| divided by the magnitude of its terms.
    """

    def __init__(self, quantity: str, ratio: float, context: str = ""):
        self.quantity = quantity
        self.ratio = ratio
        msg = f"near-pole: {quantity} degenerate (relative size {ratio:.3e})"
        if context:
            msg += f" [{context}]"
        super().__init__(msg)


class WronskianDegenerate(DegenerateNumerics):
    pass


class StepFailure(DegenerateNumerics):
    pass


class NoConvergence(DegenerateNumerics):
    pass


class InternalConsistencyError(AnnularGreenError, RuntimeError):
    """Two independent routes to the same quantity disagree."""
