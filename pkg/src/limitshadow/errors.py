"""Exception and warning types raised across the package."""


class ShadowError(Exception):
    """Base class for every error raised by limitshadow."""


# systems
class NotUnimodular(ShadowError):
    pass


class NotHyperbolic(ShadowError):
    pass


class DeadSymbol(ShadowError):
    pass


class BadParameter(ShadowError):
    pass


class DimensionMismatch(ShadowError):
    pass


# pseudo-orbits
class BadWindow(ShadowError):
    pass


class Inconclusive(ShadowError):
    pass


# shadowing
class NotMixing(ShadowError):
    pass


class RepairOverlap(ShadowError):
    def __init__(self, message, positions=()):
        super().__init__(message)
        self.positions = tuple(positions)


class TruncationInsufficient(ShadowError):
    pass


class SpacingTooSmall(ShadowError):
    pass


class NoLatticeOffset(ShadowError):
    pass


class GridTooCoarse(ShadowError):
    pass


class UnsupportedSystem(ShadowError):
    pass


class PipelineError(ShadowError):
    """A step of the two-sided limit shadowing pipeline failed.

    ``step`` is the 1-based pipeline step and ``trace`` the partial
    :class:`~limitshadow.shadowing.PipelineTrace` collected so far.
    """

    def __init__(self, step, message, trace=None):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.trace = trace


# analysis
class SearchExhausted(ShadowError):
    pass


class BoundTooLarge(ShadowError):
    pass


class NonDecayingInput(UserWarning):
    """Warned when a solver is fed tails whose errors are not known to vanish."""


# cli
class UnknownSuite(BadParameter):
    pass
