"""Exception types shared across the package."""


class GeoPursuitError(Exception):
    """Base class for all package errors."""


class InvalidDomainError(GeoPursuitError):
    """Domain parameters violate a construction invariant."""


class InvalidPointError(GeoPursuitError):
    """Point does not belong to the domain; message names the violated constraint."""


class AmbiguityError(GeoPursuitError):
    """Several geodesics tie and the tie-break policy forbids choosing."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class DegenerateError(GeoPursuitError):
    """Degenerate input: repeated points, zero-length path, undefined direction."""


class RangeError(GeoPursuitError):
    """Argument outside its admissible range."""


class ConfigurationError(GeoPursuitError):
    """Bad configuration value; message carries the field path where possible."""


class UnsupportedDomainError(GeoPursuitError):
    """Operation not defined on this domain kind."""


class ModelTriangleError(GeoPursuitError):
    """No model triangle: side lengths violate the triangle inequality."""


class PerimeterError(ModelTriangleError):
    """No model triangle: perimeter too large for the positive curvature bound."""


class HypothesisError(GeoPursuitError):
    """A monitored bound's hypothesis fails, so the bound does not apply."""


class FitError(GeoPursuitError):
    """Growth-exponent fit impossible (nonpositive samples, zero displacement)."""


class PolicyViolationError(GeoPursuitError):
    """Evader policy proposed an illegal move; carries the offending step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class IncompleteTraceError(GeoPursuitError):
    """Trace is missing the columns a checker needs."""


class InsufficientDataError(GeoPursuitError):
    """Too few samples for the requested statistic."""


class CaptureSignal(GeoPursuitError):
    """Raised when a pursuit step is requested at or inside capture range.

    This is an outcome signal, not a failure: the run loop treats it as the
    end of the game.
    """

    def __init__(self, separation, step=None):
        super().__init__("capture condition met at separation %r" % (separation,))
        self.separation = separation
        self.step = step
