"""Exception hierarchy shared by the analytic and Monte Carlo modules."""


class ChannelModelError(Exception):
    """Base class for all errors raised by leoscatter."""


class EvaluationError(ChannelModelError, ValueError):
    """An integrand returned a non-finite value at a quadrature node."""

    def __init__(self, node, value):
        self.node = node
        self.value = value
        super().__init__(f"integrand is not finite at node {node!r} (value {value!r})")


class ConvergenceError(ChannelModelError, ArithmeticError):
    """Quadrature refinement or root search failed to converge."""

    def __init__(self, message, estimates=None):
        self.estimates = estimates
        super().__init__(message)


class BracketError(ChannelModelError, ValueError):
    """The target function does not change sign over the supplied bracket."""


class InfeasibleGeometryError(ChannelModelError, ValueError):
    """Requested axes cannot satisfy the height constraint."""


class DegenerateAngleError(InfeasibleGeometryError):
    """Closed form is singular at this elevation (use the zenith limit)."""


class UnreachableTargetError(ConvergenceError):
    """No geometry in the search bracket attains the requested delay spread.

    ``attainable`` holds the (min, max) delay spread, in seconds, seen while
    scanning the bracket.
    """

    def __init__(self, message, attainable=None):
        self.attainable = attainable
        super().__init__(message)


class UnsupportedTransformError(ChannelModelError, ValueError):
    """The (u, v) change of variables needs an azimuth support symmetric in alpha."""


class ConsistencyError(ChannelModelError, ArithmeticError):
    """A computed statistic violated an identity it must satisfy (e.g. variance < 0)."""
