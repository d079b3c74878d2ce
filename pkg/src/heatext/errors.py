"""Exception types shared across the package."""


class HeatextError(Exception):
    """Base class for all errors raised by heatext."""


class WindowExceeded(HeatextError):
    """A result would need a generator outside the current truncation window."""


class DepthExhausted(HeatextError):
    """A pseudo-differential order below the certified tail depth was requested."""


class NonzeroResidual(HeatextError):
    """An identity that must vanish left a nonzero component.

    ``location`` names the offending key (basis element, wedge key, operator
    order, ...) and ``residual`` holds the nonzero value found there.
    """

    def __init__(self, message, location=None, residual=None):
        super().__init__(message)
        self.location = location
        self.residual = residual


class MissingDifferentialRule(HeatextError):
    """exterior_d met a coefficient generator with no differential rule."""


class MissingFlow(HeatextError):
    """A time derivative was requested for a generator not covered by the flow table."""


class NonIntegralBracket(HeatextError):
    """A KP bracket had a nonzero coefficient at a nonnegative order."""


class UnknownSymbol(HeatextError):
    """The expression parser met an identifier it does not know."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ExprSyntaxError(HeatextError):
    """Malformed expression; ``offset`` is the byte offset of the failure."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
