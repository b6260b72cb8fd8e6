"""Exception types shared across the package."""


class BpscopeError(Exception):
    """Base class for all package errors."""


class DimensionError(BpscopeError):
    """Operands act on different qubit counts or an index is out of range."""


class ConfigError(BpscopeError):
    """Invalid configuration; `field` holds a dotted path into the config."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class AssumptionViolation(BpscopeError):
    """A computation that requires 2-design blocks met a structured block."""


class CoverageError(BpscopeError):
    """The circuit support does not cover the observable support."""


class NotAnEdgeError(BpscopeError):
    """Two blocks have empty connecting support and cannot form an edge."""


class LayoutError(BpscopeError):
    """The circuit does not have the layout required by a specialised bound."""
