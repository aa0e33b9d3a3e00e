"""Exception hierarchy for bcnopt."""


class BCNError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(BCNError, ValueError):
    """Operands of a semi-tensor product have incompatible shapes."""


class ExprSyntaxError(BCNError, ValueError):
    """A Boolean expression could not be parsed.

    Attributes
    ----------
    position : int
        Zero-based character offset of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnboundVariableError(BCNError, NameError):
    """An expression references a variable missing from the environment."""

    def __init__(self, name):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class ValidationError(BCNError, ValueError):
    """A network, constraint set or configuration violates an invariant."""


class NetworkFormatError(BCNError, ValueError):
    """A network file is malformed (bad JSON, missing or mistyped field)."""


class InfeasibleProblemError(BCNError):
    """No state can sustain indefinite evolution under the constraints."""


class OracleRefusedError(BCNError):
    """Brute-force enumeration would exceed its policy budget."""
