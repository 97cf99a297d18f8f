"""Exception types shared by all layers."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConsistencyError(ArithmeticError):
    """Two routes that must agree exactly did not."""


class NumericError(ArithmeticError):
    """A truncated series or quadrature failed to reach its tolerance.

    ``partial`` carries whatever was computed before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigurationError(LookupError):
    """A required input (e.g. a Dirichlet constant) was not supplied."""
