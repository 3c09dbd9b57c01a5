"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Invalid shape description or an operation unsupported for a shape kind."""


class NumericalFailure(RuntimeError):
    """A quadrature, fit, optimizer or Monte Carlo run did not meet its tolerance."""
