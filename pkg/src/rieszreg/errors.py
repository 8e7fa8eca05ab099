"""Exception types shared across the package."""


class RieszRegError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteIntegrandError(RieszRegError):
    """An integrand returned a non-finite value.

    The offending abscissa is stored in :attr:`abscissa`.
    """

    def __init__(self, abscissa):
        self.abscissa = float(abscissa)
        super().__init__(f"integrand is non-finite at t={self.abscissa!r}")


class QuadratureError(RieszRegError):
    """A quadrature computation failed; carries optional entry indices."""

    def __init__(self, message, indices=None):
        self.indices = indices
        super().__init__(message if indices is None else f"{message} (entry {indices})")


class DegenerateProblemError(RieszRegError):
    """The Gram matrix has no positive eigenvalue; the problem is degenerate."""


class InsufficientCurveError(RieszRegError):
    """Fewer than three usable points are available for corner detection."""
