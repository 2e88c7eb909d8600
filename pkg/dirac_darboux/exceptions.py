"""
Custom exceptions for dirac-darboux.
"""


class DiracDarbouxError(Exception):
    """Base exception for all dirac-darboux errors."""

    pass


class SingularMatrix(DiracDarbouxError):
    """Raised when a 2x2 matrix is too close to singular to invert."""

    pass


class GridTooSmall(DiracDarbouxError):
    """Raised when a grid has fewer nodes than a stencil needs."""

    pass


class DomainMismatch(DiracDarbouxError):
    """Raised when a grid or evaluation point lies outside a potential's domain."""

    pass


class ZeroField(DiracDarbouxError):
    """Raised when a residual is normalized by a field that vanishes identically."""

    pass


class InvalidParams(DiracDarbouxError, ValueError):
    """Raised when model or seed parameters violate their constraints."""

    pass


class NonConvergence(DiracDarbouxError):
    """Raised when a series fails to converge within its term cap."""

    pass


class BranchInvalid(DiracDarbouxError):
    """Raised when the chosen sign branch of the energy formula is inconsistent."""

    pass


class InvalidLevel(DiracDarbouxError):
    """Raised when a Coulomb level cannot be turned into a closed-form solution."""

    pass


class IntegrationOverflow(DiracDarbouxError):
    """Raised when a shooting integration blows up."""

    pass


class DegenerateSeeds(DiracDarbouxError):
    """Raised when both seeds share the same energy."""

    pass


class SingularSeedMatrix(SingularMatrix):
    """Raised when det u vanishes at a grid node.

    Attributes:
        x: Position where the determinant test failed.
    """

    def __init__(self, message: str, x: float) -> None:
        super().__init__(message)
        self.x = x


class SeedNotEigen(DiracDarbouxError):
    """Raised when a seed does not solve the eigen-equation it claims.

    Attributes:
        residual: The measured normalized eigen residual.
    """

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class EmptyTestSet(DiracDarbouxError):
    """Raised when a verification check receives no test fields."""

    pass


class ConfigError(DiracDarbouxError):
    """Raised when a job configuration cannot be loaded or assembled."""

    pass


class VerificationFailed(DiracDarbouxError):
    """Raised when a residual report exceeds its threshold."""

    pass
