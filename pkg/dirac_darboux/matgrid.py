"""
Real 2x2 matrix algebra, uniform grids and sampled fields.

Every matrix- or spinor-valued quantity in the package is a numpy stack:
a matrix field is an ``(n, 2, 2)`` float64 array and a spinor field an
``(n, 2)`` array, one entry per grid node. The imaginary Pauli matrix never
appears; its role is played by the real matrix ``J = i*sigma_2``.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dirac_darboux.exceptions import GridTooSmall, InvalidParams, SingularMatrix

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
Evaluator = Callable[[Array], Array]

SINGULARITY_THRESHOLD = 1e-12
MIN_GRID_POINTS = 9
FIELD_AGREEMENT = 1e-13


# ============================================================================
# Constants
# ============================================================================


def _constant(rows: list[list[float]]) -> Array:
    m = np.array(rows, dtype=np.float64)
    m.flags.writeable = False
    return m


IDENTITY = _constant([[1.0, 0.0], [0.0, 1.0]])
SIGMA1 = _constant([[0.0, 1.0], [1.0, 0.0]])
SIGMA3 = _constant([[1.0, 0.0], [0.0, -1.0]])
J = _constant([[0.0, 1.0], [-1.0, 0.0]])


# ============================================================================
# Matrix algebra (single matrices and (n, 2, 2) stacks alike)
# ============================================================================


def mat2_det(m: ArrayLike) -> Array:
    """Determinant of a 2x2 matrix or of every matrix in a stack."""
    m = np.asarray(m, dtype=np.float64)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def mat2_inv(m: ArrayLike) -> Array:
    """
    Closed-form inverse of a 2x2 matrix or a stack of them.

    The singularity test is relative to the matrix scale:
    ``|det m| > 1e-12 * max(1, ||m||_inf ** 2)``.

    Raises:
        SingularMatrix: If any matrix in the stack fails the test.
    """
    m = np.asarray(m, dtype=np.float64)
    det = mat2_det(m)
    norm_inf = np.max(np.sum(np.abs(m), axis=-1), axis=-1)
    threshold = SINGULARITY_THRESHOLD * np.maximum(1.0, norm_inf**2)
    bad = ~(np.abs(det) > threshold)
    if np.any(bad):
        raise SingularMatrix(
            f"matrix is singular: |det| = {np.min(np.abs(det))!r} below threshold"
        )

    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    adj[..., 1, 1] = m[..., 0, 0]
    return adj / det[..., None, None]


def commutator(a: ArrayLike, b: ArrayLike) -> Array:
    """Return ``ab - ba``; broadcasts over stacks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.matmul(a, b) - np.matmul(b, a)


def symmetric_stack(a11: ArrayLike, a12: ArrayLike, a22: ArrayLike) -> Array:
    """Assemble ``(n, 2, 2)`` symmetric matrices; the off-diagonals share one array."""
    a11, a12, a22 = np.broadcast_arrays(
        np.asarray(a11, dtype=np.float64),
        np.asarray(a12, dtype=np.float64),
        np.asarray(a22, dtype=np.float64),
    )
    out = np.empty(a11.shape + (2, 2), dtype=np.float64)
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a12
    out[..., 1, 1] = a22
    return out


def matvec(m: Array, psi: Array) -> Array:
    """Apply a matrix stack (or one matrix) to a spinor stack node by node."""
    if m.ndim == 2:
        return psi @ m.T
    return np.einsum("nij,nj->ni", m, psi)


def as_points(x: ArrayLike) -> Array:
    """Coerce positions to a 1-D float64 array."""
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


# ============================================================================
# Grid
# ============================================================================


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform 1-D grid.

    Attributes:
        x_min: Left end point.
        x_max: Right end point.
        n_points: Number of nodes, at least 9.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < MIN_GRID_POINTS:
            raise GridTooSmall(f"grid needs at least {MIN_GRID_POINTS} points, got {self.n_points}")
        if not self.x_min < self.x_max:
            raise InvalidParams(f"grid requires x_min < x_max, got {self.x_min} >= {self.x_max}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def nodes(self) -> Array:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self) -> "GridSpec":
        """Same interval with half the spacing."""
        return GridSpec(self.x_min, self.x_max, 2 * self.n_points - 1)

    def __str__(self) -> str:
        return f"{self.x_min!r}:{self.x_max!r}:{self.n_points}"

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``MIN:MAX:N``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidParams(f"grid must look like MIN:MAX:N, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as e:
            raise InvalidParams(f"invalid grid {text!r}: {e}") from e


# ============================================================================
# Derivatives
# ============================================================================


class DerivativeMode(str, Enum):
    """How first derivatives of sampled fields are obtained."""

    ANALYTIC = "analytic"
    FD2 = "fd2"
    FD4 = "fd4"

    @property
    def fd_order(self) -> int:
        """Finite-difference order used directly or as the analytic fallback."""
        return 2 if self is DerivativeMode.FD2 else 4

    @property
    def halfwidth(self) -> int:
        """Nodes at each end touched by one-sided stencils."""
        return 1 if self is DerivativeMode.FD2 else 2

    def margin(self, depth: int = 1) -> int:
        """Boundary nodes excluded from residual norms after ``depth`` nested derivatives."""
        return depth * self.halfwidth


def _fd4(values: Array, h: float) -> Array:
    out = np.empty_like(values)
    out[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
    out[0] = (
        -25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3] - 3.0 * values[4]
    ) / (12.0 * h)
    out[1] = (
        -3.0 * values[0] - 10.0 * values[1] + 18.0 * values[2] - 6.0 * values[3] + values[4]
    ) / (12.0 * h)
    out[-1] = (
        25.0 * values[-1]
        - 48.0 * values[-2]
        + 36.0 * values[-3]
        - 16.0 * values[-4]
        + 3.0 * values[-5]
    ) / (12.0 * h)
    out[-2] = (
        3.0 * values[-1] + 10.0 * values[-2] - 18.0 * values[-3] + 6.0 * values[-4] - values[-5]
    ) / (12.0 * h)
    return out


def fd_values(values: Array, h: float, order: int) -> Array:
    """Finite-difference derivative along axis 0 of a sampled stack."""
    if values.shape[0] < MIN_GRID_POINTS:
        raise GridTooSmall(f"finite differences need at least {MIN_GRID_POINTS} nodes")
    if order == 2:
        return np.asarray(np.gradient(values, h, axis=0, edge_order=2))
    if order == 4:
        return _fd4(values, h)
    raise InvalidParams(f"finite-difference order must be 2 or 4, got {order}")


# ============================================================================
# Sampled fields
# ============================================================================


@dataclass(frozen=True)
class SampledField:
    """
    Matrix- or spinor-valued function sampled on a grid.

    Attributes:
        grid: Grid the values live on.
        values: ``(n, 2)`` spinor or ``(n, 2, 2)`` matrix samples.
        evaluator: Optional exact evaluator ``x -> values``.
        derivative: Optional exact first-derivative evaluator.
        second_derivative: Optional exact second-derivative evaluator.
    """

    grid: GridSpec
    values: Array
    evaluator: Evaluator | None = None
    derivative: Evaluator | None = None
    second_derivative: Evaluator | None = None

    def __post_init__(self) -> None:
        if self.values.shape[0] != self.grid.n_points:
            raise InvalidParams(
                f"field has {self.values.shape[0]} samples for a {self.grid.n_points}-point grid"
            )
        if self.values.shape[1:] not in ((2,), (2, 2)):
            raise InvalidParams(f"unsupported field shape {self.values.shape}")
        if self.evaluator is not None:
            exact = np.asarray(self.evaluator(self.grid.nodes), dtype=np.float64)
            scale = np.maximum(1.0, np.abs(exact))
            if not np.all(np.abs(self.values - exact) <= FIELD_AGREEMENT * scale):
                raise InvalidParams("sampled values disagree with the attached evaluator")

    @classmethod
    def from_evaluator(
        cls,
        grid: GridSpec,
        evaluator: Evaluator,
        derivative: Evaluator | None = None,
        second_derivative: Evaluator | None = None,
    ) -> "SampledField":
        """Sample an exact evaluator on every node, keeping it attached."""
        values = np.asarray(evaluator(grid.nodes), dtype=np.float64)
        return cls(grid, values, evaluator, derivative, second_derivative)

    @property
    def is_spinor(self) -> bool:
        return self.values.ndim == 2

    def derivative_values(self, mode: DerivativeMode) -> Array:
        """First derivative at the nodes: exact in analytic mode when available."""
        if mode is DerivativeMode.ANALYTIC and self.derivative is not None:
            return np.asarray(self.derivative(self.grid.nodes), dtype=np.float64)
        return fd_values(self.values, self.grid.spacing, mode.fd_order)


def fd_derivative(f: SampledField, order: int) -> SampledField:
    """
    Finite-difference derivative of a sampled field.

    Central differences of the stated order in the interior, one-sided stencils
    of the same order at the boundary nodes. The result has no evaluator.

    Raises:
        GridTooSmall: Fewer than 9 nodes.
    """
    return SampledField(f.grid, fd_values(f.values, f.grid.spacing, order))


def max_norm(values: Array, margin: int = 0) -> float:
    """Max-abs entry over nodes ``margin .. n - margin - 1``."""
    n = values.shape[0]
    if margin:
        values = values[margin : n - margin]
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values)))
