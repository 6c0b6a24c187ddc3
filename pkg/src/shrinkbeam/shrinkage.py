"""Sector subspace projection and shrinkage of the sample correlation vector.

This is the estimation core shared by the batch and adaptive beamformers:
a running cross-correlation between array data and beamformer output is
shrunk towards its spatial mean (an oracle-approximating-shrinkage style
coefficient), projected onto the subspace spanned by the principal
eigenvectors of an angular-sector covariance, and normalized to give the
desired-signal steering estimate.  A per-snapshot power estimate for the
desired signal completes the pipeline.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .arrays import ArrayGeometry, steering_matrix

RHO_DENOM_FLOOR = 1e-15
PROJECTION_FLOOR = 1e-15


class EigendecompositionError(RuntimeError):
    """Raised when the sector eigen-decomposition fails to converge."""


def sector_covariance(
    center_deg: float,
    halfwidth_deg: float,
    geom: ArrayGeometry,
    grid_points: int = 180,
) -> np.ndarray:
    """Integral of a(theta) a(theta)^H over the angular sector.

    Composite-trapezoid quadrature in radians on ``grid_points`` samples
    across ``[center - halfwidth, center + halfwidth]``.  The result is
    Hermitian PSD with trace exactly ``num_sensors * sector width``.
    """
    if halfwidth_deg <= 0:
        raise ValueError(f"halfwidth_deg must be positive, got {halfwidth_deg}")
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    lo = np.deg2rad(center_deg - halfwidth_deg)
    hi = np.deg2rad(center_deg + halfwidth_deg)
    grid = np.linspace(lo, hi, grid_points)
    h = (hi - lo) / (grid_points - 1)
    weights = np.full(grid_points, h)
    weights[0] = weights[-1] = h / 2.0
    a = steering_matrix(np.rad2deg(grid), geom)  # M x G
    c = (a * weights) @ a.conj().T
    return 0.5 * (c + c.conj().T)


@dataclass(frozen=True)
class SectorProjector:
    """Orthogonal projector onto the sector's principal subspace."""

    matrix: np.ndarray
    sector_matrix: np.ndarray
    subspace_dim: int
    center_deg: float
    halfwidth_deg: float

    @classmethod
    def build(
        cls,
        center_deg: float,
        halfwidth_deg: float,
        geom: ArrayGeometry,
        subspace_dim: int = 3,
        grid_points: int = 180,
    ) -> "SectorProjector":
        """Form P from the ``subspace_dim`` principal eigenvectors of the sector matrix."""
        m = geom.num_sensors
        if not 1 <= subspace_dim <= m:
            raise ValueError(f"subspace_dim must be in 1..{m}, got {subspace_dim}")
        c = sector_covariance(center_deg, halfwidth_deg, geom, grid_points)
        try:
            _, vecs = np.linalg.eigh(c)
        except np.linalg.LinAlgError as exc:
            raise EigendecompositionError(f"sector eigendecomposition failed: {exc}") from exc
        principal = vecs[:, -subspace_dim:]
        p = principal @ principal.conj().T
        return cls(
            matrix=p,
            sector_matrix=c,
            subspace_dim=subspace_dim,
            center_deg=center_deg,
            halfwidth_deg=halfwidth_deg,
        )

    def project(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def build_projector(sector_matrix: np.ndarray, subspace_dim: int) -> np.ndarray:
    """Projector from an already-computed Hermitian sector matrix."""
    m = sector_matrix.shape[0]
    if not 1 <= subspace_dim <= m:
        raise ValueError(f"subspace_dim must be in 1..{m}, got {subspace_dim}")
    try:
        _, vecs = np.linalg.eigh(sector_matrix)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"sector eigendecomposition failed: {exc}") from exc
    principal = vecs[:, -subspace_dim:]
    return principal @ principal.conj().T


@dataclass
class ShrinkageState:
    """Running shrinkage of the sample correlation vector (SCV).

    ``scv`` is the running mean of x(i) y*(i); ``shrunk`` is its convex
    combination with the flat vector ``mean * ones``.  The coefficient
    ``rho`` minimizes a mean-square-error criterion over successive
    estimates and is clamped to [0, 1] (``rho_raw`` keeps the unclamped
    value for diagnostics).
    """

    dim: int
    count: int = 0
    scv: np.ndarray = None
    shrunk: np.ndarray = None
    mean: complex = 0.0 + 0.0j
    rho: float = 0.0
    rho_raw: float = 0.0
    rho_degenerate: bool = False
    _prev_scv: np.ndarray = field(default=None, repr=False)
    _prev_shrunk: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.scv is None:
            self.scv = np.zeros(self.dim, dtype=complex)
        if self.shrunk is None:
            self.shrunk = np.zeros(self.dim, dtype=complex)

    def update_scv(self, x: np.ndarray, y: complex) -> np.ndarray:
        """Fold one snapshot into the running correlation vector.

        Running-mean recursion, identical to the batch average of
        x(k) y*(k) over k = 1..count.
        """
        self._prev_scv = self.scv
        self._prev_shrunk = self.shrunk
        self.count += 1
        i = self.count
        self.scv = ((i - 1) * self.scv + x * np.conj(y)) / i
        return self.scv

    def shrink(self) -> Tuple[float, np.ndarray]:
        """Shrink the current SCV towards its spatial mean.

        Returns the clamped coefficient and the shrunk vector.  The first
        snapshot initializes the shrunk vector to the raw SCV (coefficient
        fixed at 0).  A vanishing denominator in the coefficient rule falls
        back to the raw SCV and sets :attr:`rho_degenerate`.
        """
        m = self.dim
        i = self.count
        self.mean = complex(self.scv.sum() / m)
        self.rho_degenerate = False
        if i <= 1:
            self.rho_raw = 0.0
            self.rho = 0.0
            self.shrunk = self.scv.copy()
            return self.rho, self.shrunk
        corr = float(np.vdot(self._prev_shrunk, self._prev_scv).real)
        flat = float(abs(self._prev_shrunk.sum()) ** 2)
        denom = (i - 2.0 / m) * corr + (1.0 - i / m) * flat
        if abs(denom) < RHO_DENOM_FLOOR:
            self.rho_raw = 0.0
            self.rho = 0.0
            self.rho_degenerate = True
        else:
            self.rho_raw = ((1.0 - 2.0 / m) * corr + flat) / denom
            self.rho = min(max(self.rho_raw, 0.0), 1.0)
        # fused form keeps the convex-combination identity exact in floats
        self.shrunk = self.scv + self.rho * (self.mean - self.scv)
        return self.rho, self.shrunk


def estimate_steering(
    projector: SectorProjector,
    shrunk: np.ndarray,
    previous: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, bool]:
    """Unit-norm steering estimate from the sector-projected shrunk SCV.

    Returns ``(estimate, held)``; ``held`` is True when the projection is
    numerically null and the previous estimate was kept instead.
    """
    projected = projector.project(shrunk)
    norm = np.linalg.norm(projected)
    if norm < PROJECTION_FLOOR:
        if previous is None:
            raise ValueError("null projection and no previous steering estimate")
        return previous, True
    return projected / norm, False


def estimate_power(a_hat: np.ndarray, x: np.ndarray, noise_power: float) -> float:
    """Desired-signal power estimate from one snapshot, clamped at zero.

    With a unit-norm steering estimate this reduces to
    ``|a_hat^H x|^2 - noise_power``; the estimate then scales as M times
    the physical symbol power because the unit-norm convention absorbs
    the array gain.
    """
    gain = float(abs(np.vdot(a_hat, a_hat)))
    raw = (abs(np.vdot(a_hat, x)) ** 2 - gain * noise_power) / gain**2
    return max(float(raw), 0.0)
