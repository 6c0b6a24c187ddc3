"""Uniform linear array geometry and steering vectors."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array described by sensor count and element spacing.

    Parameters
    ----------
    num_sensors : int
        Number of array elements, at least 2.
    spacing : float
        Element spacing as a fraction of the carrier wavelength
        (0.5 is the standard half-wavelength layout).
    """

    num_sensors: int = 12
    spacing: float = 0.5

    def __post_init__(self):
        if self.num_sensors < 2:
            raise ValueError(f"num_sensors must be >= 2, got {self.num_sensors}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")


def steering_vector(theta_deg: float, geom: ArrayGeometry) -> np.ndarray:
    """Complex array response for a plane wave from direction ``theta_deg``.

    Element ``m`` (0-indexed) carries phase ``2*pi*spacing*m*sin(theta)``,
    so the Euclidean norm is exactly ``sqrt(num_sensors)``.

    Parameters
    ----------
    theta_deg : float
        Direction of arrival in degrees, within (-90, 90).
    geom : ArrayGeometry

    Returns
    -------
    np.ndarray
        Complex vector of length ``geom.num_sensors``.
    """
    theta = np.deg2rad(theta_deg)
    m = np.arange(geom.num_sensors)
    return np.exp(2j * np.pi * geom.spacing * m * np.sin(theta))


def steering_matrix(thetas_deg, geom: ArrayGeometry) -> np.ndarray:
    """Stack steering vectors for several directions into an M x K matrix."""
    thetas = np.deg2rad(np.atleast_1d(np.asarray(thetas_deg, dtype=float)))
    m = np.arange(geom.num_sensors)
    return np.exp(2j * np.pi * geom.spacing * np.outer(m, np.sin(thetas)))
