"""Simulation scenarios: sources, local-scattering mismatch and snapshot streams.

A :class:`Scenario` is an immutable description of one experiment (array,
source directions and powers, mismatch model, seed).  A
:class:`SnapshotSource` realizes the per-trial randomness and emits array
snapshots one at a time; identical scenario + seed gives a bit-identical
stream.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .arrays import ArrayGeometry, steering_matrix, steering_vector


@dataclass(frozen=True)
class NoMismatch:
    """Desired steering vector equals the presumed one exactly."""


@dataclass(frozen=True)
class CoherentScattering:
    """Time-invariant local scattering.

    The effective steering vector is the direct path plus ``num_paths``
    scattered plane waves with random phases.  Path angles and phases are
    drawn once per trial and stay constant over snapshots.
    """

    num_paths: int = 4
    angle_mean_deg: float = 10.0
    angle_std_deg: float = 2.0
    distribution: str = "uniform"  # or "gaussian"

    def __post_init__(self):
        _check_scatter(self)


@dataclass(frozen=True)
class IncoherentScattering:
    """Time-varying local scattering.

    Path angles are drawn once per trial; the per-path complex gains are
    redrawn every snapshot, so the effective steering vector changes from
    snapshot to snapshot.  All ``num_paths + 1`` gains share variance
    ``1/(num_paths + 1)`` so the expected squared norm stays near M.
    """

    num_paths: int = 4
    angle_mean_deg: float = 10.0
    angle_std_deg: float = 2.0
    distribution: str = "uniform"

    def __post_init__(self):
        _check_scatter(self)


MismatchModel = Union[NoMismatch, CoherentScattering, IncoherentScattering]


def _check_scatter(model):
    if model.num_paths < 0:
        raise ValueError(f"num_paths must be >= 0, got {model.num_paths}")
    if model.angle_std_deg < 0:
        raise ValueError(f"angle_std_deg must be >= 0, got {model.angle_std_deg}")
    if model.distribution not in ("uniform", "gaussian"):
        raise ValueError(f"unknown scatter distribution {model.distribution!r}")


@dataclass(frozen=True)
class Scenario:
    """Ground truth for one experiment.

    ``snr_db`` fixes the desired-signal power relative to ``noise_power``;
    ``sir_db`` fixes each interferer's power relative to the desired one.
    """

    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    desired_doa_deg: float = 10.0
    interferer_doas_deg: Tuple[float, ...] = (30.0, 50.0)
    snr_db: float = 10.0
    sir_db: float = 0.0
    noise_power: float = 1.0
    mismatch: MismatchModel = field(default_factory=NoMismatch)
    sector_halfwidth_deg: float = 5.0
    num_snapshots: int = 300
    seed: int = 0

    def __post_init__(self):
        for name, doa in [("desired_doa_deg", self.desired_doa_deg)] + [
            ("interferer_doas_deg", d) for d in self.interferer_doas_deg
        ]:
            if not -90.0 < doa < 90.0:
                raise ValueError(f"{name} must lie in (-90, 90), got {doa}")
        if self.noise_power <= 0:
            raise ValueError(f"noise_power must be positive, got {self.noise_power}")
        if self.sector_halfwidth_deg <= 0:
            raise ValueError(
                f"sector_halfwidth_deg must be positive, got {self.sector_halfwidth_deg}"
            )
        if self.num_snapshots < 1:
            raise ValueError(f"num_snapshots must be >= 1, got {self.num_snapshots}")

    @property
    def desired_power(self) -> float:
        return self.noise_power * 10.0 ** (self.snr_db / 10.0)

    @property
    def interferer_power(self) -> float:
        return self.desired_power / 10.0 ** (self.sir_db / 10.0)


def _complex_gauss(rng: np.random.Generator, power: float, size=None) -> np.ndarray:
    """Circular complex Gaussian samples with E|z|^2 = power."""
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _scatter_angles(model, rng: np.random.Generator) -> np.ndarray:
    if model.distribution == "uniform":
        half = np.sqrt(3.0) * model.angle_std_deg
        return rng.uniform(
            model.angle_mean_deg - half, model.angle_mean_deg + half, model.num_paths
        )
    return rng.normal(model.angle_mean_deg, model.angle_std_deg, model.num_paths)


class SteeringRealization:
    """Per-trial realization of the desired-signal steering vector.

    For :class:`NoMismatch` and :class:`CoherentScattering` the vector
    is fixed over the trial; for :class:`IncoherentScattering` calling
    :meth:`next` consumes RNG draws and returns a fresh vector.
    """

    def __init__(self, scenario: Scenario, rng: np.random.Generator):
        self._scenario = scenario
        geom = scenario.geometry
        direct = steering_vector(scenario.desired_doa_deg, geom)
        model = scenario.mismatch
        self.time_varying = isinstance(model, IncoherentScattering)
        if isinstance(model, NoMismatch):
            self._fixed = direct
        elif isinstance(model, CoherentScattering):
            angles = _scatter_angles(model, rng)
            phases = rng.uniform(0.0, 2.0 * np.pi, model.num_paths)
            a1 = direct.astype(complex)
            for phi, th in zip(phases, angles):
                a1 = a1 + np.exp(1j * phi) * steering_vector(th, geom)
            self._fixed = a1
        elif isinstance(model, IncoherentScattering):
            angles = _scatter_angles(model, rng)
            paths = [direct] + [steering_vector(th, geom) for th in angles]
            self._paths = np.stack(paths, axis=1)  # M x (num_paths+1)
            self._gain_power = 1.0 / (model.num_paths + 1)
            self._fixed = None
        else:
            raise TypeError(f"unknown mismatch model {model!r}")

    def next(self, rng: np.random.Generator) -> np.ndarray:
        if not self.time_varying:
            return self._fixed
        gains = _complex_gauss(rng, self._gain_power, self._paths.shape[1])
        return self._paths @ gains


def realize_mismatch(scenario: Scenario, rng: np.random.Generator) -> SteeringRealization:
    """Draw the per-trial mismatch realization for the desired signal."""
    return SteeringRealization(scenario, rng)


class SnapshotSource:
    """Streams array snapshots ``x(i) = a1*s1 + sum_k a_k*s_k + n``.

    Source symbols are uncorrelated circular complex Gaussians at the
    powers implied by SNR/SIR; noise is white at ``noise_power`` per
    sensor.  The RNG draw order per snapshot is fixed (incoherent path
    gains, desired symbol, interferer symbols, noise) so streams are
    reproducible bit for bit under a fixed seed.
    """

    def __init__(self, scenario: Scenario, seed: Optional[int] = None):
        self.scenario = scenario
        self._rng = np.random.default_rng(scenario.seed if seed is None else seed)
        self.realization = realize_mismatch(scenario, self._rng)
        geom = scenario.geometry
        self._interferers = (
            steering_matrix(scenario.interferer_doas_deg, geom)
            if scenario.interferer_doas_deg
            else np.zeros((geom.num_sensors, 0))
        )
        self.presumed_steering = steering_vector(scenario.desired_doa_deg, geom)
        self._current_a1 = None
        self.count = 0

    @property
    def desired_steering(self) -> np.ndarray:
        """Realized a1 used by the most recent snapshot (None before the first)."""
        return self._current_a1

    def next_snapshot(self) -> np.ndarray:
        sc = self.scenario
        self._current_a1 = self.realization.next(self._rng)
        s1 = _complex_gauss(self._rng, sc.desired_power)
        x = self._current_a1 * s1
        n_int = self._interferers.shape[1]
        if n_int:
            si = _complex_gauss(self._rng, sc.interferer_power, n_int)
            x = x + self._interferers @ si
        x = x + _complex_gauss(self._rng, sc.noise_power, sc.geometry.num_sensors)
        self.count += 1
        return x


def true_inc_matrix(scenario: Scenario) -> np.ndarray:
    """Exact interference-plus-noise covariance of the scenario.

    Sums the rank-one interferer terms plus the white-noise floor; the
    desired signal is excluded.  Hermitian positive definite.
    """
    geom = scenario.geometry
    m = geom.num_sensors
    r = scenario.noise_power * np.eye(m, dtype=complex)
    for doa in scenario.interferer_doas_deg:
        a = steering_vector(doa, geom)
        r += scenario.interferer_power * np.outer(a, a.conj())
    return r
