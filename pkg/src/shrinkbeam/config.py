"""Experiment configuration: key-value files with flag overrides.

The file format is one ``key = value`` pair per line; ``#`` starts a
comment and blank lines are ignored.  Unknown keys are rejected.  An
empty file yields the default experiment (12-sensor half-wavelength
array, desired source at 10 degrees, interferers at 30 and 50 degrees,
SIR 0 dB, a +/-5 degree sector, 300 snapshots, 100 trials, forgetting
0.95).  The step-bound constant defaults to 0.2, or 0.3 under
incoherent scattering, unless set explicitly.
"""

from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

from .arrays import ArrayGeometry
from .beamformers import BeamformerSettings, implemented_algorithms
from .scenario import (
    CoherentScattering,
    IncoherentScattering,
    NoMismatch,
    Scenario,
)


class ConfigError(ValueError):
    """Configuration file or override rejected; message names the key."""


@dataclass(frozen=True)
class RunConfig:
    """Full experiment description consumed by the CLI commands."""

    num_sensors: int = 12
    spacing: float = 0.5
    desired_doa: float = 10.0
    interferer_doas: Tuple[float, ...] = (30.0, 50.0)
    snr_db: float = 10.0
    sir_db: float = 0.0
    noise_power: float = 1.0
    mismatch: str = "coherent"  # none | coherent | incoherent
    scatter_paths: int = 4
    scatter_mean: Optional[float] = None  # defaults to desired_doa
    scatter_std: float = 2.0
    scatter_distribution: str = "uniform"
    sector_halfwidth: float = 5.0
    snapshots: int = 300
    trials: int = 100
    seed: int = 2024
    algorithms: Tuple[str, ...] = ("SMI", "LOCSME", "LOCSME-CG")
    forgetting: float = 0.95
    step_bound: Optional[float] = None  # 0.2, or 0.3 for incoherent
    subspace_dim: int = 3
    grid_points: int = 180
    loading: float = 1e-3
    steering_mode: str = "scv-sv"
    step_rule: str = "bounded"
    wng_limit: float = 1.25
    weight_smoothing: float = 0.9
    workers: int = 1
    output: Optional[str] = None
    snr_grid: Tuple[float, ...] = tuple(float(v) for v in range(-10, 35, 5))
    snapshot_grid: Tuple[int, ...] = (1, 50, 100, 150, 200, 250, 300)
    sensor_grid: Tuple[int, ...] = (12,)

    def resolved_step_bound(self) -> float:
        if self.step_bound is not None:
            return self.step_bound
        return 0.3 if self.mismatch == "incoherent" else 0.2

    def scenario(self, snr_db: Optional[float] = None) -> Scenario:
        geometry = ArrayGeometry(num_sensors=self.num_sensors, spacing=self.spacing)
        mean = self.desired_doa if self.scatter_mean is None else self.scatter_mean
        if self.mismatch == "none":
            mismatch = NoMismatch()
        elif self.mismatch == "coherent":
            mismatch = CoherentScattering(
                num_paths=self.scatter_paths,
                angle_mean_deg=mean,
                angle_std_deg=self.scatter_std,
                distribution=self.scatter_distribution,
            )
        elif self.mismatch == "incoherent":
            mismatch = IncoherentScattering(
                num_paths=self.scatter_paths,
                angle_mean_deg=mean,
                angle_std_deg=self.scatter_std,
                distribution=self.scatter_distribution,
            )
        else:
            raise ConfigError(f"mismatch must be none|coherent|incoherent, got {self.mismatch!r}")
        try:
            return Scenario(
                geometry=geometry,
                desired_doa_deg=self.desired_doa,
                interferer_doas_deg=self.interferer_doas,
                snr_db=self.snr_db if snr_db is None else snr_db,
                sir_db=self.sir_db,
                noise_power=self.noise_power,
                mismatch=mismatch,
                sector_halfwidth_deg=self.sector_halfwidth,
                num_snapshots=self.snapshots,
                seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def beamformer_settings(self) -> BeamformerSettings:
        try:
            return BeamformerSettings(
                forgetting=self.forgetting,
                step_bound=self.resolved_step_bound(),
                subspace_dim=self.subspace_dim,
                grid_points=self.grid_points,
                loading=self.loading,
                steering_mode=self.steering_mode,
                step_rule=self.step_rule,
                wng_limit=self.wng_limit,
                weight_smoothing=self.weight_smoothing,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        if self.num_sensors < 2:
            raise ConfigError(f"num_sensors: must be >= 2, got {self.num_sensors}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if self.snapshots < 1:
            raise ConfigError(f"snapshots: must be >= 1, got {self.snapshots}")
        if not 1 <= self.subspace_dim <= self.num_sensors:
            raise ConfigError(
                f"subspace_dim: must be in 1..{self.num_sensors}, got {self.subspace_dim}"
            )
        if self.grid_points < 2:
            raise ConfigError(f"grid_points: must be >= 2, got {self.grid_points}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        known = set(implemented_algorithms())
        for name in self.algorithms:
            if name.upper() not in known:
                raise ConfigError(
                    f"algorithms: {name!r} not implemented (choose from {sorted(known)})"
                )
        self.scenario()  # surfaces scenario-level violations
        self.beamformer_settings()
        return self


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float_list(key, raw):
    try:
        return tuple(float(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from None


def _parse_int_list(key, raw):
    try:
        return tuple(int(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from None


def _parse_str_list(key, raw):
    return tuple(v.strip().upper() for v in raw.split(",") if v.strip())


_PARSERS = {
    "num_sensors": _parse_int,
    "spacing": _parse_float,
    "desired_doa": _parse_float,
    "interferer_doas": _parse_float_list,
    "snr_db": _parse_float,
    "sir_db": _parse_float,
    "noise_power": _parse_float,
    "mismatch": lambda k, v: v.strip().lower(),
    "scatter_paths": _parse_int,
    "scatter_mean": _parse_float,
    "scatter_std": _parse_float,
    "scatter_distribution": lambda k, v: v.strip().lower(),
    "sector_halfwidth": _parse_float,
    "snapshots": _parse_int,
    "trials": _parse_int,
    "seed": _parse_int,
    "algorithms": _parse_str_list,
    "forgetting": _parse_float,
    "step_bound": _parse_float,
    "subspace_dim": _parse_int,
    "grid_points": _parse_int,
    "loading": _parse_float,
    "steering_mode": lambda k, v: v.strip().lower(),
    "step_rule": lambda k, v: v.strip().lower(),
    "wng_limit": _parse_float,
    "weight_smoothing": _parse_float,
    "workers": _parse_int,
    "output": lambda k, v: v.strip(),
    "snr_grid": _parse_float_list,
    "snapshot_grid": _parse_int_list,
    "sensor_grid": _parse_int_list,
}


def parse_config(path: str) -> RunConfig:
    """Read and validate a key-value config file; defaults fill the gaps."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            overrides[key] = _PARSERS[key](key, raw)
    return apply_overrides(RunConfig(), overrides).validate()


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Replace config fields; keys must be valid field names."""
    names = {f.name for f in fields(RunConfig)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    return replace(config, **overrides)
