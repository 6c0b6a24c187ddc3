"""Monte-Carlo harness: per-trial traces and averaged SINR curves.

Trials are independently seeded from the base seed through a
counter-based split (``SeedSequence(base, spawn_key=(index,))``), so the
trial set is reproducible, order-independent, and extends consistently
when the trial count grows.
"""

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .beamformers import BeamformerSettings, make_beamformer
from .scenario import Scenario, SnapshotSource, true_inc_matrix

SINR_FLOOR = 1e-300


def output_sinr(
    weights: np.ndarray,
    desired_steering: np.ndarray,
    inc_matrix: np.ndarray,
    desired_power: float,
) -> float:
    """Output SINR in dB of a weight vector against the true scenario.

    ``desired_power * |w^H a1|^2 / (w^H R_in w)``; invariant to any
    nonzero rescaling of ``w``.
    """
    num = desired_power * abs(np.vdot(weights, desired_steering)) ** 2
    den = float(np.vdot(weights, inc_matrix @ weights).real)
    den = max(den, SINR_FLOOR)  # PD guard; cannot trigger for true R_in
    return 10.0 * np.log10(max(num, SINR_FLOOR) / den)


def optimal_sinr(
    desired_steering: np.ndarray, inc_matrix: np.ndarray, desired_power: float
) -> float:
    """MVDR optimum 10*log10(power * a1^H R_in^-1 a1) in dB."""
    solved = np.linalg.solve(inc_matrix, desired_steering)
    return 10.0 * np.log10(desired_power * float(np.vdot(desired_steering, solved).real))


@dataclass
class TrialTrace:
    """Per-snapshot record of one algorithm on one trial."""

    algorithm: str
    seed: int
    sinr_db: np.ndarray
    optimal_sinr_db: np.ndarray
    steering_cosine: np.ndarray
    flags: List[Tuple[str, ...]]

    def __post_init__(self):
        n = len(self.sinr_db)
        if not (len(self.optimal_sinr_db) == len(self.steering_cosine) == len(self.flags) == n):
            raise ValueError("trace arrays must share the snapshot count")


@dataclass
class AlgorithmCurve:
    """Mean curves of one algorithm over the successful trials."""

    algorithm: str
    mean_sinr_db: np.ndarray
    mean_optimal_sinr_db: np.ndarray
    mean_steering_cosine: np.ndarray
    trials: int


@dataclass
class ExperimentResult:
    """Averaged Monte-Carlo output plus the trial failures, if any."""

    scenario: Scenario
    curves: Dict[str, AlgorithmCurve]
    num_trials: int
    failures: List[Tuple[int, str, str]] = field(default_factory=list)

    @property
    def failure_fraction(self) -> float:
        total = self.num_trials * max(len(self.curves), 1)
        return len(self.failures) / total if total else 0.0


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Derive the trial's RNG seed from the base seed by a counter split."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(trial_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def run_trial(
    scenario: Scenario,
    algorithm: str,
    seed: int,
    settings: Optional[BeamformerSettings] = None,
) -> TrialTrace:
    """Stream one trial's snapshots through a beamformer and score it.

    Every snapshot's weights are scored against the realized desired
    steering vector (per-snapshot for incoherent mismatch) and the true
    interference-plus-noise covariance.
    """
    source = SnapshotSource(scenario, seed=seed)
    beamformer = make_beamformer(algorithm, scenario, settings)
    inc = true_inc_matrix(scenario)
    power = scenario.desired_power
    n = scenario.num_snapshots
    sinr = np.empty(n)
    opt = np.empty(n)
    cosine = np.empty(n)
    flags: List[Tuple[str, ...]] = []
    time_varying = source.realization.time_varying
    opt_fixed = None
    for i in range(n):
        x = source.next_snapshot()
        a1 = source.desired_steering
        w = beamformer.step(x)
        sinr[i] = output_sinr(w, a1, inc, power)
        if time_varying:
            opt[i] = optimal_sinr(a1, inc, power)
        else:
            if opt_fixed is None:
                opt_fixed = optimal_sinr(a1, inc, power)
            opt[i] = opt_fixed
        est = beamformer.steering_estimate
        cosine[i] = abs(np.vdot(est, a1)) / (np.linalg.norm(est) * np.linalg.norm(a1))
        flags.append(beamformer.flags)
    return TrialTrace(
        algorithm=beamformer.name,
        seed=seed,
        sinr_db=sinr,
        optimal_sinr_db=opt,
        steering_cosine=cosine,
        flags=flags,
    )


def _trial_task(args):
    scenario, algorithms, seed, settings = args
    out = []
    for name in algorithms:
        try:
            out.append(run_trial(scenario, name, seed, settings))
        except Exception as exc:  # recorded, excluded from the means
            out.append((name, f"{type(exc).__name__}: {exc}", traceback.format_exc(limit=2)))
    return out


def monte_carlo(
    scenario: Scenario,
    algorithms: Sequence[str],
    num_trials: int,
    settings: Optional[BeamformerSettings] = None,
    base_seed: Optional[int] = None,
    workers: int = 1,
) -> ExperimentResult:
    """Average independent-seeded trials into per-snapshot mean curves.

    Mean SINR is the arithmetic mean of the per-trial dB traces; failed
    trials are recorded in ``failures`` and excluded.  Aggregation order
    is fixed by trial index, so results do not depend on ``workers``.
    """
    if num_trials < 1:
        raise ValueError(f"num_trials must be >= 1, got {num_trials}")
    base = scenario.seed if base_seed is None else base_seed
    tasks = [
        (scenario, tuple(algorithms), trial_seed(base, t), settings)
        for t in range(num_trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        per_trial = [_trial_task(t) for t in tasks]

    failures: List[Tuple[int, str, str]] = []
    collected: Dict[str, List[TrialTrace]] = {name.upper(): [] for name in algorithms}
    for idx, results in enumerate(per_trial):
        for item in results:
            if isinstance(item, TrialTrace):
                collected[item.algorithm].append(item)
            else:
                name, message, _ = item
                failures.append((idx, name.upper(), message))

    curves: Dict[str, AlgorithmCurve] = {}
    for name, traces in collected.items():
        if not traces:
            continue
        sinr = np.mean([t.sinr_db for t in traces], axis=0)
        opt = np.mean([t.optimal_sinr_db for t in traces], axis=0)
        cos = np.mean([t.steering_cosine for t in traces], axis=0)
        curves[name] = AlgorithmCurve(
            algorithm=name,
            mean_sinr_db=sinr,
            mean_optimal_sinr_db=opt,
            mean_steering_cosine=cos,
            trials=len(traces),
        )
    return ExperimentResult(
        scenario=scenario, curves=curves, num_trials=num_trials, failures=failures
    )
