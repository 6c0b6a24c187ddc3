"""Adaptive beamformers: SMI baseline, batch LOCSME, and LOCSME-CG.

All three expose the same per-snapshot interface: ``step(x)`` folds one
array snapshot into the internal state and returns the current weight
vector.  They are deterministic (no internal randomness), so identical
snapshot streams produce identical weight sequences.

The LOCSME pair shares one interference-plus-noise (INC) estimator: a
running mean of signal-removed snapshot outer products
``x x^H - sigma2(i) * a_hat(i) a_hat(i)^H`` where ``sigma2`` is the
per-snapshot desired-power estimate under the unit-norm steering
convention.  Batch LOCSME solves the loaded INC system exactly each
snapshot; LOCSME-CG performs a single conjugate-gradient iteration per
snapshot on the same system, which keeps the per-snapshot cost at
O(M^2) instead of O(M^3).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .arrays import steering_vector
from .scenario import Scenario
from .shrinkage import SectorProjector, ShrinkageState, estimate_power, estimate_steering

COND_LIMIT = 1e12
STEP_DENOM_FLOOR = 1e-15
BETA_DENOM_FLOOR = 1e-15
WEIGHT_DENOM_FLOOR = 1e-15
STEP_NORM_CAP = 100.0
LOADING_ESCALATIONS = 3


class IllConditionedError(np.linalg.LinAlgError):
    """Hermitian solve rejected: matrix indefinite or condition number too large."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


def mvdr_weights(covariance: np.ndarray, steering: np.ndarray) -> np.ndarray:
    """Minimum-variance distortionless-response weights.

    Solves the Hermitian system ``R w0 = a`` (Cholesky, never an explicit
    inverse) and normalizes so that ``w^H a = 1``.

    Raises
    ------
    IllConditionedError
        If ``R`` is not positive definite or its condition number exceeds
        ``COND_LIMIT``; the estimate rides along on the exception.
    """
    evals = np.linalg.eigvalsh(covariance)
    if evals[0] <= 0.0:
        raise IllConditionedError(
            f"covariance not positive definite (min eigenvalue {evals[0]:.3e})",
            condition=np.inf,
        )
    condition = evals[-1] / evals[0]
    if condition > COND_LIMIT:
        raise IllConditionedError(
            f"covariance condition number {condition:.3e} exceeds {COND_LIMIT:.0e}",
            condition=condition,
        )
    w0 = cho_solve(cho_factor(covariance, lower=True), steering)
    return w0 / np.vdot(steering, w0)


def weight_step_size(
    direction: np.ndarray,
    gradient: np.ndarray,
    steering: np.ndarray,
    forgetting: float,
    step_bound: float,
    covariance: Optional[np.ndarray] = None,
    signal_power: float = 0.0,
    quad: Optional[float] = None,
) -> Tuple[complex, bool]:
    """Bounded step size for the weight-vector CG chain.

    ``[forgetting*(p^H g - p^H a) - step_bound*p^H g]`` over the
    signal-removed quadratic form ``p^H (R - signal_power a a^H) p``
    (pass ``quad`` directly to reuse an existing matrix-vector product).
    Returns ``(alpha, degenerate)``; a vanishing denominator yields a
    zero step with the degenerate flag set.
    """
    if quad is None:
        rp = covariance @ direction
        quad = float(
            np.vdot(direction, rp).real
            - signal_power * abs(np.vdot(direction, steering)) ** 2
        )
    if abs(quad) < STEP_DENOM_FLOOR:
        return 0.0 + 0.0j, True
    pg = np.vdot(direction, gradient)
    pa = np.vdot(direction, steering)
    return (forgetting * (pg - pa) - step_bound * pg) / quad, False


def steering_step_size(
    direction: np.ndarray,
    gradient: np.ndarray,
    weight_free: np.ndarray,
    snapshot: np.ndarray,
    steering: np.ndarray,
    signal_power: float,
    forgetting: float,
    step_bound: float,
) -> Tuple[complex, bool]:
    """Bounded step size for the steering-vector CG chain.

    Numerator ``forgetting*(p^H v - p^H g) - p^H v + (p^H x)(x^H a)
    + step_bound * p^H g`` over ``signal_power * |p^H v|^2``.  Returns
    ``(alpha, degenerate)`` with the same zero-step fallback as
    :func:`weight_step_size` (this also covers a clamped-to-zero power
    estimate).
    """
    pv = np.vdot(direction, weight_free)
    denom = signal_power * abs(pv) ** 2
    if denom < STEP_DENOM_FLOOR:
        return 0.0 + 0.0j, True
    pg = np.vdot(direction, gradient)
    px = np.vdot(direction, snapshot)
    xa = np.vdot(snapshot, steering)
    num = forgetting * (pv - pg) - pv + px * xa + step_bound * pg
    return num / denom, False


def conjugate_direction_weight(
    gradient_new: np.ndarray, gradient_old: np.ndarray
) -> complex:
    """Polak-Ribiere style direction coefficient with a zero-denominator guard."""
    denom = float(np.vdot(gradient_old, gradient_old).real)
    if denom < BETA_DENOM_FLOOR:
        return 0.0 + 0.0j
    return np.vdot(gradient_new - gradient_old, gradient_new) / denom


@dataclass
class BeamformerSettings:
    """Hyper-parameters shared by the beamformer factory.

    ``forgetting`` and ``step_bound`` drive the CG step-size rule
    (``step_bound`` must stay in [0, 0.5]).  ``loading`` scales the
    diagonal load of the direct solvers relative to ``trace(R)/M``.
    The CG weight chain is stabilized by a white-noise-gain limit on
    ``|w|^2`` enforced through its own adaptive loading, and its output
    weights come from an exponentially averaged iterate.
    """

    forgetting: float = 0.95
    step_bound: float = 0.2
    subspace_dim: int = 3
    grid_points: int = 180
    loading: float = 1e-3
    steering_mode: str = "scv-sv"  # or "cg-sv"
    step_rule: str = "bounded"  # or "subspace"
    wng_limit: float = 1.25
    cg_loading_init: float = 1e-2
    cg_loading_min: float = 1e-3
    cg_loading_max: float = 1.0
    weight_smoothing: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.forgetting <= 1.0:
            raise ValueError(f"forgetting must be in (0, 1], got {self.forgetting}")
        if not 0.0 <= self.step_bound <= 0.5:
            raise ValueError(f"step_bound must be in [0, 0.5], got {self.step_bound}")
        if self.steering_mode not in ("scv-sv", "cg-sv"):
            raise ValueError(f"unknown steering_mode {self.steering_mode!r}")
        if self.step_rule not in ("bounded", "subspace"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")
        if not 0.0 <= self.weight_smoothing < 1.0:
            raise ValueError(
                f"weight_smoothing must be in [0, 1), got {self.weight_smoothing}"
            )
        if self.wng_limit < 1.0:
            raise ValueError(f"wng_limit must be >= 1, got {self.wng_limit}")


class ScmTracker:
    """Running sample covariance matrix R(i) = mean of x x^H."""

    def __init__(self, dim: int):
        self.matrix = np.zeros((dim, dim), dtype=complex)
        self.count = 0

    def update(self, x: np.ndarray) -> np.ndarray:
        self.count += 1
        self.matrix += (np.outer(x, x.conj()) - self.matrix) / self.count
        return self.matrix


class IncTracker:
    """Running signal-removed covariance (INC estimate).

    Each snapshot contributes ``x x^H - sigma2 a a^H`` where ``sigma2``
    is that snapshot's clamped power estimate against the current
    unit-norm steering estimate, so the removal tracks the per-sample
    content along the steering direction and the average stays near the
    true interference-plus-noise covariance.
    """

    def __init__(self, dim: int):
        self.matrix = np.zeros((dim, dim), dtype=complex)
        self.count = 0

    def update(self, x: np.ndarray, a_hat: np.ndarray, sigma2: float) -> np.ndarray:
        self.count += 1
        sample = np.outer(x, x.conj()) - sigma2 * np.outer(a_hat, a_hat.conj())
        self.matrix += (sample - self.matrix) / self.count
        return self.matrix


class SmiBeamformer:
    """Sample-matrix-inversion beamformer with the presumed steering vector.

    Mismatch-unaware baseline: solves the loaded running SCM against
    ``a(theta_1)`` every snapshot.  ``loading=0`` gives the raw SMI form
    (which fails until the SCM has full rank).
    """

    name = "SMI"

    def __init__(self, scenario: Scenario, settings: Optional[BeamformerSettings] = None):
        settings = settings or BeamformerSettings()
        m = scenario.geometry.num_sensors
        self.presumed = steering_vector(scenario.desired_doa_deg, scenario.geometry)
        self.scm = ScmTracker(m)
        self.loading = settings.loading
        self.weights = self.presumed / m
        self.flags: Tuple[str, ...] = ()
        self._eye = np.eye(m)

    @property
    def steering_estimate(self) -> np.ndarray:
        return self.presumed / np.linalg.norm(self.presumed)

    def step(self, x: np.ndarray) -> np.ndarray:
        r = self.scm.update(x)
        m = r.shape[0]
        eps = self.loading * np.trace(r).real / m
        self.weights = mvdr_weights(r + eps * self._eye, self.presumed)
        self.flags = ()
        return self.weights


class LocsmeBatchBeamformer:
    """Batch LOCSME: shrinkage steering estimate plus an exact INC solve.

    Per snapshot: the beamformer output against the previous weights
    feeds the shrinkage pipeline, the sector projection yields the
    unit-norm steering estimate, the per-snapshot power estimate updates
    the running INC matrix, and the weights come from a loaded Hermitian
    solve.  If the loaded INC estimate is not positive definite the load
    escalates tenfold up to three times before raising.
    """

    name = "LOCSME"

    def __init__(self, scenario: Scenario, settings: Optional[BeamformerSettings] = None):
        settings = settings or BeamformerSettings()
        geom = scenario.geometry
        m = geom.num_sensors
        self.noise_power = scenario.noise_power
        self.projector = SectorProjector.build(
            scenario.desired_doa_deg,
            scenario.sector_halfwidth_deg,
            geom,
            settings.subspace_dim,
            settings.grid_points,
        )
        self.shrinkage = ShrinkageState(dim=m)
        self.scm = ScmTracker(m)
        self.inc = IncTracker(m)
        self.loading = settings.loading
        presumed = steering_vector(scenario.desired_doa_deg, geom)
        self.steering_estimate = presumed / np.sqrt(m)
        self.weights = presumed / m
        self.sigma2 = 0.0
        self.sigma2_mean = 0.0
        self.effective_loading = 0.0
        self.flags: Tuple[str, ...] = ()
        self._eye = np.eye(m)

    def step(self, x: np.ndarray) -> np.ndarray:
        flags = []
        y = np.vdot(self.weights, x)
        self.shrinkage.update_scv(x, y)
        _, shrunk = self.shrinkage.shrink()
        if self.shrinkage.rho_degenerate:
            flags.append("rho-degenerate")
        self.steering_estimate, held = estimate_steering(
            self.projector, shrunk, self.steering_estimate
        )
        if held:
            flags.append("steering-held")
        self.sigma2 = estimate_power(self.steering_estimate, x, self.noise_power)
        i = self.scm.count + 1
        self.sigma2_mean += (self.sigma2 - self.sigma2_mean) / i
        r = self.scm.update(x)
        rin = self.inc.update(x, self.steering_estimate, self.sigma2)
        base = self.loading * np.trace(r).real / r.shape[0]
        eps = base
        loaded = None
        for attempt in range(LOADING_ESCALATIONS + 1):
            candidate = rin + eps * self._eye
            if np.linalg.eigvalsh(candidate)[0] >= 0.5 * eps:
                loaded = candidate
                if attempt:
                    flags.append("loading-escalated")
                break
            eps *= 10.0
        if loaded is None:
            # escalation ladder exhausted (rank-deficient start); clamp the
            # load to the measured deficiency so the solve stays defined
            deficiency = -float(np.linalg.eigvalsh(rin)[0])
            if not np.isfinite(deficiency):
                raise IllConditionedError(
                    "INC estimate not positive definite after loading escalation"
                )
            eps = 2.0 * max(deficiency, 0.0) + base
            loaded = rin + eps * self._eye
            flags.append("loading-clamped")
        self.effective_loading = eps
        self.weights = mvdr_weights(loaded, self.steering_estimate)
        self.flags = tuple(flags)
        return self.weights


class LocsmeCgBeamformer:
    """LOCSME-CG: shrinkage steering estimation with CG weight updates.

    The weight chain maintains the auxiliary vector ``v`` so that
    ``w = v / (a_hat^H v)`` and performs exactly one conjugate-gradient
    iteration per snapshot on the running loaded INC system
    ``Psi v = a_hat`` (gradient ``g = a_hat - Psi v``).  Three guards
    keep the single-iteration recursion stable against the estimation
    noise of the INC matrix: a step is rescaled whenever it would grow
    the residual, step norms are capped, and the loading adapts to keep
    the white-noise gain ``|w|^2`` under ``wng_limit``.  Reported
    weights use an exponentially averaged iterate, which suppresses the
    per-snapshot tracking jitter without touching the recursion itself.

    ``steering_mode="cg-sv"`` switches the steering estimate to its own
    CG recursion (bounded step plus sector projection and
    renormalization) instead of the per-snapshot shrinkage estimate.
    """

    name = "LOCSME-CG"

    def __init__(self, scenario: Scenario, settings: Optional[BeamformerSettings] = None):
        settings = settings or BeamformerSettings()
        self.settings = settings
        geom = scenario.geometry
        m = geom.num_sensors
        self.dim = m
        self.noise_power = scenario.noise_power
        self.projector = SectorProjector.build(
            scenario.desired_doa_deg,
            scenario.sector_halfwidth_deg,
            geom,
            settings.subspace_dim,
            settings.grid_points,
        )
        self.shrinkage = ShrinkageState(dim=m)
        self.scm = ScmTracker(m)
        self.inc = IncTracker(m)
        presumed = steering_vector(scenario.desired_doa_deg, geom)
        self.steering_estimate = presumed / np.sqrt(m)
        self.v = self.steering_estimate.copy()
        self.v_avg = self.v.copy()
        self.direction = np.zeros(m, dtype=complex)
        self.gradient = np.zeros(m, dtype=complex)
        self.steer_direction = np.zeros(m, dtype=complex)
        self.steer_gradient = np.zeros(m, dtype=complex)
        self.weights = presumed / m
        self.sigma2 = 0.0
        self.sigma2_mean = 0.0
        self.loading_rel = settings.cg_loading_init
        self.flags: Tuple[str, ...] = ()
        self.bound_ratio_weight = np.nan
        self.bound_ratio_steering = np.nan
        self.kernel_ops = 0
        self._count = 0

    # -- quadratic-kernel instrumentation -------------------------------
    def _mat_op(self, k: int = 1):
        # tallies M x M array operations; the O(M) tail is excluded so the
        # counter certifies the quadratic kernel's growth directly
        self.kernel_ops += k * self.dim * self.dim

    def _loaded_inc(self, z: np.ndarray, delta: float) -> np.ndarray:
        self._mat_op()
        return self.inc.matrix @ z + delta * z

    def step(self, x: np.ndarray) -> np.ndarray:
        flags = []
        self._count += 1
        # beamformer output against the causal (previous) weights
        y = np.vdot(self.weights, x)
        self.shrinkage.update_scv(x, y)
        _, shrunk = self.shrinkage.shrink()
        if self.shrinkage.rho_degenerate:
            flags.append("rho-degenerate")

        steer_alpha = 0.0 + 0.0j
        if self.settings.steering_mode == "cg-sv":
            # power first (previous estimate), per the step-size rule's inputs
            sigma2_pre = estimate_power(self.steering_estimate, x, self.noise_power)
            steer_alpha = self._steering_cg_update(x, sigma2_pre, flags)
        else:
            self.steering_estimate, held = estimate_steering(
                self.projector, shrunk, self.steering_estimate
            )
            self._mat_op()  # sector projection of the shrunk SCV
            if held:
                flags.append("steering-held")
        a_hat = self.steering_estimate

        self.sigma2 = estimate_power(a_hat, x, self.noise_power)
        self.sigma2_mean += (self.sigma2 - self.sigma2_mean) / self._count
        r = self.scm.update(x)
        self._mat_op(3)  # outer product and running-mean fold of the SCM
        self.inc.update(x, a_hat, self.sigma2)
        self._mat_op(4)  # signal-removed sample and running-mean fold

        delta = self.loading_rel * np.trace(r).real / self.dim
        gradient = a_hat - self._loaded_inc(self.v, delta)
        if self.settings.step_rule == "subspace":
            self._step_subspace(gradient, delta, flags)
        else:
            self._step_bounded(gradient, a_hat, delta, flags)
        if self.settings.steering_mode == "cg-sv":
            # gradient recursion after the weight update, with the latest v
            self._steering_gradient_update(x, steer_alpha)

        # averaged iterate drives the reported weights (Polyak smoothing)
        c = self.settings.weight_smoothing
        self.v_avg = c * self.v_avg + (1.0 - c) * self.v
        denom = np.vdot(a_hat, self.v_avg)
        if abs(denom) < WEIGHT_DENOM_FLOOR:
            flags.append("weights-held")
        else:
            self.weights = self.v_avg / denom

        # white-noise-gain feedback on the CG loading
        wng = float(np.vdot(self.weights, self.weights).real)
        if wng > self.settings.wng_limit:
            self.loading_rel = min(self.loading_rel * 2.0, self.settings.cg_loading_max)
        elif wng < 0.25 * self.settings.wng_limit:
            self.loading_rel = max(self.loading_rel * 0.7, self.settings.cg_loading_min)

        self.flags = tuple(flags)
        return self.weights

    # -- weight chain ----------------------------------------------------
    def _step_bounded(self, gradient, a_hat, delta, flags):
        p = self.direction
        inc_p = self._loaded_inc(p, delta)
        quad = float(np.vdot(p, inc_p).real)
        pg_before = float(np.vdot(p, gradient).real)
        alpha, degenerate = weight_step_size(
            p,
            gradient,
            a_hat,
            self.settings.forgetting,
            self.settings.step_bound,
            quad=quad,
        )
        if degenerate:
            flags.append("alpha-v-degenerate")
        step = alpha * p
        step_inc = alpha * inc_p
        step, step_inc = self._guard_step(gradient, step, step_inc)
        self.v = self.v + step
        gradient_new = gradient - step_inc
        pg_after = float(np.vdot(p, gradient_new).real)
        self.bound_ratio_weight = (
            pg_after / pg_before if abs(pg_before) > STEP_DENOM_FLOOR else np.nan
        )
        beta = conjugate_direction_weight(gradient_new, self.gradient)
        self.direction = gradient_new + beta * p
        self.gradient = gradient_new

    def _step_subspace(self, gradient, delta, flags):
        g = gradient
        p = self.direction
        inc_g = self._loaded_inc(g, delta)
        inc_p = self._loaded_inc(p, delta)
        gg = float(np.vdot(g, inc_g).real)
        gp = np.vdot(g, inc_p)
        pp = float(np.vdot(p, inc_p).real)
        rg = float(np.vdot(g, g).real)
        rp = np.vdot(p, g)
        pg_before = float(rp.real)
        det = gg * pp - abs(gp) ** 2
        if pp < STEP_DENOM_FLOOR or det <= 1e-15 * max(gg * pp, 1e-30):
            if gg > STEP_DENOM_FLOOR:
                coef = rg / gg
                step, step_inc = coef * g, coef * inc_g
            else:
                flags.append("alpha-v-degenerate")
                step = np.zeros_like(g)
                step_inc = step
        else:
            cg = (rg * pp - gp * rp) / det
            cp = (gg * rp - np.conj(gp) * rg) / det
            step = cg * g + cp * p
            step_inc = cg * inc_g + cp * inc_p
        step, step_inc = self._guard_step(gradient, step, step_inc)
        self.v = self.v + step
        gradient_new = gradient - step_inc
        pg_after = float(np.vdot(p, gradient_new).real)
        self.bound_ratio_weight = (
            pg_after / pg_before if abs(pg_before) > STEP_DENOM_FLOOR else np.nan
        )
        self.direction = step if np.linalg.norm(step) > 0 else gradient_new
        self.gradient = gradient_new

    def _guard_step(self, gradient, step, step_inc):
        """Rescale a step that would grow the residual; cap its norm."""
        sp2 = float(np.vdot(step_inc, step_inc).real)
        if sp2 > 1e-30:
            predicted = gradient - step_inc
            if np.vdot(predicted, predicted).real > np.vdot(gradient, gradient).real:
                t = np.vdot(step_inc, gradient) / sp2
                step = t * step
                step_inc = t * step_inc
        norm = np.linalg.norm(step)
        cap = STEP_NORM_CAP * (np.linalg.norm(self.v) + 1.0)
        if norm > cap:
            step = step * (cap / norm)
            step_inc = step_inc * (cap / norm)
        return step, step_inc

    # -- steering chain (cg-sv mode) --------------------------------------
    def _steering_cg_update(self, x, sigma2, flags):
        a_prev = self.steering_estimate
        p = self.steer_direction
        alpha, degenerate = steering_step_size(
            p,
            self.steer_gradient,
            self.v,
            x,
            a_prev,
            sigma2,
            self.settings.forgetting,
            self.settings.step_bound,
        )
        if degenerate:
            flags.append("alpha-a-degenerate")
        # keep the raw CG update bounded; the projection renormalizes anyway
        step = alpha * p
        norm = np.linalg.norm(step)
        if norm > STEP_NORM_CAP:
            step = step * (STEP_NORM_CAP / norm)
            alpha = alpha * (STEP_NORM_CAP / norm)
        raw = a_prev + step
        projected = self.projector.project(raw)
        self._mat_op()
        pnorm = np.linalg.norm(projected)
        if pnorm < WEIGHT_DENOM_FLOOR:
            flags.append("steering-held")
        else:
            self.steering_estimate = projected / pnorm
        return alpha

    def _steering_gradient_update(self, x, alpha):
        p = self.steer_direction
        pg_before = float(np.vdot(p, self.steer_gradient).real)
        lam = self.settings.forgetting
        g_new = (
            (1.0 - lam) * self.v
            + lam * self.steer_gradient
            + self.sigma2 * alpha * self.v * np.vdot(self.v, p)
            - x * np.vdot(x, self.steering_estimate)
        )
        pg_after = float(np.vdot(p, g_new).real)
        self.bound_ratio_steering = (
            pg_after / pg_before if abs(pg_before) > STEP_DENOM_FLOOR else np.nan
        )
        beta = conjugate_direction_weight(g_new, self.steer_gradient)
        self.steer_direction = g_new + beta * p
        self.steer_gradient = g_new

    def bound_ratios(self) -> Tuple[float, float]:
        """Latest convergence-bound ratios (weight chain, steering chain).

        Each ratio compares the direction-gradient inner product after and
        before the snapshot's update; NaN when the previous inner product
        was numerically zero (skipped in harness averages).
        """
        return self.bound_ratio_weight, self.bound_ratio_steering


_BUILDERS = {
    "SMI": SmiBeamformer,
    "LOCSME": LocsmeBatchBeamformer,
    "LOCSME-CG": LocsmeCgBeamformer,
}


def implemented_algorithms() -> Tuple[str, ...]:
    return tuple(_BUILDERS)


def make_beamformer(name: str, scenario: Scenario, settings: Optional[BeamformerSettings] = None):
    """Instantiate one of the implemented beamformers by canonical name."""
    try:
        builder = _BUILDERS[name.upper()]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {name!r}; implemented: {', '.join(_BUILDERS)}"
        ) from None
    return builder(scenario, settings)
