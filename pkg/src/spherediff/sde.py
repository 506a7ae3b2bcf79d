"""Forward and reverse diffusion in spatial and chart coordinates.

Variance-preserving schedule: beta(t) = beta_min + (t/T)(beta_max - beta_min),
drift f(x,t) = -beta(t) x / 2, g(t) = sqrt(beta(t)).  The transition kernel is
Gaussian with mean coefficient m(t) = exp(-B(t)/2) and per-coordinate variance
v(t) = 1 - exp(-B(t)), B(t) the integral of beta; in chart coordinates the
noise covariance is v(t) Sigma instead of v(t) I.

Chart-domain paths stay on the real chart, so lifted coefficients satisfy
conjugate symmetry exactly.  Euler-Maruyama throughout; reverse steppers take
dt < 0 and use the score-corrected drift f - g^2 * (Sigma) * score.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

BLOWUP_LIMIT = 1e6


class BlowUpError(RuntimeError):
    """Raised when every path has gone non-finite."""


@dataclass(frozen=True)
class VpSchedule:
    """Affine variance-preserving noise schedule."""

    beta_min: float = 0.1
    beta_max: float = 10.0
    T: float = 1.0
    steps: int = 1000

    def __post_init__(self):
        if not (0 < self.beta_min <= self.beta_max):
            raise ValueError("need 0 < beta_min <= beta_max")
        if self.T <= 0:
            raise ValueError("need T > 0")
        if self.steps < 1:
            raise ValueError("need steps >= 1")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    def beta(self, t: float) -> float:
        return self.beta_min + (t / self.T) * (self.beta_max - self.beta_min)

    def g(self, t: float) -> float:
        return float(np.sqrt(self.beta(t)))

    def drift(self, x: np.ndarray, t: float) -> np.ndarray:
        return -0.5 * self.beta(t) * x

    def beta_integral(self, t: float) -> float:
        return self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t * t / self.T

    def mean_coeff(self, t: float) -> float:
        return float(np.exp(-0.5 * self.beta_integral(t)))

    def marginal_var(self, t: float) -> float:
        return float(-np.expm1(-self.beta_integral(t)))


@dataclass(frozen=True)
class DiffusionState:
    """A batch of paths at one time; values is (n_paths, d)."""

    time: float
    values: np.ndarray
    domain: str  # "spatial" or "chart"

    def __post_init__(self):
        if self.domain not in ("spatial", "chart"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ScoreField:
    """Score function in one domain: (values (n,d), t) -> (n,d)."""

    fn: object
    domain: str

    def __call__(self, values: np.ndarray, t: float) -> np.ndarray:
        return self.fn(values, t)


def _advance(state: DiffusionState, dt: float, values: np.ndarray) -> DiffusionState:
    return dataclasses.replace(state, time=state.time + dt, values=values)


def forward_step_spatial(state, schedule, dt, noise_draw):
    """x <- x + f(x,t) dt + g(t) sqrt(dt) xi."""
    x, t = state.values, state.time
    new = x + schedule.drift(x, t) * dt + schedule.g(t) * np.sqrt(dt) * noise_draw
    return _advance(state, dt, new)


def forward_step_frequency(state, schedule, dt, Lambda, noise_draw):
    """z <- z + f(z,t) dt + g(t) sqrt(dt) Lambda xi (chart coordinates).

    The chart drift equals the spatial VP drift because U f(Y a, t) =
    -beta(t)/2 * a (UY = I); see vp_drift_identity_error.
    """
    z, t = state.values, state.time
    new = z + schedule.drift(z, t) * dt + schedule.g(t) * np.sqrt(dt) * (noise_draw @ Lambda.T)
    return _advance(state, dt, new)


def reverse_step_spatial(state, schedule, dt, score, noise_draw):
    """x <- x + (f - g^2 s) dt + g sqrt(|dt|) xi, with dt < 0."""
    if score.domain != "spatial":
        raise ValueError(f"score domain {score.domain!r}, expected 'spatial'")
    x, t = state.values, state.time
    g = schedule.g(t)
    drift = schedule.drift(x, t) - g * g * score(x, t)
    new = x + drift * dt + g * np.sqrt(abs(dt)) * noise_draw
    return _advance(state, dt, new)


def reverse_step_frequency(state, schedule, dt, Sigma, Lambda, score, noise_draw):
    """z <- z + (f - g^2 Sigma s) dt + g sqrt(|dt|) Lambda xi, with dt < 0."""
    if score.domain != "chart":
        raise ValueError(f"score domain {score.domain!r}, expected 'chart'")
    z, t = state.values, state.time
    g = schedule.g(t)
    drift = schedule.drift(z, t) - g * g * (score(z, t) @ Sigma.T)
    new = z + drift * dt + g * np.sqrt(abs(dt)) * (noise_draw @ Lambda.T)
    return _advance(state, dt, new)


def spatial_forward_stepper(schedule):
    return lambda state, dt, xi: forward_step_spatial(state, schedule, dt, xi)


def frequency_forward_stepper(schedule, Lambda):
    return lambda state, dt, xi: forward_step_frequency(state, schedule, dt, Lambda, xi)


def spatial_reverse_stepper(schedule, score):
    return lambda state, dt, xi: reverse_step_spatial(state, schedule, dt, score, xi)


def frequency_reverse_stepper(schedule, Sigma, Lambda, score):
    return lambda state, dt, xi: reverse_step_frequency(
        state, schedule, dt, Sigma, Lambda, score, xi
    )


def integrate(state, schedule, direction, stepper, seed, *, thin=None):
    """Run `schedule.steps` uniform Euler-Maruyama steps.

    direction "forward" runs time up from state.time; "reverse" runs it down.
    Paths whose coordinates go non-finite or exceed BLOWUP_LIMIT are frozen at
    their last good value and reported as {"path": i, "step": k}.

    Returns (final_state, aborted, trajectory); trajectory is a list of
    (time, values) captured every `thin` steps (None -> only endpoints absent).
    """
    if direction not in ("forward", "reverse"):
        raise ValueError(f"unknown direction {direction!r}")
    dt = schedule.dt if direction == "forward" else -schedule.dt
    rng = np.random.default_rng(seed)
    n, d = state.values.shape
    dead = np.zeros(n, dtype=bool)
    aborted = []
    trajectory = [(state.time, state.values.copy())] if thin else None

    for k in range(schedule.steps):
        xi = rng.standard_normal((n, d))
        prev = state.values
        state = stepper(state, dt, xi)
        vals = state.values.copy()
        bad = ~np.all(np.isfinite(vals), axis=1) | (np.max(np.abs(vals), axis=1) > BLOWUP_LIMIT)
        newly = bad & ~dead
        if np.any(newly):
            for i in np.flatnonzero(newly):
                aborted.append({"path": int(i), "step": k})
            dead |= newly
        if np.any(dead):
            vals[dead] = prev[dead]  # freeze at the last good value
        state = dataclasses.replace(state, values=vals)
        if thin and ((k + 1) % thin == 0 or k == schedule.steps - 1):
            trajectory.append((state.time, vals.copy()))
        if dead.size and np.all(dead):
            raise BlowUpError(f"all {n} paths diverged by step {k}")
    return state, aborted, trajectory


# ---------------------------------------------------------------------------
# analytic Gaussian scores (closed-form test harness, no training)
# ---------------------------------------------------------------------------

def gaussian_chart_score(mu, S, Sigma, schedule) -> ScoreField:
    """Score of the time-t chart marginal for data z(0) ~ N(mu, S).

    Marginal: N(m(t) mu, m(t)^2 S + v(t) Sigma); score(z) = -A_t^{-1}(z - m mu).
    """
    mu = np.asarray(mu, dtype=float)
    S = np.asarray(S, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)

    def fn(z, t):
        m, v = schedule.mean_coeff(t), schedule.marginal_var(t)
        A = m * m * S + v * Sigma
        r = np.atleast_2d(z) - m * mu
        s = -np.linalg.solve(A, r.T).T
        return s.reshape(np.shape(z))

    return ScoreField(fn=fn, domain="chart")


def gaussian_spatial_score(mu_x, cov_x, schedule) -> ScoreField:
    """Score of the time-t spatial marginal for data x(0) ~ N(mu_x, cov_x).

    cov_x may be singular (band-limited data): A_t = m^2 cov_x + v I is
    inverted through a one-time eigendecomposition of cov_x.
    """
    mu_x = np.asarray(mu_x, dtype=float)
    evals, V = np.linalg.eigh(np.asarray(cov_x, dtype=float))
    evals = np.clip(evals, 0.0, None)

    def fn(x, t):
        m, v = schedule.mean_coeff(t), schedule.marginal_var(t)
        r = np.atleast_2d(x) - m * mu_x
        w = r @ V
        s = -(w / (m * m * evals + v)) @ V.T
        return s.reshape(np.shape(x))

    return ScoreField(fn=fn, domain="spatial")


def vp_drift_identity_error(ops, schedule, t: float) -> float:
    """Max abs deviation of U f(Y ., t) from -beta(t)/2 * identity."""
    L2 = ops.d_spectral
    composed = ops.U @ (-0.5 * schedule.beta(t) * ops.Y)
    return float(np.max(np.abs(composed - (-0.5 * schedule.beta(t)) * np.eye(L2))))
