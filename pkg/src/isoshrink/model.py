"""Blocked Gibbs sampler for Bayesian monotone curve estimation.

The observations y follow y | eta ~ N(D eta, sigma2 * I), where D is the
lower-triangular cumulative-sum matrix, eta_1 is the level and eta_j > 0
(j >= 2) are the increments of the fitted nondecreasing function.  The
increments carry a global-local shrinkage prior (half-horseshoe, half-Laplace
or half-normal), with per-increment local scales tau_j, a global scale
lambda, auxiliary variables nu_j and xi, and error variance sigma2.  On an
irregular grid the prior variance of eta_j additionally scales with the
spacing w_j = x_j - x_{j-1}.

One sweep updates, in order: the function values (eta), the local shrinkage
scales, the global scale, and the error variance.  Every full conditional is
an exact draw (truncated normal, gamma, GIG, inverse gamma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .rng import (
    RngStream,
    sample_gamma,
    sample_gig_half_vec,
    sample_gig_raw,
    sample_gig_zero_vec,
    sample_inverse_gamma,
    sample_truncated_normal_pos,
)

__all__ = [
    "PriorFamily",
    "Direction",
    "SeriesData",
    "ModelConfig",
    "SamplerConfig",
    "ChainState",
    "PosteriorDraws",
    "ChainError",
    "theta_from_eta",
    "init_state",
    "conditional_moments_eta",
    "update_eta_block",
    "update_local_block",
    "update_global_block",
    "update_sigma2_block",
    "run_chain",
    "run_chain_fixed_scales",
]

_EPS_INIT = 1e-4     # clamp for non-positive observed first differences
_SCALE_FLOOR = 1e-12  # floor applied to tau, lambda, sigma2 after sampling
_B_FLOOR = 1e-300    # keeps GIG rate terms strictly positive


class ChainError(RuntimeError):
    """The sampler produced a non-finite state; carries the sweep index."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class PriorFamily(str, Enum):
    HALF_HORSESHOE = "hh"
    HALF_LAPLACE = "hl"
    HALF_NORMAL = "hn"


class Direction(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


@dataclass(frozen=True)
class SeriesData:
    """Observed series: strictly increasing locations and their values."""

    locations: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        locations = np.asarray(self.locations, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "values", values)
        if locations.ndim != 1 or values.ndim != 1:
            raise ValueError("locations and values must be one-dimensional")
        if locations.size != values.size:
            raise ValueError("locations and values must have equal length")
        if locations.size < 1:
            raise ValueError("series must contain at least one observation")
        if not np.all(np.isfinite(locations)) or not np.all(np.isfinite(values)):
            raise ValueError("locations and values must be finite")
        if locations.size > 1 and not np.all(np.diff(locations) > 0):
            raise ValueError("locations must be strictly increasing")

    @classmethod
    def from_values(cls, values) -> "SeriesData":
        """Series on the regular grid 1..n."""
        values = np.asarray(values, dtype=float)
        return cls(np.arange(1, values.size + 1, dtype=float), values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def spacings(self) -> np.ndarray:
        """w with w[0] = 1 (unused) and w[j] = x_j - x_{j-1} for j >= 1."""
        w = np.empty(self.n)
        w[0] = 1.0
        w[1:] = np.diff(self.locations)
        return w


@dataclass(frozen=True)
class ModelConfig:
    """Prior family and fixed model options.

    ``lambda_exponent`` selects the third GIG parameter of the global-scale
    conditional: ``"paper"`` keeps the original sampler's (-n+3)/2,
    ``"derived"`` uses the (-n+2)/2 that follows from the stated priors.
    ``sigma2_prior`` adds an optional proper inverse-gamma prior
    (shape, rate) on sigma2; the default (0, 0) reproduces the improper
    scale prior exactly.
    """

    prior: PriorFamily = PriorFamily.HALF_HORSESHOE
    direction: Direction = Direction.INCREASING
    fixed_sigma2: float | None = None
    hl_nu_hyper: tuple[float, float] = (1.0, 1.0)
    lambda_exponent: str = "paper"
    sigma2_prior: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prior", PriorFamily(self.prior))
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.fixed_sigma2 is not None and not self.fixed_sigma2 > 0:
            raise ValueError("fixed_sigma2 must be positive when given")
        a0, b0 = self.hl_nu_hyper
        if not (a0 > 0 and b0 > 0):
            raise ValueError("hl_nu_hyper entries must be positive")
        if self.lambda_exponent not in ("paper", "derived"):
            raise ValueError("lambda_exponent must be 'paper' or 'derived'")
        if min(self.sigma2_prior) < 0:
            raise ValueError("sigma2_prior entries must be nonnegative")


@dataclass(frozen=True)
class SamplerConfig:
    """Sweep count, burn-in, thinning and the chain seed."""

    n_iter: int = 3000
    burn_in: int = 500
    thin: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_iter <= 0 or self.thin <= 0 or self.burn_in < 0:
            raise ValueError("n_iter and thin must be positive, burn_in nonnegative")
        if self.burn_in >= self.n_iter:
            raise ValueError("burn_in must be smaller than n_iter")
        if self.retained < 1:
            raise ValueError("configuration retains no draws")

    @property
    def retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class ChainState:
    """One Gibbs state.  eta[0] is the level; eta[j] > 0 for j >= 1."""

    eta: np.ndarray
    tau: np.ndarray
    nu: np.ndarray
    lam: float
    xi: float
    sigma2: float
    floor_hits: dict = field(default_factory=lambda: {"tau": 0, "lambda": 0, "sigma2": 0})


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained draws of theta = cumsum(eta) plus hyperparameter traces."""

    theta_draws: np.ndarray
    sigma2_trace: np.ndarray
    lambda_trace: np.ndarray
    meta: dict

    @property
    def n_draws(self) -> int:
        return self.theta_draws.shape[0]


def theta_from_eta(eta: np.ndarray) -> np.ndarray:
    """Function values from increments: theta_i = sum_{k<=i} eta_k."""
    return np.cumsum(np.asarray(eta, dtype=float))


def init_state(series: SeriesData, config: ModelConfig, rng: RngStream) -> ChainState:
    """Deterministic starting point inside the support.

    eta starts at the observed first differences clamped to at least 1e-4,
    all scales at one, and sigma2 at the variance of the first differences
    (or the configured fixed value).
    """
    y = series.values
    n = series.n
    eta = np.empty(n)
    eta[0] = y[0]
    if n > 1:
        eta[1:] = np.maximum(np.diff(y), _EPS_INIT)
    if config.fixed_sigma2 is not None:
        sigma2 = config.fixed_sigma2
    elif n > 1:
        sigma2 = max(float(np.var(np.diff(y))), _EPS_INIT)
    else:
        sigma2 = _EPS_INIT
    return ChainState(
        eta=eta,
        tau=np.ones(n),
        nu=np.ones(n),
        lam=1.0,
        xi=1.0,
        sigma2=sigma2,
    )


def conditional_moments_eta(
    j: int,
    residual_suffix_sum: float,
    state: ChainState,
    series: SeriesData,
) -> tuple[float, float]:
    """Conditional mean and variance of eta_j (1-based j).

    ``residual_suffix_sum`` is sum_{i>=j}(y_i - theta_i) computed with the
    current eta_j still in place, so the regression term e_j'd_j equals
    residual_suffix_sum + (n-j+1)*eta_j and ||d_j||^2 = n-j+1.
    """
    n = series.n
    if not 1 <= j <= n:
        raise ValueError(f"index j must be in 1..{n}, got {j}")
    if not math.isfinite(residual_suffix_sum):
        raise ChainError("non-finite residual suffix sum")
    rem = n - j + 1
    if j == 1:
        pen = 1.0 / state.tau[0]
    else:
        pen = 1.0 / (state.lam * state.tau[j - 1] * series.spacings[j - 1])
    denom = rem + pen
    m = (residual_suffix_sum + rem * state.eta[j - 1]) / denom
    s2 = state.sigma2 / denom
    if not (math.isfinite(m) and math.isfinite(s2)):
        raise ChainError("non-finite conditional moments")
    return m, s2


def update_eta_block(
    state: ChainState,
    series: SeriesData,
    config: ModelConfig,
    rng: RngStream,
) -> ChainState:
    """One sweep over eta: eta_1 from N(m_1, s_1^2), then eta_j (j >= 2) from
    N_+(m_j, s_j^2), maintaining the residual suffix sum incrementally so the
    whole sweep is O(n)."""
    y = series.values
    n = y.size
    eta = state.eta
    theta = np.cumsum(eta)
    suffix = np.cumsum((y - theta)[::-1])[::-1].tolist()

    tau = state.tau.tolist()
    w = series.spacings.tolist()
    eta_list = eta.tolist()
    lam = state.lam
    sigma2 = state.sigma2
    gen = rng.gen
    standard_normal = gen.standard_normal

    shift = 0.0  # total change of earlier etas within this sweep
    for k in range(n):
        rem = n - k
        pen = 1.0 / tau[0] if k == 0 else 1.0 / (lam * tau[k] * w[k])
        denom = rem + pen
        old = eta_list[k]
        m = (suffix[k] - rem * (shift - old)) / denom
        if not math.isfinite(m):
            raise ChainError("non-finite conditional mean in eta sweep")
        s = math.sqrt(sigma2 / denom)
        if k == 0:
            new = m + s * standard_normal()
        else:
            a = -m / s
            if a < 0.5:
                while True:
                    z = standard_normal()
                    if z > a:
                        new = s * (z - a)
                        if new > 0.0:
                            break
            else:
                new = sample_truncated_normal_pos(m, s, rng)
        shift += new - old
        eta_list[k] = new

    state.eta = np.asarray(eta_list)
    return state


def update_local_block(
    state: ChainState,
    series: SeriesData,
    config: ModelConfig,
    rng: RngStream,
) -> ChainState:
    """Update the local shrinkage scales tau (and their auxiliaries nu).

    tau_1 follows the same half-horseshoe-style update under every family.
    Under the half-normal prior tau_j = 1 (j >= 2) is left untouched.
    """
    n = series.n
    eta = state.eta
    w = series.spacings
    sigma2 = state.sigma2
    gen = rng.gen

    b1 = max(eta[0] * eta[0] / sigma2, _B_FLOOR)
    if config.prior is PriorFamily.HALF_HORSESHOE:
        state.nu = np.maximum(gen.gamma(1.0, 1.0 / (1.0 + state.tau)), _B_FLOOR)
        state.tau[0] = sample_gig_raw(2.0 * state.nu[0], b1, 0.0, rng)
        if n > 1:
            b = np.maximum(eta[1:] ** 2 / (sigma2 * state.lam * w[1:]), _B_FLOOR)
            state.tau[1:] = sample_gig_zero_vec(2.0 * state.nu[1:], b, rng)
    elif config.prior is PriorFamily.HALF_LAPLACE:
        state.nu[0] = max(gen.gamma(1.0, 1.0 / (1.0 + state.tau[0])), _B_FLOOR)
        state.tau[0] = sample_gig_raw(2.0 * state.nu[0], b1, 0.0, rng)
        if n > 1:
            a0, b0 = config.hl_nu_hyper
            shared_nu = sample_gamma(a0 + (n - 1), b0 + float(state.tau[1:].sum()), rng)
            shared_nu = max(shared_nu, _B_FLOOR)
            state.nu[1:] = shared_nu
            b = np.maximum(eta[1:] ** 2 / (sigma2 * state.lam * w[1:]), _B_FLOOR)
            state.tau[1:] = sample_gig_half_vec(
                np.full(n - 1, 2.0 * shared_nu), b, rng)
    else:  # half-normal
        state.nu[0] = max(gen.gamma(1.0, 1.0 / (1.0 + state.tau[0])), _B_FLOOR)
        state.tau[0] = sample_gig_raw(2.0 * state.nu[0], b1, 0.0, rng)

    low = state.tau < _SCALE_FLOOR
    if np.any(low):
        state.floor_hits["tau"] += int(low.sum())
        state.tau[low] = _SCALE_FLOOR
    return state


def _lambda_exponent(n: int, config: ModelConfig) -> float:
    if config.lambda_exponent == "paper":
        return (-n + 3) / 2.0
    return (-n + 2) / 2.0


def update_global_block(
    state: ChainState,
    series: SeriesData,
    config: ModelConfig,
    rng: RngStream,
) -> ChainState:
    """Update the global scale lambda and its auxiliary xi (all families)."""
    n = series.n
    state.xi = max(sample_gamma(1.0, 1.0 + state.lam, rng), _B_FLOOR)
    if n > 1:
        w = series.spacings
        b = float(np.sum(state.eta[1:] ** 2 / (state.tau[1:] * w[1:]))) / state.sigma2
    else:
        b = 0.0
    state.lam = sample_gig_raw(
        2.0 * state.xi, max(b, _B_FLOOR), _lambda_exponent(n, config), rng)
    if state.lam < _SCALE_FLOOR:
        state.floor_hits["lambda"] += 1
        state.lam = _SCALE_FLOOR
    return state


def update_sigma2_block(
    state: ChainState,
    series: SeriesData,
    config: ModelConfig,
    rng: RngStream,
) -> ChainState:
    """Update the error variance; no-op when fixed_sigma2 is configured."""
    if config.fixed_sigma2 is not None:
        return state
    n = series.n
    y = series.values
    w = series.spacings
    resid = y - np.cumsum(state.eta)
    penalty = state.eta[0] ** 2 / state.tau[0]
    if n > 1:
        penalty += float(np.sum(state.eta[1:] ** 2 / (state.tau[1:] * w[1:]))) / state.lam
    shape0, rate0 = config.sigma2_prior
    state.sigma2 = sample_inverse_gamma(
        n + shape0, rate0 + 0.5 * (float(resid @ resid) + penalty), rng)
    if state.sigma2 < _SCALE_FLOOR:
        state.floor_hits["sigma2"] += 1
        state.sigma2 = _SCALE_FLOOR
    return state


def _check_finite(state: ChainState, iteration: int) -> None:
    if not (
        np.all(np.isfinite(state.eta))
        and np.all(np.isfinite(state.tau))
        and math.isfinite(state.lam)
        and math.isfinite(state.xi)
        and math.isfinite(state.sigma2)
    ):
        raise ChainError(f"non-finite chain state at sweep {iteration}", iteration)


def run_chain(
    series: SeriesData,
    mc: ModelConfig,
    sc: SamplerConfig,
    stream_id: int = 0,
) -> PosteriorDraws:
    """Run the blocked Gibbs sampler and retain theta draws.

    A decreasing fit negates the series on entry and the retained theta
    draws on exit.  The run is deterministic given (seed, stream_id).
    """
    if series.n < 2:
        raise ValueError("run_chain requires a series with n >= 2")
    work = series
    if mc.direction is Direction.DECREASING:
        work = SeriesData(series.locations, -series.values)

    rng = RngStream(sc.seed, stream_id)
    state = init_state(work, mc, rng)
    keep = sc.retained
    theta_draws = np.empty((keep, work.n))
    sigma2_trace = np.empty(keep)
    lambda_trace = np.empty(keep)

    kept = 0
    for it in range(sc.n_iter):
        try:
            update_eta_block(state, work, mc, rng)
            update_local_block(state, work, mc, rng)
            update_global_block(state, work, mc, rng)
            update_sigma2_block(state, work, mc, rng)
        except ChainError as err:
            raise ChainError(f"{err} (sweep {it})", it) from err
        _check_finite(state, it)
        if it >= sc.burn_in and (it - sc.burn_in) % sc.thin == sc.thin - 1:
            theta_draws[kept] = np.cumsum(state.eta)
            sigma2_trace[kept] = state.sigma2
            lambda_trace[kept] = state.lam
            kept += 1

    if mc.direction is Direction.DECREASING:
        theta_draws = -theta_draws

    meta = {
        "model": {
            "prior": mc.prior.value,
            "direction": mc.direction.value,
            "fixed_sigma2": mc.fixed_sigma2,
            "hl_nu_hyper": list(mc.hl_nu_hyper),
            "lambda_exponent": mc.lambda_exponent,
            "sigma2_prior": list(mc.sigma2_prior),
        },
        "sampler": {
            "n_iter": sc.n_iter,
            "burn_in": sc.burn_in,
            "thin": sc.thin,
            "seed": sc.seed,
            "stream_id": stream_id,
        },
        "floor_hits": dict(state.floor_hits),
        "locations": work.locations.tolist(),
    }
    return PosteriorDraws(theta_draws[:kept], sigma2_trace[:kept], lambda_trace[:kept], meta)


def run_chain_fixed_scales(
    series: SeriesData,
    tau: np.ndarray,
    lam: float,
    sigma2: float,
    sc: SamplerConfig,
    stream_id: int = 0,
) -> PosteriorDraws:
    """Gibbs chain with tau, lambda and sigma2 frozen (eta block only).

    Used to cross-validate the eta conditionals against the brute-force
    rejection oracle on tiny instances.
    """
    mc = ModelConfig(fixed_sigma2=sigma2)
    rng = RngStream(sc.seed, stream_id)
    state = init_state(series, mc, rng)
    state.tau = np.asarray(tau, dtype=float).copy()
    state.lam = float(lam)
    state.sigma2 = float(sigma2)

    keep = sc.retained
    theta_draws = np.empty((keep, series.n))
    kept = 0
    for it in range(sc.n_iter):
        update_eta_block(state, series, mc, rng)
        _check_finite(state, it)
        if it >= sc.burn_in and (it - sc.burn_in) % sc.thin == sc.thin - 1:
            theta_draws[kept] = np.cumsum(state.eta)
            kept += 1
    meta = {
        "model": {"fixed_scales": True, "tau": list(map(float, tau)),
                  "lambda": float(lam), "sigma2": float(sigma2)},
        "sampler": {"n_iter": sc.n_iter, "burn_in": sc.burn_in,
                    "thin": sc.thin, "seed": sc.seed, "stream_id": stream_id},
    }
    return PosteriorDraws(theta_draws[:kept], np.full(kept, sigma2),
                          np.full(kept, float(lam)), meta)
