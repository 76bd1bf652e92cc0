"""Seeded random streams and exact samplers for the distributions used by the
Gibbs sampler: gamma, inverse gamma, generalized inverse Gaussian (GIG) and
the normal distribution truncated to the positive half line.

All samplers are pure functions of an :class:`RngStream`, so independent
workers get independent, reproducible draw sequences by holding streams with
distinct ``stream_id`` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "GigParams",
    "ParameterError",
    "sample_gamma",
    "sample_inverse_gamma",
    "sample_gig",
    "sample_gig_zero_vec",
    "sample_gig_half_vec",
    "sample_truncated_normal_pos",
    "gig_log_density",
    "gig_mean",
    "truncated_normal_pos_mean",
]

_U64_MAX = 2**64 - 1

# GIG draws are done on the log scale; omega = sqrt(a*b) is floored here so a
# zero-underflowed b cannot produce an undefined density.  The floor is far
# below anything statistically distinguishable, but large enough that
# omega**2 stays a normal double in the bracket bound of _drop_point.
_OMEGA_FLOOR = 1e-150

# Below this b, GIG(a, b, p>0) is replaced by its analytic b -> 0 limit
# Ga(p, a/2) to avoid degenerate hat setups.
_GIG_GAMMA_FALLBACK_B = 1e-12


class ParameterError(ValueError):
    """A sampler was called with parameters outside its domain."""


@dataclass
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The underlying generator is counter-based (Philox keyed directly by the
    two identifiers), so distinct ``stream_id`` values give statistically
    independent streams without any coordination between workers, and equal
    identifiers replay bit-identical sequences.
    """

    seed: int
    stream_id: int = 0
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not isinstance(value, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            if not 0 <= value <= _U64_MAX:
                raise ParameterError(f"{name} must fit in an unsigned 64-bit value")
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class GigParams:
    """Parameters of GIG(a, b, p) with density proportional to
    ``x**(p-1) * exp(-(a*x + b/x)/2)`` on x > 0."""

    a: float
    b: float
    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise ParameterError(f"GIG parameter a must be positive, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ParameterError(f"GIG parameter b must be positive, got {self.b}")
        if not math.isfinite(self.p):
            raise ParameterError(f"GIG parameter p must be finite, got {self.p}")


def sample_gamma(shape: float, rate: float, rng: RngStream) -> float:
    """One draw from Ga(shape, rate), rate parameterization (mean shape/rate)."""
    if not (shape > 0 and math.isfinite(shape)):
        raise ParameterError(f"gamma shape must be positive, got {shape}")
    if not (rate > 0 and math.isfinite(rate)):
        raise ParameterError(f"gamma rate must be positive, got {rate}")
    return float(rng.gen.gamma(shape, 1.0 / rate))


def sample_inverse_gamma(alpha: float, beta: float, rng: RngStream) -> float:
    """One draw X with 1/X ~ Ga(alpha, beta); density IG(alpha, beta)."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ParameterError(f"inverse-gamma shape must be positive, got {alpha}")
    if not (beta > 0 and math.isfinite(beta)):
        raise ParameterError(f"inverse-gamma scale must be positive, got {beta}")
    g = rng.gen.gamma(alpha, 1.0)
    while g == 0.0:  # guard against underflow at very small alpha
        g = rng.gen.gamma(alpha, 1.0)
    return float(beta / g)


def sample_truncated_normal_pos(mean: float, sd: float, rng: RngStream) -> float:
    """One draw from N(mean, sd**2) conditioned on (0, inf).

    Naive rejection when mean/sd > -0.5; otherwise a one-sided
    exponential-proposal rejection whose acceptance rate stays bounded away
    from zero however negative the mean is.
    """
    if not (sd > 0 and math.isfinite(sd)):
        raise ParameterError(f"sd must be positive, got {sd}")
    if not math.isfinite(mean):
        raise ParameterError(f"mean must be finite, got {mean}")
    gen = rng.gen
    a = -mean / sd  # left truncation point for the standardized variable
    if a < 0.5:
        while True:
            z = gen.standard_normal()
            if z > a:
                x = sd * (z - a)
                if x > 0.0:
                    return x
    # exponential proposal anchored at a, optimal rate (a + sqrt(a^2+4))/2
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    gap = 2.0 / (a + math.sqrt(a * a + 4.0))  # = alpha - a, cancellation-free
    while True:
        delta = gen.standard_exponential() / alpha
        diff = delta - gap  # = (a + delta) - alpha
        if gen.random() <= math.exp(-0.5 * diff * diff):
            x = sd * delta
            if x > 0.0:
                return x


def _twoparam_gig(a: float, b: float) -> tuple[float, float]:
    """Map GIG(a, b, p) onto the standardized form exp(p*y - omega*cosh(y))
    in y = log(x / scale); returns (omega, scale)."""
    scale = math.sqrt(b) / math.sqrt(a)
    omega = max(math.sqrt(a) * math.sqrt(b), _OMEGA_FLOOR)
    return omega, scale


def _coshm1(d: float) -> float:
    """cosh(d) - 1 without the precision loss of the direct expression."""
    s = math.sinh(0.5 * d)
    return 2.0 * s * s


def _drop_point(c: float, q: float, omega: float) -> float:
    """Distance d > 0 from the mode at which the standardized GIG log density
    has fallen by one, i.e. the root of c*(cosh d - 1) + q*(sinh d - d) = 1.

    ``c`` is omega*cosh(y_mode) and ``q`` is +/-p depending on the side.
    Any d at or beyond the root yields a valid tangent hat, so bisection to
    modest precision suffices.  Since sinh(d) - d <= cosh(d) - 1, the root is
    bounded by acosh(1 + 1/(c - |q|)); c - |q| is formed as omega**2/(c+|q|)
    to avoid cancellation (c = hypot(q, omega) > |q|).
    """
    def u(d: float) -> float:
        # cosh(d) - 1 written as 2*sinh(d/2)**2 keeps full relative
        # precision for the tiny drop distances of huge-omega cases
        return c * _coshm1(d) + q * (math.sinh(d) - d) - 1.0

    denom = c if q >= 0.0 else omega * omega / (c - q)
    eps = 1.0 / denom
    # sqrt(2*eps) >= acosh(1+eps) and stays accurate where acosh(1+eps)
    # collapses in floating point (huge omega)
    hi = math.sqrt(2.0 * eps) if eps < 1e-8 else math.acosh(1.0 + eps)
    lo = 0.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if u(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _sample_gig_standard(p: float, omega: float, rng: RngStream) -> float:
    """Draw from density proportional to exp(p*y - omega*cosh(y)) and return
    exp(y).  The log density is strictly concave in y, so a three-piece hat
    (flat box around the mode, tangent exponentials on both flanks) gives a
    uniformly bounded rejection constant over the whole parameter range.
    """
    y_mode = math.asinh(p / omega)
    c = math.hypot(p, omega)  # omega * cosh(y_mode)

    d_r = _drop_point(c, p, omega)
    d_l = _drop_point(c, -p, omega)
    h_r = -(c * _coshm1(d_r) + p * (math.sinh(d_r) - d_r))
    h_l = -(c * _coshm1(d_l) - p * (math.sinh(d_l) - d_l))
    r_r = c * math.sinh(d_r) + p * _coshm1(d_r)
    r_l = c * math.sinh(d_l) - p * _coshm1(d_l)

    area_c = d_l + d_r
    area_r = math.exp(h_r) / r_r
    area_l = math.exp(h_l) / r_l
    total = area_c + area_l + area_r

    gen = rng.gen
    while True:
        v = total * gen.random()
        if v < area_c:
            d = -d_l + v  # uniform over the box
            hat = 0.0
        elif v < area_c + area_r:
            d = d_r + gen.standard_exponential() / r_r
            hat = h_r - r_r * (d - d_r)
        else:
            d = -d_l - gen.standard_exponential() / r_l
            hat = h_l + r_l * (d + d_l)
        # log density drop from the mode, written to avoid cancellation:
        # h*(d) = -(c*(cosh d - 1) + p*(sinh d - d))
        h = -(c * _coshm1(d) + p * (math.sinh(d) - d))
        if math.log(gen.random()) <= h - hat:
            return math.exp(y_mode + d)


def sample_gig(params: GigParams, rng: RngStream) -> float:
    """One draw from GIG(a, b, p).

    For p > 0 with b below ``1e-12`` the analytic b -> 0 limit Ga(p, a/2)
    is used instead; this branch is also reachable directly with b <= 0
    through :func:`sample_gig_raw`.
    """
    return sample_gig_raw(params.a, params.b, params.p, rng)


def sample_gig_raw(a: float, b: float, p: float, rng: RngStream) -> float:
    """Like :func:`sample_gig` but accepts b <= 0 when p > 0 (gamma limit)."""
    if not (a > 0 and math.isfinite(a)):
        raise ParameterError(f"GIG parameter a must be positive, got {a}")
    if not math.isfinite(b) or not math.isfinite(p):
        raise ParameterError(f"GIG parameters must be finite, got b={b}, p={p}")
    if b < _GIG_GAMMA_FALLBACK_B:
        if p > 0:
            return sample_gamma(p, a / 2.0, rng)
        if b <= 0:
            raise ParameterError(f"GIG requires b > 0 when p <= 0, got b={b}")
    omega, scale = _twoparam_gig(a, b)
    return scale * _sample_gig_standard(p, omega, rng)


def sample_gig_zero_vec(a: np.ndarray, b: np.ndarray, rng: RngStream) -> np.ndarray:
    """Vectorized draws from GIG(a_i, b_i, 0).

    With p = 0 the standardized log density is -omega*(cosh(y) - 1) up to a
    constant and symmetric in y, so the drop-by-one point is closed-form
    (d = acosh(1 + 1/omega), or sqrt(2/omega) where that expression loses
    precision) and the hat tails are exact tangents there.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.sqrt(b) / np.sqrt(a)
    omega = np.maximum(np.sqrt(a) * np.sqrt(b), _OMEGA_FLOOR)

    eps = 1.0 / omega
    d = np.where(eps < 1e-8, np.sqrt(2.0 * eps), np.arccosh(1.0 + eps))
    h_drop = -omega * 2.0 * np.sinh(0.5 * d) ** 2  # drop at d, about -1
    r = omega * np.sinh(d)        # tangent slope magnitude at d
    area_c = 2.0 * d
    area_t = np.exp(h_drop) / r   # each tail
    total = area_c + 2.0 * area_t

    gen = rng.gen
    out = np.empty_like(omega)
    todo = np.arange(omega.size)
    om, dd, rr, hd, ac, at, tot = omega, d, r, h_drop, area_c, area_t, total
    while todo.size:
        m = todo.size
        v = tot * gen.random(m)
        e = gen.standard_exponential(m)
        u = gen.random(m)
        in_box = v < ac
        in_right = (~in_box) & (v < ac + at)
        y = np.where(in_box, v - dd, dd + e / rr)
        y = np.where(in_box | in_right, y, -y)
        hat = np.where(in_box, 0.0, hd - rr * (np.abs(y) - dd))
        with np.errstate(over="ignore"):
            h = -om * 2.0 * np.sinh(0.5 * y) ** 2
        acc = np.log(u) <= h - hat
        out[todo[acc]] = y[acc]
        todo = todo[~acc]
        om, dd, rr, hd, ac, at, tot = (
            om[~acc], dd[~acc], rr[~acc], hd[~acc], ac[~acc], at[~acc], tot[~acc])
    return scale * np.exp(out)


def sample_gig_half_vec(a: np.ndarray, b: np.ndarray, rng: RngStream) -> np.ndarray:
    """Vectorized draws from GIG(a_i, b_i, 1/2).

    Uses the reciprocal identity 1/X ~ GIG(b, a, -1/2), an inverse-Gaussian
    distribution sampled exactly by the Michael-Schucany-Haas transformation
    (no rejection loop).  Entries with b below the gamma-fallback threshold
    are drawn from the Ga(1/2, a/2) limit instead.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tiny = b < _GIG_GAMMA_FALLBACK_B

    mu = np.sqrt(a) / np.sqrt(np.where(tiny, 1.0, b))  # IG mean for 1/X
    lam = a
    ysq = rng.gen.standard_normal(a.size) ** 2
    t = mu * ysq / (2.0 * lam)
    root = 1.0 + t + np.sqrt(t * (t + 2.0))
    x_small = mu / root
    pick_small = rng.gen.random(a.size) <= mu / (mu + x_small)
    y = np.where(pick_small, x_small, mu * root)

    out = 1.0 / y
    if np.any(tiny):
        out[tiny] = rng.gen.gamma(0.5, 2.0 / a[tiny])
    return out


def gig_log_density(params: GigParams, x: float) -> float:
    """Log density of GIG(a, b, p) at x, including the 2*K_p(sqrt(ab))
    normalizer (Bessel evaluated in log space)."""
    from scipy.special import kve

    if not (x > 0 and math.isfinite(x)):
        raise ParameterError(f"GIG density requires x > 0, got {x}")
    a, b, p = params.a, params.b, params.p
    omega = math.sqrt(a) * math.sqrt(b)
    log_k = math.log(kve(p, omega)) - omega
    return (0.5 * p * (math.log(a) - math.log(b)) - math.log(2.0) - log_k
            + (p - 1.0) * math.log(x) - 0.5 * (a * x + b / x))


def gig_mean(params: GigParams) -> float:
    """E[X] for X ~ GIG(a, b, p), via the Bessel-ratio moment formula."""
    from scipy.special import kve

    a, b, p = params.a, params.b, params.p
    omega = math.sqrt(a) * math.sqrt(b)
    return math.sqrt(b / a) * kve(p + 1.0, omega) / kve(p, omega)


def truncated_normal_pos_mean(mean: float, sd: float) -> float:
    """E[X] for X ~ N(mean, sd**2) conditioned on (0, inf) (Mills ratio)."""
    from scipy.stats import norm

    alpha = -mean / sd
    if alpha > 25.0:
        # logpdf - logsf loses precision out here; use the asymptotic
        # inverse Mills ratio alpha + 1/alpha - 2/alpha**3 + 10/alpha**5
        ratio = alpha + 1.0 / alpha - 2.0 / alpha**3 + 10.0 / alpha**5
    else:
        ratio = math.exp(norm.logpdf(alpha) - norm.logsf(alpha))
    return mean + sd * ratio
