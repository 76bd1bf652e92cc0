"""Statistical test battery for the distribution samplers.

Each check pits a sampler against an oracle that does not share its code
path: quadrature-integrated densities (integrated on the log scale, which
tames the near-singular GIG cases), closed-form moments through Bessel
ratios and the Mills ratio, and Kolmogorov-Smirnov tests of the empirical
CDF.  The battery is what the ``dist-test`` command runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import kstest, norm

from .rng import (
    GigParams,
    RngStream,
    gig_log_density,
    gig_mean,
    sample_gamma,
    sample_gig,
    sample_gig_raw,
    sample_inverse_gamma,
    sample_truncated_normal_pos,
    truncated_normal_pos_mean,
)

__all__ = ["CheckResult", "run_battery", "quadrature_cdf", "KS_LEVEL"]

KS_LEVEL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _as_log_space_pdf(log_pdf):
    """Density of Y = log X given the log density of X, safe at the extreme
    quadrature nodes where exp would overflow (the mass there is nil)."""

    def pdf_y(y: float) -> float:
        if abs(y) > 350.0:  # exp(y)**2 must stay a normal double downstream
            return 0.0
        val = log_pdf(math.exp(y)) + y
        return math.exp(val) if val > -745.0 else 0.0

    return pdf_y


def quadrature_cdf(log_pdf, draws: np.ndarray, points: int = 400):
    """Numeric CDF built by integrating exp(log_pdf) in log space.

    Returns a callable CDF covering the draw range, for use with kstest.
    """
    lo = math.log(draws.min()) - 2.0
    hi = math.log(draws.max()) + 2.0
    grid = np.linspace(lo, hi, points)
    pdf_y = _as_log_space_pdf(log_pdf)

    pieces = [quad(pdf_y, -np.inf, grid[0], limit=400)[0]]
    pieces += [quad(pdf_y, grid[i], grid[i + 1], limit=200)[0]
               for i in range(points - 1)]
    cum = np.clip(np.cumsum(pieces), 0.0, 1.0)

    def cdf(x):
        return np.interp(np.log(np.asarray(x, dtype=float)), grid, cum)

    return cdf


def _log_gamma_pdf(shape: float, rate: float):
    c = shape * math.log(rate) - math.lgamma(shape)
    return lambda x: c + (shape - 1.0) * math.log(x) - rate * x


def _log_invgamma_pdf(alpha: float, beta: float):
    c = alpha * math.log(beta) - math.lgamma(alpha)
    return lambda x: c - (alpha + 1.0) * math.log(x) - beta / x


def _log_truncnorm_pos_pdf(mean: float, sd: float):
    lognorm = norm.logsf(-mean / sd)  # P(X > 0)
    return lambda x: float(norm.logpdf(x, mean, sd) - lognorm)


def _mean_check(name, draws, expect, n_se: float = 4.0) -> CheckResult:
    emp = float(np.mean(draws))
    se = float(np.std(draws, ddof=1) / math.sqrt(draws.size))
    z = (emp - expect) / se
    return CheckResult(
        name, abs(z) <= n_se,
        f"empirical {emp:.6g} vs {expect:.6g} (z = {z:.2f}, {n_se:.0f} SE allowed)")


def _ks_check(name, draws, cdf) -> CheckResult:
    res = kstest(draws, cdf)
    return CheckResult(
        name, res.pvalue >= KS_LEVEL,
        f"KS stat {res.statistic:.5f}, p = {res.pvalue:.4g} (level {KS_LEVEL})")


def _norm_check(name, log_pdf, tol: float = 1e-6) -> CheckResult:
    pdf_y = _as_log_space_pdf(log_pdf)
    mass = quad(pdf_y, -np.inf, np.inf, limit=600)[0]
    return CheckResult(
        name, abs(mass - 1.0) <= tol, f"quadrature mass {mass:.9f} (tol {tol})")


def run_battery(seed: int = 2024, n_draws: int = 100_000) -> list[CheckResult]:
    """Run every check; returns one result per check."""
    checks: list[CheckResult] = []
    rng = RngStream(seed, 0)

    # reproducibility: identical (seed, stream_id) replays identically
    a_run = [RngStream(99, 7).gen.random() for _ in range(64)]
    b_run = [RngStream(99, 7).gen.random() for _ in range(64)]
    checks.append(CheckResult(
        "streams: equal ids replay bit-identically", a_run == b_run,
        "64 draws compared"))
    c_run = [RngStream(99, 8).gen.random() for _ in range(64)]
    checks.append(CheckResult(
        "streams: distinct ids differ", a_run != c_run, "64 draws compared"))

    # gamma: moments and KS against the quadrature CDF
    g = np.array([sample_gamma(3.0, 2.0, rng) for _ in range(n_draws)])
    checks.append(_mean_check("gamma(3,2) mean = 1.5", g, 1.5))
    checks.append(_ks_check("gamma(3,2) vs quadrature CDF", g,
                            quadrature_cdf(_log_gamma_pdf(3.0, 2.0), g)))
    checks.append(_norm_check("gamma(3,2) density normalizes",
                              _log_gamma_pdf(3.0, 2.0)))
    g_half = np.array([sample_gamma(0.5, 2.0, rng) for _ in range(n_draws)])
    checks.append(_mean_check("gamma(1/2,2) mean = 1/4", g_half, 0.25))

    # inverse gamma: reciprocal identity and direct KS
    ig = np.array([sample_inverse_gamma(3.0, 2.0, rng) for _ in range(n_draws)])
    checks.append(_mean_check("invgamma(3,2) mean = 1", ig, 1.0))
    checks.append(_ks_check("1/invgamma(3,2) vs gamma quadrature CDF", 1.0 / ig,
                            quadrature_cdf(_log_gamma_pdf(3.0, 2.0), 1.0 / ig)))
    checks.append(_ks_check("invgamma(3,2) vs quadrature CDF", ig,
                            quadrature_cdf(_log_invgamma_pdf(3.0, 2.0), ig)))
    checks.append(_norm_check("invgamma(3,2) density normalizes",
                              _log_invgamma_pdf(3.0, 2.0)))

    # truncated normal: half-normal mean, Mills-ratio mean, far tails
    tn0 = np.array([sample_truncated_normal_pos(0.0, 1.0, rng) for _ in range(n_draws)])
    checks.append(_mean_check("truncnorm_pos(0,1) mean = sqrt(2/pi)", tn0,
                              math.sqrt(2.0 / math.pi)))
    checks.append(CheckResult("truncnorm_pos(0,1) strictly positive",
                              bool(np.all(tn0 > 0)), f"min = {tn0.min():.3g}"))
    tn5 = np.array([sample_truncated_normal_pos(-5.0, 1.0, rng) for _ in range(n_draws)])
    checks.append(_mean_check("truncnorm_pos(-5,1) mean (Mills ratio)", tn5,
                              truncated_normal_pos_mean(-5.0, 1.0)))
    tn10 = np.array([sample_truncated_normal_pos(10.0, 1.0, rng) for _ in range(20000)])
    checks.append(_mean_check("truncnorm_pos(10,1) mean = 10", tn10,
                              truncated_normal_pos_mean(10.0, 1.0)))
    extreme = [sample_truncated_normal_pos(m, 1.0, rng)
               for m in (-1e6, -1e3, 1e6) for _ in range(100)]
    checks.append(CheckResult(
        "truncnorm_pos terminates and stays positive at mean/sd = +/-1e6",
        bool(np.all(np.array(extreme) > 0)), "300 draws"))
    checks.append(_ks_check(
        "truncnorm_pos(0,1) vs quadrature CDF", tn0,
        quadrature_cdf(_log_truncnorm_pos_pdf(0.0, 1.0), tn0)))
    checks.append(_ks_check(
        "truncnorm_pos(-2,1) (tail algorithm) vs quadrature CDF",
        np.array([sample_truncated_normal_pos(-2.0, 1.0, rng)
                  for _ in range(n_draws)]),
        quadrature_cdf(_log_truncnorm_pos_pdf(-2.0, 1.0),
                       np.array([1e-4, 10.0]))))
    checks.append(_norm_check("truncnorm_pos(-2,1) density normalizes",
                              _log_truncnorm_pos_pdf(-2.0, 1.0)))

    # GIG: Bessel-symmetry mean, KS against quadrature CDFs, normalization
    gig_a = np.array([sample_gig(GigParams(4.0, 1.0, -0.5), rng) for _ in range(n_draws)])
    checks.append(_mean_check("gig(4,1,-1/2) mean = 1/2", gig_a, 0.5))
    for a, b, p in [(2.0, 2.0, 0.0), (4.0, 1.0, -0.5), (1.0, 3.0, 1.7), (2.0, 2.0, -6.5)]:
        params = GigParams(a, b, p)
        draws = np.array([sample_gig(params, rng) for _ in range(n_draws)])
        cdf = quadrature_cdf(lambda x, par=params: gig_log_density(par, x), draws)
        checks.append(_ks_check(f"gig({a},{b},{p}) vs quadrature CDF", draws, cdf))
        checks.append(_norm_check(
            f"gig({a},{b},{p}) density normalizes",
            lambda x, par=params: gig_log_density(par, x)))

    # gamma fallback: below the threshold the draw is Ga(p, a/2) ...
    fb = np.array([sample_gig_raw(3.0, 1e-13, 0.7, rng) for _ in range(n_draws)])
    checks.append(_ks_check("gig(3,1e-13,0.7) falls back to Ga(0.7,1.5)", fb,
                            quadrature_cdf(_log_gamma_pdf(0.7, 1.5), fb)))
    # ... and just above it the exact GIG is already indistinguishable
    near = GigParams(3.0, 1e-8, 0.7)
    gig_cdf = quadrature_cdf(lambda x: gig_log_density(near, x),
                             np.array([1e-6, 50.0]))
    gam_cdf = quadrature_cdf(_log_gamma_pdf(0.7, 1.5), np.array([1e-6, 50.0]))
    xs = np.geomspace(1e-4, 20.0, 200)
    gap = float(np.max(np.abs(gig_cdf(xs) - gam_cdf(xs))))
    checks.append(CheckResult(
        "gig(3,1e-8,0.7) CDF within 1e-3 of the gamma limit", gap <= 1e-3,
        f"sup gap {gap:.2e}"))

    # GIG reciprocal identity, pointwise on the log densities
    ok = True
    worst = 0.0
    for a, b, p in [(2.0, 3.0, 0.7), (1.0, 1.0, 0.0), (4.0, 1.0, -1.2)]:
        for x in (0.1, 0.7, 1.3, 5.0):
            lhs = gig_log_density(GigParams(a, b, p), x)
            rhs = gig_log_density(GigParams(b, a, -p), 1.0 / x) - 2.0 * math.log(x)
            worst = max(worst, abs(lhs - rhs))
            ok = ok and abs(lhs - rhs) <= 1e-10
    checks.append(CheckResult("gig reciprocal identity (log densities)", ok,
                              f"max abs diff {worst:.2e}"))

    # GIG(.,.,-1/2) log density equals the inverse-Gaussian density
    from scipy.stats import invgauss

    a, b = 5.0, 2.0
    mu, lam = math.sqrt(b / a), b
    ok = True
    worst = 0.0
    for x in (0.05, 0.3, 1.0, 4.0):
        lhs = gig_log_density(GigParams(a, b, -0.5), x)
        rhs = float(invgauss.logpdf(x, mu / lam, scale=lam))
        worst = max(worst, abs(lhs - rhs))
        ok = ok and abs(lhs - rhs) <= 1e-9
    checks.append(CheckResult("gig(a,b,-1/2) equals inverse-Gaussian density",
                              ok, f"max abs diff {worst:.2e}"))

    # moment identity for the heavier case used by the local block
    em = gig_mean(GigParams(2.0, 2.0, 0.0))
    g22 = np.array([sample_gig(GigParams(2.0, 2.0, 0.0), rng) for _ in range(n_draws)])
    checks.append(_mean_check("gig(2,2,0) mean matches Bessel ratio", g22, em))

    return checks
