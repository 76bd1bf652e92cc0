"""Marginal prior densities of a positive increment under the three
shrinkage families, for density-curve emission and testing.

With scale s2 = sigma2 * lambda, the increment follows N_+(0, s2 * tau):
under the half-normal family tau = 1 (closed form); under the half-Laplace
family tau ~ Ga(1, nu), whose mixture is the exponential density with rate
sqrt(2*nu/s2); the half-horseshoe mixes over sqrt(tau) ~ half-Cauchy and is
evaluated by quadrature.
"""
from __future__ import annotations

import csv
import math

import numpy as np
from scipy.integrate import quad

__all__ = [
    "half_normal_density",
    "half_laplace_density",
    "half_horseshoe_density",
    "write_density_curves",
]


def half_normal_density(eta, sigma2: float = 1.0, lam: float = 1.0):
    """Density of N_+(0, sigma2*lam) at eta > 0."""
    eta = np.asarray(eta, dtype=float)
    s2 = sigma2 * lam
    out = np.where(
        eta > 0,
        2.0 / math.sqrt(2.0 * math.pi * s2) * np.exp(-(eta**2) / (2.0 * s2)),
        0.0)
    return out if out.ndim else float(out)


def half_laplace_density(eta, sigma2: float = 1.0, lam: float = 1.0, nu: float = 1.0):
    """Exponential density with rate sqrt(2*nu/(sigma2*lam)) at eta > 0."""
    eta = np.asarray(eta, dtype=float)
    rate = math.sqrt(2.0 * nu / (sigma2 * lam))
    out = np.where(eta > 0, rate * np.exp(-rate * eta), 0.0)
    return out if out.ndim else float(out)


def _hh_integrand(t: float, eta: float, s2: float) -> float:
    v = s2 * t * t
    return (2.0 / math.sqrt(2.0 * math.pi * v) * math.exp(-eta * eta / (2.0 * v))
            * (2.0 / math.pi) / (1.0 + t * t))


def half_horseshoe_density(eta, sigma2: float = 1.0, lam: float = 1.0):
    """Half-horseshoe marginal at eta > 0, by quadrature over the
    half-Cauchy scale mixture (the density diverges as eta -> 0)."""
    s2 = sigma2 * lam
    scalar = np.isscalar(eta)
    etas = np.atleast_1d(np.asarray(eta, dtype=float))
    out = np.empty_like(etas)
    for i, e in enumerate(etas):
        if e <= 0:
            out[i] = 0.0
            continue
        val, _ = quad(_hh_integrand, 0.0, np.inf, args=(float(e), s2), limit=200)
        out[i] = val
    return float(out[0]) if scalar else out


def write_density_curves(
    path,
    grid=None,
    sigma2: float = 1.0,
    lam: float = 1.0,
    hl_nu: float = 1.0,
) -> None:
    """CSV of the three prior densities over a grid of increment values."""
    if grid is None:
        grid = np.linspace(0.01, 4.0, 400)
    grid = np.asarray(grid, dtype=float)
    hh = half_horseshoe_density(grid, sigma2, lam)
    hl = half_laplace_density(grid, sigma2, lam, hl_nu)
    hn = half_normal_density(grid, sigma2, lam)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eta", "hh", "hl", "hn"])
        for i in range(grid.size):
            writer.writerow([format(grid[i], ".17g"), format(hh[i], ".17g"),
                             format(hl[i], ".17g"), format(hn[i], ".17g")])
