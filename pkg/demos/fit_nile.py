"""Fit the annual Nile flow series (1871-1970) with a decreasing monotone
curve under the half-horseshoe prior and locate the largest drop.

The series has a well-known regime change around 1898, when a dam altered
the flow.  A heavy-tailed prior on the increments lets the fitted curve
absorb that drop in a single step instead of smearing it out.
"""
from isoshrink import ModelConfig, SamplerConfig, run_chain, summarize
from isoshrink.cli import nile_path, read_series_csv
from isoshrink.posterior import max_increment_location, PosteriorSummary

series = read_series_csv(nile_path())
print(f"loaded {series.n} observations, {series.locations[0]:.0f}-{series.locations[-1]:.0f}")

mc = ModelConfig(prior="hh", direction="decreasing")
sc = SamplerConfig(n_iter=6000, burn_in=1000, thin=1, seed=1)
draws = run_chain(series, mc, sc)
summary = summarize(draws, level=0.95)

print("\nyear   mean      95% interval")
for i in range(0, series.n, 10):
    print(f"{summary.locations[i]:.0f}  {summary.mean[i]:8.1f}   "
          f"[{summary.lower[i]:8.1f}, {summary.upper[i]:8.1f}]")

# the change point is the largest drop, i.e. the largest increment of the
# negated (increasing) representation
flipped = PosteriorSummary(summary.locations, -summary.mean,
                           -summary.upper, -summary.lower, 0.95)
year, drop = max_increment_location(flipped)
print(f"\nlargest posterior-mean drop: {-drop:.1f} at {year:.0f} "
      "(dam-induced change reported near 1898)")
