"""Watch the posterior mean chase a single growing jump.

One increment z_i* is driven through 5 -> 100 while the rest stay at 0.1.
Under the half-horseshoe prior the relative gap |E[eta_i* | z] - z_i*| / z_i*
shrinks toward zero (weak tail-robustness); a standard-normal prior keeps a
constant relative gap sigma2 / (1 + sigma2) no matter how large the jump is.
"""
import numpy as np

from isoshrink.model import ModelConfig, SamplerConfig
from isoshrink.probes import ProbeSpec, normal_prior_gap, tail_robustness_probe

spec = ProbeSpec(base_z=np.full(9, 0.1), i_star=5,
                 magnitudes=(5.0, 10.0, 20.0, 50.0, 100.0), sigma2=1.0)
sc = SamplerConfig(n_iter=8000, burn_in=1000, thin=1, seed=88)
results = tail_robustness_probe(spec, ModelConfig(prior="hh"), sc)

contrast = normal_prior_gap(spec.sigma2)
print("z*      half-horseshoe gap        normal-prior gap")
for r in results:
    print(f"{r.z_star:6.0f}  {r.gap:8.4f} (se {r.stderr:.4f})    {contrast:8.4f}")
print("\nthe half-horseshoe gap vanishes with the jump size; "
      "the normal prior never lets go of its fixed fraction")
