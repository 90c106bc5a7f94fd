"""
Discounted values flatten as gamma grows
========================================

For a fixed policy, (1 - gamma) * v approaches the average reward in every
state, so the relative spread of v across states shrinks.
"""

import numpy as np

from camdp import GeneratorSpec, JointPolicy, augment, average_reward, random_camdp
from camdp.experiments import run_gamma_sweep

model = random_camdp(GeneratorSpec(seed=3))
policies = [JointPolicy([0, 1, 1, 0], [1, 0, 0, 1]), JointPolicy([1, 1, 0, 0], [0, 0, 1, 1])]
gammas = [0.5, 0.75, 0.95, 0.998]

out = run_gamma_sweep(model, policies, gammas)
for p, spread in zip(out["policies"], out["spread"]):
    print(p, " ".join(f"{100 * s:6.3f}%" for s in spread))

# %%
# The scaled values against the stationary average reward.

for k, p in enumerate(policies):
    g = average_reward(augment(model, p))
    print(p, "g =", round(g, 5), "(1-gamma) v at 0.998:", np.round((1 - 0.998) * out["values"][k, -1], 5))
