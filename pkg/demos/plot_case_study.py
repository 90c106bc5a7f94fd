"""
Two agents on a shared 8-state system
=====================================

Enumerate every joint policy of the built-in case-study model, find the
pure equilibria, and see where alternating best responses end up.
"""

import numpy as np

from camdp import (
    CASE_STUDY_GAMMA,
    JointPolicy,
    PolicyCache,
    SolverConfig,
    alternate_iterate,
    enumerate_value_matrix,
    find_nash_equilibria,
    case_study_model,
)

model = case_study_model()
cfg = SolverConfig(gamma=CASE_STUDY_GAMMA)
cache = PolicyCache(model, cfg)

# %%
# The value matrix: rows are Agent0 sub-policies, columns Agent1's.

vm = enumerate_value_matrix(model, cfg, cache)
print(vm.shape, "max", round(vm.max, 4), "at", vm.policy(*vm.argmax))
print(np.round(vm.values[:4, :4], 3))

# %%
# Every cell that is both a row and a column maximum is an equilibrium.

for i, j in find_nash_equilibria(vm):
    print(vm.policy(i, j), round(vm.values[i, j], 4))

# %%
# Starting from ([0,0,0,0], [1,0,0,0]) the agents settle on the smaller
# equilibrium after one move by Agent0.

trace = alternate_iterate(model, JointPolicy([0, 0, 0, 0], [1, 0, 0, 0]), cfg, cache)
for step in trace.steps:
    print(f"{step.mover:7s} {step.policy}  {step.value:.4f}")
print(trace.outcome, "switches", trace.switch_counts)
