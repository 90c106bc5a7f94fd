"""
How often do the convergence conditions hold?
=============================================

Generate random models and count, per model, whether a dominating row or
column exists, whether greedy actions ignore the unobserved state, and
whether alternating iteration finds the optimum from every start.
"""

from camdp import GeneratorSpec, SolverConfig
from camdp.experiments import run_mc_conditions

summary, records = run_mc_conditions(GeneratorSpec(seed=0), 40, SolverConfig())
for name, value in summary.rows():
    print(f"{name:34s} {value}")

# %%
# The equilibrium count never exceeds the dominance bound.

print(max(r["ne_count"] - r["ne_bound"] for r in records) <= 0)

# %%
# Models without private states satisfy the observability check trivially,
# so dominance alone decides global convergence there.

small, _ = run_mc_conditions(GeneratorSpec((1, 2, 1, 2, 2), 0), 40, SolverConfig())
print("cond1", small.cond1, "cond1 and cond2", small.cond1_and_cond2, "violations", small.implication_violations)
