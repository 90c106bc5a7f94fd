"""
Ignoring part of what an agent observes
=======================================

Force Agent0 to use the same action across groups of its observation
cells and compare the best value that remains.
"""

from camdp import CASE_STUDY_GAMMA, PolicyConstraint, SolverConfig, constrained_best, case_study_model, preset_constraint

model = case_study_model()
cfg = SolverConfig(gamma=CASE_STUDY_GAMMA)

for name in ("s0-only", "ss-only"):
    r = constrained_best(model, preset_constraint(model, name), cfg)
    print(f"{name:8s} {r.original_count}->{r.reduced_count}  best {r.best_original:.3f} -> {r.best_reduced:.3f}")

# %%
# Any partition of the four cells works; singletons change nothing.

for classes in [((0,), (1,), (2,), (3,)), ((0, 1, 2, 3),), ((0, 3), (1, 2))]:
    r = constrained_best(model, PolicyConstraint("agent0", classes), cfg)
    print(classes, r.reduced_count, round(r.delta_v, 4))
