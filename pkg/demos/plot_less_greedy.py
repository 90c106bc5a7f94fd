"""
Less greedy improvement
=======================

Two ways to loosen pure greediness on the case-study model: a switching
threshold eta for Agent0, and random exploration for Agent1.
"""

from camdp import (
    CASE_STUDY_GAMMA,
    JointPolicy,
    PolicyCache,
    SolverConfig,
    enumerate_value_matrix,
    epsilon_greedy_iterate,
    loss_bound,
    case_study_model,
)
from camdp.experiments import epsilon_batch

model = case_study_model()
start = JointPolicy([0, 0, 0, 0], [1, 0, 0, 0])
cfg = SolverConfig(gamma=CASE_STUDY_GAMMA, epsilon_explore=0.0)
cache = PolicyCache(model, cfg)

# %%
# A larger threshold means fewer switches, at a bounded cost in value.

for eta in (0.0, 0.01, 0.1, 0.5):
    t = epsilon_greedy_iterate(model, start, cfg.replace(eta=eta), cache)
    print(f"eta={eta:<5} switches={t.switch_counts} final={t.final} value={t.final_value:.4f}")

best = enumerate_value_matrix(model, cfg, cache)
pi_star = best.policy(*best.argmax)
print("bound at eta=0.1:", loss_bound(model, pi_star, cfg.replace(eta=0.1)).round(3))

# %%
# Exploration sometimes carries the pair to the better equilibrium.

greedy = cfg.replace(epsilon_explore=0.1)
batch = epsilon_batch(model, start, greedy, range(100), best.max, cache)
print("visited global max:", batch.reached_visited, "of 100; ended there:", batch.reached_terminal)
