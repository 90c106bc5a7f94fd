"""Complexity reduction of the policy space.

Two mechanisms: pruning sub-policies whose best achievable value is low,
and equality constraints that force groups of observation cells to share
one action (a policy that ignores part of what the agent observes).
"""

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .equilibrium import ENUMERATION_CAP, EnumerationSizeError, enumerate_sub_policies
from .model import JointPolicy
from .policy import AGENTS, PolicyCache, agent_id

PRESETS = ("s0-only", "ss-only", "s1-only")


def prune_by_value(vm, threshold, agent="agent0"):
    """Sub-policies of ``agent`` whose best value over all opponent policies
    is at most ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    which = agent_id(agent)
    best = vm.values.max(axis=1) if which == 0 else vm.values.max(axis=0)
    pols = vm.policies0 if which == 0 else vm.policies1
    return [p for p, b in zip(pols, best) if b <= threshold]


def prune_from_traces(traces, threshold, agent="agent0"):
    """Offline replay of recorded traces: sub-policies whose best observed
    value never exceeded ``threshold``."""
    which = agent_id(agent)
    best = {}
    for trace in traces:
        for step in trace.steps:
            sub = step.policy.sub(which)
            best[sub] = max(best.get(sub, -np.inf), step.value)
    return sorted(p for p, b in best.items() if b <= threshold)


@dataclass(frozen=True)
class PolicyConstraint:
    """Partition of an agent's observation cells into equal-action classes."""

    agent: str
    classes: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(tuple(int(c) for c in k) for k in self.classes))
        agent_id(self.agent)

    def check(self, n_cells):
        cells = sorted(c for k in self.classes for c in k)
        if cells != list(range(n_cells)) or any(not k for k in self.classes):
            raise ValueError(f"classes {self.classes} do not partition cells 0..{n_cells - 1}")

    def count(self, n_actions):
        return n_actions ** len(self.classes)

    def sub_policies(self, n_actions, n_cells):
        self.check(n_cells)
        out = []
        for choice in itertools.product(range(n_actions), repeat=len(self.classes)):
            sub = [0] * n_cells
            for a, k in zip(choice, self.classes):
                for c in k:
                    sub[c] = a
            out.append(tuple(sub))
        return out


def vacuous_constraint(model, agent="agent0"):
    n = model.n_cells0 if agent_id(agent) == 0 else model.n_cells1
    return PolicyConstraint(agent, tuple((c,) for c in range(n)), "no constraint")


def preset_constraint(model, name, agent=None):
    """Named presets: ``s0-only`` and ``s1-only`` keep only the agent's private
    state; ``ss-only`` keeps only the shared state (Agent0 unless given)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    if agent is None:
        agent = "agent1" if name == "s1-only" else "agent0"
    which = agent_id(agent)
    own = model.ns0 if which == 0 else model.ns1
    nss = model.nss
    if (name == "s0-only" and which != 0) or (name == "s1-only" and which != 1):
        raise ValueError(f"preset {name!r} does not apply to {AGENTS[which]}")
    # cell index is own_state * nss + ss
    if name == "ss-only":
        classes = [tuple(o * nss + s for o in range(own)) for s in range(nss)]
        label = f"pi{which} depends on ss only"
    else:
        classes = [tuple(o * nss + s for s in range(nss)) for o in range(own)]
        label = f"pi{which} depends on s{which} only"
    return PolicyConstraint(AGENTS[which], tuple(classes), label)


@dataclass
class ReductionReport:
    constraint: str
    agent: str
    original_count: int
    reduced_count: int
    best_original: float
    best_reduced: float
    delta_v: float
    spread: float
    best_policy: JointPolicy

    def loss_ok(self, eps):
        return self.delta_v <= eps

    def spread_ok(self, eps):
        return self.spread <= eps

    def as_dict(self):
        d = asdict(self)
        d["best_policy"] = {"pi0": list(self.best_policy.pi0), "pi1": list(self.best_policy.pi1)}
        return d


def constrained_best(model, constraint, cfg, cache=None, cap=ENUMERATION_CAP):
    """Best value over constrained sub-policies of one agent crossed with every
    sub-policy of the other, compared with the unconstrained best."""
    which = agent_id(constraint.agent)
    n_cells = model.n_cells0 if which == 0 else model.n_cells1
    n_actions = model.na0 if which == 0 else model.na1
    constraint.check(n_cells)
    if model.n_policies0 * model.n_policies1 > cap:
        raise EnumerationSizeError(f"{model.n_policies0 * model.n_policies1} joint policies exceed cap {cap}")
    cache = cache or PolicyCache(model, cfg)
    own_all = enumerate_sub_policies(n_actions, n_cells)
    own_reduced = set(constraint.sub_policies(n_actions, n_cells))
    others = (
        enumerate_sub_policies(model.na1, model.n_cells1)
        if which == 0
        else enumerate_sub_policies(model.na0, model.n_cells0)
    )

    def joint(own, other):
        return JointPolicy(own, other) if which == 0 else JointPolicy(other, own)

    best_all, best_red, best_pol = -np.inf, -np.inf, None
    reduced_values = []
    for own in own_all:
        for other in others:
            val = cache.scalar(joint(own, other))
            best_all = max(best_all, val)
            if own in own_reduced:
                reduced_values.append(val)
                if val > best_red:
                    best_red, best_pol = val, joint(own, other)
    return ReductionReport(
        constraint=constraint.label or str(constraint.classes),
        agent=AGENTS[which],
        original_count=len(own_all),
        reduced_count=len(own_reduced),
        best_original=float(best_all),
        best_reduced=float(best_red),
        delta_v=float(best_all - best_red),
        spread=float(max(reduced_values) - min(reduced_values)),
        best_policy=best_pol,
    )
