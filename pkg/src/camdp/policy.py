"""Policy improvement and the two-agent iteration drivers.

Both agents share one value function (the cooperative case). An agent
improves its sub-policy cell by cell: for Agent0 a cell is an ``(s0, ss)``
pair and the unobserved coordinate is ``s1``; for Agent1 a cell is
``(s1, ss)`` and the unobserved coordinate is ``s0``.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .evaluation import AGGREGATORS, aggregate, evaluate_exact
from .model import CamdpError, DimensionError, JointPolicy, augment, composite_actions

AGENTS = ("agent0", "agent1")
MODES = ("full-info", "partial-info")
TIE_TOL = 1e-12


class NonConvergenceError(CamdpError):
    """An inner best-response loop failed to stabilise; carries the partial trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def agent_id(which):
    if which in (0, 1):
        return which
    try:
        return AGENTS.index(which)
    except ValueError:
        raise ValueError(f"agent must be one of {AGENTS} or 0/1, got {which!r}") from None


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 0.9
    theta: float = 1e-6
    epsilon_explore: float = 0.1
    eta: float = 0.0
    max_iterations: int = 1000
    aggregator: str = "max"
    first_mover: str = "agent0"
    improvement_mode: str = "full-info"
    tie_break: str = "lowest-action-index"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if not 0.0 <= self.epsilon_explore <= 1.0:
            raise ValueError("epsilon_explore must lie in [0, 1]")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")
        if self.first_mover not in AGENTS:
            raise ValueError(f"first_mover must be one of {AGENTS}")
        if self.improvement_mode not in MODES:
            raise ValueError(f"improvement_mode must be one of {MODES}")
        if self.tie_break != "lowest-action-index":
            raise ValueError("only the 'lowest-action-index' tie break is supported")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return dataclasses.asdict(self)


class PolicyCache:
    """Memoised evaluations and best responses for one (model, config) pair.

    Everything here is a pure function of the joint policy, so enumeration,
    condition checks and repeated driver runs can share work.
    """

    def __init__(self, model, cfg):
        model.require_valid()
        self.model = model
        self.cfg = cfg
        self._values = {}
        self._improvements = {}
        self._responses = {}

    def value(self, policy):
        v = self._values.get(policy)
        if v is None:
            v = evaluate_exact(augment(self.model, policy), self.cfg.gamma).v
            v.flags.writeable = False
            self._values[policy] = v
        return v

    def scalar(self, policy):
        return aggregate(self.value(policy), self.cfg.aggregator)

    def improvement(self, policy, which):
        key = (policy, which)
        hit = self._improvements.get(key)
        if hit is None:
            hit = improve_agent(self.model, policy, self.value(policy), self.cfg, which)
            self._improvements[key] = hit
        return hit

    def responses(self):
        """Every memoised best-response run (or the error it raised)."""
        return list(self._responses.values())


def _first_argmax(x):
    """Argmax over the last axis; entries within TIE_TOL of the max count as ties."""
    mx = x.max(axis=-1, keepdims=True)
    tol = TIE_TOL * np.maximum(1.0, np.abs(mx))
    return np.argmax(x >= mx - tol, axis=-1)


def cell_q_values(model, policy, v, gamma, which):
    """One-step lookahead values grouped by observation cell.

    Returns an array ``(n_cells, n_unobserved, n_actions)`` for the moving
    agent, with the other agent's actions held at ``policy``.
    """
    P, _, r = model.joint_tensors
    a0, a1 = composite_actions(model, policy)
    rows = np.arange(model.n_states)
    if which == 0:
        Pq, rq = P[:, a1, rows], r[:, a1, rows]
    else:
        Pq = P.transpose(1, 0, 2, 3)[:, a0, rows]
        rq = r.transpose(1, 0, 2)[:, a0, rows]
    q = (rq + gamma * Pq @ v).T
    ns0, nss, ns1 = model.state_dims
    q = q.reshape(ns0, nss, ns1, -1)
    if which == 0:
        return q.reshape(ns0 * nss, ns1, -1)
    return q.transpose(2, 1, 0, 3).reshape(ns1 * nss, ns0, -1)


def _check_value_length(model, v):
    if len(v) != model.n_states:
        raise DimensionError(f"value vector has length {len(v)}, model has {model.n_states} states")


def improve_agent(model, policy, v, cfg, which):
    """Greedy improvement of one agent's sub-policy.

    Returns ``(new_sub_policy, changed, consistent)``. ``consistent`` is a
    per-cell boolean array: True where the per-state greedy action agrees
    across the unobserved coordinate. In full-info mode consistent cells take
    that action and the rest fall back to the argmax of the uniformly
    averaged lookahead; partial-info mode always uses the average.
    """
    which = agent_id(which)
    policy.check(model)
    v = np.asarray(v, dtype=np.float64)
    _check_value_length(model, v)
    q = cell_q_values(model, policy, v, cfg.gamma, which)
    per_state = _first_argmax(q)
    consistent = np.all(per_state == per_state[:, :1], axis=1)
    averaged = _first_argmax(q.mean(axis=1))
    if cfg.improvement_mode == "full-info":
        new = np.where(consistent, per_state[:, 0], averaged)
    else:
        new = averaged
    new = tuple(int(a) for a in new)
    return new, new != policy.sub(which), consistent


def revised_improve(model, policy, v, cfg, which=0):
    """Improvement that only switches a cell when the gain is at least ``cfg.eta``.

    The gain of a cell is the largest, over its composite states, of
    ``max_a Q(i, a) - Q(i, current)``. With ``eta == 0`` this reproduces
    :func:`improve_agent` exactly.
    """
    which = agent_id(which)
    greedy, _, _ = improve_agent(model, policy, v, cfg, which)
    q = cell_q_values(model, policy, np.asarray(v, dtype=np.float64), cfg.gamma, which)
    current = np.asarray(policy.sub(which))
    q_cur = np.take_along_axis(q, current[:, None, None], axis=2)[..., 0]
    gain = (q.max(axis=2) - q_cur).max(axis=1)
    new = np.where(gain >= cfg.eta, greedy, current)
    new = tuple(int(a) for a in new)
    return new, new != policy.sub(which)


@dataclass
class InnerStep:
    """One evaluate-improve cycle inside a best response."""

    policy: JointPolicy
    v: np.ndarray
    consistent: bool


@dataclass
class BestResponseRun:
    mover: int
    steps: list

    @property
    def result(self):
        return self.steps[-1].policy


def best_response_run(model, policy, cfg, which, eta=0.0, cache=None):
    """Single-agent policy iteration for ``which`` against the other agent's
    sub-policy in ``policy``, recording every evaluated policy."""
    which = agent_id(which)
    cache = cache or PolicyCache(model, cfg)
    key = (which, policy, eta)
    hit = cache._responses.get(key)
    if isinstance(hit, NonConvergenceError):
        raise hit
    if hit is not None:
        return hit
    steps = []
    seen = set()
    current = policy
    for _ in range(cfg.max_iterations):
        v = cache.value(current)
        if eta > 0:
            greedy, _, consistent = improve_agent(model, current, v, cfg, which)
            sub, changed = revised_improve(model, current, v, cfg.replace(eta=eta), which)
        else:
            sub, changed, consistent = cache.improvement(current, which)
        steps.append(InnerStep(current, v, bool(consistent.all())))
        if not changed:
            run = BestResponseRun(which, steps)
            cache._responses[key] = run
            return run
        seen.add(current)
        current = current.replace(which, sub)
        if current in seen:
            # deterministic revisit: the inner loop would cycle forever
            err = NonConvergenceError(
                f"{AGENTS[which]} best response cycles at {current}", BestResponseRun(which, steps)
            )
            cache._responses[key] = err
            raise err
    err = NonConvergenceError(
        f"{AGENTS[which]} best response exceeded {cfg.max_iterations} iterations",
        BestResponseRun(which, steps),
    )
    cache._responses[key] = err
    raise err


def inner_step_stats(runs, slack=1e-9):
    """Monotonicity audit of best-response inner loops.

    ``runs`` holds :class:`BestResponseRun` objects or the
    :class:`NonConvergenceError` they raised. Returns counts of improvement
    steps taken from consistent and from fallback policies, and of those
    where some state's value fell by more than ``slack``.
    """
    stats = {"consistent_steps": 0, "consistent_decreases": 0, "fallback_steps": 0, "fallback_decreases": 0}
    for run in runs:
        if isinstance(run, NonConvergenceError):
            run = run.trace
        for a, b in zip(run.steps, run.steps[1:]):
            kind = "consistent" if a.consistent else "fallback"
            stats[kind + "_steps"] += 1
            stats[kind + "_decreases"] += bool(np.any(b.v < a.v - slack))
    return stats


def best_response(model, other, start, cfg, which="agent0", eta=0.0, cache=None):
    """Stabilised sub-policy of ``which`` against the fixed sub-policy ``other``."""
    which = agent_id(which)
    policy = JointPolicy(start, other) if which == 0 else JointPolicy(other, start)
    return best_response_run(model, policy, cfg, which, eta, cache).result.sub(which)


def loss_bound(model, pi_star, cfg):
    """Entrywise value-loss bound ``eta * (I - gamma * P_star)^-1 * 1`` of the
    eta-threshold improvement."""
    if not 0.0 <= cfg.gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    pbar = augment(model, pi_star).pbar
    n = pbar.shape[0]
    return cfg.eta * np.linalg.solve(np.eye(n) - cfg.gamma * pbar, np.ones(n))


@dataclass
class Step:
    mover: str  # "init", "agent0", "agent1" or "both"
    policy: JointPolicy
    value: float
    v: np.ndarray
    explored: bool = False
    switch_counts: tuple = (0, 0)


@dataclass
class IterationTrace:
    steps: list
    outcome: str  # converged | oscillating | max-iterations
    cycle: list = field(default_factory=list)
    switch_counts: tuple = (0, 0)
    inner: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.steps[-1].policy

    @property
    def final_value(self):
        return self.steps[-1].value

    @property
    def rounds(self):
        movers = [s for s in self.steps if s.mover != "init"]
        if movers and movers[0].mover == "both":
            return len(movers)
        return (len(movers) + 1) // 2


def _cells_changed(a, b):
    return sum(x != y for x, y in zip(a, b))


def _alternating(model, initial, cfg, first, cache, explore=None, eta0=0.0):
    initial.check(model)
    order = (first, 1 - first)
    policy = initial
    steps = [Step("init", policy, cache.scalar(policy), cache.value(policy))]
    inner = []
    seen = {}
    switches = [0, 0]
    streak = 0
    outcome, cycle = "max-iterations", []
    for half in range(2 * cfg.max_iterations):
        phase = half % 2
        mover = order[phase]
        if explore is None:
            state = (phase, policy)
            if state in seen:
                outcome = "oscillating"
                cycle = [s.policy for s in steps[seen[state] : -1]]
                break
            seen[state] = len(steps) - 1
        run = best_response_run(model, policy, cfg, mover, eta0 if mover == 0 else 0.0, cache)
        inner.append(run)
        sub = run.result.sub(mover)
        fired = False
        if explore is not None and mover == 1:
            sub, fired = explore(sub)
        changed = sub != policy.sub(mover)
        switches[mover] += _cells_changed(sub, policy.sub(mover))
        policy = policy.replace(mover, sub)
        steps.append(
            Step(AGENTS[mover], policy, cache.scalar(policy), cache.value(policy), fired, tuple(switches))
        )
        streak = 0 if (changed or fired) else streak + 1
        if streak >= 2:
            outcome = "converged"
            break
    return IterationTrace(steps, outcome, cycle, tuple(switches), inner, cfg.as_dict())


def alternate_iterate(model, initial, cfg, cache=None):
    """Agents take turns playing full best responses, ``cfg.first_mover`` first.

    Stops when two consecutive turns leave the joint policy unchanged
    (converged), when a (turn, joint policy) pair repeats (oscillating), or
    after ``cfg.max_iterations`` rounds.
    """
    cache = cache or PolicyCache(model, cfg)
    return _alternating(model, initial, cfg, agent_id(cfg.first_mover), cache)


def simultaneous_iterate(model, initial, cfg, cache=None):
    """Both agents best-respond to the same snapshot and switch together."""
    cache = cache or PolicyCache(model, cfg)
    initial.check(model)
    policy = initial
    steps = [Step("init", policy, cache.scalar(policy), cache.value(policy))]
    inner = []
    seen = {policy: 0}
    switches = [0, 0]
    outcome, cycle = "max-iterations", []
    for _ in range(cfg.max_iterations):
        runs = [best_response_run(model, policy, cfg, w, 0.0, cache) for w in (0, 1)]
        inner.extend(runs)
        new = JointPolicy(runs[0].result.pi0, runs[1].result.pi1)
        switches[0] += _cells_changed(new.pi0, policy.pi0)
        switches[1] += _cells_changed(new.pi1, policy.pi1)
        steps.append(Step("both", new, cache.scalar(new), cache.value(new), False, tuple(switches)))
        if new == policy:
            outcome = "converged"
            break
        if new in seen:
            outcome = "oscillating"
            cycle = [s.policy for s in steps[seen[new] : -1]]
            break
        seen[new] = len(steps) - 1
        policy = new
    return IterationTrace(steps, outcome, cycle, tuple(switches), inner, cfg.as_dict())


def epsilon_greedy_iterate(model, initial, cfg, cache=None):
    """Alternating iteration where Agent1's improvement is epsilon-greedy.

    Agent0 moves first with a greedy best response (eta-threshold when
    ``cfg.eta > 0``). Agent1 computes its greedy best response, then each of
    its cells is independently replaced by a uniformly random action with
    probability ``cfg.epsilon_explore``. Convergence needs two consecutive
    unchanged turns with no exploration fired. Seeded from ``cfg.seed``.
    """
    cache = cache or PolicyCache(model, cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    na1 = model.na1
    eps = cfg.epsilon_explore

    def explore(sub):
        sub = list(sub)
        fired = False
        for c in range(len(sub)):
            if rng.random() < eps:
                sub[c] = int(rng.integers(na1))
                fired = True
        return tuple(sub), fired

    return _alternating(model, initial, cfg, 0, cache, explore if eps > 0 else None, cfg.eta)
