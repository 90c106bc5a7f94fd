"""Joint-policy value matrix, pure Nash equilibria and the convergence conditions."""

import csv
import itertools
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .model import CamdpError, JointPolicy
from .policy import AGENTS, NonConvergenceError, PolicyCache, alternate_iterate, best_response_run

VALUE_TOL = 1e-9
ENUMERATION_CAP = 65536


class EnumerationSizeError(CamdpError):
    pass


def enumerate_sub_policies(n_actions, n_cells):
    """All sub-policies in lexicographic order (cell 0 is the most significant digit)."""
    return [tuple(p) for p in itertools.product(range(n_actions), repeat=n_cells)]


def policy_index(sub, n_actions):
    i = 0
    for a in sub:
        i = i * n_actions + int(a)
    return i


def _check_cap(model, cap):
    size = model.n_policies0 * model.n_policies1
    if size > cap:
        raise EnumerationSizeError(
            f"{size} joint policies exceed the enumeration cap of {cap}; "
            "restrict the policy set first (see camdp.reduction)"
        )


@dataclass
class ValueMatrix:
    values: np.ndarray
    gamma: float
    aggregator: str
    policies0: list
    policies1: list
    min_gap: float = field(init=False)

    def __post_init__(self):
        flat = np.sort(self.values.ravel())
        self.min_gap = float(np.min(np.diff(flat))) if flat.size > 1 else float("inf")

    @property
    def shape(self):
        return self.values.shape

    def policy(self, i, j):
        return JointPolicy(self.policies0[i], self.policies1[j])

    def index(self, policy):
        return self.policies0.index(policy.pi0), self.policies1.index(policy.pi1)

    @property
    def argmax(self):
        return np.unravel_index(int(np.argmax(self.values)), self.values.shape)

    @property
    def max(self):
        return float(self.values.max())

    def to_csv(self, path):
        """Rows are Agent0 policies, columns Agent1 policies; headers carry the vectors."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["pi0 \\ pi1"] + [" ".join(map(str, p)) for p in self.policies1])
            for p, row in zip(self.policies0, self.values):
                w.writerow([" ".join(map(str, p))] + [repr(float(x)) for x in row])


def enumerate_value_matrix(model, cfg, cache=None, cap=ENUMERATION_CAP):
    _check_cap(model, cap)
    cache = cache or PolicyCache(model, cfg)
    pols0 = enumerate_sub_policies(model.na0, model.n_cells0)
    pols1 = enumerate_sub_policies(model.na1, model.n_cells1)
    values = np.array([[cache.scalar(JointPolicy(a, b)) for b in pols1] for a in pols0])
    vm = ValueMatrix(values, cfg.gamma, cfg.aggregator, pols0, pols1)
    if vm.min_gap == 0.0:
        warnings.warn("value matrix has exactly tied entries; equilibria may not be isolated")
    return vm


def find_nash_equilibria(vm, tol=VALUE_TOL):
    """Cells that are simultaneously a column maximum and a row maximum, best first."""
    V = vm.values
    is_ne = (V >= V.max(axis=0, keepdims=True) - tol) & (V >= V.max(axis=1, keepdims=True) - tol)
    cells = [(int(i), int(j)) for i, j in zip(*np.nonzero(is_ne))]
    return sorted(cells, key=lambda c: (-V[c], c))


def dominance_counts(vm, tol=VALUE_TOL):
    """Return ``(n_dc, n_dr, min(n_dc, n_dr))``.

    ``n_dc`` counts columns holding some row's maximum; ``n_dr`` counts rows
    holding some column's maximum.
    """
    V = vm.values
    row_max_hits = V >= V.max(axis=1, keepdims=True) - tol
    col_max_hits = V >= V.max(axis=0, keepdims=True) - tol
    n_dc = int(np.count_nonzero(row_max_hits.any(axis=0)))
    n_dr = int(np.count_nonzero(col_max_hits.any(axis=1)))
    return n_dc, n_dr, min(n_dc, n_dr)


def check_dominance_condition(vm, tol=VALUE_TOL):
    """Is there a row that is the maximum of every column, or a column that is
    the maximum of every row? Returns ``(holds, witness)`` with witness
    ``("row", m)``, ``("column", n)`` or None."""
    V = vm.values
    rows = np.flatnonzero(np.all(V >= V.max(axis=0, keepdims=True) - tol, axis=1))
    if rows.size:
        return True, ("row", int(rows[0]))
    cols = np.flatnonzero(np.all(V >= V.max(axis=1, keepdims=True) - tol, axis=0))
    if cols.size:
        return True, ("column", int(cols[0]))
    return False, None


def check_observability(model, cfg, cache=None, cap=ENUMERATION_CAP):
    """True iff, at every joint policy's exact value, each agent's per-state
    greedy action never depends on the coordinate it cannot observe."""
    _check_cap(model, cap)
    cache = cache or PolicyCache(model, cfg)
    for a in enumerate_sub_policies(model.na0, model.n_cells0):
        for b in enumerate_sub_policies(model.na1, model.n_cells1):
            policy = JointPolicy(a, b)
            for which in (0, 1):
                if not cache.improvement(policy, which)[2].all():
                    return False
    return True


def check_response_exactness(model, cfg, cache=None, vm=None, cap=ENUMERATION_CAP):
    """True iff every best response the agents can compute is exact.

    From every joint policy, each agent's policy-iteration best response must
    terminate at a maximiser of its line of the value matrix. This is the
    property the uniqueness argument actually uses, and it is weaker than
    :func:`check_observability`.
    """
    cache = cache or PolicyCache(model, cfg)
    vm = vm or enumerate_value_matrix(model, cfg, cache, cap)
    col_max = vm.values.max(axis=0)
    row_max = vm.values.max(axis=1)
    for i, a in enumerate(vm.policies0):
        for j, b in enumerate(vm.policies1):
            policy = JointPolicy(a, b)
            for which in (0, 1):
                try:
                    result = best_response_run(model, policy, cfg, which, 0.0, cache).result
                except NonConvergenceError:
                    return False
                target = col_max[j] if which == 0 else row_max[i]
                if cache.scalar(result) < target - VALUE_TOL:
                    return False
    return True


def _run_outcome(model, initial, cfg, cache):
    try:
        trace = alternate_iterate(model, initial, cfg, cache)
    except NonConvergenceError:
        return "inner-nonconvergence", None, None
    return trace.outcome, trace.final, trace


def check_global_convergence(model, cfg, cache=None, vm=None, cap=ENUMERATION_CAP):
    """Run alternating iteration from every initial joint policy under both
    move orders. Returns ``(all_reach_global_max, basin)`` where basin counts
    initials per ``(first_mover, outcome, terminal policy)``."""
    _check_cap(model, cap)
    cache = cache or PolicyCache(model, cfg)
    vm = vm or enumerate_value_matrix(model, cfg, cache, cap)
    best = vm.max
    basin = Counter()
    ok = True
    for mover in AGENTS:
        # move order does not enter the memoised values, so the cache is shared
        run_cfg = cfg.replace(first_mover=mover)
        for a in vm.policies0:
            for b in vm.policies1:
                outcome, final, _ = _run_outcome(model, JointPolicy(a, b), run_cfg, cache)
                basin[(mover, outcome, str(final) if final else None)] += 1
                if outcome != "converged" or cache.scalar(final) < best - VALUE_TOL:
                    ok = False
    return ok, dict(basin)


@dataclass
class ConditionReport:
    cond1: bool
    cond1_witness: tuple | None
    cond2: bool
    cond3: bool
    n_dc: int
    n_dr: int
    ne_bound: int
    nash_equilibria: list
    basin: dict
    global_max: float
    min_gap: float
    cond2_response: bool | None = None

    @property
    def implication_violated(self):
        return self.cond1 and self.cond2 and not self.cond3

    def as_dict(self):
        return {
            "cond1": self.cond1,
            "cond1_witness": list(self.cond1_witness) if self.cond1_witness else None,
            "cond2": self.cond2,
            "cond3": self.cond3,
            "n_dc": self.n_dc,
            "n_dr": self.n_dr,
            "ne_bound": self.ne_bound,
            "nash_equilibria": [
                {"cell": [i, j], "value": v} for (i, j), v in self.nash_equilibria
            ],
            "basin": [
                {"first_mover": k[0], "outcome": k[1], "terminal": k[2], "count": n}
                for k, n in sorted(self.basin.items(), key=lambda kv: str(kv[0]))
            ],
            "cond2_response": self.cond2_response,
            "global_max": self.global_max,
            "min_gap": self.min_gap if np.isfinite(self.min_gap) else None,
        }


def check_conditions(model, cfg, cache=None):
    """All three condition checks plus equilibrium and dominance statistics.

    ``cond2_response`` is the weaker response-exactness reading of the
    observability requirement (see :func:`check_response_exactness`).
    """
    cache = cache or PolicyCache(model, cfg)
    vm = enumerate_value_matrix(model, cfg, cache)
    cond1, witness = check_dominance_condition(vm)
    cond2 = check_observability(model, cfg, cache)
    cond2_response = check_response_exactness(model, cfg, cache, vm)
    cond3, basin = check_global_convergence(model, cfg, cache, vm)
    n_dc, n_dr, bound = dominance_counts(vm)
    ne = [((i, j), float(vm.values[i, j])) for i, j in find_nash_equilibria(vm)]
    if cond1 and cond2 and not cond3:
        warnings.warn("dominance and observability hold but global convergence failed")
    return ConditionReport(
        cond1, witness, cond2, cond3, n_dc, n_dr, bound, ne, basin, vm.max, vm.min_gap,
        cond2_response,
    )
