"""Reproducible experiment presets: gamma sweep, condition Monte Carlo,
case study and policy-space reduction.

Each ``run_*`` function returns plain data and, given ``out_dir``, writes
CSV and/or JSONL files whose records embed the resolved configuration.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .equilibrium import VALUE_TOL, check_conditions, enumerate_value_matrix, find_nash_equilibria
from .evaluation import evaluate_exact, relative_spread
from .fixtures import CASE_STUDY_INITIAL, load_fixture
from .generator import GenerationError, random_camdp
from .model import JointPolicy, augment
from .policy import NonConvergenceError, PolicyCache, alternate_iterate, epsilon_greedy_iterate, inner_step_stats
from .records import trace_records, write_csv, write_jsonl
from .reduction import PolicyConstraint, constrained_best, preset_constraint

FORMATS = ("csv", "jsonl")


def _formats(fmt):
    if fmt is None:
        return FORMATS
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    return (fmt,)


# -- gamma sweep ------------------------------------------------------------


def run_gamma_sweep(model, policies, gammas, out_dir=None, fmt=None, source=None):
    """Per-state values of each policy at each gamma, plus relative spread.

    Returns ``{"gammas", "policies", "values": (n_policies, n_gammas, n_states),
    "spread": (n_policies, n_gammas)}``. The CSV has one row per
    (policy, state) and one column per gamma, then a spread row per policy.
    """
    gammas = [float(g) for g in gammas]
    for g in gammas:
        if not 0.0 <= g < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {g}")
    dyns = [augment(model, p) for p in policies]
    values = np.array([[evaluate_exact(d, g).v for g in gammas] for d in dyns])
    spread = np.array([[relative_spread(v) for v in row] for row in values])
    out = {"gammas": gammas, "policies": [str(p) for p in policies], "values": values, "spread": spread}
    if out_dir is not None:
        out_dir = Path(out_dir)
        fmts = _formats(fmt)
        if "csv" in fmts:
            rows = []
            for k, p in enumerate(policies):
                for s in range(model.n_states):
                    rows.append([str(p), s] + [repr(float(x)) for x in values[k, :, s]])
                rows.append([str(p), "spread"] + [repr(float(x)) for x in spread[k]])
            write_csv(out_dir / "gamma_sweep.csv", ["policy", "state"] + [f"gamma={g}" for g in gammas], rows)
        if "jsonl" in fmts:
            recs = [
                {
                    "policy": str(p),
                    "gamma": g,
                    "values": values[k, i].tolist(),
                    "spread": float(spread[k, i]),
                    "source": source,
                }
                for k, p in enumerate(policies)
                for i, g in enumerate(gammas)
            ]
            write_jsonl(out_dir / "gamma_sweep.jsonl", recs)
    return out


# -- condition Monte Carlo --------------------------------------------------


def _mc_one(args):
    spec, cfg = args
    rec = {"seed": spec.seed, "generator": spec.as_dict(), "config": cfg.as_dict()}
    try:
        model = random_camdp(spec)
    except GenerationError as e:
        rec["error"] = str(e)
        return rec
    cache = PolicyCache(model, cfg)
    report = check_conditions(model, cfg, cache)
    rec.update(report.as_dict())
    rec["inner_steps"] = inner_step_stats(cache.responses())
    rec["ne_count"] = len(report.nash_equilibria)
    rec["ne_bound_violated"] = len(report.nash_equilibria) > report.ne_bound
    rec["implication_violated"] = report.implication_violated
    return rec


@dataclass
class McSummary:
    count: int
    cond1: int = 0
    cond2: int = 0
    cond3: int = 0
    cond1_and_cond2: int = 0
    implication_violations: int = 0
    cond2_response: int = 0
    cond1_and_cond2_response: int = 0
    response_implication_violations: int = 0
    ne_bound_violations: int = 0
    generation_failures: int = 0
    failed_seeds: list = field(default_factory=list)

    def rows(self):
        return [
            ["models", self.count],
            ["cond1", self.cond1],
            ["cond2", self.cond2],
            ["cond3", self.cond3],
            ["cond1_and_cond2", self.cond1_and_cond2],
            ["implication_violations", self.implication_violations],
            ["cond2_response", self.cond2_response],
            ["cond1_and_cond2_response", self.cond1_and_cond2_response],
            ["response_implication_violations", self.response_implication_violations],
            ["ne_bound_violations", self.ne_bound_violations],
            ["generation_failures", self.generation_failures],
        ]


def summarize_mc(records):
    s = McSummary(count=len(records))
    for r in records:
        if "error" in r:
            s.generation_failures += 1
            s.failed_seeds.append(r["seed"])
            continue
        c1, c2, c3, cr = r["cond1"], r["cond2"], r["cond3"], r["cond2_response"]
        s.cond1 += c1
        s.cond2 += c2
        s.cond3 += c3
        s.cond1_and_cond2 += c1 and c2
        s.implication_violations += c1 and c2 and not c3
        s.cond2_response += cr
        s.cond1_and_cond2_response += c1 and cr
        s.response_implication_violations += c1 and cr and not c3
        s.ne_bound_violations += r["ne_bound_violated"]
    return s


def run_mc_conditions(spec, count, cfg, out_dir=None, workers=1, fmt=None):
    """Generate ``count`` models with seeds ``spec.seed + k`` and check the
    three conditions on each. Results are in seed order whatever ``workers`` is."""
    if count < 1:
        raise ValueError("count must be at least 1")
    tasks = [(spec.with_seed(spec.seed + k), cfg) for k in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_mc_one, tasks, chunksize=max(1, count // (8 * workers))))
    else:
        records = [_mc_one(t) for t in tasks]
    summary = summarize_mc(records)
    if out_dir is not None:
        out_dir = Path(out_dir)
        fmts = _formats(fmt)
        # per-model reports are structured, so they are always line-delimited JSON
        write_jsonl(out_dir / "mc_conditions.jsonl", records)
        if "csv" in fmts:
            write_csv(out_dir / "mc_summary.csv", ["metric", "value"], summary.rows())
        if "jsonl" in fmts:
            agg = dict(summary.rows())
            agg.update(generator=spec.as_dict(), config=cfg.as_dict(), failed_seeds=summary.failed_seeds)
            write_jsonl(out_dir / "mc_summary.jsonl", [agg])
    return summary, records


# -- case study -------------------------------------------------------------


@dataclass
class EpsilonBatch:
    epsilon: float
    seeds: list
    reached_terminal: int
    reached_visited: int
    outcomes: dict
    traces: list = field(repr=False, default_factory=list)


def epsilon_batch(model, initial, cfg, seeds, target, cache=None):
    """Run epsilon-greedy iteration once per seed and count runs whose
    terminal (or any visited) policy attains ``target`` within tolerance."""
    cache = cache or PolicyCache(model, cfg)
    terminal = visited = 0
    outcomes = {}
    traces = []
    for seed in seeds:
        try:
            trace = epsilon_greedy_iterate(model, initial, cfg.replace(seed=int(seed)), cache)
        except NonConvergenceError:
            outcomes["inner-nonconvergence"] = outcomes.get("inner-nonconvergence", 0) + 1
            continue
        traces.append((int(seed), trace))
        outcomes[trace.outcome] = outcomes.get(trace.outcome, 0) + 1
        terminal += trace.final_value >= target - VALUE_TOL
        visited += any(s.value >= target - VALUE_TOL for s in trace.steps)
    return EpsilonBatch(cfg.epsilon_explore, list(seeds), terminal, visited, outcomes, traces)


@dataclass
class CaseStudyReport:
    config: dict
    global_max: float
    global_max_policy: JointPolicy
    global_max_is_ne: bool
    nash_equilibria: list
    alternate_final: JointPolicy
    alternate_value: float
    alternate_outcome: str
    alternate_rounds: int
    greedy: EpsilonBatch
    baseline: EpsilonBatch

    def as_dict(self):
        def batch(b):
            return {
                "epsilon": b.epsilon,
                "n_seeds": len(b.seeds),
                "reached_terminal": b.reached_terminal,
                "reached_visited": b.reached_visited,
                "outcomes": b.outcomes,
            }

        return {
            "config": self.config,
            "global_max": self.global_max,
            "global_max_policy": str(self.global_max_policy),
            "global_max_is_ne": self.global_max_is_ne,
            "nash_equilibria": [{"policy": str(p), "value": v} for p, v in self.nash_equilibria],
            "alternate_final": str(self.alternate_final),
            "alternate_value": self.alternate_value,
            "alternate_outcome": self.alternate_outcome,
            "alternate_rounds": self.alternate_rounds,
            "epsilon_greedy": batch(self.greedy),
            "epsilon_zero": batch(self.baseline),
        }


def run_case_study(cfg, seeds=range(100), out_dir=None, fmt=None, fixture="paper-case-study"):
    """Value matrix, alternating run from the fixed initial policy, and an
    epsilon-greedy seed batch compared with the epsilon = 0 baseline."""
    model = load_fixture(fixture)
    cache = PolicyCache(model, cfg)
    vm = enumerate_value_matrix(model, cfg, cache)
    i, j = vm.argmax
    ne = find_nash_equilibria(vm)
    initial = JointPolicy(*CASE_STUDY_INITIAL)
    trace = alternate_iterate(model, initial, cfg, cache)
    seeds = list(seeds)
    greedy = epsilon_batch(model, initial, cfg, seeds, vm.max, cache)
    baseline = epsilon_batch(model, initial, cfg.replace(epsilon_explore=0.0), seeds, vm.max, cache)
    report = CaseStudyReport(
        config=cfg.as_dict(),
        global_max=vm.max,
        global_max_policy=vm.policy(i, j),
        global_max_is_ne=(int(i), int(j)) in ne,
        nash_equilibria=[(vm.policy(a, b), float(vm.values[a, b])) for a, b in ne],
        alternate_final=trace.final,
        alternate_value=trace.final_value,
        alternate_outcome=trace.outcome,
        alternate_rounds=trace.rounds,
        greedy=greedy,
        baseline=baseline,
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        fmts = _formats(fmt)
        if "csv" in fmts:
            vm.to_csv(_mkdir(out_dir) / "value_matrix.csv")
        write_jsonl(out_dir / "case_study.jsonl", [{**report.as_dict(), "fixture": fixture}])
        recs = trace_records(trace, run="alternate", fixture=fixture)
        for seed, t in greedy.traces:
            recs += trace_records(t, run="epsilon-greedy", seed=seed, fixture=fixture)
        for seed, t in baseline.traces:
            recs += trace_records(t, run="epsilon-zero", seed=seed, fixture=fixture)
        write_jsonl(out_dir / "case_study_traces.jsonl", recs)
    return report


def _mkdir(p):
    p.mkdir(parents=True, exist_ok=True)
    return p


# -- reduction --------------------------------------------------------------


def run_reduce(model, cfg, preset=None, partition=None, agent=None, out_dir=None, fmt=None, source=None):
    """Constrained best value for a named preset or an explicit cell partition."""
    if (preset is None) == (partition is None):
        raise ValueError("give exactly one of preset or partition")
    if preset is not None:
        constraint = preset_constraint(model, preset, agent)
    else:
        constraint = PolicyConstraint(agent or "agent0", tuple(partition), "explicit partition")
    report = constrained_best(model, constraint, cfg)
    if out_dir is not None:
        out_dir = Path(out_dir)
        rec = {**report.as_dict(), "classes": [list(k) for k in constraint.classes], "config": cfg.as_dict(), "source": source}
        fmts = _formats(fmt)
        if "jsonl" in fmts:
            write_jsonl(out_dir / "reduce.jsonl", [rec])
        if "csv" in fmts:
            keys = ["constraint", "agent", "original_count", "reduced_count", "best_original", "best_reduced", "delta_v", "spread"]
            write_csv(out_dir / "reduce.csv", keys, [[rec[k] for k in keys]])
    return report
