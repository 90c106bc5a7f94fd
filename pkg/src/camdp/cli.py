"""Command-line entry point: ``camdp <command> [options]``.

Exit codes: 0 success, 2 validation failure, 3 non-convergence where
convergence was required, 4 I/O error. The default output directory is
taken from ``$CAMDP_OUT`` (else ``./camdp_out``).
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .equilibrium import check_conditions, enumerate_value_matrix, find_nash_equilibria
from .experiments import run_case_study, run_gamma_sweep, run_mc_conditions, run_reduce
from .fixtures import CASE_STUDY_GAMMA, CASE_STUDY_INITIAL, FIXTURES, load_fixture
from .generator import GenerationError, GeneratorSpec, random_camdp
from .model import CamdpError, JointPolicy, load_model, save_model
from .policy import (
    NonConvergenceError,
    PolicyCache,
    SolverConfig,
    alternate_iterate,
    epsilon_greedy_iterate,
    simultaneous_iterate,
)
from .records import dumps, trace_records, write_jsonl
from .reduction import PRESETS

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "CAMDP_OUT"
COMMANDS = ("solve", "enumerate", "conditions", "gamma-sweep", "mc-conditions", "case-study", "reduce", "generate")
SCHEMES = {"alternate": alternate_iterate, "simultaneous": simultaneous_iterate, "epsilon-greedy": epsilon_greedy_iterate}


def _int_list(text):
    return [int(x) for x in text.replace(",", " ").split()]


def _policy(text):
    """``"0000/1000"`` or ``"0,0,0,0/1,0,0,0"`` -> JointPolicy."""
    try:
        a, b = text.split("/")
        parse = (lambda s: [int(c) for c in s]) if "," not in text and " " not in text else _int_list
        return JointPolicy(parse(a), parse(b))
    except ValueError:
        raise argparse.ArgumentTypeError(f"policy must look like 0000/1000, got {text!r}") from None


def _partition(text):
    """``"0,2;1,3"`` -> ((0, 2), (1, 3))."""
    return tuple(tuple(_int_list(k)) for k in text.split(";") if k.strip())


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("model source (at most one; default --fixture paper-case-study)")
    src.add_argument("--model", type=Path, help="model JSON file")
    src.add_argument("--fixture", choices=sorted(FIXTURES))
    src.add_argument("--generate", action="store_true", help="generate a random model from --seed and --dims")
    common.add_argument("--dims", type=_int_list, default=[2, 2, 2, 2, 2], help="ns0,nss,ns1,na0,na1")
    common.add_argument("--reward-min", type=float, default=0.01)
    common.add_argument("--gamma", type=float)
    common.add_argument("--theta", type=float, default=1e-6)
    common.add_argument("--epsilon", type=float, default=0.1)
    common.add_argument("--eta", type=float, default=0.0)
    common.add_argument("--max-iter", type=int, default=1000)
    common.add_argument("--aggregator", choices=("max", "mean"), default="max")
    common.add_argument("--first-mover", choices=("agent0", "agent1"), default="agent0")
    common.add_argument("--mode", choices=("full-info", "partial-info"), default="full-info")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--count", type=int, default=None)
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--format", choices=("csv", "jsonl"), default=None, help="default: write both")

    parser = argparse.ArgumentParser(prog="camdp", description="Two-agent factored MDP solver and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run an iteration driver from an initial joint policy")
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="alternate")
    p.add_argument("--initial", type=_policy, default=None, help="e.g. 0000/1000 (default: all zeros)")
    p.add_argument("--require-convergence", action="store_true", help="exit 3 unless the run converges")

    sub.add_parser("enumerate", parents=[common], help="value matrix and pure equilibria")
    sub.add_parser("conditions", parents=[common], help="convergence condition checks for one model")

    p = sub.add_parser("gamma-sweep", parents=[common], help="per-state values across discount factors")
    p.add_argument("--gammas", type=lambda s: [float(x) for x in s.split(",")], default=[0.5, 0.75, 0.95, 0.998])
    p.add_argument("--policies", type=_policy, nargs="+", default=None, help="default: all-0 and all-1 policies")

    p = sub.add_parser("mc-conditions", parents=[common], help="condition counts over generated models")
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("case-study", parents=[common], help="built-in case study end to end")

    p = sub.add_parser("reduce", parents=[common], help="best value under a policy equality constraint")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--partition", type=_partition, help='cell classes, e.g. "0,2;1,3"')
    p.add_argument("--agent", choices=("agent0", "agent1"), default=None)

    sub.add_parser("generate", parents=[common], help="write random models as JSON")
    return parser


def _config(args, default_gamma=0.9):
    return SolverConfig(
        gamma=default_gamma if args.gamma is None else args.gamma,
        theta=args.theta,
        epsilon_explore=args.epsilon,
        eta=args.eta,
        max_iterations=args.max_iter,
        aggregator=args.aggregator,
        first_mover=args.first_mover,
        improvement_mode=args.mode,
        seed=args.seed,
    )


def _spec(args, seed=None):
    return GeneratorSpec(tuple(args.dims), args.seed if seed is None else seed, args.reward_min)


def _model(args):
    chosen = [x for x in (args.model is not None, args.fixture is not None, args.generate) if x]
    if len(chosen) > 1:
        raise ValueError("give at most one of --model, --fixture, --generate")
    if args.model is not None:
        return load_model(args.model), {"model_file": str(args.model)}
    if args.generate:
        spec = _spec(args)
        return random_camdp(spec), {"generator": spec.as_dict()}
    name = args.fixture or "paper-case-study"
    return load_fixture(name), {"fixture": name}


def _out_dir(args):
    out = args.out or Path(os.environ.get(OUT_ENV, "camdp_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(record):
    print(dumps(record))


def _cmd_solve(args):
    model, source = _model(args)
    gamma = CASE_STUDY_GAMMA if "fixture" in source else 0.9
    cfg = _config(args, gamma)
    initial = args.initial
    if initial is None:
        initial = JointPolicy(*CASE_STUDY_INITIAL) if "fixture" in source else JointPolicy(
            [0] * model.n_cells0, [0] * model.n_cells1
        )
    trace = SCHEMES[args.scheme](model, initial, cfg, PolicyCache(model, cfg))
    out = _out_dir(args)
    write_jsonl(out / "solve_trace.jsonl", trace_records(trace, scheme=args.scheme, source=source))
    _emit(
        {
            "command": "solve",
            "scheme": args.scheme,
            "outcome": trace.outcome,
            "final": str(trace.final),
            "value": trace.final_value,
            "rounds": trace.rounds,
            "switch_counts": list(trace.switch_counts),
            "config": cfg.as_dict(),
            "source": source,
        }
    )
    if args.require_convergence and trace.outcome != "converged":
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_enumerate(args):
    model, source = _model(args)
    cfg = _config(args, CASE_STUDY_GAMMA if "fixture" in source else 0.9)
    vm = enumerate_value_matrix(model, cfg)
    out = _out_dir(args)
    if args.format in (None, "csv"):
        vm.to_csv(out / "value_matrix.csv")
    ne = [{"policy": str(vm.policy(i, j)), "cell": [i, j], "value": float(vm.values[i, j])} for i, j in find_nash_equilibria(vm)]
    i, j = vm.argmax
    rec = {
        "command": "enumerate",
        "global_max": vm.max,
        "global_max_policy": str(vm.policy(i, j)),
        "nash_equilibria": ne,
        "min_gap": vm.min_gap,
        "config": cfg.as_dict(),
        "source": source,
    }
    if args.format in (None, "jsonl"):
        write_jsonl(out / "enumerate.jsonl", [{**rec, "values": vm.values.tolist()}])
    _emit(rec)
    return EXIT_OK


def _cmd_conditions(args):
    model, source = _model(args)
    cfg = _config(args, CASE_STUDY_GAMMA if "fixture" in source else 0.9)
    report = check_conditions(model, cfg)
    rec = {"command": "conditions", **report.as_dict(), "config": cfg.as_dict(), "source": source}
    write_jsonl(_out_dir(args) / "conditions.jsonl", [rec])
    _emit({k: rec[k] for k in ("cond1", "cond2", "cond2_response", "cond3", "n_dc", "n_dr", "ne_bound", "global_max")})
    return EXIT_OK


def _cmd_gamma_sweep(args):
    model, source = _model(args)
    policies = args.policies or [
        JointPolicy([0] * model.n_cells0, [0] * model.n_cells1),
        JointPolicy([1 % model.na0] * model.n_cells0, [1 % model.na1] * model.n_cells1),
    ]
    res = run_gamma_sweep(model, policies, args.gammas, _out_dir(args), args.format, source)
    _emit({"command": "gamma-sweep", "gammas": res["gammas"], "policies": res["policies"], "spread": res["spread"].tolist()})
    return EXIT_OK


def _cmd_mc(args):
    cfg = _config(args)
    count = args.count or 1000
    summary, _ = run_mc_conditions(_spec(args), count, cfg, _out_dir(args), args.workers, args.format)
    _emit({"command": "mc-conditions", **dict(summary.rows()), "config": cfg.as_dict(), "generator": _spec(args).as_dict()})
    return EXIT_OK


def _cmd_case_study(args):
    cfg = _config(args, CASE_STUDY_GAMMA)
    count = args.count or 100
    report = run_case_study(cfg, range(args.seed, args.seed + count), _out_dir(args), args.format, args.fixture or "paper-case-study")
    _emit({"command": "case-study", **report.as_dict()})
    return EXIT_OK


def _cmd_reduce(args):
    model, source = _model(args)
    cfg = _config(args, CASE_STUDY_GAMMA if "fixture" in source else 0.9)
    report = run_reduce(model, cfg, args.preset, args.partition, args.agent, _out_dir(args), args.format, source)
    _emit({"command": "reduce", **report.as_dict(), "config": cfg.as_dict()})
    return EXIT_OK


def _cmd_generate(args):
    out = _out_dir(args)
    count = args.count or 1
    paths = []
    for k in range(count):
        spec = _spec(args, args.seed + k)
        paths.append(str(save_model(random_camdp(spec), out / f"model_seed{spec.seed}.json")))
    _emit({"command": "generate", "files": paths, "generator": _spec(args).as_dict()})
    return EXIT_OK


HANDLERS = {
    "solve": _cmd_solve,
    "enumerate": _cmd_enumerate,
    "conditions": _cmd_conditions,
    "gamma-sweep": _cmd_gamma_sweep,
    "mc-conditions": _cmd_mc,
    "case-study": _cmd_case_study,
    "reduce": _cmd_reduce,
    "generate": _cmd_generate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except NonConvergenceError as e:
        print(f"camdp: non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as e:
        print(f"camdp: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (CamdpError, GenerationError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"camdp: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
