import json

import numpy as np
import pytest

from camdp import GeneratorSpec, JointPolicy, SolverConfig, case_study_model, random_camdp, save_model
from camdp.cli import main
from camdp.experiments import run_case_study, run_gamma_sweep, run_mc_conditions, run_reduce
from camdp.records import read_jsonl


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, (json.loads(out[-1]) if out else None)


def test_solve_fixture(tmp_path, capsys):
    code, rec = run(capsys, "solve", "--out", str(tmp_path))
    assert code == 0
    assert rec["final"] == "[1, 1, 0, 0] [1, 0, 0, 0]"
    assert rec["config"]["gamma"] == 0.98
    steps = read_jsonl(tmp_path / "solve_trace.jsonl")
    assert steps[0]["mover"] == "init" and all("config" in s for s in steps)


def test_solve_schemes_and_initial(tmp_path, capsys):
    for scheme in ("simultaneous", "epsilon-greedy"):
        code, rec = run(capsys, "solve", "--scheme", scheme, "--initial", "0100/0000", "--out", str(tmp_path))
        assert code == 0 and rec["scheme"] == scheme


def test_env_var_sets_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CAMDP_OUT", str(tmp_path / "env"))
    assert run(capsys, "enumerate")[0] == 0
    assert (tmp_path / "env" / "value_matrix.csv").exists()


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", "--model", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 4
    bad = tmp_path / "bad.json"
    d = case_study_model().to_dict()
    d["p0"][0][0] = [0.9, 0.9]
    bad.write_text(json.dumps(d))
    assert main(["solve", "--model", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["solve", "--fixture", "paper-case-study", "--generate", "--out", str(tmp_path)]) == 2
    assert main(["solve", "--gamma", "1.5", "--out", str(tmp_path)]) == 2
    code = main(["solve", "--scheme", "epsilon-greedy", "--epsilon", "1", "--max-iter", "3",
                 "--require-convergence", "--out", str(tmp_path)])
    assert code == 3


def test_generate_then_load(tmp_path, capsys):
    code, rec = run(capsys, "generate", "--seed", "3", "--count", "2", "--out", str(tmp_path))
    assert code == 0 and len(rec["files"]) == 2
    code, rec = run(capsys, "conditions", "--model", rec["files"][0], "--out", str(tmp_path))
    assert code == 0 and set(rec) >= {"cond1", "cond2", "cond3"}


def test_reduce_commands(tmp_path, capsys):
    code, rec = run(capsys, "reduce", "--preset", "ss-only", "--out", str(tmp_path))
    assert code == 0 and rec["reduced_count"] == 4
    code, rec = run(capsys, "reduce", "--partition", "0;1;2;3", "--out", str(tmp_path))
    assert code == 0 and rec["delta_v"] == 0.0
    assert (tmp_path / "reduce.csv").exists()


def test_gamma_sweep_command(tmp_path, capsys):
    code, rec = run(capsys, "gamma-sweep", "--generate", "--seed", "2", "--out", str(tmp_path), "--format", "csv")
    assert code == 0 and len(rec["spread"]) == 2
    text = (tmp_path / "gamma_sweep.csv").read_text().splitlines()
    assert text[0] == "policy,state,gamma=0.5,gamma=0.75,gamma=0.95,gamma=0.998"


def test_gamma_zero_gives_immediate_reward():
    m = random_camdp(GeneratorSpec(seed=1))
    pol = JointPolicy([0, 1, 1, 0], [1, 1, 0, 0])
    from camdp import augment

    out = run_gamma_sweep(m, [pol], [0.0])
    np.testing.assert_allclose(out["values"][0, 0], augment(m, pol).r_exp)


def test_mc_conditions_deterministic_and_parallel(tmp_path):
    spec = GeneratorSpec(seed=100)
    cfg = SolverConfig()
    s1, _ = run_mc_conditions(spec, 4, cfg, tmp_path / "a")
    s2, _ = run_mc_conditions(spec, 4, cfg, tmp_path / "b", workers=2)
    assert (tmp_path / "a" / "mc_summary.csv").read_bytes() == (tmp_path / "b" / "mc_summary.csv").read_bytes()
    assert (tmp_path / "a" / "mc_conditions.jsonl").read_bytes() == (tmp_path / "b" / "mc_conditions.jsonl").read_bytes()
    assert s1.implication_violations == 0 and s1.count == 4
    recs = read_jsonl(tmp_path / "a" / "mc_conditions.jsonl")
    assert [r["seed"] for r in recs] == [100, 101, 102, 103]
    assert all(r["config"]["gamma"] == 0.9 and r["generator"]["rng"] == "numpy.PCG64" for r in recs)


def test_mc_single_model_satisfying_dominance():
    # seed 0 at these dims has a dominating line and no private states
    summary, recs = run_mc_conditions(GeneratorSpec((1, 2, 1, 2, 2), 0), 1, SolverConfig())
    assert recs[0]["cond1"] and recs[0]["cond3"]


def test_case_study_report(tmp_path):
    rep = run_case_study(SolverConfig(gamma=0.98), range(20), tmp_path)
    assert rep.global_max_is_ne
    assert rep.baseline.reached_terminal == 0
    assert rep.alternate_final == JointPolicy([1, 1, 0, 0], [1, 0, 0, 0])
    for name in ("value_matrix.csv", "case_study.jsonl", "case_study_traces.jsonl"):
        assert (tmp_path / name).exists()
    runs = {r["run"] for r in read_jsonl(tmp_path / "case_study_traces.jsonl")}
    assert runs == {"alternate", "epsilon-greedy", "epsilon-zero"}


def test_run_reduce_requires_one_source():
    with pytest.raises(ValueError):
        run_reduce(case_study_model(), SolverConfig(), None, None)


def test_model_file_roundtrip_through_cli(tmp_path, capsys):
    path = save_model(case_study_model(), tmp_path / "case.json")
    _, a = run(capsys, "enumerate", "--model", str(path), "--gamma", "0.98", "--out", str(tmp_path))
    _, b = run(capsys, "enumerate", "--out", str(tmp_path))
    assert a["global_max"] == b["global_max"]
