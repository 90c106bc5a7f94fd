"""Line-delimited JSON records for traces, reports and tables."""

import csv
import json
import math
from pathlib import Path


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def dumps(record):
    return json.dumps(_clean(record), sort_keys=True)


def write_jsonl(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for r in records:
            f.write(dumps(r) + "\n")
    return path


def read_jsonl(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    return path


def trace_records(trace, **extra):
    """One record per step: mover, both sub-policies, scalar value, cumulative switches."""
    out = []
    for k, s in enumerate(trace.steps):
        out.append(
            {
                "step": k,
                "mover": s.mover,
                "pi0": list(s.policy.pi0),
                "pi1": list(s.policy.pi1),
                "value": s.value,
                "explored": s.explored,
                "switch_counts": list(s.switch_counts),
                "outcome": trace.outcome if k == len(trace.steps) - 1 else None,
                "config": trace.config,
                **extra,
            }
        )
    return out
