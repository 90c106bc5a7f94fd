"""Policy evaluation: exact and iterative discounted values, average reward."""

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.sparse.csgraph import connected_components

from .model import CamdpError

AGGREGATORS = ("max", "mean")


class StructureError(CamdpError):
    """The chain lacks a property (irreducibility, aperiodicity) an operation needs."""


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    v: np.ndarray
    gamma: float
    method: str
    residual: float
    g: float | None = None


def _check_gamma(gamma):
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"discount factor must lie in [0, 1), got {gamma}")


def bellman_residual(dyn, gamma, v):
    return float(np.max(np.abs(dyn.r_exp + gamma * dyn.pbar @ v - v)))


def evaluate_exact(dyn, gamma, with_average=False):
    """Solve ``(I - gamma * pbar) v = r_exp`` directly."""
    _check_gamma(gamma)
    n = dyn.n_states
    try:
        v = np.linalg.solve(np.eye(n) - gamma * dyn.pbar, dyn.r_exp)
    except np.linalg.LinAlgError as e:
        raise CamdpError(f"singular evaluation system: {e}") from e
    g = average_reward(dyn) if with_average else None
    return EvaluationResult(v, gamma, "exact-solve", bellman_residual(dyn, gamma, v), g)


def evaluate_iterative(dyn, gamma, theta=1e-6, max_sweeps=1_000_000):
    """Synchronous Bellman backups until the largest per-state change is below theta."""
    _check_gamma(gamma)
    if theta <= 0:
        raise ValueError("theta must be positive")
    v = np.zeros(dyn.n_states)
    for _ in range(max_sweeps):
        new = dyn.r_exp + gamma * dyn.pbar @ v
        delta = np.max(np.abs(new - v))
        v = new
        if delta < theta:
            break
    return EvaluationResult(v, gamma, "iterative-sweep", bellman_residual(dyn, gamma, v))


def stationary_distribution(pbar):
    """Solve ``mu (P - I) = 0`` with ``sum(mu) = 1`` appended as an extra equation."""
    n = pbar.shape[0]
    A = np.vstack([pbar.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    mu, *_ = np.linalg.lstsq(A, b, rcond=None)
    return mu


def chain_period(pbar):
    """Period of an irreducible chain from BFS levels on its support graph."""
    support = pbar > 0
    n = support.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for w in np.flatnonzero(support[u]):
                if level[w] < 0:
                    level[w] = level[u] + 1
                    nxt.append(w)
        frontier = nxt
    d = 0
    for u, w in zip(*np.nonzero(support)):
        if level[u] >= 0 and level[w] >= 0:
            d = gcd(d, int(level[u] + 1 - level[w]))
    return d


def quasi_positive_failure(pbar):
    """Name the first failing property ('reducible'/'periodic'), or None."""
    n_comp, _ = connected_components(pbar > 0, directed=True, connection="strong")
    if n_comp != 1:
        return "reducible"
    if chain_period(pbar) != 1:
        return "periodic"
    return None


def check_quasi_positive(dyn):
    """True iff ``pbar`` is irreducible and aperiodic."""
    return quasi_positive_failure(dyn.pbar) is None


def average_reward(dyn):
    """Stationary-distribution-weighted expected immediate reward."""
    failure = quasi_positive_failure(dyn.pbar)
    if failure is not None:
        raise StructureError(f"average reward needs a quasi-positive chain; pbar is {failure}")
    mu = stationary_distribution(dyn.pbar)
    return float(mu @ dyn.r_exp)


def aggregate(v, aggregator="max"):
    if aggregator == "max":
        return float(np.max(v))
    if aggregator == "mean":
        return float(np.mean(v))
    raise ValueError(f"aggregator must be one of {AGGREGATORS}, got {aggregator!r}")


def scalar_value(result, aggregator="max"):
    v = result.v if isinstance(result, EvaluationResult) else result
    return aggregate(np.asarray(v), aggregator)


def relative_spread(v):
    v = np.asarray(v)
    return float((v.max() - v.min()) / v.mean())
