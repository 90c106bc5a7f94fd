"""Factored two-agent MDP model and its augmented (composite-state) dynamics.

The composite state space is ordered s0-major, then the shared state, then
s1, which is the row order of ``kron(P0, Ps, P1)``. Agent0 observes the pair
``(s0, ss)`` and Agent1 observes ``(s1, ss)``; a deterministic sub-policy is a
vector over those observation cells.
"""

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

ROW_SUM_TOL = 1e-9


class CamdpError(Exception):
    pass


class DimensionError(CamdpError, ValueError):
    pass


class ModelError(CamdpError, ValueError):
    """Raised when an operation needs a well-formed model and gets a broken one."""


def composite_index(s0, ss, s1, dims):
    ns0, nss, ns1 = dims
    if not (0 <= s0 < ns0 and 0 <= ss < nss and 0 <= s1 < ns1):
        raise DimensionError(f"component index {(s0, ss, s1)} out of range for dims {tuple(dims)}")
    return s0 * (nss * ns1) + ss * ns1 + s1


def decompose_index(i, dims):
    ns0, nss, ns1 = dims
    if not 0 <= i < ns0 * nss * ns1:
        raise DimensionError(f"composite index {i} out of range for dims {tuple(dims)}")
    s0, rest = divmod(i, nss * ns1)
    ss, s1 = divmod(rest, ns1)
    return s0, ss, s1


@dataclass(frozen=True, eq=False)
class FactoredCamdp:
    """Ground-truth model: three transition and three reward tensors.

    ``p0[a0, s0, s0']``, ``ps[a0, a1, ss, ss']``, ``p1[a1, s1, s1']`` and the
    reward tensors ``r0``, ``rs``, ``r1`` with the same index orders. The
    reward of a composite transition is the product of the three factor
    rewards (the entrywise Kronecker product).
    """

    ns0: int
    nss: int
    ns1: int
    na0: int
    na1: int
    p0: np.ndarray
    ps: np.ndarray
    p1: np.ndarray
    r0: np.ndarray
    rs: np.ndarray
    r1: np.ndarray

    @classmethod
    def from_arrays(cls, p0, ps, p1, r0, rs, r1, renormalize=True):
        """Build a model, inferring dims from ``ps`` and ``p0``/``p1``.

        Transition rows already within ``ROW_SUM_TOL`` of one are rescaled to
        sum to one; rows further off are left alone for :func:`validate` to
        report.
        """
        arrays = [np.array(x, dtype=np.float64) for x in (p0, ps, p1, r0, rs, r1)]
        p0, ps, p1, r0, rs, r1 = arrays
        if ps.ndim != 4 or p0.ndim != 3 or p1.ndim != 3:
            raise DimensionError("expected p0/p1 with 3 axes and ps with 4 axes")
        na0, na1, nss = ps.shape[0], ps.shape[1], ps.shape[2]
        ns0, ns1 = p0.shape[1], p1.shape[1]
        if renormalize:
            p0, ps, p1 = (_renormalize(p) for p in (p0, ps, p1))
        return cls(ns0, nss, ns1, na0, na1, p0, ps, p1, r0, rs, r1)

    @property
    def dims(self):
        return (self.ns0, self.nss, self.ns1, self.na0, self.na1)

    @property
    def state_dims(self):
        return (self.ns0, self.nss, self.ns1)

    @property
    def n_states(self):
        return self.ns0 * self.nss * self.ns1

    @property
    def n_cells0(self):
        return self.ns0 * self.nss

    @property
    def n_cells1(self):
        return self.ns1 * self.nss

    @property
    def n_policies0(self):
        return self.na0**self.n_cells0

    @property
    def n_policies1(self):
        return self.na1**self.n_cells1

    @cached_property
    def is_valid(self):
        return not validate(self)

    @cached_property
    def cell_maps(self):
        """Observation cell of each composite state, for Agent0 and Agent1."""
        s0, ss, s1 = np.unravel_index(np.arange(self.n_states), self.state_dims)
        return s0 * self.nss + ss, s1 * self.nss + ss

    @cached_property
    def joint_tensors(self):
        """Constant-action composite matrices.

        Returns ``(P, R, r)`` of shapes ``(na0, na1, N, N)``, ``(na0, na1, N, N)``
        and ``(na0, na1, N)``: the full Kronecker transition and reward
        matrices for every joint action and the matching expected reward.
        """
        self.require_valid()
        n = self.n_states
        P = np.empty((self.na0, self.na1, n, n))
        R = np.empty_like(P)
        for a0 in range(self.na0):
            for a1 in range(self.na1):
                P[a0, a1] = np.kron(np.kron(self.p0[a0], self.ps[a0, a1]), self.p1[a1])
                R[a0, a1] = np.kron(np.kron(self.r0[a0], self.rs[a0, a1]), self.r1[a1])
        r = np.einsum("abij,abij->abi", P, R)
        for arr in (P, R, r):
            arr.flags.writeable = False
        return P, R, r

    def require_valid(self):
        if not self.is_valid:
            raise ModelError("invalid model: " + "; ".join(validate(self)))

    def to_dict(self):
        return {
            "dims": dict(zip(("ns0", "nss", "ns1", "na0", "na1"), self.dims)),
            "p0": self.p0.tolist(),
            "ps": self.ps.tolist(),
            "p1": self.p1.tolist(),
            "r0": self.r0.tolist(),
            "rs": self.rs.tolist(),
            "r1": self.r1.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        d = data["dims"]
        m = cls.from_arrays(data["p0"], data["ps"], data["p1"], data["r0"], data["rs"], data["r1"])
        declared = (d["ns0"], d["nss"], d["ns1"], d["na0"], d["na1"])
        if declared != m.dims:
            # keep the declared dims so validate() reports the mismatch
            return cls(*declared, m.p0, m.ps, m.p1, m.r0, m.rs, m.r1)
        return m


def _renormalize(p):
    sums = p.sum(axis=-1, keepdims=True)
    near = np.abs(sums - 1.0) <= ROW_SUM_TOL
    return np.where(near, p / np.where(near, sums, 1.0), p)


def validate(model):
    """Return a list of human-readable invariant violations (empty if well-formed)."""
    problems = []
    m = model
    dims = m.dims
    if any(int(x) < 1 for x in dims):
        problems.append(f"dimensions must be positive, got {dims}")
        return problems
    expected = {
        "p0": (m.na0, m.ns0, m.ns0),
        "ps": (m.na0, m.na1, m.nss, m.nss),
        "p1": (m.na1, m.ns1, m.ns1),
        "r0": (m.na0, m.ns0, m.ns0),
        "rs": (m.na0, m.na1, m.nss, m.nss),
        "r1": (m.na1, m.ns1, m.ns1),
    }
    shape_ok = True
    for name, shape in expected.items():
        arr = getattr(m, name)
        if arr.shape != shape:
            problems.append(f"{name} has shape {arr.shape}, expected {shape}")
            shape_ok = False
    if not shape_ok:
        return problems
    for name in ("p0", "ps", "p1"):
        arr = getattr(m, name)
        if not np.all(np.isfinite(arr)):
            problems.append(f"{name} has non-finite entries")
            continue
        bad = np.argwhere((arr < 0) | (arr > 1))
        for idx in bad:
            problems.append(f"{name}{list(idx)} = {arr[tuple(idx)]:g} outside [0, 1]")
        sums = arr.sum(axis=-1)
        for idx in np.argwhere(np.abs(sums - 1.0) > ROW_SUM_TOL):
            problems.append(f"{name} row {list(idx)} sums to {sums[tuple(idx)]:.12g}")
    for name in ("r0", "rs", "r1"):
        arr = getattr(m, name)
        for idx in np.argwhere(~(arr > 0)):
            problems.append(f"{name}{list(idx)} = {arr[tuple(idx)]:g} is not strictly positive")
    return problems


@dataclass(frozen=True)
class JointPolicy:
    """Deterministic sub-policies ``pi0`` over (s0, ss) and ``pi1`` over (s1, ss).

    Cell index is ``s0 * nss + ss`` for Agent0 and ``s1 * nss + ss`` for
    Agent1, so ``pi0 = (1, 1, 0, 0)`` lists cells {s0=0,ss=0}, {0,1}, {1,0}, {1,1}.
    """

    pi0: tuple
    pi1: tuple

    def __post_init__(self):
        object.__setattr__(self, "pi0", tuple(int(a) for a in self.pi0))
        object.__setattr__(self, "pi1", tuple(int(a) for a in self.pi1))

    def check(self, model):
        if len(self.pi0) != model.n_cells0 or len(self.pi1) != model.n_cells1:
            raise DimensionError(
                f"policy lengths ({len(self.pi0)}, {len(self.pi1)}) do not match "
                f"model cells ({model.n_cells0}, {model.n_cells1})"
            )
        if any(not 0 <= a < model.na0 for a in self.pi0):
            raise DimensionError(f"pi0 {self.pi0} has actions outside 0..{model.na0 - 1}")
        if any(not 0 <= a < model.na1 for a in self.pi1):
            raise DimensionError(f"pi1 {self.pi1} has actions outside 0..{model.na1 - 1}")

    def sub(self, which):
        return self.pi0 if which == 0 else self.pi1

    def replace(self, which, sub):
        return JointPolicy(sub, self.pi1) if which == 0 else JointPolicy(self.pi0, sub)

    def __str__(self):
        return f"{list(self.pi0)} {list(self.pi1)}"


@dataclass(frozen=True, eq=False)
class AugmentedDynamics:
    pbar: np.ndarray
    rbar: np.ndarray
    r_exp: np.ndarray

    @property
    def n_states(self):
        return self.pbar.shape[0]


def composite_actions(model, policy):
    """Per-composite-state actions ``(a0, a1)`` chosen by ``policy``."""
    cell0, cell1 = model.cell_maps
    return np.asarray(policy.pi0)[cell0], np.asarray(policy.pi1)[cell1]


def augment(model, policy):
    """Composite dynamics under a joint policy.

    Row i of ``pbar`` is the Kronecker product of the factor rows selected by
    the actions the policy takes at composite state i.
    """
    model.require_valid()
    policy.check(model)
    P, R, r = model.joint_tensors
    a0, a1 = composite_actions(model, policy)
    rows = np.arange(model.n_states)
    return AugmentedDynamics(P[a0, a1, rows], R[a0, a1, rows], r[a0, a1, rows])


def load_model(path):
    with open(path) as f:
        return FactoredCamdp.from_dict(json.load(f))


def save_model(model, path):
    path = Path(path)
    path.write_text(json.dumps(model.to_dict(), indent=1))
    return path
