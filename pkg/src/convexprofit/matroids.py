"""Matroid independence oracles, greedy maximization, and the Frank-Wolfe
fractional optimizer over the matroid polytope."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels.fallback import (
    MAT_FREE,
    MAT_PARTITION,
    MAT_UNIFORM,
    greedy_select,
)

FOPT_TOL = 1e-6
FOPT_MAX_ITER = 10_000


class Matroid:
    """Independence oracle over a fixed ground set of item ids."""

    kind = "abstract"

    def __init__(self, ground):
        self.ground = tuple(ground)
        self._ground_set = frozenset(self.ground)
        if len(self._ground_set) != len(self.ground):
            raise ValueError("ground set contains duplicate ids")

    def _check(self, subset):
        subset = frozenset(subset)
        unknown = subset - self._ground_set
        if unknown:
            raise KeyError(f"ids not in ground set: {sorted(unknown)}")
        return subset

    def is_independent(self, subset):
        raise NotImplementedError

    @property
    def rank(self):
        raise NotImplementedError

    def kernel_spec(self, order_ids):
        """(mat_code, rank, block_of, caps) aligned with `order_ids`."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class FreeMatroid(Matroid):
    kind = "free"

    def is_independent(self, subset):
        self._check(subset)
        return True

    @property
    def rank(self):
        return len(self.ground)

    def kernel_spec(self, order_ids):
        n = len(order_ids)
        return (MAT_FREE, n, np.zeros(n, dtype=np.int64),
                np.zeros(0, dtype=np.int64))

    def to_dict(self):
        return {"kind": "free"}


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, ground, k):
        super().__init__(ground)
        if k < 0:
            raise ValueError("rank must be non-negative")
        self.k = int(k)

    def is_independent(self, subset):
        return len(self._check(subset)) <= self.k

    @property
    def rank(self):
        return min(self.k, len(self.ground))

    def kernel_spec(self, order_ids):
        n = len(order_ids)
        return (MAT_UNIFORM, self.k, np.zeros(n, dtype=np.int64),
                np.zeros(0, dtype=np.int64))

    def to_dict(self):
        return {"kind": "uniform", "rank": self.k}


class PartitionMatroid(Matroid):
    kind = "partition"

    def __init__(self, blocks, caps):
        blocks = [tuple(b) for b in blocks]
        caps = [int(c) for c in caps]
        if len(blocks) != len(caps):
            raise ValueError("one capacity per block required")
        if any(c < 0 for c in caps):
            raise ValueError("capacities must be non-negative")
        super().__init__(e for b in blocks for e in b)
        self.blocks = blocks
        self.caps = caps
        self._block_of = {e: bi for bi, b in enumerate(blocks) for e in b}

    def is_independent(self, subset):
        subset = self._check(subset)
        counts = [0] * len(self.blocks)
        for e in subset:
            counts[self._block_of[e]] += 1
        return all(c <= cap for c, cap in zip(counts, self.caps))

    @property
    def rank(self):
        return sum(min(cap, len(b)) for b, cap in zip(self.blocks, self.caps))

    def kernel_spec(self, order_ids):
        block_of = np.array([self._block_of[e] for e in order_ids],
                            dtype=np.int64)
        return (MAT_PARTITION, self.rank, block_of,
                np.array(self.caps, dtype=np.int64))

    def to_dict(self):
        return {
            "kind": "partition",
            "blocks": [list(b) for b in self.blocks],
            "caps": list(self.caps),
        }


def matroid_from_dict(data, ground=()):
    kind = data["kind"]
    if kind == "free":
        return FreeMatroid(ground)
    if kind == "uniform":
        return UniformMatroid(ground, data["rank"])
    if kind == "partition":
        return PartitionMatroid(data["blocks"], data["caps"])
    raise ValueError(f"unknown matroid kind {kind!r}")


def greedy_max_weight(matroid, weights):
    """Max-weight independent set by matroid greedy over positive weights.

    `weights` maps item id -> weight; ties broken toward the smaller id.
    """
    chosen = set()
    order = sorted(
        (e for e, w in weights.items() if w > 0),
        key=lambda e: (-weights[e], e),
    )
    for e in order:
        if matroid.is_independent(chosen | {e}):
            chosen.add(e)
    return chosen


@dataclass
class FractionalSolution:
    """Frank-Wolfe output: point in the matroid polytope with a gap certificate."""

    x: np.ndarray
    value: float
    gap: float
    iterations: int
    backend: str


def fopt(inst, restrict=None, tol=FOPT_TOL, max_iter=FOPT_MAX_ITER):
    """Maximize the concave profit over Conv(F) restricted to `restrict`.

    Frank-Wolfe with the matroid greedy as linear oracle; stops when the
    duality gap certifies near-optimality or at the iteration cap.
    """
    n = len(inst.items)
    active = np.ones(n, dtype=np.uint8)
    if restrict is not None:
        restrict = set(restrict)
        active = np.array([e.id in restrict for e in inst.items], dtype=np.uint8)
    if n == 0 or not active.any():
        return FractionalSolution(np.zeros(n), 0.0, 0.0, 0, _kernels.BACKEND)

    v = inst.values
    S = inst.sizes
    order_ids = [e.id for e in inst.items]
    mat_code, rank, block_of, caps = inst.matroid.kernel_spec(order_ids)

    spec = inst.cost.kernel_spec()
    if spec is not None:
        code, ca, cb, Q = spec
        empty = np.zeros(0)
        ca = np.ascontiguousarray(empty if ca is None else ca, dtype=float)
        cb = np.ascontiguousarray(empty if cb is None else cb, dtype=float)
        Q = np.ascontiguousarray(
            np.zeros((0, 0)) if Q is None else Q, dtype=float
        )
        x, value, gap, its = _kernels.fw_maximize(
            np.ascontiguousarray(v), np.ascontiguousarray(S), code, ca, cb, Q,
            mat_code, rank, block_of, caps, active, tol, max_iter,
        )
        return FractionalSolution(np.asarray(x), value, gap, its,
                                  _kernels.BACKEND)

    x, value, gap, its = _fw_generic(
        v, S, inst.cost, mat_code, rank, block_of, caps, active, tol, max_iter
    )
    return FractionalSolution(x, value, gap, its, "generic")


def _fw_generic(v, S, cost, mat_code, rank, block_of, caps, active, tol,
                max_iter):
    """Frank-Wolfe for cost models without a kernel code (custom/truncated)."""
    n, d = S.shape
    x = np.zeros(n)
    z = np.zeros(d)
    vx = 0.0
    gap = np.inf
    done = 0
    for it in range(max_iter):
        w = v - S @ cost.grad(z)
        y = greedy_select(w, active, mat_code, rank, block_of, caps)
        gap = float(w @ (y - x))
        value = vx - cost.value(z)
        if gap <= tol * (1.0 + abs(value)):
            return x, value, max(gap, 0.0), done
        gamma = 2.0 / (it + 2.0)
        x += gamma * (y - x)
        z += gamma * (S.T @ y - z)
        vx += gamma * (float(v @ y) - vx)
        done = it + 1
    return x, vx - cost.value(z), max(gap, 0.0), done


def polytope_violation(matroid, x, order_ids):
    """Max constraint violation of x against the kind-specific polytope."""
    x = np.asarray(x, dtype=float)
    viol = max(0.0, float(np.max(-x, initial=0.0)),
               float(np.max(x - 1.0, initial=0.0)))
    if isinstance(matroid, UniformMatroid):
        viol = max(viol, float(np.sum(x)) - matroid.k)
    elif isinstance(matroid, PartitionMatroid):
        pos = {e: k for k, e in enumerate(order_ids)}
        for b, cap in zip(matroid.blocks, matroid.caps):
            viol = max(viol, sum(x[pos[e]] for e in b if e in pos) - cap)
    return max(viol, 0.0)
