"""Brute-force and high-precision ground-truth solvers used by the tests
and the experiment harness."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import LinearConstraint, minimize

from .costs import (SeparableExpCost, SeparablePowerCost,
                    SupermodularQuadraticCost)
from .errors import TooLarge
from .matroids import PartitionMatroid, UniformMatroid

EXHAUSTIVE_CAP = 20
GRID_CAP = 6


@dataclass
class OracleResult:
    value: float
    witness: object
    method: str
    bound_kind: str = "exact"


def _iter_subsets(ids):
    for r in range(len(ids) + 1):
        yield from (set(c) for c in combinations(ids, r))


def brute_force_opt(inst, cap=EXHAUSTIVE_CAP):
    """Exact integer optimum by enumerating all independent subsets."""
    if inst.n > cap:
        raise TooLarge(f"n={inst.n} exceeds the exhaustive cap {cap}")
    ids = [e.id for e in inst.items]
    best, best_set = 0.0, set()
    for sub in _iter_subsets(ids):
        if not inst.matroid.is_independent(sub):
            continue
        p = inst.profit(sub)
        if p > best:
            best, best_set = p, sub
    return OracleResult(best, frozenset(best_set), "exhaustive")


def best_filtered_feasible(inst, universe_subset, cap=EXHAUSTIVE_CAP):
    """Exact max-profit feasible set using only items of `universe_subset`."""
    ids = sorted(universe_subset)
    if len(ids) > cap:
        raise TooLarge(f"|universe|={len(ids)} exceeds the cap {cap}")
    best, best_set = 0.0, set()
    for sub in _iter_subsets(ids):
        if not inst.matroid.is_independent(sub):
            continue
        p = inst.profit(sub)
        if p > best:
            best, best_set = p, sub
    return OracleResult(best, frozenset(best_set), "exhaustive")


def _polytope_constraints(inst):
    cons = []
    m = inst.matroid
    if isinstance(m, UniformMatroid):
        cons.append(LinearConstraint(np.ones((1, inst.n)), ub=[float(m.k)]))
    elif isinstance(m, PartitionMatroid):
        rows, ubs = [], []
        for b, cap in zip(m.blocks, m.caps):
            row = np.zeros(inst.n)
            for e in b:
                row[inst._pos[e]] = 1.0
            rows.append(row)
            ubs.append(float(cap))
        cons.append(LinearConstraint(np.array(rows), ub=ubs))
    return cons


def _polish(inst, x0, cons):
    res = minimize(
        lambda x: -inst.profit(np.clip(x, 0.0, 1.0)),
        x0,
        jac=lambda x: -(inst.values - inst.sizes
                        @ inst.cost.grad(inst.sizes.T @ np.clip(x, 0.0, 1.0))),
        bounds=[(0.0, 1.0)] * inst.n,
        constraints=cons,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-12},
    )
    x = np.clip(res.x, 0.0, 1.0)
    return x, inst.profit(x)


def brute_force_fopt(inst, grid_step=0.01):
    """High-precision fractional optimum over the matroid polytope.

    Concave maximization by SLSQP from several starts (including the integer
    optimum when enumerable); a coarse-to-fine grid cross-checks tiny
    instances. Independent of the Frank-Wolfe path in `matroids`.
    """
    if inst.n == 0:
        return OracleResult(0.0, np.zeros(0), "slsqp_hp")
    cons = _polytope_constraints(inst)
    starts = [np.zeros(inst.n), np.full(inst.n, 0.5)]
    if inst.n <= EXHAUSTIVE_CAP:
        starts.append(inst.indicator(brute_force_opt(inst).witness))
    best_x, best = np.zeros(inst.n), 0.0
    for x0 in starts:
        x, val = _polish(inst, x0, cons)
        if val > best:
            best_x, best = x, val
    if inst.n <= GRID_CAP:
        gx, gval = _grid_refine(inst, grid_step)
        if gval > best:
            # polish the grid point too; keep whichever wins
            x, val = _polish(inst, gx, cons)
            if val > gval:
                gx, gval = x, val
            best_x, best = gx, gval
    return OracleResult(max(best, 0.0), best_x, "slsqp_hp", bound_kind="lower")


def _batch_cost(cost, Z):
    """Vectorized cost over rows of Z for the standard models; row-wise
    fallback otherwise."""
    if isinstance(cost, SeparablePowerCost):
        return (cost.c * Z ** cost.p).sum(axis=1)
    if isinstance(cost, SeparableExpCost):
        return (cost.c * np.expm1(cost.a * Z)).sum(axis=1)
    if isinstance(cost, SupermodularQuadraticCost):
        return np.einsum("ni,ij,nj->n", Z, cost.q, Z)
    return np.array([cost.value(z) for z in Z])


def _grid_refine(inst, step, rounds=3, max_points=100_000):
    """Coarse-to-fine feasible grid search; exact to the final resolution."""
    lo = np.zeros(inst.n)
    hi = np.ones(inst.n)
    best_x, best = np.zeros(inst.n), 0.0
    pts_per_dim = max(2, int(round(max_points ** (1.0 / max(inst.n, 1)))))
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], pts_per_dim) for i in range(inst.n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(
            -1, inst.n
        )
        feasible = np.ones(len(mesh), dtype=bool)
        m = inst.matroid
        if isinstance(m, UniformMatroid):
            feasible &= mesh.sum(axis=1) <= m.k + 1e-12
        elif isinstance(m, PartitionMatroid):
            for b, cap in zip(m.blocks, m.caps):
                cols = [inst._pos[e] for e in b]
                feasible &= mesh[:, cols].sum(axis=1) <= cap + 1e-12
        mesh = mesh[feasible]
        vals = mesh @ inst.values - _batch_cost(inst.cost, mesh @ inst.sizes)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_x = float(vals[k]), mesh[k]
        span = (hi - lo) / (pts_per_dim - 1)
        lo = np.clip(best_x - span, 0.0, 1.0)
        hi = np.clip(best_x + span, 0.0, 1.0)
        if np.max(span) < step:
            break
    return best_x, best
