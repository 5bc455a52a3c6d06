"""Invariant suites shared by the CLI `verify` subcommand and the tests.

Each check returns (ok, detail). Tolerances are fixed here, not configurable:
1e-7 Fenchel-Young slack, 1e-5 relative linearization, 1e-4 relative double
dual, 1e-9 supermodularity slack.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .costs import (
    CustomCost,
    SeparableExpCost,
    SeparablePowerCost,
    SupermodularQuadraticCost,
    check_supermodular,
)
from .instances import GeneratorConfig, generate
from .matroids import fopt, greedy_max_weight
from .online import single_secretary
from .oracles import brute_force_opt


def standard_models(seed=0):
    rng = np.random.default_rng(seed)
    models = [
        SeparablePowerCost([1.0], [2.0]),
        SeparablePowerCost([0.7, 1.3], [1.5, 3.0]),
        SeparablePowerCost([1.0, 0.5, 2.0], [2.0, 1.5, 3.0]),
        SeparableExpCost([0.5, 0.8], [1.0, 0.7]),
    ]
    for d in (2, 3):
        off = rng.uniform(0.0, 0.3, size=(d, d))
        q = 0.5 * (off + off.T)
        np.fill_diagonal(q, rng.uniform(0.8, 1.2, size=d))
        models.append(SupermodularQuadraticCost(q))
    return models


def _sample_points(model, count, rng, hi=3.0):
    return rng.uniform(0.0, hi, size=(count, model.dim))


def check_fenchel_young(model, count=500, seed=1, tol=1e-7):
    rng = np.random.default_rng(seed)
    zs = _sample_points(model, count, rng)
    ls = _sample_points(model, count, rng)
    worst = 0.0
    for z, lam in zip(zs, ls):
        slack = model.value(z) - (float(lam @ z) - model.conjugate(lam))
        worst = min(worst, slack)
    return worst >= -tol, f"min Fenchel-Young slack {worst:.3e}"


def check_linearization(model, count=200, seed=2, rtol=1e-5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for z in _sample_points(model, count, rng):
        u = model.grad(z)
        val = model.value(z)
        approx = float(z @ u) - model.conjugate(u)
        err = abs(val - approx) / (1.0 + abs(val))
        worst = max(worst, err)
    return worst <= rtol, f"max relative linearization error {worst:.3e}"


def _conjugate_batch(model, L):
    """Vectorized conjugate over rows of L for the standard models; falls
    back to per-point calls otherwise."""
    L = np.asarray(L, dtype=float)
    if isinstance(model, SeparablePowerCost):
        c, p = model.c, model.p
        q = p / (p - 1.0)
        return (c * (p - 1.0) * (L / (c * p)) ** q).sum(axis=1)
    if isinstance(model, SeparableExpCost):
        c, a = model.c, model.a
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = L / a * (np.log(L / (c * a)) - 1.0) + c
        return np.where(L > c * a, vals, 0.0).sum(axis=1)
    if isinstance(model, SupermodularQuadraticCost):
        A = 0.5 * (model.q + model.q.T)
        d = model.dim
        best = np.zeros(len(L))
        for mask in range(1, 2 ** d):
            idx = [i for i in range(d) if mask >> i & 1]
            W = np.linalg.inv(A[np.ix_(idx, idx)])
            Z = 0.5 * L[:, idx] @ W
            feas = np.all(Z >= -1e-12, axis=1)
            vals = 0.25 * np.einsum("ni,ij,nj->n", L[:, idx], W, L[:, idx])
            best = np.maximum(best, np.where(feas, vals, 0.0))
        return best
    return np.array([model.conjugate(l) for l in L])


def _grid_sup(model, z, rounds=3, pts=12):
    """sup over a refined lambda grid of <lam, z> - g*(lam)."""
    d = model.dim
    hi = np.maximum(model.grad(z) * 2.0, 1.0)
    lo = np.zeros(d)
    best = 0.0
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(d)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
        vals = grid @ z - _conjugate_batch(model, grid)
        k = int(np.argmax(vals))
        best = max(best, float(vals[k]))
        span = (hi - lo) / (pts - 1)
        lo = np.maximum(grid[k] - span, 0.0)
        hi = grid[k] + span
    return best


def check_double_dual(model, count=50, seed=3, rtol=1e-4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for z in _sample_points(model, count, rng, hi=2.0):
        val = model.value(z)
        rec = _grid_sup(model, z)
        worst = max(worst, abs(val - rec) / (1.0 + abs(val)))
    return worst <= rtol, f"max relative double-dual error {worst:.3e}"


def check_conjugate_monotone(model, count=500, seed=4, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        lam = rng.uniform(0.0, 4.0, size=model.dim)
        lam2 = lam * rng.uniform(0.0, 1.0)
        worst = min(worst, model.conjugate(lam) - model.conjugate(lam2))
    return worst >= -tol, f"min conjugate monotonicity slack {worst:.3e}"


def check_dual_marginal_commute(model, count=100, seed=5, tol=1e-6):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        i = int(rng.integers(model.dim))
        lam = float(rng.uniform(0.0, 5.0))
        axis = np.zeros(model.dim)
        axis[i] = lam
        worst = max(worst, abs(model.marginal_conjugate(i, lam)
                               - model.conjugate(axis)))
    return worst <= tol, f"max dual/marginal commutation gap {worst:.3e}"


def check_subadditive_coords(model, count=500, seed=6, tol=1e-7):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        lam = rng.uniform(0.0, 4.0, size=model.dim)
        total = sum(model.marginal_conjugate(i, lam[i])
                    for i in range(model.dim))
        worst = min(worst, total - model.conjugate(lam))
    return worst >= -tol, f"min coordinate-subadditivity slack {worst:.3e}"


def check_superadditive(model, count=500, seed=7, tol=1e-7):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        x = rng.uniform(0.0, 2.0, size=model.dim)
        y = rng.uniform(0.0, 2.0, size=model.dim)
        worst = min(worst, model.value(x + y) - model.value(x) - model.value(y))
    return worst >= -tol, f"min superadditivity slack {worst:.3e}"


def check_discrete_supermodular(inst, tol=1e-9):
    """h(v) = g(Sv) has non-negative discrete cross-differences, exhaustively."""
    n = inst.n
    ids = list(range(n))
    worst = 0.0
    for sub in (set(c) for r in range(n - 1) for c in combinations(ids, r)):
        outside = [i for i in ids if i not in sub]
        for a, b in combinations(outside, 2):
            base = _gval(inst, sub)
            cross = (_gval(inst, sub | {a, b}) - _gval(inst, sub | {a})
                     - _gval(inst, sub | {b}) + base)
            worst = min(worst, cross)
    return worst >= -tol, f"min discrete cross-difference {worst:.3e}"


def _gval(inst, idx_subset):
    z = inst.sizes[sorted(idx_subset)].sum(axis=0) if idx_subset else np.zeros(
        inst.d)
    return inst.cost.value(z)


def check_profit_subadditive(inst, tol=1e-9):
    ids = [e.id for e in inst.items]
    worst = 0.0
    for r in range(len(ids) + 1):
        for a in combinations(ids, r):
            sa = set(a)
            rest = [e for e in ids if e not in sa]
            for r2 in range(len(rest) + 1):
                for b in combinations(rest, r2):
                    sb = set(b)
                    worst = min(
                        worst,
                        inst.profit(sa) + inst.profit(sb)
                        - inst.profit(sa | sb),
                    )
    return worst >= -tol, f"min profit subadditivity slack {worst:.3e}"


def check_secretary_exhaustive():
    from itertools import permutations

    profits = {0: 1.0, 1: 2.0, 2: 3.0}
    wins = sum(
        1
        for perm in permutations(profits)
        if single_secretary(perm, profits.get, sample_size=1) == 2
    )
    return wins == 3, f"picked the max in {wins}/6 orders (expected 3)"


def check_greedy_exhaustive(seed=8, trials=20):
    rng = np.random.default_rng(seed)
    for t in range(trials):
        config = GeneratorConfig(
            n=int(rng.integers(1, 9)),
            d=1,
            matroid_kind=str(rng.choice(["free", "uniform", "partition"])),
        )
        inst = generate(config, seed=1000 + t)
        weights = {e.id: float(rng.normal()) for e in inst.items}
        got = greedy_max_weight(inst.matroid, weights)
        best, best_w = set(), 0.0
        ids = [e.id for e in inst.items]
        for r in range(len(ids) + 1):
            for c in combinations(ids, r):
                if not inst.matroid.is_independent(set(c)):
                    continue
                w = sum(weights[e] for e in c)
                if w > best_w:
                    best, best_w = set(c), w
        got_w = sum(weights[e] for e in got)
        if abs(got_w - best_w) > 1e-9:
            return False, f"greedy {got_w} vs exhaustive {best_w} at trial {t}"
    return True, f"greedy optimal on {trials} random matroids"


def check_fopt_dominates_opt(seed=9, trials=20):
    worst = 0.0
    for t in range(trials):
        config = GeneratorConfig(n=6, d=2, matroid_kind="uniform",
                                 matroid_rank=3,
                                 cost_kind="supermodular_quadratic")
        inst = generate(config, seed=2000 + t + seed)
        opt = brute_force_opt(inst).value
        frac = fopt(inst, tol=1e-8, max_iter=50_000).value
        worst = min(worst, frac - opt)
    return worst >= -1e-5, f"min fopt - opt = {worst:.3e}"


def check_supermodularity_detection():
    """A cost with a genuinely negative cross-difference must be flagged."""
    bad_q = np.array([[1.0, -0.5], [-0.5, 1.0]])
    bad = CustomCost(2, lambda z: float(z @ bad_q @ z))
    report = check_supermodular(bad, samples=200, seed=0)
    ok = (not report.ok) and len(report.witnesses) > 0
    return ok, f"{len(report.witnesses)} witnesses found for the broken cost"


def run_verification(level="quick", seed=0):
    """Run the invariant suites; returns a list of (name, ok, detail)."""
    factor = 1 if level == "quick" else 4
    results = []
    for m, model in enumerate(standard_models(seed)):
        tag = f"{model.kind}[{m}]"
        results.append((f"fenchel_young/{tag}",
                        *check_fenchel_young(model, 500 * factor)))
        results.append((f"linearization/{tag}",
                        *check_linearization(model, 200 * factor)))
        results.append((f"double_dual/{tag}", *check_double_dual(model, 20)))
        results.append((f"conjugate_monotone/{tag}",
                        *check_conjugate_monotone(model, 500 * factor)))
        results.append((f"dual_marginal/{tag}",
                        *check_dual_marginal_commute(model)))
        results.append((f"subadd_coords/{tag}",
                        *check_subadditive_coords(model, 500 * factor)))
        results.append((f"superadditive/{tag}",
                        *check_superadditive(model, 500 * factor)))
        rep = check_supermodular(model, samples=200 * factor, seed=seed)
        results.append((f"cross_difference/{tag}", rep.ok,
                        f"{len(rep.witnesses)} violations"))
    for t in range(5 * factor):
        inst = generate(
            GeneratorConfig(n=6, d=2, cost_kind="supermodular_quadratic"),
            seed=300 + t,
        )
        results.append((f"discrete_supermodular/{t}",
                        *check_discrete_supermodular(inst)))
        results.append((f"profit_subadditive/{t}",
                        *check_profit_subadditive(inst)))
    results.append(("secretary_exhaustive", *check_secretary_exhaustive()))
    results.append(("greedy_exhaustive", *check_greedy_exhaustive()))
    results.append(("fopt_dominates_opt", *check_fopt_dominates_opt()))
    results.append(("supermodularity_detection",
                    *check_supermodularity_detection()))
    return results
