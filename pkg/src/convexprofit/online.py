"""Random-order online machinery: sample-and-threshold selection, the
default submodular matroid secretary, the single-item secretary, the
nice-instance wrapper, and the supermodular-to-separable reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classifiers import Classifier, curve_point, thresholds
from .costs import separable_surrogate
from .instances import Instance, perturb_general_position
from .matroids import fopt


@dataclass
class SubmodMSConfig:
    algorithm: str = "sample_threshold_greedy"  # or "plain_greedy"
    sample_fraction: float = 0.5
    threshold_divisor: float = 2.0


@dataclass
class OnlineConfig:
    eps_tau: float = 1e-6
    fopt_tol: float = 1e-6
    # online threshold tests have Theta(fopt/12d) margins, so a lower
    # iteration cap than the offline default is safe and much faster
    fopt_max_iter: int = 2000
    submod: SubmodMSConfig = field(default_factory=SubmodMSConfig)


@dataclass
class OnlineRun:
    order: tuple
    sample_size: int
    mu: Classifier | None
    selected: frozenset
    profit: float
    diagnostics: dict = field(default_factory=dict)
    branch: str = "algorithm1"

    def to_dict(self, seed=None):
        out = {
            "order": list(self.order),
            "sample_size": self.sample_size,
            "selected": sorted(self.selected),
            "profit": self.profit,
            "branch": self.branch,
            "diagnostics": {
                k: (v if not isinstance(v, np.ndarray) else v.tolist())
                for k, v in self.diagnostics.items()
            },
        }
        if seed is not None:
            out["seed"] = seed
        if self.mu is not None:
            lam = self.mu.lam
            out["mu"] = {
                "tau": self.mu.tau,
                "lambda": [None if math.isinf(v) else float(v) for v in lam],
            }
        return out


class GuardViolation(RuntimeError):
    """The submodular secretary evaluated its objective on an infeasible set."""


class FeasibleEvalGuard:
    """Objective wrapper asserting every evaluation happens on a feasible set."""

    def __init__(self, fn, matroid):
        self._fn = fn
        self._matroid = matroid
        self.evaluations = 0
        self.violations = 0

    def __call__(self, subset):
        self.evaluations += 1
        if not self._matroid.is_independent(subset):
            self.violations += 1
            raise GuardViolation(f"objective evaluated on infeasible set {subset}")
        return self._fn(subset)


def _offline_greedy(universe, f, matroid):
    chosen = set()
    current = f(chosen)
    while True:
        best_e, best_gain = None, 0.0
        for e in universe - chosen:
            if not matroid.is_independent(chosen | {e}):
                continue
            gain = f(chosen | {e}) - current
            if gain > best_gain:
                best_e, best_gain = e, gain
        if best_e is None:
            return chosen, current
        chosen.add(best_e)
        current += best_gain


def submod_ms(stream, f, matroid, config=None, override=None):
    """Sample-threshold greedy: observe half the stream, then accept items
    whose marginal gain beats a rank-scaled fraction of the observed greedy
    value. `f` maps an id set to a value and is only called on feasible sets.
    """
    config = config or SubmodMSConfig()
    stream = list(stream)
    rank = matroid.rank
    if rank == 0 or not stream:
        return set()
    if config.algorithm == "plain_greedy":
        chosen, _ = _offline_greedy(set(stream), f, matroid)
        return chosen
    m = len(stream)
    n_obs = int(m * config.sample_fraction)
    observed, rest = stream[:n_obs], stream[n_obs:]
    _, g_val = _offline_greedy(set(observed), f, matroid)
    threshold = g_val / (config.threshold_divisor * rank)
    selected = set()
    current = f(selected)
    for e in rest:
        if not matroid.is_independent(selected | {e}):
            continue
        gain = f(selected | {e}) - current
        if gain > threshold and (override is None or override(selected, e)):
            selected.add(e)
            current += gain
    return selected


def single_secretary(stream, profit_fn, sample_size=None):
    """Classic secretary on single-item profits: observe ceil(n/e) items,
    then take the first strict improvement over the observed maximum."""
    stream = list(stream)
    n = len(stream)
    if n == 0:
        return None
    if sample_size is None:
        sample_size = math.ceil(n / math.e)
    best = 0.0  # never accept a non-positive profit
    for e in stream[:sample_size]:
        best = max(best, profit_fn(e))
    for e in stream[sample_size:]:
        if profit_fn(e) > best:
            return e
    return None


def learn_threshold(sample_ids, inst, config=None):
    """Largest curve point keeping a 1/(12d) fraction of the sample's
    fractional optimum, by bisection on the balance parameter."""
    config = config or OnlineConfig()
    sample = set(sample_ids)
    if not sample:
        return Classifier.sentinel(inst.d), {"fopt_L": 0.0, "fopt_L_mu": 0.0}

    def frac_opt(restrict):
        return fopt(inst, restrict=restrict, tol=config.fopt_tol,
                    max_iter=config.fopt_max_iter).value

    total = frac_opt(sample)
    if total <= 0.0:
        return Classifier.sentinel(inst.d), {"fopt_L": total, "fopt_L_mu": 0.0}
    need = total / (12.0 * inst.d) - 1e-9

    cache = {}

    def kept_value(tau):
        lam = curve_point(inst.cost, tau).lam
        th = thresholds(inst, lam)
        kept = frozenset(
            e for e in sample
            if inst.item(e).value >= th[inst._pos[e]]
        )
        if kept not in cache:
            cache[kept] = frac_opt(kept) if kept else 0.0
        return cache[kept]

    lo = -1.0
    hi = 1.0
    for _ in range(200):
        if kept_value(hi) < need:
            break
        hi *= 2.0
    else:
        raise RuntimeError("threshold bisection bracket never closed")
    # iteration cap: with an absolute tolerance the loop can fail to close
    # once the bracket sits at magnitudes where float spacing exceeds eps_tau
    for _ in range(400):
        if hi - lo <= config.eps_tau:
            break
        mid = 0.5 * (lo + hi)
        if kept_value(mid) >= need:
            lo = mid
        else:
            hi = mid
    mu = curve_point(inst.cost, lo)
    return mu, {"fopt_L": total, "fopt_L_mu": kept_value(lo)}


def run_algorithm1(inst, order, seed=0, config=None, lambda_star=None,
                   constrained=None):
    """Sample-threshold online run: learn a classifier on a Binomial(n, 1/2)
    prefix, strictly filter the remainder, select greedily (unconstrained) or
    via the submodular secretary (constrained)."""
    config = config or OnlineConfig()
    order = tuple(order)
    if set(order) != {e.id for e in inst.items}:
        raise ValueError("order must be a permutation of the item ids")
    rng = np.random.default_rng(seed)
    k = int(rng.binomial(inst.n, 0.5))
    sample, rest = order[:k], order[k:]

    mu, diag = learn_threshold(sample, inst, config)
    th = thresholds(inst, mu.lam)
    filtered = [e for e in rest if inst.item(e).value > th[inst._pos[e]]]
    diag["filtered_size"] = len(filtered)
    if lambda_star is not None:
        diag["mu_ge_lambda_star"] = bool(
            np.all(mu.lam >= np.asarray(lambda_star) - 1e-9)
        )

    if constrained is None:
        constrained = inst.matroid.kind != "free"

    guard = None
    if not constrained:
        selected = set()
        current = 0.0
        for e in filtered:
            trial = inst.profit(selected | {e})
            if trial >= current - 1e-12:
                selected.add(e)
                current = trial
    else:
        guard = FeasibleEvalGuard(inst.profit, inst.matroid)

        def override(sel, e):
            return inst.profit(sel | {e}) >= inst.profit(sel) - 1e-12

        selected = submod_ms(filtered, guard, inst.matroid, config.submod,
                             override=override)
    profit = inst.profit(selected)
    if guard is not None:
        diag["guard_evaluations"] = guard.evaluations
        diag["guard_violations"] = guard.violations
    return OnlineRun(
        order=order,
        sample_size=k,
        mu=mu,
        selected=frozenset(selected),
        profit=max(profit, 0.0),
        diagnostics=diag,
    )


def run_with_preprocessing(inst, preprocess, seed=0, config=None):
    """Perturb to general position, then flip between the single-item
    secretary and the threshold algorithm."""
    rng = np.random.default_rng(seed)
    perturbed = perturb_general_position(
        inst, delta=preprocess.noise_delta, seed=int(rng.integers(2**63))
    )
    order = tuple(
        perturbed.items[i].id for i in rng.permutation(perturbed.n)
    )
    if rng.uniform() < preprocess.secretary_prob:
        winner = single_secretary(
            order, lambda e: perturbed.profit({e})
        )
        selected = frozenset() if winner is None else frozenset({winner})
        return OnlineRun(
            order=order,
            sample_size=math.ceil(perturbed.n / math.e) if perturbed.n else 0,
            mu=None,
            selected=selected,
            profit=perturbed.profit(selected) if selected else 0.0,
            branch="secretary",
        )
    run = run_algorithm1(perturbed, order, seed=int(rng.integers(2**63)),
                         config=config)
    run.branch = "algorithm1"
    return run


def reduce_supermodular_to_separable(inst, beta, seed=0, config=None):
    """Run the separable pipeline on the marginal surrogate cost (or, with
    probability beta/(beta + 2 e d), the single-item secretary), reporting
    the original profit of whatever was selected."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    d = inst.d
    p = beta / (beta + 2.0 * math.e * d)
    rng = np.random.default_rng(seed)
    order = tuple(inst.items[i].id for i in rng.permutation(inst.n))
    if rng.uniform() < p:
        winner = single_secretary(order, lambda e: inst.profit({e}))
        selected = frozenset() if winner is None else frozenset({winner})
        return OnlineRun(
            order=order,
            sample_size=math.ceil(inst.n / math.e) if inst.n else 0,
            mu=None,
            selected=selected,
            profit=inst.profit(selected) if selected else 0.0,
            diagnostics={"branch_probability": p},
            branch="secretary",
        )
    surrogate = Instance(
        inst.items, separable_surrogate(inst.cost), inst.matroid,
        meta=dict(inst.meta, surrogate=True),
    )
    run = run_algorithm1(surrogate, order, seed=int(rng.integers(2**63)),
                         config=config)
    run.diagnostics["branch_probability"] = p
    run.diagnostics["surrogate_profit"] = run.profit
    run.profit = inst.profit(run.selected)
    run.branch = "reduction"
    return run


def lovasz_extension(set_fn, x):
    """Convex extension of a set function with set_fn(()) = 0, via sorted
    prefix weights; agrees with set_fn on 0/1 vectors."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    order = np.argsort(-x, kind="stable")
    total = 0.0
    prefix = []
    for k, idx in enumerate(order):
        prefix.append(int(idx))
        nxt = x[order[k + 1]] if k + 1 < n else 0.0
        total += (x[idx] - nxt) * set_fn(frozenset(prefix))
    return float(total)
