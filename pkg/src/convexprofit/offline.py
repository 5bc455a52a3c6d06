"""Offline solvers: unconstrained pick-all, the constrained best-of-two
construction, and the gradient-truncated non-negative profit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import Classifier, find_good_classifier, pick
from .costs import truncate_gradient
from .errors import NoGoodClassifier
from .matroids import FreeMatroid, greedy_max_weight
from .oracles import best_filtered_feasible

EXHAUSTIVE_CAP = 18


@dataclass
class OfflineSolution:
    chosen: frozenset
    profit: float
    parts: dict = field(default_factory=dict)
    classifier: Classifier | None = None
    method_a: str = ""

    def to_dict(self):
        out = {
            "chosen": sorted(self.chosen),
            "profit": self.profit,
            "parts": {
                k: {"set": sorted(s), "profit": p}
                for k, (s, p) in self.parts.items()
            },
        }
        if self.classifier is not None:
            out["classifier"] = {
                "tau": self.classifier.tau,
                "lambda": self.classifier.lam.tolist(),
            }
        return out


def _empty_solution():
    return OfflineSolution(frozenset(), 0.0)


def solve_unconstrained(inst, eps=1e-6):
    """Pick everything the good classifier picks, then sweep off items whose
    marginal is negative (in decreasing linearized-margin order)."""
    if not isinstance(inst.matroid, FreeMatroid):
        raise ValueError("unconstrained solver requires a free matroid")
    try:
        good = find_good_classifier(inst, eps=eps)
    except NoGoodClassifier:
        return _empty_solution()
    lam = good.classifier.lam
    margins = {
        e: inst.item(e).value - float(lam @ inst.item(e).size)
        for e in good.report.picked
    }
    chosen = set()
    current = 0.0
    for e in sorted(margins, key=lambda e: (-margins[e], e)):
        trial = inst.profit(chosen | {e})
        if trial >= current - 1e-12:
            chosen.add(e)
            current = trial
    current = inst.profit(chosen)
    return OfflineSolution(
        frozenset(chosen),
        max(current, 0.0) if chosen else 0.0,
        parts={"picked": (good.report.picked, inst.profit(good.report.picked))},
        classifier=good.classifier,
    )


@dataclass
class PiPlus:
    """Profit with gradient-truncated cost: equals pi on feasible filtered
    sets, but non-negative monotone submodular on the whole filtered universe."""

    truncated: object
    inst: object

    def value(self, x):
        if not isinstance(x, np.ndarray):
            x = self.inst.indicator(x)
        return float(self.inst.values @ x) - self.truncated.value(
            self.inst.sizes.T @ x
        )


def build_pi_plus(inst, lambda_star):
    """Truncate each marginal's slope at lambda_star (separable costs only)."""
    return PiPlus(truncate_gradient(inst.cost, np.asarray(lambda_star, float)),
                  inst)


def x_lin(inst, lambda_star):
    """argmax of the linearized profit over feasible subsets of the strictly
    picked set; exact by matroid greedy (all weights there are positive)."""
    lam = np.asarray(lambda_star, dtype=float)
    open_picked = pick(inst, lam).open_picked
    weights = {
        e: inst.item(e).value - float(lam @ inst.item(e).size)
        for e in open_picked
    }
    return frozenset(greedy_max_weight(inst.matroid, weights))


def _greedy_filtered(inst, universe, objective):
    """Monotone-submodular greedy under the matroid (1/2-approximation)."""
    chosen = set()
    current = objective(chosen)
    while True:
        best_e, best_gain = None, 0.0
        for e in universe - chosen:
            if not inst.matroid.is_independent(chosen | {e}):
                continue
            gain = objective(chosen | {e}) - current
            if gain > best_gain:
                best_e, best_gain = e, gain
        if best_e is None:
            return chosen
        chosen.add(best_e)
        current += best_gain


def solve_constrained(inst, eps=1e-6, exhaustive_cap=EXHAUSTIVE_CAP):
    """Better of (a) the best feasible set inside the strictly picked items
    and (b) the best single picked item."""
    try:
        good = find_good_classifier(inst, eps=eps)
    except NoGoodClassifier:
        return _empty_solution()
    lam = good.classifier.lam
    report = good.report
    open_picked = set(report.open_picked)

    if len(open_picked) <= exhaustive_cap:
        res = best_filtered_feasible(inst, open_picked)
        cand_a, profit_a, method_a = set(res.witness), res.value, "exhaustive"
    else:
        if inst.cost.is_separable:
            pi_plus = build_pi_plus(inst, lam)
            cand_a = _greedy_filtered(inst, open_picked, pi_plus.value)
        else:
            cand_a = _greedy_filtered(inst, open_picked, inst.profit)
        profit_a, method_a = max(inst.profit(cand_a), 0.0), "greedy"
        if profit_a <= 0.0:
            cand_a = set()

    cand_b, profit_b = frozenset(), 0.0
    for e in sorted(report.picked):
        p = inst.profit({e})
        if p > profit_b:
            cand_b, profit_b = frozenset({e}), p

    lin = x_lin(inst, lam)
    x_circ = (
        frozenset({report.threshold_item})
        if report.threshold_item is not None
        else frozenset()
    )
    x_rest = good.x_occ - x_circ
    parts = {
        "x_lin": (lin, inst.profit(lin)),
        "x_occ": (good.x_occ, inst.profit(good.x_occ)),
        "x_rest": (x_rest, inst.profit(x_rest)),
        "x_circ": (x_circ, inst.profit(x_circ)),
        "best_singleton": (cand_b, profit_b),
        "candidate_a": (frozenset(cand_a), profit_a),
    }
    if profit_a >= profit_b:
        chosen, prof = frozenset(cand_a), profit_a
    else:
        chosen, prof = cand_b, profit_b
    return OfflineSolution(chosen, max(prof, 0.0), parts=parts,
                           classifier=good.classifier, method_a=method_a)
