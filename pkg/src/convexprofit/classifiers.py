"""The balanced-classifier curve, picked-set evaluation, and the offline
search for a good classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoGoodClassifier
from .matroids import FreeMatroid

GRAD_TOL = 1e-7
TAU_TOL = 1e-6


@dataclass
class Classifier:
    """A point on the monotone curve of balanced classifiers.

    tau >= 0 parametrizes the curve proper (all dual marginals equal tau);
    tau in [-1, 0) parametrizes the straight extension from the origin to the
    corner (g'_1(0), ..., g'_d(0)) of the flat box.
    """

    lam: np.ndarray
    tau: float
    on_curve: bool = True

    @classmethod
    def sentinel(cls, dim):
        """Classifier beyond every item: picks nothing downstream."""
        return cls(np.full(dim, math.inf), math.inf, on_curve=False)


@dataclass
class PickReport:
    picked: frozenset
    open_picked: frozenset
    occupancy: np.ndarray
    threshold_item: int | None = None
    tie_flag: bool = False


def curve_point(model, tau):
    """The classifier at balance level tau (extension segment for tau < 0)."""
    corner = model.grad_at_zero()
    if tau < 0.0:
        if tau < -1.0:
            raise ValueError("tau must be >= -1")
        return Classifier((1.0 + tau) * corner, tau, on_curve=True)
    lam = np.array(
        [model.marginal_conjugate_inverse(i, tau) for i in range(model.dim)]
    )
    return Classifier(lam, tau, on_curve=True)


def thresholds(inst, lam):
    """<lam, s(e)> per item, treating inf * 0 as 0 for the sentinel."""
    lam = np.asarray(lam, dtype=float)
    if np.any(np.isinf(lam)):
        out = np.zeros(inst.n)
        for k in range(inst.n):
            s = inst.sizes[k]
            out[k] = math.inf if np.any(s[np.isinf(lam)] > 0) else float(
                s[~np.isinf(lam)] @ lam[~np.isinf(lam)]
            )
        return out
    return inst.sizes @ lam


def pick(inst, lam):
    """U_lam (v >= <lam, s>), its strict version, occupancy, threshold item."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lam must be non-negative")
    th = thresholds(inst, lam)
    picked, open_picked, ties = [], [], []
    for k, e in enumerate(inst.items):
        if e.value > th[k]:
            picked.append(e.id)
            open_picked.append(e.id)
        elif e.value == th[k]:
            picked.append(e.id)
            ties.append(e.id)
    occupancy = (
        inst.sizes[[inst._pos[e] for e in picked]].sum(axis=0)
        if picked
        else np.zeros(inst.d)
    )
    threshold_item = min(ties) if ties else None
    return PickReport(
        picked=frozenset(picked),
        open_picked=frozenset(open_picked),
        occupancy=occupancy,
        threshold_item=threshold_item,
        tie_flag=len(ties) > 1,
    )


def _greedy_coordinate_set(inst, candidates, i):
    """Feasible subset of `candidates` built greedily by descending size in
    coordinate i; occupancy-maximal in that coordinate for our matroid kinds."""
    if isinstance(inst.matroid, FreeMatroid):
        return set(candidates)
    order = sorted(candidates, key=lambda e: (-inst.item(e).size[i], e))
    chosen = set()
    for e in order:
        if inst.matroid.is_independent(chosen | {e}):
            chosen.add(e)
    return chosen


def _occupancy(inst, subset):
    if not subset:
        return np.zeros(inst.d)
    return inst.sizes[[inst._pos[e] for e in subset]].sum(axis=0)


def check_p1(inst, lam, open_picked, tol=GRAD_TOL):
    """(P1'): gradients stay below lam on every feasible subset of the
    strictly picked set; checked on the per-coordinate occupancy-maximal
    feasible subsets (exact for free matroids, conservative otherwise)."""
    for i in range(inst.d):
        b = _greedy_coordinate_set(inst, open_picked, i)
        grad = inst.cost.grad(_occupancy(inst, b))
        if np.any(grad > lam + tol):
            return False
        if isinstance(inst.matroid, FreeMatroid):
            break  # the whole set is the worst case for every coordinate
    return True


def find_occupancy_witness(inst, lam, picked, tol=GRAD_TOL):
    """(P2'): a feasible subset of the picked set whose occupancy pushes some
    coordinate's gradient up to lam. Returns (subset, i*) or None."""
    for i in range(inst.d):
        x_occ = _greedy_coordinate_set(inst, picked, i)
        grad = inst.cost.grad(_occupancy(inst, x_occ))
        if grad[i] >= lam[i] - tol:
            return frozenset(x_occ), i
    return None


@dataclass
class GoodClassifier:
    classifier: Classifier
    x_occ: frozenset
    i_star: int
    p1_ok: bool
    report: PickReport
    tau_upper: float  # smallest tau known to fail (P2')


def find_good_classifier(inst, eps=TAU_TOL, tol=GRAD_TOL):
    """Largest tau on the curve where (P2') still holds, by bisection.

    (P2') holds near the origin and fails far out on the curve; (P1')
    behaves oppositely; the crossing is the good classifier.
    """
    if inst.n == 0 or float(np.max(inst.values, initial=0.0)) <= 0.0:
        raise NoGoodClassifier("all item values are zero")

    def p2(tau):
        lam = curve_point(inst.cost, tau).lam
        report = pick(inst, lam)
        return find_occupancy_witness(inst, lam, report.picked, tol=tol)

    lo = -1.0
    if p2(lo) is None:
        raise NoGoodClassifier("no occupancy witness even at the origin")
    hi = 1.0
    for _ in range(200):
        rep = pick(inst, curve_point(inst.cost, hi).lam)
        if not rep.picked and p2(hi) is None:
            break
        hi *= 2.0
    else:
        raise NoGoodClassifier("(P2') never fails within the search cap")

    for _ in range(400):
        if hi - lo <= eps:
            break
        mid = 0.5 * (lo + hi)
        if p2(mid) is None:
            hi = mid
        else:
            lo = mid

    # The exact crossing sits inside the final bracket [lo, hi].  Return the
    # upper endpoint: its strict set satisfies (P1') outright (anything whose
    # gradient could exceed lam has already left), while the (P2') witness is
    # taken from the weak set at the lower endpoint, whose gradient reaches
    # lam up to the bracket's lambda spread.
    cls_lo = curve_point(inst.cost, lo)
    cls = curve_point(inst.cost, hi)
    spread = float(np.max(cls.lam - cls_lo.lam, initial=0.0))
    report_lo = pick(inst, cls_lo.lam)
    witness = find_occupancy_witness(inst, cls.lam, report_lo.picked,
                                     tol=tol + spread)
    if witness is None:
        raise NoGoodClassifier("witness vanished at the bisection point")
    x_occ, i_star = witness
    report_hi = pick(inst, cls.lam)
    report = PickReport(
        picked=report_lo.picked,
        open_picked=report_hi.open_picked,
        occupancy=report_lo.occupancy,
        threshold_item=report_hi.threshold_item,
        tie_flag=report_hi.tie_flag,
    )
    return GoodClassifier(
        classifier=cls,
        x_occ=x_occ,
        i_star=i_star,
        p1_ok=check_p1(inst, cls.lam, report_hi.open_picked, tol=tol),
        report=report,
        tau_upper=hi,
    )
