"""Ground-truth oracles: enumeration and the high-precision fractional
solver, cross-checked against each other and hand values."""

import numpy as np
import pytest

import convexprofit as cp
from convexprofit.oracles import (best_filtered_feasible, brute_force_fopt,
                                  brute_force_opt)

from conftest import random_instance


def test_brute_force_opt_canonical(canonical):
    r = brute_force_opt(canonical)
    assert r.value == pytest.approx(2.0)
    assert r.witness == frozenset({0})


def test_brute_force_opt_matches_manual_enumeration():
    inst = random_instance(4, n=6, d=2, matroid_kind="uniform", rank=3)
    best = 0.0
    ids = [e.id for e in inst.items]
    for mask in range(64):
        sub = {ids[i] for i in range(6) if mask >> i & 1}
        if inst.matroid.is_independent(sub):
            best = max(best, inst.profit(sub))
    assert brute_force_opt(inst).value == pytest.approx(best, abs=1e-12)


def test_brute_force_opt_too_large():
    inst = random_instance(0, n=25, d=1)
    with pytest.raises(cp.TooLarge):
        brute_force_opt(inst)


def test_fopt_oracle_dominates_opt():
    for seed in range(10):
        inst = random_instance(seed, n=6, d=2, matroid_kind="partition")
        assert brute_force_fopt(inst).value >= \
            brute_force_opt(inst).value - 1e-6


def test_fopt_oracle_canonical(canonical):
    assert brute_force_fopt(canonical).value == pytest.approx(2.0, abs=1e-6)


def test_fopt_oracle_agrees_with_frank_wolfe():
    for seed in range(6):
        inst = random_instance(seed + 30, n=8, d=2, matroid_kind="uniform",
                               rank=4)
        hp = brute_force_fopt(inst).value
        fw = cp.fopt(inst, tol=1e-8, max_iter=50_000).value
        assert hp == pytest.approx(fw, abs=2e-3, rel=1e-3)


def test_best_filtered_feasible(canonical):
    r = best_filtered_feasible(canonical, {0, 1})
    assert r.value == pytest.approx(2.0)
    assert r.witness == frozenset({0})
    empty = best_filtered_feasible(canonical, set())
    assert empty.value == 0.0
