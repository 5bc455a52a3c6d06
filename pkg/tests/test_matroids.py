"""Matroids, the greedy oracle, the Frank-Wolfe relaxation, and agreement
between the compiled and pure-Python kernels."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import convexprofit as cp
from convexprofit import _kernels
from convexprofit.oracles import brute_force_fopt, brute_force_opt

from conftest import random_instance


def enumerate_max_weight(matroid, weights):
    """Independent oracle: brute-force max-weight independent set."""
    ground = sorted(weights)
    best, best_w = frozenset(), 0.0
    for r in range(len(ground) + 1):
        for sub in itertools.combinations(ground, r):
            if matroid.is_independent(set(sub)):
                w = sum(weights[e] for e in sub)
                if w > best_w + 1e-12:
                    best, best_w = frozenset(sub), w
    return best_w


def test_uniform_independence():
    m = cp.UniformMatroid([0, 1, 2, 3], 2)
    assert m.is_independent({0, 3})
    assert not m.is_independent({0, 1, 2})
    assert m.rank == 2


def test_partition_independence():
    m = cp.PartitionMatroid([[0, 1], [2, 3, 4]], [1, 2])
    assert m.is_independent({0, 2, 3})
    assert not m.is_independent({0, 1})
    assert not m.is_independent({2, 3, 4})
    assert m.rank == 3


@pytest.mark.parametrize("matroid", [
    cp.FreeMatroid(range(6)),
    cp.UniformMatroid(range(6), 3),
    cp.PartitionMatroid([[0, 1, 2], [3, 4, 5]], [2, 1]),
])
def test_greedy_matches_enumeration(matroid):
    rng = np.random.default_rng(4)
    for _ in range(25):
        weights = {e: float(w) for e, w in
                   zip(range(6), rng.uniform(-1.0, 2.0, size=6))}
        chosen = cp.greedy_max_weight(matroid, weights)
        got = sum(weights[e] for e in chosen)
        assert matroid.is_independent(chosen)
        assert got == pytest.approx(enumerate_max_weight(matroid, weights), abs=1e-9)


@given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=8),
       st.integers(1, 8))
@settings(max_examples=80, deadline=None)
def test_greedy_output_is_independent_and_positive(weights, k):
    m = cp.UniformMatroid(range(len(weights)), min(k, len(weights)))
    chosen = cp.greedy_max_weight(m, dict(enumerate(weights)))
    assert m.is_independent(chosen)
    assert all(weights[e] > 0 for e in chosen)


def test_matroid_dict_round_trip():
    for m in (cp.FreeMatroid([0, 1]), cp.UniformMatroid([0, 1, 2], 2),
              cp.PartitionMatroid([[0], [1, 2]], [1, 1])):
        again = cp.matroid_from_dict(m.to_dict(), ground=list(m.ground))
        for sub in ({0}, {0, 1}, {0, 1, 2} & set(m.ground)):
            assert again.is_independent(sub) == m.is_independent(sub)


# ---------------------------------------------------------------------------
# fopt: Frank-Wolfe vs the independent SLSQP/grid oracle


@pytest.mark.parametrize("matroid_kind,rank", [
    ("free", None), ("uniform", 3), ("partition", None),
])
def test_fopt_matches_oracle(matroid_kind, rank):
    for seed in range(6):
        inst = random_instance(seed, n=6, d=2, matroid_kind=matroid_kind,
                               rank=rank)
        fw = cp.fopt(inst, tol=1e-8, max_iter=50_000)
        oracle = brute_force_fopt(inst)
        assert fw.value == pytest.approx(oracle.value, abs=2e-3, rel=1e-3)
        assert cp.matroids.polytope_violation(
            inst.matroid, fw.x, [e.id for e in inst.items]) <= 1e-9


def test_fopt_dominates_integer_opt():
    for seed in range(8):
        inst = random_instance(seed + 100, n=7, d=2, matroid_kind="uniform",
                               rank=3)
        fw = cp.fopt(inst, tol=1e-8, max_iter=50_000)
        assert fw.value >= brute_force_opt(inst).value - 1e-4


def test_fopt_restrict_subset():
    inst = random_instance(3, n=6, d=1)
    full = cp.fopt(inst).value
    part = cp.fopt(inst, restrict={inst.items[0].id, inst.items[1].id}).value
    assert part <= full + 1e-6


def test_fopt_canonical():
    assert cp.fopt(cp.canonical_instance(), tol=1e-8,
                   max_iter=50_000).value == pytest.approx(2.0, abs=1e-3)


# ---------------------------------------------------------------------------
# compiled vs fallback kernel agreement


@pytest.mark.skipif(_kernels.BACKEND != "compiled",
                    reason="compiled kernel unavailable")
def test_kernel_backends_agree():
    rng = np.random.default_rng(17)
    for trial in range(20):
        n = int(rng.integers(3, 12))
        d = int(rng.integers(1, 4))
        v = rng.uniform(0.0, 3.0, size=n)
        S = rng.uniform(0.0, 1.0, size=(n, d))
        cost_code = int(rng.integers(0, 3))
        ca = rng.uniform(0.5, 1.5, size=d)
        cb = rng.choice([1.5, 2.0, 3.0], size=d) if cost_code == 0 \
            else rng.uniform(0.5, 1.5, size=d)
        off = rng.uniform(0.0, 0.3, size=(d, d))
        Q = 0.5 * (off + off.T)
        np.fill_diagonal(Q, rng.uniform(0.8, 1.2, size=d))
        mat_code = int(rng.integers(0, 3))
        rank = int(rng.integers(1, n + 1))
        block_of = rng.integers(0, 2, size=n).astype(np.int64)
        caps = np.array([max(1, n // 3), max(1, n // 3)], dtype=np.int64)
        active = np.ones(n, dtype=np.uint8)
        args = (v, S, cost_code, ca, cb, Q, mat_code, rank, block_of, caps,
                active, 1e-7, 5000)
        x_py, val_py, gap_py, it_py = _kernels.fw_maximize_python(*args)
        x_c, val_c, gap_c, it_c = _kernels.fw_maximize_compiled(
            np.ascontiguousarray(v), np.ascontiguousarray(S), cost_code,
            np.ascontiguousarray(ca), np.ascontiguousarray(cb),
            np.ascontiguousarray(Q), mat_code, rank, block_of, caps, active,
            1e-7, 5000)
        np.testing.assert_allclose(np.asarray(x_c), np.asarray(x_py),
                                   atol=1e-10)
        assert val_c == pytest.approx(val_py, abs=1e-10)
        assert it_c == it_py
