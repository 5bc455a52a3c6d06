"""Instances: serialization, profit evaluation, exceptional items, and the
general-position perturbation."""

import numpy as np
import pytest

import convexprofit as cp

from conftest import random_instance


def test_item_validation():
    with pytest.raises(ValueError):
        cp.Item(0, 1.0, [-0.5])


def test_profit_by_subset_and_vector(canonical):
    # values 3,2,1; unit sizes; g(z) = z^2
    assert canonical.profit({0}) == pytest.approx(2.0)
    assert canonical.profit({0, 1}) == pytest.approx(1.0)
    assert canonical.profit({0, 1, 2}) == pytest.approx(-3.0)
    assert canonical.profit(np.array([0.5, 0.0, 0.0])) == pytest.approx(1.25)
    assert canonical.profit(frozenset()) == 0.0


def test_instance_round_trip():
    for seed in range(4):
        inst = random_instance(seed, n=5, d=2, matroid_kind="partition")
        again = cp.instance_from_dict(inst.to_dict())
        assert [e.id for e in again.items] == [e.id for e in inst.items]
        np.testing.assert_allclose(again.values, inst.values)
        np.testing.assert_allclose(again.sizes, inst.sizes)
        for sub in ({inst.items[0].id}, {e.id for e in inst.items[:3]}):
            assert again.profit(sub) == pytest.approx(inst.profit(sub), rel=1e-12)
            assert again.matroid.is_independent(sub) == \
                inst.matroid.is_independent(sub)


def test_generate_deterministic():
    cfg = cp.GeneratorConfig(n=7, d=2)
    a = cp.generate(cfg, seed=42)
    b = cp.generate(cfg, seed=42)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.sizes, b.sizes)


# ---------------------------------------------------------------------------
# exceptional items


def test_exceptional_hand_cases():
    # g = z^2, unit size: best take of value-1 item is theta = 1/2; of
    # value-3 item it is clipped at 1, so only the first is exceptional
    g = cp.SeparablePowerCost([1.0], [2.0])
    inst = cp.Instance([cp.Item(0, 1.0, [1.0]), cp.Item(1, 3.0, [1.0])],
                       g, cp.FreeMatroid([0, 1]))
    flag0, theta0 = cp.detect_exceptional(inst, inst.items[0])
    flag1, theta1 = cp.detect_exceptional(inst, inst.items[1])
    assert flag0 and theta0 == pytest.approx(0.5, abs=1e-6)
    assert not flag1 and theta1 == pytest.approx(1.0, abs=1e-6)


def test_optimal_solution_has_few_exceptional_items():
    # any optimal solution contains at most d exceptional items
    from convexprofit.oracles import brute_force_opt

    for seed in range(12):
        for d in (1, 2, 3):
            inst = random_instance(seed, n=10, d=d)
            opt = brute_force_opt(inst).witness
            count = sum(
                cp.detect_exceptional(inst, inst.item(e))[0] for e in opt
            )
            assert count <= d


def test_split_exceptional_partitions_items():
    for seed in range(6):
        inst = random_instance(seed, n=10, d=2)
        core, exceptional = cp.split_exceptional(inst)
        assert core.n + len(exceptional) == inst.n
        for e in exceptional:
            assert cp.detect_exceptional(inst, e)[0]
        for e in core.items:
            assert not cp.detect_exceptional(inst, e)[0]


def test_split_preserves_matroid_feasibility():
    inst = random_instance(2, n=8, d=2, matroid_kind="uniform", rank=3)
    core, _ = cp.split_exceptional(inst)
    ids = [e.id for e in core.items]
    assert core.matroid.is_independent(set(ids[:3])) == \
        inst.matroid.is_independent(set(ids[:3]))


# ---------------------------------------------------------------------------
# perturbation


def test_perturbation_small_and_nonincreasing():
    inst = random_instance(7, n=9, d=2)
    out = cp.perturb_general_position(inst, delta=1e-6, seed=3)
    for before, after in zip(inst.items, out.items):
        assert after.value <= before.value + 1e-15
        bound = (1e-6 / inst.n) * max(inst.singleton_profit(before), 0.0)
        assert before.value - after.value <= bound + 1e-15
        assert after.value >= 0.0


def test_perturbation_deterministic():
    inst = random_instance(7, n=6, d=1)
    a = cp.perturb_general_position(inst, seed=5)
    b = cp.perturb_general_position(inst, seed=5)
    np.testing.assert_array_equal(a.values, b.values)


def test_perturbation_rejects_bad_delta():
    inst = random_instance(0, n=3, d=1)
    with pytest.raises(ValueError):
        cp.perturb_general_position(inst, delta=1.5)
