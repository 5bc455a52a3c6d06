import numpy as np
import pytest

import convexprofit as cp


@pytest.fixture
def canonical():
    return cp.canonical_instance()


def random_instance(seed, n=8, d=2, cost_kind="separable_power",
                    matroid_kind="free", rank=None):
    cfg = cp.GeneratorConfig(n=n, d=d, cost_kind=cost_kind,
                             matroid_kind=matroid_kind, matroid_rank=rank)
    return cp.generate(cfg, seed=seed)


def standard_cost_models(seed=0):
    """Small mixed bag of cost models for cross-model checks."""
    rng = np.random.default_rng(seed)
    models = [
        cp.SeparablePowerCost([1.0], [2.0]),
        cp.SeparablePowerCost([0.7, 1.3], [1.5, 3.0]),
        cp.SeparableExpCost([0.5, 0.9], [1.0, 0.6]),
    ]
    for d in (2, 3):
        off = rng.uniform(0.0, 0.3, size=(d, d))
        q = 0.5 * (off + off.T)
        np.fill_diagonal(q, rng.uniform(0.8, 1.2, size=d))
        models.append(cp.SupermodularQuadraticCost(q))
    return models
