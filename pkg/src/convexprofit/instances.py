"""Items, instances, the profit function, generators, and preprocessing
(exceptional-item detection, general-position perturbation)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import (
    SeparableExpCost,
    SeparablePowerCost,
    SupermodularQuadraticCost,
    cost_from_dict,
    golden_section_max,
)
from .matroids import (
    FreeMatroid,
    PartitionMatroid,
    UniformMatroid,
    matroid_from_dict,
)

BOUNDARY_TOL = 1e-7  # maximizers within this of 0/1 count as boundary


@dataclass(frozen=True)
class Item:
    id: int
    value: float
    size: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "size", np.asarray(self.size, dtype=float))
        if self.value < 0:
            raise ValueError(f"item {self.id}: value must be non-negative")
        if np.any(self.size < 0):
            raise ValueError(f"item {self.id}: size must be non-negative")


@dataclass
class PreprocessConfig:
    """Knobs for the nice-instance reduction."""

    eta: float = 10.0
    noise_delta: float = 1e-6
    secretary_prob: float = 0.5


class Instance:
    """An ordered item list with a cost model and a matroid constraint."""

    def __init__(self, items, cost, matroid, meta=None):
        items = list(items)
        ids = [e.id for e in items]
        if len(set(ids)) != len(ids):
            raise ValueError("item ids must be unique")
        for e in items:
            if e.size.shape != (cost.dim,):
                raise ValueError(
                    f"item {e.id} has size dim {e.size.shape}, cost dim {cost.dim}"
                )
        if set(ids) != set(matroid.ground):
            raise ValueError("matroid ground set must equal the item ids")
        self.items = items
        self.cost = cost
        self.matroid = matroid
        self.meta = dict(meta or {})
        self._by_id = {e.id: e for e in items}
        self.values = np.array([e.value for e in items], dtype=float)
        self.sizes = (
            np.stack([e.size for e in items])
            if items
            else np.zeros((0, cost.dim))
        )
        self._pos = {e.id: k for k, e in enumerate(items)}

    @property
    def n(self):
        return len(self.items)

    @property
    def d(self):
        return self.cost.dim

    def item(self, item_id):
        return self._by_id[item_id]

    def indicator(self, subset):
        x = np.zeros(self.n)
        for e in subset:
            x[self._pos[e]] = 1.0
        return x

    def profit(self, x):
        """pi(x) = <v, x> - g(S^T x); accepts an id subset or a fractional
        n-vector with entries in [0, 1]."""
        if not isinstance(x, np.ndarray):
            try:
                x = self.indicator(x)
            except TypeError:
                x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.n},)")
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise ValueError("x entries must lie in [0, 1]")
        x = np.clip(x, 0.0, 1.0)
        return float(self.values @ x) - self.cost.value(self.sizes.T @ x)

    def singleton_profit(self, item):
        return item.value - self.cost.value(item.size)

    def to_dict(self):
        return {
            "d": self.d,
            "items": [
                {"id": e.id, "value": e.value, "size": e.size.tolist()}
                for e in self.items
            ],
            "cost": self.cost.to_dict(),
            "matroid": self.matroid.to_dict(),
            "meta": self.meta,
        }


def instance_from_dict(data):
    cost = cost_from_dict(data["cost"])
    items = [
        Item(int(e["id"]), float(e["value"]), np.asarray(e["size"], dtype=float))
        for e in data["items"]
    ]
    matroid = matroid_from_dict(data["matroid"], ground=[e.id for e in items])
    return Instance(items, cost, matroid, meta=data.get("meta"))


def detect_exceptional(inst, item, boundary_tol=BOUNDARY_TOL):
    """An item is exceptional when the best fractional take of it alone lies
    strictly inside (0, 1). Returns (flag, maximizer)."""

    def take(theta):
        return theta * item.value - inst.cost.value(theta * item.size)

    theta, _ = golden_section_max(take, 0.0, 1.0)
    # golden section can park next to a boundary optimum; snap if no better
    if take(theta) <= max(take(0.0), take(1.0)) + 1e-15:
        theta = 0.0 if take(0.0) >= take(1.0) else 1.0
    return boundary_tol < theta < 1.0 - boundary_tol, theta


def split_exceptional(inst):
    """Partition into (core instance without exceptional items, exceptional)."""
    exceptional = [e for e in inst.items if detect_exceptional(inst, e)[0]]
    if not exceptional:
        return inst, []
    exc_ids = {e.id for e in exceptional}
    core_items = [e for e in inst.items if e.id not in exc_ids]
    meta = dict(inst.meta, exceptional_free=True)
    return (
        Instance(core_items, inst.cost, _restrict_matroid(inst.matroid, core_items),
                 meta=meta),
        exceptional,
    )


def _restrict_matroid(matroid, items):
    ids = [e.id for e in items]
    if isinstance(matroid, FreeMatroid):
        return FreeMatroid(ids)
    if isinstance(matroid, UniformMatroid):
        return UniformMatroid(ids, matroid.k)
    if isinstance(matroid, PartitionMatroid):
        keep = set(ids)
        blocks, caps = [], []
        for b, cap in zip(matroid.blocks, matroid.caps):
            nb = [e for e in b if e in keep]
            if nb:
                blocks.append(nb)
                caps.append(cap)
        return PartitionMatroid(blocks, caps)
    raise TypeError(f"cannot restrict matroid kind {matroid.kind!r}")


def perturb_general_position(inst, delta=1e-6, seed=0):
    """Subtract per-item noise u * (delta/n) * max(pi({e}), 0) from each value
    so that value/size ties against any classifier become unique."""
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n = max(inst.n, 1)
    items = []
    for e in inst.items:
        u = float(rng.uniform())
        bump = u * (delta / n) * max(inst.singleton_profit(e), 0.0)
        items.append(Item(e.id, max(e.value - bump, 0.0), e.size))
    meta = dict(inst.meta, general_position=True, perturb_seed=seed,
                perturb_delta=delta)
    return Instance(items, inst.cost, inst.matroid, meta=meta)


@dataclass
class GeneratorConfig:
    """Random instance family: uniform values/sizes over standard costs."""

    n: int = 10
    d: int = 1
    v_max: float = 3.0
    cost_kind: str = "separable_power"
    matroid_kind: str = "free"
    matroid_rank: int | None = None
    n_blocks: int = 2
    values: list | None = None  # fixed values override the distribution
    sizes: list | None = None


def generate(config, seed=0):
    """Deterministic instance from a generator config and seed."""
    rng = np.random.default_rng(seed)
    n, d = config.n, config.d
    if config.values is not None:
        values = np.asarray(config.values, dtype=float)
    else:
        values = rng.uniform(0.0, config.v_max, size=n)
    if config.sizes is not None:
        sizes = np.asarray(config.sizes, dtype=float).reshape(n, d)
    else:
        sizes = rng.uniform(0.0, 1.0, size=(n, d))

    cost = _generate_cost(config.cost_kind, d, rng)
    items = [Item(i, float(values[i]), sizes[i]) for i in range(n)]
    ids = [e.id for e in items]
    matroid = _generate_matroid(config, ids, rng)
    meta = {"seed": seed, "generator": config.cost_kind}
    return Instance(items, cost, matroid, meta=meta)


def _generate_cost(kind, d, rng):
    if kind == "separable_power":
        c = rng.uniform(0.5, 1.5, size=d)
        p = rng.choice([1.5, 2.0, 3.0], size=d)
        return SeparablePowerCost(c, p)
    if kind == "separable_exp":
        c = rng.uniform(0.2, 0.8, size=d)
        a = rng.uniform(0.5, 1.5, size=d)
        return SeparableExpCost(c, a)
    if kind == "supermodular_quadratic":
        off = rng.uniform(0.0, 0.3, size=(d, d))
        q = 0.5 * (off + off.T)
        np.fill_diagonal(q, rng.uniform(0.8, 1.2, size=d))
        return SupermodularQuadraticCost(q)
    raise ValueError(f"unknown cost kind {kind!r}")


def _generate_matroid(config, ids, rng):
    kind = config.matroid_kind
    n = len(ids)
    if kind == "free":
        return FreeMatroid(ids)
    if kind == "uniform":
        k = config.matroid_rank
        if k is None:
            k = max(1, n // 2)
        return UniformMatroid(ids, k)
    if kind == "partition":
        nb = min(config.n_blocks, n) if n else 1
        blocks = [[] for _ in range(nb)]
        for i, e in enumerate(ids):
            blocks[i % nb].append(e)
        caps = [max(1, len(b) // 2) for b in blocks]
        return PartitionMatroid([b for b in blocks if b],
                                caps[: sum(1 for b in blocks if b)])
    raise ValueError(f"unknown matroid kind {kind!r}")


def canonical_instance():
    """Three unit-size items of values 3, 2, 1 with quadratic cost, free."""
    cost = SeparablePowerCost([1.0], [2.0])
    items = [
        Item(0, 3.0, np.array([1.0])),
        Item(1, 2.0, np.array([1.0])),
        Item(2, 1.0, np.array([1.0])),
    ]
    return Instance(items, cost, FreeMatroid([0, 1, 2]))
