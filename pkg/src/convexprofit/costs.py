"""Convex cost models with Fenchel duality machinery.

All models are convex, non-decreasing on the positive orthant, vanish at the
origin, and have gradients diverging along every positive direction.
Conjugates are always taken over the positive orthant only; the sup over all
of R^d is never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidCost, RequiresSeparable

# Numerical policy: 1e-9 root finding, 1e-8 optimization stationarity,
# geometric bracket growth capped at 2^60.
ROOT_TOL = 1e-9
OPT_TOL = 1e-8
BRACKET_CAP = 2.0**60

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# kernel cost codes, shared with _kernels
KERNEL_POWER = 0
KERNEL_QUAD = 1
KERNEL_EXP = 2


def golden_section_max(f, lo, hi, tol=ROOT_TOL):
    """Maximize a 1-D concave function on [lo, hi]; returns (argmax, max)."""
    a, b = float(lo), float(hi)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _as_nonneg_vector(z, dim, name):
    z = np.asarray(z, dtype=float)
    if z.shape != (dim,):
        raise ValueError(f"{name} has shape {z.shape}, expected ({dim},)")
    if np.any(z < 0):
        raise ValueError(f"{name} must be component-wise non-negative")
    return z


class CostModel:
    """Base class: a convex monotone cost g with duality operations."""

    kind = "abstract"
    is_separable = False

    def __init__(self, dim):
        if dim < 1:
            raise InvalidCost("dimension must be positive")
        self.dim = int(dim)

    # -- primitives subclasses must provide -------------------------------
    def value(self, z):
        raise NotImplementedError

    def grad(self, z):
        raise NotImplementedError

    def marginal(self, i, t):
        """g restricted to the i-th axis: g(t * e_i)."""
        self._check_index(i)
        if t < 0:
            raise ValueError("t must be non-negative")
        z = np.zeros(self.dim)
        z[i] = t
        return self.value(z)

    def marginal_grad(self, i, t):
        self._check_index(i)
        z = np.zeros(self.dim)
        z[i] = t
        return float(self.grad(z)[i])

    def grad_at_zero(self):
        """Per-coordinate slopes g'_i(0), the corner of the curve's flat box."""
        return np.array([self.marginal_grad(i, 0.0) for i in range(self.dim)])

    # -- duality ----------------------------------------------------------
    def conjugate(self, lam):
        """sup_{z >= 0} [<lam, z> - g(z)], over the positive orthant."""
        raise NotImplementedError

    def marginal_conjugate(self, i, lam):
        """1-D conjugate of the i-th marginal; equals the i-th marginal of
        the conjugate for monotone convex g."""
        self._check_index(i)
        if lam < 0:
            raise ValueError("lam must be non-negative")
        if lam <= self.marginal_grad(i, 0.0):
            return 0.0
        hi = self._marginal_sup_bracket(i, lam)
        _, best = golden_section_max(lambda t: lam * t - self.marginal(i, t), 0.0, hi)
        return max(best, 0.0)

    def _marginal_sup_bracket(self, i, lam):
        hi = 1.0
        while self.marginal_grad(i, hi) < lam:
            hi *= 2.0
            if hi > BRACKET_CAP:
                raise InvalidCost(
                    f"marginal {i} has bounded slope; conjugate unbounded at {lam}"
                )
        return hi

    def marginal_conjugate_inverse(self, i, tau):
        """Smallest lam >= g'_i(0) with marginal_conjugate(i, lam) = tau."""
        from .errors import CurveRangeExceeded

        self._check_index(i)
        if tau < 0:
            raise ValueError("tau must be non-negative")
        lo = self.marginal_grad(i, 0.0)
        if tau == 0.0:
            return lo
        hi = max(lo, 1.0)
        while self.marginal_conjugate(i, hi) < tau:
            hi *= 2.0
            if hi > BRACKET_CAP:
                raise CurveRangeExceeded(
                    f"no lam with marginal_conjugate({i}, lam) = {tau} below cap"
                )
        # capped: at large magnitudes float spacing can exceed the absolute
        # tolerance, so pure `hi - lo > tol` would spin forever
        for _ in range(200):
            if hi - lo <= ROOT_TOL:
                break
            mid = 0.5 * (lo + hi)
            if self.marginal_conjugate(i, mid) < tau:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # -- misc -------------------------------------------------------------
    def _check_index(self, i):
        if not 0 <= i < self.dim:
            raise IndexError(f"coordinate {i} out of range for d={self.dim}")

    def _check_point(self, z):
        return _as_nonneg_vector(z, self.dim, "z")

    def kernel_spec(self):
        """(code, a, b, Q) arrays for the compiled kernel, or None."""
        return None

    def to_dict(self):
        raise InvalidCost(f"cost kind {self.kind!r} is not serializable")


class SeparableCost(CostModel):
    """g(z) = sum_i g_i(z_i); everything reduces to the 1-D marginals."""

    is_separable = True

    def value(self, z):
        z = self._check_point(z)
        return float(sum(self.marginal(i, z[i]) for i in range(self.dim)))

    def grad(self, z):
        z = self._check_point(z)
        return np.array([self.marginal_grad(i, z[i]) for i in range(self.dim)])

    def conjugate(self, lam):
        lam = _as_nonneg_vector(lam, self.dim, "lam")
        return float(sum(self.marginal_conjugate(i, lam[i]) for i in range(self.dim)))


class SeparablePowerCost(SeparableCost):
    """g(z) = sum_i c_i z_i^{p_i}, with c_i > 0 and p_i > 1."""

    kind = "separable_power"

    def __init__(self, c, p):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if c.shape != p.shape:
            raise InvalidCost("c and p must have the same length")
        if np.any(c <= 0):
            raise InvalidCost("coefficients must be strictly positive")
        if np.any(p <= 1):
            raise InvalidCost("exponents must exceed 1 (strict convexity)")
        super().__init__(len(c))
        self.c = c
        self.p = p

    def value(self, z):
        z = self._check_point(z)
        return float(np.sum(self.c * z**self.p))

    def grad(self, z):
        z = self._check_point(z)
        return self.c * self.p * z ** (self.p - 1.0)

    def marginal(self, i, t):
        self._check_index(i)
        if t < 0:
            raise ValueError("t must be non-negative")
        return float(self.c[i] * t ** self.p[i])

    def marginal_grad(self, i, t):
        self._check_index(i)
        return float(self.c[i] * self.p[i] * t ** (self.p[i] - 1.0))

    def marginal_conjugate(self, i, lam):
        self._check_index(i)
        if lam < 0:
            raise ValueError("lam must be non-negative")
        if lam == 0.0:
            return 0.0
        c, p = self.c[i], self.p[i]
        return float(c * (p - 1.0) * (lam / (c * p)) ** (p / (p - 1.0)))

    def kernel_spec(self):
        return (KERNEL_POWER, self.c, self.p, None)

    def to_dict(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": {"c": self.c.tolist(), "p": self.p.tolist()},
        }


class SeparableExpCost(SeparableCost):
    """g(z) = sum_i c_i (exp(a_i z_i) - 1); has a non-zero slope at 0."""

    kind = "separable_exp"

    def __init__(self, c, a):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if c.shape != a.shape:
            raise InvalidCost("c and a must have the same length")
        if np.any(c <= 0) or np.any(a <= 0):
            raise InvalidCost("c and a must be strictly positive")
        super().__init__(len(c))
        self.c = c
        self.a = a

    def value(self, z):
        z = self._check_point(z)
        return float(np.sum(self.c * (np.exp(self.a * z) - 1.0)))

    def grad(self, z):
        z = self._check_point(z)
        return self.c * self.a * np.exp(self.a * z)

    def marginal(self, i, t):
        self._check_index(i)
        if t < 0:
            raise ValueError("t must be non-negative")
        return float(self.c[i] * (math.exp(self.a[i] * t) - 1.0))

    def marginal_grad(self, i, t):
        self._check_index(i)
        return float(self.c[i] * self.a[i] * math.exp(self.a[i] * t))

    def marginal_conjugate(self, i, lam):
        self._check_index(i)
        if lam < 0:
            raise ValueError("lam must be non-negative")
        c, a = self.c[i], self.a[i]
        if lam <= c * a:
            return 0.0
        # maximizer t* = ln(lam/(c a))/a
        return float(lam / a * (math.log(lam / (c * a)) - 1.0) + c)

    def kernel_spec(self):
        return (KERNEL_EXP, self.c, self.a, None)

    def to_dict(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": {"c": self.c.tolist(), "a": self.a.tolist()},
        }


class SupermodularQuadraticCost(CostModel):
    """g(z) = z^T Q z with Q >= 0 entry-wise, positive diagonal, PD symmetric
    part. Non-negative entries make g supermodular by the mixed-derivative
    criterion."""

    kind = "supermodular_quadratic"

    def __init__(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidCost("Q must be a square matrix")
        if np.any(q < 0):
            raise InvalidCost("Q entries must be non-negative (supermodularity)")
        if np.any(np.diag(q) <= 0):
            raise InvalidCost("Q diagonal must be strictly positive")
        sym = 0.5 * (q + q.T)
        if np.min(np.linalg.eigvalsh(sym)) <= 0:
            raise InvalidCost("symmetric part of Q must be positive definite")
        super().__init__(q.shape[0])
        self.q = q
        self._sym = sym

    def value(self, z):
        z = self._check_point(z)
        return float(z @ self.q @ z)

    def grad(self, z):
        z = self._check_point(z)
        return 2.0 * self._sym @ z

    def marginal(self, i, t):
        self._check_index(i)
        if t < 0:
            raise ValueError("t must be non-negative")
        return float(self.q[i, i] * t * t)

    def marginal_grad(self, i, t):
        self._check_index(i)
        return float(2.0 * self.q[i, i] * t)

    def marginal_conjugate(self, i, lam):
        self._check_index(i)
        if lam < 0:
            raise ValueError("lam must be non-negative")
        return float(lam * lam / (4.0 * self.q[i, i]))

    def conjugate(self, lam):
        # Exact orthant-constrained maximum by enumerating active faces of
        # the orthant: on the optimal face the free block is stationary.
        lam = _as_nonneg_vector(lam, self.dim, "lam")
        best = 0.0
        idx = list(range(self.dim))
        for k in range(1, self.dim + 1):
            for free in combinations(idx, k):
                f = list(free)
                sub = self._sym[np.ix_(f, f)]
                zf = np.linalg.solve(sub, lam[f]) / 2.0
                if np.any(zf < -1e-12):
                    continue
                best = max(best, float(lam[f] @ zf / 2.0))
        return best

    def kernel_spec(self):
        return (KERNEL_QUAD, None, None, self._sym)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "params": {"q": self.q.tolist()}}


class CustomCost(CostModel):
    """In-process cost from callables; conjugates by cyclic coordinate ascent."""

    kind = "custom"

    def __init__(self, dim, value_fn, grad_fn=None, fd_step=1e-6):
        super().__init__(dim)
        self._value_fn = value_fn
        self._grad_fn = grad_fn
        self._fd_step = fd_step

    def value(self, z):
        z = self._check_point(z)
        return float(self._value_fn(z))

    def grad(self, z):
        z = self._check_point(z)
        if self._grad_fn is not None:
            return np.asarray(self._grad_fn(z), dtype=float)
        h = self._fd_step
        g = np.empty(self.dim)
        for i in range(self.dim):
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] = max(zm[i] - h, 0.0)
            g[i] = (self._value_fn(zp) - self._value_fn(zm)) / (zp[i] - zm[i])
        return g

    def conjugate(self, lam):
        lam = _as_nonneg_vector(lam, self.dim, "lam")
        z = np.zeros(self.dim)

        def obj(zz):
            return float(lam @ zz - self.value(zz))

        best = obj(z)
        for _ in range(200):
            prev = best
            for i in range(self.dim):

                def line(t, i=i):
                    zz = z.copy()
                    zz[i] = t
                    return obj(zz)

                hi = max(z[i], 1.0)
                while line(hi * 2.0) > line(hi):
                    hi *= 2.0
                    if hi > BRACKET_CAP:
                        raise InvalidCost("conjugate appears unbounded")
                z[i], _ = golden_section_max(line, 0.0, hi * 2.0, tol=OPT_TOL)
            best = obj(z)
            if best - prev <= OPT_TOL:
                break
        return max(best, 0.0)


class TruncatedCost(SeparableCost):
    """Separable cost with per-coordinate gradient caps.

    Each marginal becomes t -> sup_{u <= gamma_i} [u t - g*_i(u)]: the base
    marginal up to the largest point t* where its slope is still <= gamma_i,
    then the tangent continuation with slope gamma_i.
    """

    kind = "truncated"

    def __init__(self, base, gamma):
        if not base.is_separable:
            raise RequiresSeparable("gradient truncation needs a separable cost")
        gamma = np.asarray(gamma, dtype=float)
        if gamma.shape != (base.dim,):
            raise ValueError("gamma must be a d-vector")
        if np.any(gamma < 0):
            raise ValueError("gamma must be non-negative")
        super().__init__(base.dim)
        self.base = base
        self.gamma = gamma
        self._tstar = np.array(
            [self._find_tstar(i, gamma[i]) for i in range(base.dim)]
        )

    def _find_tstar(self, i, cap):
        if math.isinf(cap):
            return math.inf
        if self.base.marginal_grad(i, 0.0) > cap:
            return 0.0
        hi = 1.0
        while self.base.marginal_grad(i, hi) <= cap:
            hi *= 2.0
            if hi > BRACKET_CAP:
                return math.inf  # cap never binds
        lo = hi / 2.0
        for _ in range(200):
            if hi - lo <= ROOT_TOL:
                break
            mid = 0.5 * (lo + hi)
            if self.base.marginal_grad(i, mid) <= cap:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def marginal(self, i, t):
        self._check_index(i)
        if t < 0:
            raise ValueError("t must be non-negative")
        ts = self._tstar[i]
        if t <= ts:
            return self.base.marginal(i, t)
        return self.base.marginal(i, ts) + self.gamma[i] * (t - ts)

    def marginal_grad(self, i, t):
        self._check_index(i)
        if t <= self._tstar[i]:
            return min(self.base.marginal_grad(i, t), float(self.gamma[i]))
        return float(self.gamma[i])


def truncate_gradient(model, gamma):
    """Cap each marginal's slope at gamma_i (closed-form tangent beyond)."""
    return TruncatedCost(model, gamma)


@dataclass
class SupermodularReport:
    ok: bool
    samples: int
    witnesses: list = field(default_factory=list)


def check_supermodular(model, samples=200, box=None, seed=0, tol=1e-9):
    """Sampled discrete cross-difference test of supermodularity.

    Draws random base points plus coordinate pairs and checks
    f(x+a e_i+b e_j) - f(x+a e_i) - f(x+b e_j) + f(x) >= -tol.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    hi = np.full(model.dim, 2.0) if box is None else np.asarray(box, dtype=float)
    witnesses = []
    d = model.dim
    for _ in range(samples):
        x = rng.uniform(0.0, hi)
        i = int(rng.integers(d))
        j = int(rng.integers(d))
        a = float(rng.uniform(0.0, hi[i]))
        b = float(rng.uniform(0.0, hi[j]))
        xi = x.copy()
        xi[i] += a
        xj = x.copy()
        xj[j] += b
        xij = xi.copy()
        xij[j] += b
        cross = model.value(xij) - model.value(xi) - model.value(xj) + model.value(x)
        if cross < -tol:
            witnesses.append({"x": x.tolist(), "i": i, "j": j, "a": a, "b": b,
                              "cross": cross})
    return SupermodularReport(ok=not witnesses, samples=samples, witnesses=witnesses)


def separable_surrogate(model):
    """Separable upper bound built from the marginals: (1/d) sum_i g_i(d y_i).

    Sandwiched between sum_i g_i(y_i) and itself around the supermodular g.
    """
    d = model.dim
    if isinstance(model, SeparablePowerCost):
        return SeparablePowerCost(model.c * float(d) ** (model.p - 1.0), model.p)
    if isinstance(model, SeparableExpCost):
        return SeparableExpCost(model.c / d, model.a * d)
    if isinstance(model, SupermodularQuadraticCost):
        return SeparablePowerCost(d * np.diag(model.q), np.full(d, 2.0))
    return _MarginalSurrogateCost(model)


class _MarginalSurrogateCost(SeparableCost):
    """Generic (1/d) sum g_i(d y_i) fallback for custom models."""

    kind = "surrogate"

    def __init__(self, base):
        super().__init__(base.dim)
        self.base = base

    def marginal(self, i, t):
        return self.base.marginal(i, self.dim * t) / self.dim

    def marginal_grad(self, i, t):
        return self.base.marginal_grad(i, self.dim * t)


_KINDS = {
    "separable_power": lambda d, p: SeparablePowerCost(p["c"], p["p"]),
    "separable_exp": lambda d, p: SeparableExpCost(p["c"], p["a"]),
    "supermodular_quadratic": lambda d, p: SupermodularQuadraticCost(p["q"]),
}


def cost_from_dict(data):
    kind = data["kind"]
    if kind not in _KINDS:
        raise InvalidCost(f"unknown cost kind {kind!r}")
    model = _KINDS[kind](data.get("dim"), data["params"])
    if "dim" in data and data["dim"] != model.dim:
        raise InvalidCost("declared dim inconsistent with params")
    return model


def cost_to_dict(model):
    return model.to_dict()
