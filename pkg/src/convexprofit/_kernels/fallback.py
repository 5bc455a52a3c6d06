"""Pure-numpy Frank-Wolfe kernel; reference implementation of the contract
shared with the compiled extension.

Contract: maximize  pi(x) = <v, x> - g(S^T x)  over the matroid polytope
restricted to the `active` items, with step 2/(t+2), stopping when the
duality gap <= tol * (1 + |value|) or after max_iter iterations.

Cost codes: 0 power (a=c, b=p), 1 quadratic (Q = symmetric part),
2 exponential (a=c, b=rate). Matroid codes: 0 free, 1 uniform, 2 partition.
"""

import numpy as np

COST_POWER = 0
COST_QUAD = 1
COST_EXP = 2

MAT_FREE = 0
MAT_UNIFORM = 1
MAT_PARTITION = 2


def _cost_value(z, cost_code, ca, cb, Q):
    if cost_code == COST_POWER:
        return float(np.sum(ca * z**cb))
    if cost_code == COST_QUAD:
        return float(z @ Q @ z)
    if cost_code == COST_EXP:
        return float(np.sum(ca * (np.exp(cb * z) - 1.0)))
    raise ValueError(f"unknown cost code {cost_code}")


def _cost_grad(z, cost_code, ca, cb, Q):
    if cost_code == COST_POWER:
        return ca * cb * z ** (cb - 1.0)
    if cost_code == COST_QUAD:
        return 2.0 * (Q @ z)
    if cost_code == COST_EXP:
        return ca * cb * np.exp(cb * z)
    raise ValueError(f"unknown cost code {cost_code}")


def greedy_select(w, active, mat_code, rank, block_of, caps):
    """0/1 vertex maximizing <w, y> over the matroid polytope (active items
    with positive weight, greedily by decreasing weight, ties to lower index)."""
    n = len(w)
    y = np.zeros(n)
    cand = np.flatnonzero(active & (w > 0.0))
    if len(cand) == 0:
        return y
    if mat_code == MAT_FREE:
        y[cand] = 1.0
        return y
    order = cand[np.argsort(-w[cand], kind="stable")]
    if mat_code == MAT_UNIFORM:
        y[order[:rank]] = 1.0
        return y
    if mat_code == MAT_PARTITION:
        used = np.zeros(len(caps), dtype=np.int64)
        for e in order:
            b = block_of[e]
            if used[b] < caps[b]:
                used[b] += 1
                y[e] = 1.0
        return y
    raise ValueError(f"unknown matroid code {mat_code}")


def fw_maximize(v, S, cost_code, ca, cb, Q, mat_code, rank, block_of, caps,
                active, tol, max_iter):
    """Returns (x, value, gap, iterations)."""
    n, d = S.shape
    x = np.zeros(n)
    z = np.zeros(d)
    vx = 0.0
    gap = np.inf
    done = 0
    for it in range(max_iter):
        gz = _cost_grad(z, cost_code, ca, cb, Q)
        w = v - S @ gz
        y = greedy_select(w, active, mat_code, rank, block_of, caps)
        gap = float(w @ (y - x))
        value = vx - _cost_value(z, cost_code, ca, cb, Q)
        if gap <= tol * (1.0 + abs(value)):
            return x, value, max(gap, 0.0), done
        gamma = 2.0 / (it + 2.0)
        x += gamma * (y - x)
        z += gamma * (S.T @ y - z)
        vx += gamma * (float(v @ y) - vx)
        done = it + 1
    value = vx - _cost_value(z, cost_code, ca, cb, Q)
    return x, value, max(gap, 0.0), done
