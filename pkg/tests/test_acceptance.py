"""Acceptance gate: ten end-to-end criteria with one pass/fail line each.

Criteria 7 and 10 compare against reference numbers pinned in
tests/data/golden.json (regenerate with `python tests/make_golden.py` on a
reference build).
"""

import itertools
import json
import math
import pathlib
import sys
import time

import numpy as np
import pytest

import convexprofit as cp
from convexprofit import verify
from convexprofit.classifiers import thresholds
from convexprofit.harness import ExperimentSpec, run_experiment
from convexprofit.oracles import brute_force_fopt

GOLDEN_PATH = pathlib.Path(__file__).parent / "data" / "golden.json"

pytestmark = pytest.mark.acceptance


_CAPSYS = None


@pytest.fixture(autouse=True)
def _route_reports_past_capture(capsys):
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def report(ok, num, msg):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {msg}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print(line, flush=True)
    else:
        print(line, file=sys.__stderr__, flush=True)
    assert ok, line


def load_golden():
    return json.loads(GOLDEN_PATH.read_text())


# ---------------------------------------------------------------------------
# shared experiment configuration (also used by make_golden.py)


def benchmark_cells():
    """The pinned seeded benchmark grid: (cell name, experiment spec)."""
    cells = []
    for d in (1, 2, 3):
        for pipeline in ("offline_unconstrained", "offline_constrained",
                         "online_unconstrained", "online_constrained",
                         "reduction"):
            constrained = "unconstrained" not in pipeline
            generator = {
                "n": 12,
                "d": d,
                "cost_kind": "supermodular_quadratic"
                if pipeline == "reduction" else "separable_power",
                "matroid_kind": "uniform" if constrained else "free",
                "matroid_rank": 4 if constrained else None,
            }
            spec = ExperimentSpec.from_dict({
                "generator": generator,
                "trials": 40,
                "seed": 1000 * d,
                "pipeline": pipeline,
                "oracle": True,
            })
            cells.append((f"d={d}|{pipeline}", spec))
    return cells


def online_trial_block():
    """The shared >= 1000-trial online run behind criteria 6 and 7."""
    instances = []
    for d in (1, 2, 3):
        for k in range(10):
            kind = "free" if k % 2 == 0 else "uniform"
            cfg = cp.GeneratorConfig(n=60, d=d, cost_kind="separable_power",
                                     matroid_kind=kind,
                                     matroid_rank=6 if kind == "uniform" else None)
            inst = cp.generate(cfg, seed=7000 + 100 * d + k)
            inst = cp.perturb_general_position(inst, seed=k)
            inst, _ = cp.split_exceptional(inst)
            instances.append((d, inst))
    return instances


@pytest.fixture(scope="module")
def online_runs():
    """1020 seeded online trials with per-trial invariant data."""
    results = []
    for d, inst in online_trial_block():
        lam_star = cp.find_good_classifier(inst).classifier.lam
        total = cp.fopt(inst).value
        kept_cache = {}
        ids = [e.id for e in inst.items]
        for t in range(34):
            rng = np.random.default_rng(9000 + t)
            order = [int(e) for e in rng.permutation(ids)]
            run = cp.run_algorithm1(inst, order, seed=t,
                                    lambda_star=lam_star)
            th = thresholds(inst, run.mu.lam)
            post = order[run.sample_size:]
            filtered = [e for e in post
                        if inst.item(e).value > th[inst._pos[e]]]
            kept = frozenset(e for e in ids
                             if inst.item(e).value >= th[inst._pos[e]])
            if kept not in kept_cache:
                kept_cache[kept] = cp.fopt(inst, restrict=kept).value \
                    if kept else 0.0
            results.append({
                "d": d,
                "inst": inst,
                "run": run,
                "filtered": filtered,
                "post": post,
                "th": th,
                "fopt": total,
                "fopt_kept": kept_cache[kept],
            })
    return results


# ---------------------------------------------------------------------------
# 1. duality suite


def test_criterion_1_duality_suite():
    t0 = time.perf_counter()
    worst = []
    for model in verify.standard_models():
        for check in (verify.check_fenchel_young, verify.check_linearization,
                      verify.check_double_dual,
                      verify.check_conjugate_monotone,
                      verify.check_dual_marginal_commute,
                      verify.check_subadditive_coords):
            ok, detail = check(model, count=500)
            if not ok:
                worst.append(f"{type(model).__name__}: {detail}")
    elapsed = time.perf_counter() - t0
    ok = not worst and elapsed < 30.0
    report(ok, 1,
           f"duality suite over 500 points/model in {elapsed:.1f}s"
           + (f"; failures: {worst}" if worst else ""))


# ---------------------------------------------------------------------------
# 2. supermodularity suite


def test_criterion_2_supermodularity_suite():
    bad = []
    rng = np.random.default_rng(2)
    for k in range(50):
        n = int(rng.integers(4, 11))
        d = int(rng.integers(1, 4))
        kind = ["separable_power", "separable_exp",
                "supermodular_quadratic"][k % 3]
        inst = cp.generate(cp.GeneratorConfig(n=n, d=d, cost_kind=kind),
                           seed=200 + k)
        if not cp.check_supermodular(inst.cost, samples=100, seed=k).ok:
            bad.append(f"continuous #{k}")
        if not verify.check_discrete_supermodular(inst)[0]:
            bad.append(f"discrete #{k}")
        if not verify.check_superadditive(inst.cost, count=100, seed=k)[0]:
            bad.append(f"superadditive #{k}")
        if not verify.check_profit_subadditive(inst)[0]:
            bad.append(f"subadditive #{k}")
    report(not bad, 2, f"supermodularity suite on 50 instances"
           + (f"; failures: {bad}" if bad else ""))


# ---------------------------------------------------------------------------
# 3/4. offline guarantees at desk scale


def _offline_guarantee(solver, matroid_kinds, denom, num):
    eps = 1e-6
    t0 = time.perf_counter()
    failures = 0
    count = 0
    rng = np.random.default_rng(34)
    while count < 200:
        d = int(rng.integers(1, 4))
        n = int(rng.integers(6, 13))
        kind = matroid_kinds[count % len(matroid_kinds)]
        cfg = cp.GeneratorConfig(
            n=n, d=d, matroid_kind=kind,
            matroid_rank=max(2, n // 3) if kind == "uniform" else None)
        inst = cp.generate(cfg, seed=3000 + count)
        inst = cp.perturb_general_position(inst, seed=count)
        inst, _ = cp.split_exceptional(inst)
        if inst.n == 0:
            continue
        count += 1
        sol = solver(inst, eps=eps)
        bound = brute_force_fopt(inst).value / denom(d) \
            - 2 * d * eps - 1e-5
        if sol.profit < bound:
            failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 300.0
    report(ok, num, f"{count} instances, {failures} failures, {elapsed:.0f}s")


def test_criterion_3_unconstrained_guarantee():
    _offline_guarantee(cp.solve_unconstrained, ["free"],
                       lambda d: d + 1, 3)


def test_criterion_4_constrained_guarantee():
    _offline_guarantee(cp.solve_constrained, ["uniform", "partition"],
                       lambda d: 2 * d + 1, 4)


# ---------------------------------------------------------------------------
# 5. the non-negativized profit


def test_criterion_5_pi_plus_suite():
    checked = 0
    bad = []
    seed = 0
    while checked < 50 and seed < 400:
        seed += 1
        d = 1 + seed % 3
        inst = cp.generate(cp.GeneratorConfig(n=9, d=d,
                                              matroid_kind="uniform",
                                              matroid_rank=3),
                           seed=5000 + seed)
        inst = cp.perturb_general_position(inst, seed=seed)
        try:
            lam = cp.find_good_classifier(inst).classifier.lam
        except cp.NoGoodClassifier:
            continue
        universe = sorted(cp.pick(inst, lam).open_picked)
        if len(universe) > 12:
            continue
        checked += 1
        pp = cp.build_pi_plus(inst, lam)
        vals = {}
        for r in range(len(universe) + 1):
            for sub in itertools.combinations(universe, r):
                vals[frozenset(sub)] = pp.value(frozenset(sub))
        if min(vals.values()) < -1e-9:
            bad.append(f"negative @{seed}")
        for sub, v in vals.items():
            for e in universe:
                if e in sub:
                    continue
                if vals[sub | {e}] < v - 1e-7:
                    bad.append(f"non-monotone @{seed}")
                for f in universe:
                    if f == e or f in sub:
                        continue
                    if vals[sub | {e, f}] - vals[sub | {f}] > \
                            vals[sub | {e}] - v + 1e-7:
                        bad.append(f"non-submodular @{seed}")
            if inst.matroid.is_independent(sub) and \
                    abs(v - inst.profit(sub)) > 1e-12 * (1 + abs(v)) + 1e-12:
                bad.append(f"mismatch @{seed}")
    ok = checked >= 50 and not bad
    report(ok, 5, f"{checked} instances exhaustively checked"
           + (f"; failures: {sorted(set(bad))[:4]}" if bad else ""))


# ---------------------------------------------------------------------------
# 6/7. online invariants and the threshold-quality report


def test_criterion_6_online_invariants(online_runs):
    bad = 0
    for r in online_runs:
        inst, run = r["inst"], r["run"]
        ok = (
            inst.matroid.is_independent(run.selected)
            and run.profit >= 0.0
            and run.selected <= set(r["filtered"])
            and all(inst.item(e).value > r["th"][inst._pos[e]]
                    for e in r["filtered"])
            and all(inst.item(e).value <= r["th"][inst._pos[e]]
                    for e in set(r["post"]) - set(r["filtered"]))
            and run.diagnostics.get("guard_violations", 0) == 0
        )
        bad += not ok
    report(bad == 0, 6,
           f"{len(online_runs)} trials, {bad} invariant violations")


def test_criterion_7_goldilocks_report(online_runs):
    mu_ok = [r["run"].diagnostics["mu_ge_lambda_star"] for r in online_runs]
    kept_ok = [r["fopt_kept"] >= r["fopt"] / (48 * r["d"]) - 1e-9
               for r in online_runs]
    freq_mu = sum(mu_ok) / len(mu_ok)
    freq_kept = sum(kept_ok) / len(kept_ok)
    pinned = load_golden()["goldilocks_mu_frequency"]
    ok = freq_mu > 0.5 and abs(freq_mu - pinned) <= 0.10
    report(ok, 7,
           f"freq(mu >= lambda*) = {freq_mu:.3f} (pinned {pinned:.3f}), "
           f"freq(kept fraction) = {freq_kept:.3f}")


# ---------------------------------------------------------------------------
# 8. single secretary


def test_criterion_8_single_secretary():
    g = cp.SeparablePowerCost([1.0], [2.0])
    inst = cp.Instance([cp.Item(i, v, [0.0]) for i, v in
                        enumerate([1.0, 2.0, 3.0])], g,
                       cp.FreeMatroid([0, 1, 2]))
    wins = sum(
        cp.single_secretary(list(p), lambda e: inst.profit({e}),
                            sample_size=1) == 2
        for p in itertools.permutations([0, 1, 2]))
    exact_half = wins / 6 == 0.5

    rng = np.random.default_rng(8)
    profits = {e: float(rng.uniform(0.1, 5.0)) for e in range(50)}
    best = max(profits, key=profits.get)
    mc = sum(
        cp.single_secretary([int(x) for x in rng.permutation(50)],
                            profits.__getitem__) == best
        for _ in range(10_000)) / 10_000
    ok = exact_half and mc >= 0.33
    report(ok, 8, f"exhaustive 3-item success {wins}/6, "
           f"Monte-Carlo n=50 success {mc:.3f}")


# ---------------------------------------------------------------------------
# 9. supermodular-to-separable reduction


def test_criterion_9_reduction_suite():
    bad = []
    rng = np.random.default_rng(9)
    for d in (2, 3):
        off = rng.uniform(0.0, 0.3, size=(d, d))
        q = 0.5 * (off + off.T)
        np.fill_diagonal(q, rng.uniform(0.8, 1.2, size=d))
        model = cp.SupermodularQuadraticCost(q)
        bar = cp.separable_surrogate(model)
        for _ in range(500):
            y = rng.uniform(0.0, 2.0, size=d)
            lower = sum(model.marginal(i, y[i]) for i in range(d))
            if not (lower <= model.value(y) + 1e-9
                    <= bar.value(y) + 2e-9):
                bad.append("sandwich")

    beta = 3.0
    orig, surr = [], []
    p_ok = True
    for t in range(500):
        d = 2 + t % 2
        inst = cp.generate(
            cp.GeneratorConfig(n=12, d=d, cost_kind="supermodular_quadratic",
                               matroid_kind="uniform", matroid_rank=4),
            seed=9000 + t)
        run = cp.reduce_supermodular_to_separable(inst, beta=beta, seed=t)
        if run.diagnostics["branch_probability"] != \
                beta / (beta + 2.0 * math.e * d):
            p_ok = False
        if run.profit < -1e-12 or not inst.matroid.is_independent(run.selected):
            bad.append("run")
        if "surrogate_profit" in run.diagnostics:
            orig.append(run.profit)
            surr.append(run.diagnostics["surrogate_profit"])
    mean_ok = np.mean(orig) >= np.mean(surr) - 1e-12
    ok = not bad and p_ok and mean_ok
    report(ok, 9,
           f"sandwich + branch prob exact; mean original {np.mean(orig):.3f}"
           f" >= mean surrogate {np.mean(surr):.3f} over {len(orig)} runs"
           + (f"; failures: {sorted(set(bad))}" if bad else ""))


# ---------------------------------------------------------------------------
# 10. competitive-ratio regression against the golden file


def test_criterion_10_ratio_regression():
    golden = load_golden()["cells"]
    drifts = []
    for name, spec in benchmark_cells():
        _, summary = run_experiment(spec)
        mean = summary["mean_ratio"]
        ref = golden[name]
        drift = abs(mean - ref) / max(abs(ref), 1e-12)
        drifts.append((name, drift))
    worst = max(drifts, key=lambda x: x[1])
    ok = worst[1] <= 0.15
    report(ok, 10,
           f"{len(drifts)} cells, worst drift {worst[1]:.1%} at {worst[0]}")
