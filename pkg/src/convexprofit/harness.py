"""CLI and experiment orchestration: instance generation, one-shot solves,
seeded multi-trial experiments with CSV output, and invariant verification.

Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConvexProfitError
from .instances import (
    GeneratorConfig,
    PreprocessConfig,
    generate,
    instance_from_dict,
    perturb_general_position,
    split_exceptional,
)
from .matroids import fopt
from .offline import solve_constrained, solve_unconstrained
from .online import (
    OnlineConfig,
    reduce_supermodular_to_separable,
    run_algorithm1,
    run_with_preprocessing,
)
from .oracles import brute_force_opt

log = logging.getLogger("convexprofit")

PIPELINES = (
    "offline_unconstrained",
    "offline_constrained",
    "online_unconstrained",
    "online_constrained",
    "reduction",
)


def fnv1a64(ids):
    """64-bit FNV-1a over the id sequence, hex-encoded."""
    h = 0xCBF29CE484222325
    for e in ids:
        for byte in int(e).to_bytes(8, "little", signed=True):
            h ^= byte
            h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


@dataclass
class ExperimentSpec:
    generator: GeneratorConfig
    trials: int = 10
    seed: int = 0
    pipeline: str = "online_unconstrained"
    oracle: bool = True
    eps: float = 1e-6
    eta: float = 10.0
    noise_delta: float = 1e-6
    beta: float = 3.0
    shared_instances: int = 0  # >0: cycle this many instances across trials

    @classmethod
    def from_dict(cls, data):
        gen = GeneratorConfig(**data.get("generator", {}))
        fields = {k: v for k, v in data.items() if k != "generator"}
        spec = cls(generator=gen, **fields)
        if spec.trials < 1:
            raise ValueError("trials must be >= 1")
        if spec.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {spec.pipeline!r}")
        return spec


def _preprocess(inst, spec, seed):
    inst = perturb_general_position(inst, delta=spec.noise_delta, seed=seed)
    core, _ = split_exceptional(inst)
    return core


def run_trial(spec, trial):
    """One seeded trial; returns a CSV row dict."""
    seed = spec.seed + trial
    inst_seed = (
        spec.seed + (trial % spec.shared_instances)
        if spec.shared_instances
        else seed
    )
    inst = generate(spec.generator, seed=inst_seed)
    inst = _preprocess(inst, spec, seed=inst_seed)

    rng = np.random.default_rng(seed)
    order = tuple(inst.items[i].id for i in rng.permutation(inst.n))
    config = OnlineConfig(eps_tau=spec.eps)

    mu_tau = ""
    sample_size = ""
    branch = spec.pipeline
    if spec.pipeline == "offline_unconstrained":
        profit = solve_unconstrained(inst, eps=spec.eps).profit
    elif spec.pipeline == "offline_constrained":
        profit = solve_constrained(inst, eps=spec.eps).profit
    elif spec.pipeline in ("online_unconstrained", "online_constrained"):
        run = run_algorithm1(
            inst, order, seed=seed, config=config,
            constrained=spec.pipeline == "online_constrained",
        )
        profit = run.profit
        mu_tau = run.mu.tau if run.mu is not None else ""
        sample_size = run.sample_size
        branch = run.branch
    elif spec.pipeline == "reduction":
        run = reduce_supermodular_to_separable(
            inst, beta=spec.beta, seed=seed, config=config
        )
        profit = run.profit
        sample_size = run.sample_size
        branch = run.branch
    else:
        raise ValueError(f"unknown pipeline {spec.pipeline!r}")

    if spec.oracle and inst.n <= 20:
        baseline = max(brute_force_opt(inst).value,
                       fopt(inst, tol=1e-8, max_iter=50_000).value)
        baseline_kind = "fopt"
    else:
        baseline = fopt(inst).value
        baseline_kind = "fopt_fw"
    ratio = profit / baseline if baseline > 0 else ""
    return {
        "seed": seed,
        "order_hash": fnv1a64(order),
        "pipeline": spec.pipeline,
        "profit": f"{profit:.12g}",
        "baseline": f"{baseline:.12g}",
        "baseline_kind": baseline_kind,
        "ratio": f"{ratio:.12g}" if ratio != "" else "",
        "mu_tau": f"{mu_tau:.12g}" if mu_tau != "" else "",
        "sample_size": sample_size,
        "branch": branch,
    }


CSV_COLUMNS = [
    "seed", "order_hash", "pipeline", "profit", "baseline", "baseline_kind",
    "ratio", "mu_tau", "sample_size", "branch",
]


def run_experiment(spec, workers=1):
    trials = range(spec.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_trial, [spec] * spec.trials, trials))
    else:
        rows = [run_trial(spec, t) for t in trials]
    rows.sort(key=lambda r: r["seed"])
    ratios = [float(r["ratio"]) for r in rows if r["ratio"] != ""]
    summary = {
        "trials": spec.trials,
        "pipeline": spec.pipeline,
        "mean_ratio": statistics.fmean(ratios) if ratios else None,
        "median_ratio": statistics.median(ratios) if ratios else None,
        "min_ratio": min(ratios) if ratios else None,
        "branch_frequencies": {
            b: sum(1 for r in rows if r["branch"] == b) / len(rows)
            for b in sorted({r["branch"] for r in rows})
        },
    }
    return rows, summary


def write_results(rows, summary, out_prefix):
    csv_path = f"{out_prefix}.csv"
    json_path = f"{out_prefix}.summary.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(1) from None


def build_parser():
    parser = _Parser(prog="convexprofit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance JSON file")
    gen.add_argument("--n", type=int, default=10)
    gen.add_argument("--d", type=int, default=1)
    gen.add_argument("--v-max", type=float, default=3.0)
    gen.add_argument("--cost", default="separable_power",
                     choices=["separable_power", "separable_exp",
                              "supermodular_quadratic"])
    gen.add_argument("--matroid", default="free",
                     choices=["free", "uniform", "partition"])
    gen.add_argument("--rank", type=int, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    for name in ("solve-offline", "solve-online"):
        p = sub.add_parser(name, help=f"run one {name.split('-')[1]} pipeline")
        p.add_argument("--instance", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--eps", type=float, default=1e-6)
        p.add_argument("--eta", type=float, default=10.0)
        p.add_argument("--out", default=None)
        if name == "solve-offline":
            p.add_argument("--pipeline", default="offline_unconstrained",
                           choices=["offline_unconstrained",
                                    "offline_constrained"])
        else:
            p.add_argument("--pipeline", default="online_unconstrained",
                           choices=["online_unconstrained",
                                    "online_constrained", "reduction"])
            p.add_argument("--beta", type=float, default=3.0)

    exp = sub.add_parser("experiment", help="run a seeded experiment spec")
    exp.add_argument("--spec", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--workers", type=int, default=1)
    exp.add_argument("--trials", type=int, default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--oracle", choices=["on", "off"], default=None)

    ver = sub.add_parser("verify", help="run the invariant suites")
    ver.add_argument("--level", default="quick", choices=["quick", "full"])
    return parser


def _cmd_gen(args):
    config = GeneratorConfig(
        n=args.n, d=args.d, v_max=args.v_max, cost_kind=args.cost,
        matroid_kind=args.matroid, matroid_rank=args.rank,
    )
    inst = generate(config, seed=args.seed)
    with open(args.out, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s", args.out)
    return 0


def _load_instance(path):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def _emit(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve_offline(args):
    inst = _load_instance(args.instance)
    pre = PreprocessConfig(eta=args.eta)
    inst = perturb_general_position(inst, delta=pre.noise_delta, seed=args.seed)
    inst, _ = split_exceptional(inst)
    if args.pipeline == "offline_unconstrained":
        sol = solve_unconstrained(inst, eps=args.eps)
    else:
        sol = solve_constrained(inst, eps=args.eps)
    _emit(sol.to_dict(), args.out)
    return 0


def _cmd_solve_online(args):
    inst = _load_instance(args.instance)
    config = OnlineConfig(eps_tau=args.eps)
    pre = PreprocessConfig(eta=args.eta)
    if args.pipeline == "reduction":
        run = reduce_supermodular_to_separable(inst, beta=args.beta,
                                               seed=args.seed, config=config)
    else:
        run = run_with_preprocessing(inst, pre, seed=args.seed, config=config)
    _emit(run.to_dict(seed=args.seed), args.out)
    return 0


def _cmd_experiment(args):
    with open(args.spec) as fh:
        data = json.load(fh)
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    if args.oracle is not None:
        data["oracle"] = args.oracle == "on"
    spec = ExperimentSpec.from_dict(data)
    rows, summary = run_experiment(spec, workers=args.workers)
    csv_path, json_path = write_results(rows, summary, args.out)
    log.info("wrote %s and %s", csv_path, json_path)
    return 0


def _cmd_verify(args):
    from .verify import run_verification

    results = run_verification(level=args.level)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("CS_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "gen": _cmd_gen,
            "solve-offline": _cmd_solve_offline,
            "solve-online": _cmd_solve_online,
            "experiment": _cmd_experiment,
            "verify": _cmd_verify,
        }[args.command]
        return handler(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            ConvexProfitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, (OSError, json.JSONDecodeError, ConvexProfitError)):
            return 3
        return 1


if __name__ == "__main__":
    sys.exit(main())
