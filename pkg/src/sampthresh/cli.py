"""Command-line interface.

One subcommand per library surface: calibrate, run, hh, quantile, verify,
experiment, gen.  Machine-readable output (JSON on stdout, CSV to --out);
human-readable progress goes to stderr.  Every randomized subcommand
requires an explicit --seed: there are no silent time-based seeds.  Exit
codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .calibration import (
    c_alpha,
    calibrate,
    delta_bound_exact,
    log_delta_bound_exact,
)
from .datasets import gen_binomial, gen_geometric, ingest_corpus, tokenize, true_histogram
from .harness import (
    ExperimentConfig,
    aggregate,
    run_experiment,
    write_aggregates_json,
    write_records_csv,
)
from .mechanism import Dataset, estimate_frequencies, run_mechanism
from .oracles import dp_verify
from .quantiles import binary_search_quantile, hierarchical_quantile
from .sampling import CohortConfig
from .seeding import derive_seed
from .trie_hh import TrieConfig, flat_heavy_hitters, run_triehh

SCHEMA_VERSION = 1
OUT_DIR_ENV = "SAMPTHRESH_OUT_DIR"


def _emit_json(payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    print(json.dumps(payload, sort_keys=True))


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cmd_calibrate(args) -> int:
    params = calibrate(args.epsilon, args.delta, args.alpha)
    payload = {
        "epsilon": params.epsilon,
        "delta": params.delta,
        "alpha": params.alpha,
        "p_s": params.p_s,
        "tau": params.tau,
        "q": params.q,
        "c_alpha": params.c_alpha,
        "delta_bound_exact": delta_bound_exact(params.epsilon, params.p_s, params.tau),
        "log_delta_bound_exact": log_delta_bound_exact(
            params.epsilon, params.p_s, params.tau
        ),
        "delta_bound_simplified": math.exp(-params.tau * params.c_alpha),
    }
    _emit_json(payload)
    _info(
        f"calibrated p_s={params.p_s:.6f} tau={params.tau} "
        f"(delta bound {payload['delta_bound_exact']:.3g} <= target {params.delta:.3g})"
    )
    return 0


def _build_bucket_dataset(args, seed: int) -> Dataset:
    if args.dataset == "binomial":
        return gen_binomial(args.n, args.B, seed)
    if args.dataset == "geometric":
        return gen_geometric(args.n, args.B, seed)
    dataset, _ = ingest_corpus(args.corpus, args.B)
    return dataset


def _cmd_run(args) -> int:
    params = calibrate(args.epsilon, args.delta, args.alpha)
    data_seed = derive_seed(args.seed, 0)
    mech_seed = derive_seed(args.seed, 1)
    dataset = _build_bucket_dataset(args, data_seed)
    cohort = None
    if args.cohort:
        m = max(1, round(params.p_s * dataset.n))
        cohort = CohortConfig(n=dataset.n, m=m, c=args.cohort_c)
    hist = run_mechanism(dataset, params, mech_seed, cohort=cohort)
    est = estimate_frequencies(hist, dataset.n, params.p_s)
    payload = {
        "dataset": args.dataset,
        "n": dataset.n,
        "B": dataset.B,
        "epsilon": params.epsilon,
        "delta": params.delta,
        "p_s": params.p_s,
        "tau": params.tau,
        "cohort": bool(args.cohort),
        "histogram": {str(b): c for b, c in sorted(hist.counts.items())},
        "frequencies": {str(b): f for b, f in sorted(est.estimates.items())},
    }
    _emit_json(payload)
    _info(f"released {len(hist.counts)} of {dataset.B} buckets at tau={params.tau}")
    return 0


def _read_string_items(args) -> Dataset:
    if args.corpus:
        with open(args.corpus, encoding="utf-8") as fh:
            words = tokenize(fh.read())
        return Dataset(items=tuple(words))
    with open(args.input, encoding="utf-8") as fh:
        items = tuple(line.strip() for line in fh if line.strip())
    return Dataset(items=items)


def _cmd_hh(args) -> int:
    params = calibrate(args.epsilon, args.delta, args.alpha)
    dataset = _read_string_items(args)
    if args.mode == "flat":
        hist = flat_heavy_hitters(dataset, params, args.seed)
        payload = {
            "mode": "flat",
            "n": dataset.n,
            "heavy_hitters": {str(k): v for k, v in sorted(hist.counts.items())},
            "budget": {"epsilon": params.epsilon, "delta": params.delta},
        }
        _emit_json(payload)
        _info(f"flat heavy hitters: {len(hist.counts)} items at tau={params.tau}")
        return 0
    cfg = TrieConfig(
        L=args.L,
        beta=args.beta,
        params=params,
        restricted=not args.unrestricted,
        alphabet=args.alphabet,
    )
    trie = run_triehh(dataset, cfg, args.seed)
    payload = {
        "mode": "trie",
        "n": dataset.n,
        "L": cfg.L,
        "beta": cfg.beta,
        "restricted": cfg.restricted,
        "levels": [dict(sorted(lvl.items())) for lvl in trie.levels],
        "budget": {
            "per_level": {"epsilon": params.epsilon, "delta": params.delta},
            "basic": {"epsilon": trie.budget.basic[0], "delta": trie.budget.basic[1]},
            "advanced": None
            if trie.budget.advanced is None
            else {"epsilon": trie.budget.advanced[0], "delta": trie.budget.advanced[1]},
        },
    }
    _emit_json(payload)
    _info(f"trie built: {[len(l) for l in trie.levels]} nodes per level")
    return 0


def _cmd_quantile(args) -> int:
    params = calibrate(args.epsilon, args.delta, args.alpha)
    if args.values:
        values = np.loadtxt(args.values, dtype=np.float64, ndmin=1)
        dataset = Dataset(items=values)
    else:
        rng = np.random.default_rng(derive_seed(args.seed, 0))
        dataset = Dataset(items=rng.random(args.uniform_n))
    query_seed = derive_seed(args.seed, 1)
    if args.method == "search":
        result = binary_search_quantile(dataset, args.phi, args.h, params, query_seed)
    else:
        cfg = TrieConfig(L=args.L, beta=args.beta, params=params)
        trie = run_triehh(dataset, cfg, query_seed)
        result = hierarchical_quantile(trie, args.phi)
    payload = {
        "method": result.method,
        "phi": result.phi,
        "value": result.value,
        "resolution": result.resolution,
        "rank_error_bound": result.rank_error_bound,
        "budget": {"epsilon": result.epsilon_spent, "delta": result.delta_spent},
    }
    _emit_json(payload)
    _info(f"phi={args.phi} -> value={result.value:.6f} ({result.method})")
    return 0


def _cmd_verify(args) -> int:
    eps_grid = [float(tok) for tok in args.eps_grid.split(",") if tok]
    if not eps_grid:
        raise ValueError("empty epsilon grid")
    D = [0] * args.n
    D_prime = [0] * (args.n - 1) + [1]
    rows = dp_verify(D, D_prime, args.p_s, args.tau, eps_grid)
    out = sys.stdout
    close = False
    if args.out:
        out = open(args.out, "w", newline="", encoding="utf-8")
        close = True
    try:
        writer = csv.writer(out)
        writer.writerow(["epsilon", "observed_delta", "bound_delta", "within_bound"])
        for row in rows:
            writer.writerow(
                [
                    row.epsilon,
                    row.observed_delta,
                    "" if row.bound_delta is None else row.bound_delta,
                    "" if row.within_bound is None else row.within_bound,
                ]
            )
    finally:
        if close:
            out.close()
    violations = [r for r in rows if r.within_bound is False]
    _info(
        f"verified {len(rows)} grid points on n={args.n}: "
        f"{'ALL WITHIN BOUND' if not violations else f'{len(violations)} VIOLATIONS'}"
    )
    return 0 if not violations else 1


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig(
            **{**cfg.__dict__, "base_seed": args.seed}
        )
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out_dir, exist_ok=True)
    records, aggregates = run_experiment(cfg)
    csv_path = os.path.join(out_dir, "metrics.csv")
    json_path = os.path.join(out_dir, "aggregates.json")
    write_records_csv(records, csv_path)
    write_aggregates_json(aggregates, json_path)
    _emit_json({"records": len(records), "csv": csv_path, "aggregates": json_path})
    _info(f"wrote {len(records)} records to {csv_path}")
    return 0


def _cmd_gen(args) -> int:
    if args.kind == "binomial":
        dataset = gen_binomial(args.n, args.B, args.seed)
    else:
        dataset = gen_geometric(args.n, args.B, args.seed)
    lines = "\n".join(str(int(x)) for x in dataset.items)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(lines + "\n")
        _info(f"wrote {dataset.n} items to {args.out}")
    else:
        print(lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sampthresh",
        description="Sample-and-threshold differentially private histograms",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="derive (p_s, tau) from (epsilon, delta, alpha)")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("run", help="run the mechanism once on a generated dataset")
    p.add_argument("--dataset", choices=["binomial", "geometric", "corpus"], required=True)
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--B", type=int, default=256)
    p.add_argument("--corpus", help="text file for --dataset corpus")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-8)
    p.add_argument("--alpha", type=float, default=1.0 / 6.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cohort", action="store_true", help="fixed-size cohort sampling")
    p.add_argument("--cohort-c", type=float, default=10.0)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("hh", help="heavy hitters (trie or flat)")
    p.add_argument("--mode", choices=["trie", "flat"], default="trie")
    p.add_argument("--input", help="newline-delimited item strings")
    p.add_argument("--corpus", help="text corpus; words become items")
    p.add_argument("--L", type=int, default=3)
    p.add_argument("--beta", type=int, default=26)
    p.add_argument("--alphabet", help="explicit symbol alphabet (default digits+letters)")
    p.add_argument("--unrestricted", action="store_true")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-8)
    p.add_argument("--alpha", type=float, default=1.0 / 6.0)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_hh)

    p = sub.add_parser("quantile", help="single quantile query")
    p.add_argument("--method", choices=["search", "trie"], required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--h", type=int, default=10, help="binary search steps")
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--beta", type=int, default=2)
    p.add_argument("--values", help="newline-delimited reals in [0, 1]")
    p.add_argument("--uniform-n", type=int, default=100000, help="size of synthetic uniform data")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-8)
    p.add_argument("--alpha", type=float, default=1.0 / 6.0)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_quantile)

    p = sub.add_parser("verify", help="brute-force DP certification on a tiny worst-case pair")
    p.add_argument("--n", type=int, required=True, help="population size (<= 20)")
    p.add_argument("--p-s", dest="p_s", type=float, required=True)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--eps-grid", required=True, help="comma-separated epsilons")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("experiment", help="run a configured sweep")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    p.add_argument("--seed", type=int, help="override the config base_seed")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--kind", choices=["binomial", "geometric"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "hh" and not (args.input or args.corpus):
        parser.error("hh requires --input or --corpus")
    if args.command == "run" and args.dataset == "corpus" and not args.corpus:
        parser.error("--dataset corpus requires --corpus PATH")
    try:
        return args.func(args)
    except Exception as exc:  # runtime errors exit 1, usage errors exit 2 above
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
