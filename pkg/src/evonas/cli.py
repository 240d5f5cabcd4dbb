"""Command-line front end.

Subcommands: `search` (one method, one configuration), `ablate` (parameter
sweeps), `bench gen` (write a synthetic benchmark file), `score` (proxy
score for one architecture string), `stats` (t-test / rank correlation on
result files).  Options beat config-file values beat defaults.  On failure
the process exits nonzero after printing one JSON error line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from .batches import SyntheticBatchSpec, load_raw_batch, make_batch
from .cellspace import decode_str, encode_str
from .evolution import ConfigError, SearchConfig
from .experiment import ExperimentConfig, emit_results, run_experiment
from .oracle import SyntheticSpec, gen_synthetic, save_tabular
from .rng import RngStream
from .stats import kendall_tau, welch_ttest
from .tensornet import SkeletonConfig
from .zeroproxy import ProxyParams, score_arch

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="evonas", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", help="JSON config file mirroring ExperimentConfig fields")
        p.add_argument("--method", choices=("gea", "rea", "rs"))
        p.add_argument("--pop-size", type=int, dest="pop_size")
        p.add_argument("--tournament", type=int, dest="tournament_size")
        p.add_argument("--cycles", type=int)
        p.add_argument("--gen-size", type=int, dest="gen_size")
        p.add_argument("--seed", type=int)
        p.add_argument("--runs", type=int, dest="num_runs")
        p.add_argument("--benchmark", help="tabular benchmark JSON file")
        p.add_argument("--batch", help="raw image batch file (CIFAR-10 binary layout)")
        p.add_argument("--batch-count", type=int, dest="batch_count")
        p.add_argument("--out", help="output directory")

    search = sub.add_parser("search", help="run one search configuration")
    add_run_flags(search)

    ablate = sub.add_parser("ablate", help="sweep search parameters")
    add_run_flags(ablate)
    ablate.add_argument(
        "--sweep",
        action="append",
        default=[],
        metavar="PARAM=V1,V2,...",
        help="search field to sweep (repeatable)",
    )

    bench = sub.add_parser("bench", help="benchmark utilities")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    gen = bench_sub.add_parser("gen", help="generate a synthetic benchmark file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise-std", type=float, default=0.0, dest="noise_std")
    gen.add_argument("--tau", type=float, default=1.0, help="target proxy-fitness Kendall tau")
    gen.add_argument("--interaction-scale", type=float, default=0.0, dest="interaction_scale")
    gen.add_argument("--out", required=True, help="output file")

    score = sub.add_parser("score", help="proxy-score one architecture string")
    score.add_argument("arch", help="canonical architecture string")
    score.add_argument("--batch", help="raw image batch file; default: synthetic batch")
    score.add_argument("--batch-count", type=int, default=32, dest="batch_count")
    score.add_argument("--seed", type=int, default=0, help="network init / synthetic batch seed")

    stats = sub.add_parser("stats", help="statistics on result files")
    stats_sub = stats.add_subparsers(dest="stats_command", required=True)
    ttest = stats_sub.add_parser("ttest", help="Welch t-test of final val_acc between two runs")
    ttest.add_argument("summary_a", help="summary.json of sample A")
    ttest.add_argument("summary_b", help="summary.json of sample B")
    tau = stats_sub.add_parser("tau", help="Kendall tau-b between two CSV columns")
    tau.add_argument("csv_file")
    tau.add_argument("col_x")
    tau.add_argument("col_y")
    return top


def _parse_sweep(specs: list) -> tuple:
    def coerce(token: str):
        for cast in (int, float):
            try:
                return cast(token)
            except ValueError:
                continue
        return token

    out = []
    for spec in specs:
        param, sep, values = spec.partition("=")
        if not sep or not values:
            raise ConfigError(f"bad sweep spec {spec!r}, expected PARAM=V1,V2,...")
        out.append((param.replace("-", "_"), [coerce(v) for v in values.split(",")]))
    return tuple(out)


def _experiment_from_args(args) -> ExperimentConfig:
    file_cfg = {}
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text("utf-8"))

    search_fields = dict(file_cfg.get("search", {}))
    for name in ("pop_size", "tournament_size", "cycles", "gen_size", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            search_fields[name] = value
    search = SearchConfig(**search_fields)

    benchmark = args.benchmark
    if benchmark is None:
        source = file_cfg.get("benchmark")
        if isinstance(source, dict):
            benchmark = SyntheticSpec(**source["synthetic"]) if "synthetic" in source else source.get("path")
        else:
            benchmark = source

    batch = args.batch
    batch_count = getattr(args, "batch_count", None)
    if batch is None:
        source = file_cfg.get("batch")
        if isinstance(source, dict):
            if "synthetic" in source:
                batch = SyntheticBatchSpec(**source["synthetic"])
            elif "raw" in source:
                batch = source["raw"]["path"]
                if batch_count is None:
                    batch_count = source["raw"].get("count")
        else:
            batch = source

    sweep = _parse_sweep(getattr(args, "sweep", []) or [])
    if not sweep:
        sweep = tuple((p, list(v)) for p, v in file_cfg.get("sweep", []))

    return ExperimentConfig(
        method=args.method or file_cfg.get("method", "gea"),
        search=search,
        benchmark=benchmark,
        batch=batch,
        batch_count=batch_count if batch_count is not None else file_cfg.get("batch_count", 32),
        skeleton=SkeletonConfig(**file_cfg.get("skeleton", {})),
        proxy=ProxyParams(**file_cfg.get("proxy", {})),
        num_runs=args.num_runs if args.num_runs is not None else file_cfg.get("num_runs", 1),
        sweep=sweep,
        out=args.out or file_cfg.get("out", "results"),
    )


def _cmd_run(args) -> int:
    cfg = _experiment_from_args(args)
    result = run_experiment(cfg)
    curves, summary = emit_results(result)
    print(json.dumps({
        "curves": str(curves),
        "summary": str(summary),
        "rows": [dataclasses.asdict(row) for row in result.rows],
    }, sort_keys=True))
    return 0


def _cmd_bench_gen(args) -> int:
    spec = SyntheticSpec(
        seed=args.seed,
        noise_std=args.noise_std,
        target_proxy_tau=args.tau,
        interaction_scale=args.interaction_scale,
    )
    bench = gen_synthetic(spec)
    save_tabular(bench, args.out)
    vals = [bench.records[a].val_acc for a in bench.records]
    proxies = [bench.synthetic_proxy[a] for a in bench.records]
    print(json.dumps({
        "path": args.out,
        "architectures": len(bench.records),
        "measured_tau": round(kendall_tau(proxies, vals), 6),
    }, sort_keys=True))
    return 0


def _cmd_score(args) -> int:
    arch = decode_str(args.arch)
    if args.batch:
        batch, labels = load_raw_batch(args.batch, args.batch_count)
        skeleton = SkeletonConfig(input_hw=batch.shape[2])
    else:
        batch, labels = make_batch(SyntheticBatchSpec(seed=args.seed))
        skeleton = SkeletonConfig()
    result = score_arch(
        arch, batch, labels, skeleton, ProxyParams(), RngStream(args.seed, ("score-cli",))
    )
    print(json.dumps({
        "arch": encode_str(arch),
        "score": "sentinel" if result.is_sentinel else result.value,
        "per_class": list(result.per_class),
    }, sort_keys=True))
    return 0


def _final_vals(path) -> list:
    doc = json.loads(Path(path).read_text("utf-8"))
    return [run["final_val_acc"] for run in doc["runs"]]


def _cmd_stats(args) -> int:
    if args.stats_command == "ttest":
        a = _final_vals(args.summary_a)
        b = _final_vals(args.summary_b)
        t, p = welch_ttest(a, b)
        print(json.dumps({"t": t, "p": p, "n_a": len(a), "n_b": len(b)}, sort_keys=True))
    else:
        with open(args.csv_file, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or args.col_x not in rows[0] or args.col_y not in rows[0]:
            raise ConfigError(f"columns {args.col_x!r}/{args.col_y!r} not found in {args.csv_file}")
        x = [float(r[args.col_x]) for r in rows]
        y = [float(r[args.col_y]) for r in rows]
        print(json.dumps({"tau": kendall_tau(x, y), "n": len(x)}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command in ("search", "ablate"):
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench_gen(args)
        if args.command == "score":
            return _cmd_score(args)
        return _cmd_stats(args)
    except Exception as exc:  # surface every failure as one parseable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
