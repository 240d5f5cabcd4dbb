"""Multi-seed experiment runner: sweeps, summary statistics, file emission.

An experiment runs `num_runs` searches per sweep point, each with a seed
derived from the master seed and the run index only, so experiments that
differ in method or swept parameter stay seed-paired.  Results land in two
files: `curves.csv` with per-run best-so-far trajectories and
`summary.json` with per-run finals and aggregate rows.  Both files are
byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .batches import SyntheticBatchSpec, load_raw_batch, make_batch
from .cellspace import ArchEncoding, encode_str
from .evolution import (
    ConfigError,
    SearchConfig,
    Trajectory,
    run_random_search,
    run_search,
)
from .oracle import Benchmark, SyntheticSpec, best_of, gen_synthetic, load_tabular
from .rng import RngStream, derive_seed
from .stats import mean_std
from .tensornet import SkeletonConfig
from .zeroproxy import ProxyParams, ProxyScore, score_arch

__all__ = [
    "ExperimentConfig",
    "SummaryRow",
    "RunResult",
    "ExperimentResult",
    "run_experiment",
    "emit_results",
]

_METHODS = ("gea", "rea", "rs")
_SEARCH_FIELDS = {f.name for f in dataclasses.fields(SearchConfig)}


@dataclass
class ExperimentConfig:
    """One experiment: a method, its knobs, data sources and replication.

    `benchmark` is either a tabular-file path or a SyntheticSpec.  `batch`
    selects how guided runs score architectures: a SyntheticBatchSpec or a
    raw-image file path scores real networks; None falls back to the
    benchmark's bundled proxy map.  `sweep` lists (search-field, values)
    pairs, each swept one at a time from the base search config.
    """

    method: str = "gea"
    search: SearchConfig = field(default_factory=SearchConfig)
    benchmark: object = None
    batch: object = None
    batch_count: int = 32
    skeleton: SkeletonConfig = field(default_factory=SkeletonConfig)
    proxy: ProxyParams = field(default_factory=ProxyParams)
    num_runs: int = 1
    sweep: tuple = ()
    out: str = "results"

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.num_runs < 1:
            raise ConfigError("num_runs must be >= 1")
        if self.benchmark is None:
            raise ConfigError("an experiment needs a benchmark source (path or SyntheticSpec)")
        for param, values in self.sweep:
            if param not in _SEARCH_FIELDS:
                raise ConfigError(f"sweep parameter {param!r} is not a search field")
            if not values:
                raise ConfigError(f"sweep over {param!r} has no values")


@dataclass(frozen=True)
class SummaryRow:
    label: str
    mean_val_acc: float
    std_val_acc: float
    mean_test_acc: float
    std_test_acc: float
    mean_time_s: float
    mean_regret: float


@dataclass
class RunResult:
    label: str
    run_id: int
    seed: int
    final_arch: ArchEncoding
    final_val_acc: float
    final_test_acc: float
    regret: float
    simulated_time_s: float
    n_proxy_evals: int
    curve: list  # (cycle, best_so_far, simulated_time_s)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reference_arch: ArchEncoding
    reference_val_acc: float
    runs: list
    rows: list


def _resolve_benchmark(cfg: ExperimentConfig) -> Benchmark:
    if isinstance(cfg.benchmark, Benchmark):
        return cfg.benchmark
    if isinstance(cfg.benchmark, SyntheticSpec):
        return gen_synthetic(cfg.benchmark)
    return load_tabular(cfg.benchmark)


def _resolve_scorer(cfg: ExperimentConfig, bench: Benchmark):
    """Scorer for guided runs; None for baselines that never score."""
    if cfg.method != "gea":
        return None
    if cfg.batch is not None:
        if isinstance(cfg.batch, SyntheticBatchSpec):
            batch, labels = make_batch(cfg.batch)
        else:
            batch, labels = load_raw_batch(cfg.batch, cfg.batch_count)
        skeleton, params = cfg.skeleton, cfg.proxy
        return lambda arch, stream: score_arch(arch, batch, labels, skeleton, params, stream)
    if bench.synthetic_proxy is not None:
        proxy_map = bench.synthetic_proxy
        return lambda arch, stream: ProxyScore(value=proxy_map[arch])
    raise ConfigError("guided method needs a batch source or a benchmark with a proxy map")


def _search_cfg(cfg: ExperimentConfig, override: dict, seed: int) -> SearchConfig:
    fields = dataclasses.asdict(cfg.search)
    fields.update(override)
    fields["seed"] = seed
    if cfg.method == "gea":
        fields["guided"] = True
    elif cfg.method == "rea":
        # baseline aging evolution: no guidance, single child, unfiltered init
        fields.update(guided=False, gen_size=1, init_candidates=fields["pop_size"])
    return SearchConfig(**fields)


def _curve(traj: Trajectory) -> list:
    """Best-so-far points: one init point (cycle 0), then one per cycle.

    Random-search trajectories carry no population; every sample becomes
    its own point."""
    if not traj.final_population:
        return [(e.event_index, e.best_so_far, e.simulated_time_s) for e in traj.events]
    init_events = [e for e in traj.events if not e.origin.startswith("cycle")]
    cycle_events = [e for e in traj.events if e.origin.startswith("cycle")]
    last_init = init_events[-1]
    points = [(0, last_init.best_so_far, last_init.simulated_time_s)]
    points.extend((i + 1, e.best_so_far, e.simulated_time_s) for i, e in enumerate(cycle_events))
    return points


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute every (sweep point, run) search and aggregate summaries."""
    bench = _resolve_benchmark(cfg)
    scorer = _resolve_scorer(cfg, bench)
    ref_arch, ref_rec = best_of(bench)

    points = [("", None)] if not cfg.sweep else [
        (param, value) for param, values in cfg.sweep for value in values
    ]
    runs: list = []
    rows: list = []
    for param, value in points:
        label = cfg.method if not param else f"{cfg.method}:{param}={value}"
        point_runs = []
        for run_id in range(cfg.num_runs):
            seed = derive_seed(cfg.search.seed, "run", run_id)
            override = {} if not param else {param: value}
            search = _search_cfg(cfg, override, seed)
            if cfg.method == "rs":
                traj = run_random_search(search, bench)
            else:
                traj = run_search(search, bench, scorer)
            point_runs.append(
                RunResult(
                    label=label,
                    run_id=run_id,
                    seed=seed,
                    final_arch=traj.best.arch,
                    final_val_acc=traj.best.fitness,
                    final_test_acc=traj.best_test_acc,
                    regret=ref_rec.val_acc - traj.best.fitness,
                    simulated_time_s=traj.simulated_time_s,
                    n_proxy_evals=traj.n_proxy_evals,
                    curve=_curve(traj),
                )
            )
        mean_val, std_val = mean_std([r.final_val_acc for r in point_runs])
        mean_test, std_test = mean_std([r.final_test_acc for r in point_runs])
        rows.append(
            SummaryRow(
                label=label,
                mean_val_acc=mean_val,
                std_val_acc=std_val,
                mean_test_acc=mean_test,
                std_test_acc=std_test,
                mean_time_s=mean_std([r.simulated_time_s for r in point_runs])[0],
                mean_regret=mean_std([r.regret for r in point_runs])[0],
            )
        )
        runs.extend(point_runs)
    return ExperimentResult(
        config=cfg,
        reference_arch=ref_arch,
        reference_val_acc=ref_rec.val_acc,
        runs=runs,
        rows=rows,
    )


def _config_echo(cfg: ExperimentConfig) -> dict:
    doc = {
        "method": cfg.method,
        "search": dataclasses.asdict(cfg.search),
        "benchmark": cfg.benchmark if isinstance(cfg.benchmark, (str, type(None)))
        else dataclasses.asdict(cfg.benchmark) if isinstance(cfg.benchmark, SyntheticSpec)
        else "<in-memory>",
        "batch": cfg.batch if isinstance(cfg.batch, (str, type(None)))
        else dataclasses.asdict(cfg.batch),
        "batch_count": cfg.batch_count,
        "skeleton": dataclasses.asdict(cfg.skeleton),
        "proxy": dataclasses.asdict(cfg.proxy),
        "num_runs": cfg.num_runs,
        "sweep": [[p, list(v)] for p, v in cfg.sweep],
        "out": cfg.out,
    }
    return doc


def emit_results(result: ExperimentResult, out=None) -> tuple[Path, Path]:
    """Write curves.csv and summary.json under the output directory.

    The CSV holds one row per curve point: run_id (label#index), cycle,
    best_so_far, simulated_time_s.  The JSON carries the config echo, the
    summary rows and every run's final values, from which the row means and
    stds are recomputable.  Output depends only on the experiment result.
    """
    out_dir = Path(out if out is not None else result.config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves_path = out_dir / "curves.csv"
    summary_path = out_dir / "summary.json"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_id", "cycle", "best_so_far", "simulated_time_s"])
    for run in result.runs:
        run_key = f"{run.label}#{run.run_id}"
        for cycle, best, t in run.curve:
            writer.writerow([run_key, cycle, repr(float(best)), repr(float(t))])
    curves_path.write_text(buf.getvalue(), "utf-8")

    doc = {
        "tool_version": __version__,
        "config": _config_echo(result.config),
        "reference": {
            "arch": encode_str(result.reference_arch),
            "val_acc": result.reference_val_acc,
        },
        "rows": [dataclasses.asdict(row) for row in result.rows],
        "runs": [
            {
                "label": r.label,
                "run_id": r.run_id,
                "seed": r.seed,
                "final_arch": encode_str(r.final_arch),
                "final_val_acc": r.final_val_acc,
                "final_test_acc": r.final_test_acc,
                "regret": r.regret,
                "simulated_time_s": r.simulated_time_s,
                "n_proxy_evals": r.n_proxy_evals,
            }
            for r in result.runs
        ],
    }
    summary_path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", "utf-8")
    return curves_path, summary_path
