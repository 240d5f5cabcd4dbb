"""Fitness oracles: file-backed tabular benchmarks and synthetic landscapes.

A Benchmark maps every one of the 15625 genotypes to validation/test
accuracy and a simulated training cost, replacing actual training during
search.  Tabular files follow the JSON schema documented in `save_tabular`;
`gen_synthetic` builds a seeded landscape with a known global optimum and a
companion proxy map calibrated to a requested rank correlation with the
fitness, which stands in for real benchmark data in experiments and tests.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cellspace import (
    EDGES,
    NUM_EDGES,
    OP_NAMES,
    DEFAULT_SPACE,
    ArchEncoding,
    OpKind,
    SpaceDescriptor,
    decode_str,
    encode_str,
    enumerate_all,
)
from .rng import RngStream
from .stats import kendall_tau

__all__ = [
    "FitnessRecord",
    "Benchmark",
    "SyntheticSpec",
    "BenchmarkError",
    "CalibrationError",
    "load_tabular",
    "save_tabular",
    "query",
    "gen_synthetic",
    "best_of",
]


class BenchmarkError(ValueError):
    """Malformed or incomplete tabular benchmark file."""


class CalibrationError(RuntimeError):
    """Requested proxy-fitness rank correlation could not be reached."""


@dataclass(frozen=True)
class FitnessRecord:
    val_acc: float
    test_acc: float
    train_time_s: float

    def __post_init__(self):
        fields = (self.val_acc, self.test_acc, self.train_time_s)
        if not all(np.isfinite(fields)):
            raise ValueError(f"non-finite fitness record: {self}")
        if not (0.0 <= self.val_acc <= 100.0 and 0.0 <= self.test_acc <= 100.0):
            raise ValueError(f"accuracies must lie in [0, 100]: {self}")
        if self.train_time_s < 0.0:
            raise ValueError(f"train_time_s must be nonnegative: {self}")


@dataclass
class Benchmark:
    """Total map from every genotype in the space to its fitness record."""

    space: SpaceDescriptor
    dataset_name: str
    records: dict
    synthetic_proxy: dict | None = None

    def __post_init__(self):
        if len(self.records) != self.space.size:
            raise BenchmarkError(
                f"benchmark must cover all {self.space.size} architectures, "
                f"got {len(self.records)}"
            )


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the generated landscape.

    `interaction_scale` weights pairwise terms between edges that share a
    node (0 gives a separable landscape whose optimum is the per-edge
    argmax); `noise_std` adds per-architecture roughness before rescaling.
    """

    seed: int
    noise_std: float = 0.0
    target_proxy_tau: float = 1.0
    interaction_scale: float = 0.0
    test_noise_std: float = 0.5

    def __post_init__(self):
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be nonnegative")
        if not -1.0 <= self.target_proxy_tau <= 1.0:
            raise ValueError("target_proxy_tau must lie in [-1, 1]")


def query(bench: Benchmark, arch: ArchEncoding) -> FitnessRecord:
    """Pure lookup of the stored record."""
    return bench.records[arch]


def best_of(bench: Benchmark) -> tuple[ArchEncoding, FitnessRecord]:
    """Exhaustive argmax over val_acc; ties go to the lexicographically
    first encoding."""
    best_arch = None
    best_rec = None
    for arch in enumerate_all():
        rec = bench.records[arch]
        if best_rec is None or rec.val_acc > best_rec.val_acc:
            best_arch, best_rec = arch, rec
    return best_arch, best_rec


# ---------------------------------------------------------------------------
# tabular file I/O

_SCHEMA_OPS = list(OP_NAMES)


def save_tabular(bench: Benchmark, path) -> None:
    """Write the benchmark as UTF-8 JSON.

    Schema: {"space": {"nodes": 4, "ops": [...]}, "dataset": str,
    "records": [{"arch": str, "val_acc": x, "test_acc": x,
    "train_time_s": x}, ...]} with records in enumeration order.  When the
    benchmark carries a synthetic proxy map, each record additionally holds
    a "proxy" value; plain files without it load fine.
    """
    records = []
    for arch in enumerate_all():
        rec = bench.records[arch]
        row = {
            "arch": encode_str(arch),
            "val_acc": rec.val_acc,
            "test_acc": rec.test_acc,
            "train_time_s": rec.train_time_s,
        }
        if bench.synthetic_proxy is not None:
            row["proxy"] = bench.synthetic_proxy[arch]
        records.append(row)
    doc = {
        "space": {"nodes": bench.space.num_nodes, "ops": list(bench.space.op_names)},
        "dataset": bench.dataset_name,
        "records": records,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", "utf-8")


def load_tabular(path) -> Benchmark:
    """Read and validate a tabular benchmark file (see save_tabular)."""
    text = Path(path).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BenchmarkError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    for key in ("space", "dataset", "records"):
        if key not in doc:
            raise BenchmarkError(f"{path}: missing top-level key {key!r}")
    space_doc = doc["space"]
    if space_doc.get("nodes") != DEFAULT_SPACE.num_nodes or list(space_doc.get("ops", [])) != _SCHEMA_OPS:
        raise BenchmarkError(
            f"{path}: space descriptor {space_doc!r} does not match "
            f"nodes={DEFAULT_SPACE.num_nodes}, ops={_SCHEMA_OPS}"
        )
    records: dict = {}
    proxies: dict = {}
    have_proxy = False
    for idx, row in enumerate(doc["records"]):
        try:
            arch = decode_str(row["arch"])
            rec = FitnessRecord(
                val_acc=float(row["val_acc"]),
                test_acc=float(row["test_acc"]),
                train_time_s=float(row["train_time_s"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BenchmarkError(f"{path}: record {idx} is malformed: {exc}") from None
        if arch in records:
            raise BenchmarkError(f"{path}: duplicate arch string at record {idx}: {row['arch']!r}")
        records[arch] = rec
        if "proxy" in row:
            have_proxy = True
            proxies[arch] = float(row["proxy"])
    if len(records) != DEFAULT_SPACE.size:
        missing = [encode_str(a) for a in itertools.islice(
            (a for a in enumerate_all() if a not in records), 5)]
        raise BenchmarkError(
            f"{path}: incomplete benchmark: {len(records)} of {DEFAULT_SPACE.size} "
            f"architectures present; missing e.g. {missing}"
        )
    if have_proxy and len(proxies) != len(records):
        raise BenchmarkError(f"{path}: proxy values present on some records but not all")
    return Benchmark(
        space=DEFAULT_SPACE,
        dataset_name=str(doc["dataset"]),
        records=records,
        synthetic_proxy=proxies if have_proxy else None,
    )


# ---------------------------------------------------------------------------
# synthetic landscape

# Edge pairs sharing a node; their joint op choice gets an interaction term.
_ADJACENT_PAIRS = tuple(
    (i, j)
    for i in range(NUM_EDGES)
    for j in range(i + 1, NUM_EDGES)
    if set(EDGES[i]) & set(EDGES[j])
)


def _calibrate_proxy(val: np.ndarray, eta: np.ndarray, target: float) -> np.ndarray:
    """Find a noise amplitude so kendall_tau(base + amp*eta, val) hits target.

    The measured tau is monotone in the amplitude (toward 0 as amp grows),
    so bisection converges; the space is small enough to measure tau
    exhaustively at every step.
    """
    base = val if target >= 0 else -val
    if abs(kendall_tau(base, val) - target) <= 1e-9:
        return base.copy()

    def measured(amp: float) -> float:
        return kendall_tau(base + amp * eta, val)

    span = float(val.max() - val.min()) or 1.0
    lo, hi = 0.0, span
    for _ in range(60):
        t_hi = measured(hi)
        if (t_hi <= target) if target >= 0 else (t_hi >= target):
            break
        if abs(t_hi - target) <= 0.04:
            # tau has flattened near its large-amplitude asymptote but is
            # already inside the tolerance; take this amplitude as is
            lo = hi
            break
        lo, hi = hi, hi * 2.0
    else:
        raise CalibrationError(f"could not bracket target tau {target}")
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        t_mid = measured(mid)
        if (t_mid > target) if target >= 0 else (t_mid < target):
            lo = mid
        else:
            hi = mid
    amp = 0.5 * (lo + hi)
    proxy = base + amp * eta
    got = kendall_tau(proxy, val)
    if abs(got - target) > 0.05:
        raise CalibrationError(f"target tau {target} unreachable; calibrated to {got:.4f}")
    return proxy


def gen_synthetic(spec: SyntheticSpec) -> Benchmark:
    """Deterministic landscape over the full space.

    Per-(edge, op) utilities are standard normal; architectures score the
    sum of their edge utilities plus interaction terms for node-sharing
    edge pairs plus optional noise, affinely rescaled into [0, 100].
    test_acc is val_acc plus a small seeded perturbation; train_time_s is
    uniform in [5, 15].  The proxy map is val_acc plus calibrated noise so
    its Kendall tau against val_acc lands within 0.05 of the target.
    """
    root = RngStream(spec.seed, ("synthetic-benchmark",))
    n_ops = len(OpKind)
    utilities = root.child("edge-utils").normal(size=(NUM_EDGES, n_ops))
    combos = np.array(list(itertools.product(range(n_ops), repeat=NUM_EDGES)), dtype=np.intp)
    raw = utilities[np.arange(NUM_EDGES), combos].sum(axis=1)
    if spec.interaction_scale:
        for i, j in _ADJACENT_PAIRS:
            table = root.child("interaction", i, j).normal(size=(n_ops, n_ops))
            raw = raw + spec.interaction_scale * table[combos[:, i], combos[:, j]]
    if spec.noise_std:
        raw = raw + spec.noise_std * root.child("fitness-noise").normal(size=raw.size)
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        val = np.full_like(raw, 50.0)
    else:
        val = np.clip((raw - lo) / (hi - lo) * 100.0, 0.0, 100.0)
    test = np.clip(val + spec.test_noise_std * root.child("test-noise").normal(size=raw.size), 0.0, 100.0)
    times = root.child("train-time").uniform(5.0, 15.0, size=raw.size)
    proxy = _calibrate_proxy(val, root.child("proxy-noise").normal(size=raw.size), spec.target_proxy_tau)

    records = {}
    proxies = {}
    for k, arch in enumerate(enumerate_all()):
        records[arch] = FitnessRecord(
            val_acc=float(val[k]), test_acc=float(test[k]), train_time_s=float(times[k])
        )
        proxies[arch] = float(proxy[k])
    return Benchmark(
        space=DEFAULT_SPACE,
        dataset_name=f"synthetic-{spec.seed}",
        records=records,
        synthetic_proxy=proxies,
    )
