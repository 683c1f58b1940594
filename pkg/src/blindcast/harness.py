"""Experiment orchestration, summary statistics, scaling fits and the
single-transmission check.

Trial ``i`` of every graph in an experiment uses the stream derived from
``(master_seed, i)``, so reruns reproduce byte-identical CSV and JSONL output
whether trials run serially or on a process pool.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .broadcast import RunConfig, TrialRecord, run_broadcast
from .coins import Constants, log_conv, prob_exactly_one, single_tx_bound
from .topology import Network, bfs, load_edge_list, parse_graph

log = logging.getLogger(__name__)

CSV_FIELDS = (
    "family", "graph", "n", "D", "variant", "C", "c1", "c2", "c3", "c4",
    "trials", "completed", "incomplete", "min", "median", "p95", "max",
)


@dataclass(frozen=True)
class ExperimentSpec:
    graphs: tuple[str, ...]
    collision_detection: bool = False
    constants: Constants = field(default_factory=Constants)
    trials: int = 20
    master_seed: int = 0
    budget: int = 10_000_000
    workers: int | None = None
    trace: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.graphs:
            raise ValueError("need at least one graph")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass
class SummaryRow:
    family: str
    graph: str
    n: int
    D: int
    variant: str
    constants: Constants
    trials: int
    completed: int
    incomplete: int
    min: int | None
    median: float | None
    p95: int | None
    max: int | None
    wall_time: float = 0.0

    def csv_dict(self) -> dict:
        c = self.constants
        return {
            "family": self.family, "graph": self.graph, "n": self.n, "D": self.D,
            "variant": self.variant, "C": c.C, "c1": c.c1, "c2": c.c2, "c3": c.c3, "c4": c.c4,
            "trials": self.trials, "completed": self.completed, "incomplete": self.incomplete,
            "min": _fmt(self.min), "median": _fmt(self.median), "p95": _fmt(self.p95),
            "max": _fmt(self.max),
        }


def _fmt(value) -> str:
    if value is None:
        return ""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def load_graph(graph: str, seed: int = 0) -> Network:
    """A generator shorthand, or ``@path`` / an existing file path holding an edge list."""
    path = graph[1:] if graph.startswith("@") else graph
    if graph.startswith("@") or os.path.isfile(path):
        with open(path) as fh:
            net = load_edge_list(fh.read())
        return Network(net.node_count, net.directed, net.edges, net.source, name=os.path.basename(path))
    return parse_graph(graph, seed=seed)


def variant_name(collision_detection: bool) -> str:
    return "cd-directed" if collision_detection else "no-cd"


def completion_quantiles(values: Sequence[int]) -> tuple:
    """(min, median, p95, max) over completed trials; p95 is nearest-rank."""
    if not values:
        return None, None, None, None
    v = np.sort(np.asarray(values))
    rank = math.ceil(0.95 * v.size)
    return int(v[0]), float(np.median(v)), int(v[rank - 1]), int(v[-1])


def summarize(network: Network, spec: ExperimentSpec, records: Sequence[TrialRecord],
              wall_time: float = 0.0) -> SummaryRow:
    done = [r.completion_round for r in records if r.completed]
    lo, med, p95, hi = completion_quantiles(done)
    family = network.name.split(":", 1)[0] if network.name else "file"
    constants = Constants(**records[0].constants) if records else spec.constants
    return SummaryRow(
        family=family, graph=network.name, n=network.node_count, D=bfs(network).eccentricity,
        variant=variant_name(spec.collision_detection), constants=constants,
        trials=len(records), completed=len(done), incomplete=len(records) - len(done),
        min=lo, median=med, p95=p95, max=hi, wall_time=wall_time,
    )


def _one_trial(args: tuple[Network, RunConfig]) -> TrialRecord:
    network, config = args
    return run_broadcast(network, config)


def default_workers() -> int:
    env = os.environ.get("BLINDCAST_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_experiment(spec: ExperimentSpec) -> tuple[list[SummaryRow], list[TrialRecord]]:
    """Run every trial of every graph; rows come back sorted by (family, n)."""
    workers = spec.workers if spec.workers is not None else default_workers()
    if spec.trace:
        workers = 1
    rows: list[SummaryRow] = []
    all_records: list[TrialRecord] = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for graph in spec.graphs:
            network = load_graph(graph, seed=spec.master_seed)
            jobs = [
                (network, RunConfig(collision_detection=spec.collision_detection,
                                    constants=spec.constants, max_global_rounds=spec.budget,
                                    seed=spec.master_seed, trial=i, trace=spec.trace))
                for i in range(spec.trials)
            ]
            start = time.perf_counter()
            if pool is None:
                records = [_one_trial(job) for job in jobs]
            else:
                records = list(pool.map(_one_trial, jobs))
            elapsed = time.perf_counter() - start
            row = summarize(network, spec, records, elapsed)
            log.info("%s: median %s, %d incomplete, %.2fs", row.graph, row.median, row.incomplete, elapsed)
            rows.append(row)
            all_records.extend(records)
    finally:
        if pool is not None:
            pool.shutdown()
    order = sorted(range(len(rows)), key=lambda k: (rows[k].family, rows[k].n))
    rows = [rows[k] for k in order]
    by_graph = {r.graph: i for i, r in enumerate(rows)}
    all_records.sort(key=lambda rec: (by_graph.get(rec.graph, 0), rec.trial))
    return rows, all_records


def rows_to_csv(rows: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.csv_dict())
    return buf.getvalue()


def records_to_jsonl(records: Iterable[TrialRecord]) -> str:
    return "".join(rec.to_json() + "\n" for rec in records)


# -- scaling fits -------------------------------------------------------------


def _d_log_nd(n: float, D: float) -> float:
    return D * log_conv(n / D)


SCALING_MODELS: dict[str, Callable[[float, float], float]] = {
    "log2n": lambda n, D: log_conv(n) ** 2,
    "DlogND": _d_log_nd,
    # no-CD envelope: D log(n/D) log^2 log(n/D)
    "DlogND_loglog": lambda n, D: _d_log_nd(n, D) * log_conv(log_conv(n / D)) ** 2,
    # CD envelope: D log(n/D) log log log(n/D)
    "DlogND_logloglog": lambda n, D: _d_log_nd(n, D) * log_conv(log_conv(log_conv(n / D))),
}


@dataclass(frozen=True)
class FitReport:
    model: str
    kappa: float
    ratios: tuple[float, ...]
    spread: float

    def __str__(self) -> str:
        return f"{self.model}: kappa={self.kappa:.4g} spread={self.spread:.3f}"


def fit_scaling(points: Sequence[SummaryRow] | Sequence[tuple[float, float, float]], model: str,
                min_points: int = 2) -> FitReport:
    """Least-squares ``kappa`` for ``median ~ kappa * model(n, D)``.

    ``points`` are summary rows or ``(n, D, median)`` triples. The spread is
    the largest over the smallest ratio ``median / (kappa * model)``.
    """
    if model not in SCALING_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(SCALING_MODELS)}")
    triples = [(p.n, p.D, p.median) if isinstance(p, SummaryRow) else tuple(p) for p in points]
    triples = [(n, D, m) for n, D, m in triples if m is not None]
    if len(triples) < max(2, min_points):
        raise ValueError(f"need at least {max(2, min_points)} completed sweep points")
    f = np.array([SCALING_MODELS[model](n, max(D, 1)) for n, D, _ in triples])
    y = np.array([m for _, _, m in triples], dtype=float)
    kappa = float(f @ y / (f @ f))
    ratios = y / (kappa * f)
    spread = float(ratios.max() / ratios.min()) if ratios.min() > 0 else math.inf
    return FitReport(model, kappa, tuple(float(r) for r in ratios), spread)


# -- single-transmission check -----------------------------------------------


@dataclass
class LemmaReport:
    vectors: int
    violations: list = field(default_factory=list)
    mc_outliers: list = field(default_factory=list)
    min_margin: float = math.inf

    @property
    def ok(self) -> bool:
        return not self.violations and not self.mc_outliers

    def __str__(self) -> str:
        return (f"{self.vectors} vectors, {len(self.violations)} bound violations, "
                f"{len(self.mc_outliers)} Monte Carlo outliers, min ratio exact/bound={self.min_margin:.4g}")


def random_prob_vector(rng: np.random.Generator, max_len: int) -> np.ndarray:
    """Entries in [0, 1/2]: uniform on [0, cap] with a random cap per vector."""
    length = int(rng.integers(1, max_len + 1))
    cap = rng.uniform(0.0, 0.5)
    return rng.uniform(0.0, 1.0, size=length) * cap


def validate_single_tx_lemma(trials: int = 1000, max_len: int = 100,
                             rng: np.random.Generator | int | None = 7,
                             mc_samples: int = 4000, sigmas: float = 4.0) -> LemmaReport:
    """Check P(exactly one fires) >= f 4^-f exactly, and against Monte Carlo."""
    rng = np.random.default_rng(rng)
    report = LemmaReport(vectors=trials)
    for k in range(trials):
        probs = random_prob_vector(rng, max_len)
        if probs.max() > 0.5:
            raise ValueError("generated vector breaks the p <= 1/2 hypothesis")
        exact = prob_exactly_one(probs)
        bound = single_tx_bound(probs)
        if exact < bound:
            report.violations.append((k, probs.tolist(), exact, bound))
        elif bound > 0:
            report.min_margin = min(report.min_margin, exact / bound)
        if mc_samples:
            hits = np.count_nonzero((rng.random((mc_samples, probs.size)) < probs).sum(axis=1) == 1)
            sd = math.sqrt(max(exact * (1 - exact), 1e-300) / mc_samples)
            # one count of slack: the normal approximation is poor when exact * mc_samples << 1
            if abs(hits / mc_samples - exact) > sigmas * sd + 1.0 / mc_samples:
                report.mc_outliers.append((k, probs.tolist(), exact, hits / mc_samples))
    return report
