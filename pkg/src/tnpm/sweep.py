"""Replicated parameter sweeps comparing the fitted model to its SVD seed.

For every grid point and replicate a fresh network is generated, the
SVD+k-means initializer is scored on its own (no EM) as a baseline, and
the full variational fit is scored against the planted labels.  Records
carry per-replicate ARIs and runtimes; aggregates report means with
standard errors (sample stdev / sqrt(replicates)).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .generate import gen_bipartite_tnpm, gen_undirected_pabm
from .metrics import ari
from .model import HardLabels
from .spectral import svd_init
from .vem import FitConfig, fit, fit_undirected
from .io import fmt_float

SWEEP_RECORDS_MARKER = "# tnpm sweep-records v1"
SWEEP_SUMMARY_MARKER = "# tnpm sweep-summary v1"

_ARI_FIELDS = ("vem_row_ari", "vem_col_ari", "svd_row_ari", "svd_col_ari")


@dataclass(frozen=True)
class SweepRecord:
    param: float
    replicate: int
    seed: int
    vem_row_ari: float
    vem_col_ari: float
    svd_row_ari: float
    svd_col_ari: float
    mutual_ari: float | None
    runtime_seconds: float


@dataclass(frozen=True)
class SweepSummary:
    """Mean and standard error of every ARI column at one grid value.

    ``se_degenerate`` flags aggregates from a single replicate, whose
    standard errors are reported as 0.
    """

    param: float
    replicates: int
    means: dict[str, float]
    standard_errors: dict[str, float]
    se_degenerate: bool


@dataclass(frozen=True, eq=False)
class SweepReport:
    kind: str
    grid: tuple[float, ...]
    replicates: int
    records: tuple[SweepRecord, ...]
    summaries: tuple[SweepSummary, ...]

    def ari_columns(self) -> tuple[str, ...]:
        cols = _ARI_FIELDS
        if self.kind == "undirected":
            cols = cols + ("mutual_ari",)
        return cols

    def write_records(self, path) -> None:
        cols = self.ari_columns()
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(SWEEP_RECORDS_MARKER + "\n")
            handle.write(f"# kind: {self.kind}\n")
            handle.write("param\treplicate\tseed\t" + "\t".join(cols) + "\truntime_seconds\n")
            for rec in self.records:
                values = [fmt_float(getattr(rec, c)) for c in cols]
                handle.write(
                    f"{fmt_float(rec.param)}\t{rec.replicate}\t{rec.seed}\t"
                    + "\t".join(values)
                    + f"\t{fmt_float(rec.runtime_seconds)}\n"
                )

    def write_summary(self, path) -> None:
        cols = self.ari_columns()
        header = ["param", "replicates"]
        for c in cols:
            header += [f"{c}_mean", f"{c}_se"]
        header.append("se_degenerate")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(SWEEP_SUMMARY_MARKER + "\n")
            handle.write(f"# kind: {self.kind}\n")
            handle.write("# standard error = sample stdev / sqrt(replicates)\n")
            handle.write("\t".join(header) + "\n")
            for summary in self.summaries:
                row = [fmt_float(summary.param), str(summary.replicates)]
                for c in cols:
                    row += [
                        fmt_float(summary.means[c]),
                        fmt_float(summary.standard_errors[c]),
                    ]
                row.append("true" if summary.se_degenerate else "false")
                handle.write("\t".join(row) + "\n")


def _replicate_seed(base_seed: int, grid_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence([base_seed, grid_index, replicate])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def _run_bipartite(task) -> SweepRecord:
    r, grid_index, replicate, m, n, K, L, base_seed, config = task
    seed = _replicate_seed(base_seed, grid_index, replicate)
    net = gen_bipartite_tnpm(m, n, K, L, r, seed)
    start = time.perf_counter()
    z0, w0 = svd_init(net.A, K, L, seed + 1)
    result = fit(net.A, K, L, replace(config, seed=seed + 2))
    runtime = time.perf_counter() - start
    return SweepRecord(
        param=r,
        replicate=replicate,
        seed=seed,
        vem_row_ari=ari(result.row_labels, net.z_true),
        vem_col_ari=ari(result.col_labels, net.w_true),
        svd_row_ari=ari(z0, net.z_true),
        svd_col_ari=ari(w0, net.w_true),
        mutual_ari=None,
        runtime_seconds=runtime,
    )


def _run_undirected(task) -> SweepRecord:
    h, grid_index, replicate, n, K, base_seed, config = task
    seed = _replicate_seed(base_seed, grid_index, replicate)
    net = gen_undirected_pabm(n, h, seed)
    start = time.perf_counter()
    z0, w0 = svd_init(net.A, K, K, seed + 1)
    result = fit_undirected(net.A, K, replace(config, seed=seed + 2, mode="undirected"))
    runtime = time.perf_counter() - start
    return SweepRecord(
        param=h,
        replicate=replicate,
        seed=seed,
        vem_row_ari=ari(result.row_labels, net.labels),
        vem_col_ari=ari(result.col_labels, net.labels),
        svd_row_ari=ari(z0, net.labels),
        svd_col_ari=ari(w0, net.labels),
        mutual_ari=result.mutual_ari,
        runtime_seconds=runtime,
    )


def _summarize(kind: str, records: list[SweepRecord], grid, replicates: int):
    cols = _ARI_FIELDS + (("mutual_ari",) if kind == "undirected" else ())
    summaries = []
    for value in grid:
        block = [rec for rec in records if rec.param == value]
        means = {}
        ses = {}
        for c in cols:
            data = np.array([getattr(rec, c) for rec in block], dtype=np.float64)
            means[c] = float(data.mean())
            ses[c] = 0.0 if len(block) < 2 else float(data.std(ddof=1) / math.sqrt(len(block)))
        summaries.append(
            SweepSummary(
                param=value,
                replicates=len(block),
                means=means,
                standard_errors=ses,
                se_degenerate=len(block) < 2,
            )
        )
    return tuple(summaries)


def run_sweep(
    kind: str,
    grid,
    replicates: int,
    *,
    m: int = 200,
    n: int = 250,
    K: int = 3,
    L: int = 4,
    seed: int = 0,
    config: FitConfig | None = None,
    jobs: int | None = None,
) -> SweepReport:
    """Generate-fit-score replicates over a parameter grid.

    ``kind`` selects the design: "bipartite" sweeps the density factor r
    on m x n networks with (K, L) planted clusters; "undirected" sweeps
    the homophily factor h on n-node two-community networks (K clusters,
    ``m``/``L`` ignored).  Each replicate derives its own seed from
    (seed, grid index, replicate), so records are reproducible
    individually and independent of scheduling; ``jobs`` > 1 runs
    replicates in worker processes.
    """
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("grid must be non-empty")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if kind not in ("bipartite", "undirected"):
        raise ValueError("kind must be 'bipartite' or 'undirected'")
    config = config or FitConfig()
    tasks = []
    for grid_index, value in enumerate(grid):
        for replicate in range(replicates):
            if kind == "bipartite":
                tasks.append((value, grid_index, replicate, m, n, K, L, seed, config))
            else:
                tasks.append((value, grid_index, replicate, n, K, seed, config))
    runner = _run_bipartite if kind == "bipartite" else _run_undirected
    if jobs is not None and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(runner, tasks))
    else:
        records = [runner(task) for task in tasks]
    return SweepReport(
        kind=kind,
        grid=grid,
        replicates=replicates,
        records=tuple(records),
        summaries=_summarize(kind, records, grid, replicates),
    )
