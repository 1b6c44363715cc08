"""Glue between the stages: snapshot in, ranked index and statistics out."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .analytics import (
    PUBLISHED_SD_CONVENTION, DatasetStats, PlotSeries, describe, load_golden, plot_series,
)
from .errors import IntegrityError
from .index import IndexConfig, WriResult, build_index, indicator_counts, rank
from .ingestion.collect import impute
from .model import Snapshot, default_data_path, validate_snapshot
from .normalize import MINMAX, NormalizedMatrix, normalize_snapshot, orient

# published summary statistics of the index
PUBLISHED_STATS = {"mean": 0.454, "maximum": 1.0, "minimum": 0.132, "sd": 0.214, "count": 30}
PUBLISHED_TOLERANCE = {"mean": 0.001, "maximum": 0.0, "minimum": 0.001, "sd": 0.005, "count": 0}


@dataclass
class IndexRun:
    matrix: NormalizedMatrix
    results: list[WriResult]
    stats: DatasetStats
    plot: PlotSeries
    c: int
    k: int


def index_snapshot(snapshot: Snapshot, method: str = MINMAX, config: IndexConfig = IndexConfig()) -> IndexRun:
    """Impute, validate, normalize, orient, aggregate and rank one snapshot."""
    snapshot = impute(snapshot)
    defects = validate_snapshot(snapshot)
    if defects:
        raise IntegrityError("snapshot has defects:\n  " + "\n  ".join(map(str, defects)))
    matrix = orient(snapshot.catalog, normalize_snapshot(snapshot, method, config.orientation))
    c, k = indicator_counts(matrix, snapshot.catalog)
    results = build_index(matrix, snapshot.catalog, config)
    return IndexRun(
        matrix=matrix,
        results=results,
        stats=describe(r.wri for r in results),
        plot=plot_series(results, snapshot.universe),
        c=c,
        k=k,
    )


@dataclass
class Check:
    name: str
    expected: object
    actual: object
    tolerance: Optional[float]
    passed: bool

    def line(self) -> str:
        tol = "" if self.tolerance is None else f" (tol {self.tolerance})"
        status = "PASS" if self.passed else "FAIL"
        actual = f"{self.actual:.6f}" if isinstance(self.actual, float) else self.actual
        return f"{status}  {self.name}: expected {self.expected}{tol}, got {actual}"


def verify_golden(path: Union[str, Path, None] = None) -> list[Check]:
    """Recompute the published statistics and the ranking ends from the golden table."""
    if path is None:
        path = default_data_path("golden_appendix.csv")
    ranked = rank(load_golden(path))
    stats = describe(r.wri for r in ranked)
    actual = {
        "mean": stats.mean,
        "maximum": stats.maximum,
        "minimum": stats.minimum,
        "sd": stats.sd(PUBLISHED_SD_CONVENTION),
        "count": stats.count,
    }
    checks = []
    for key, expected in PUBLISHED_STATS.items():
        tol = PUBLISHED_TOLERANCE[key]
        got = actual[key]
        passed = got is not None and abs(got - expected) <= tol
        name = f"sd ({PUBLISHED_SD_CONVENTION})" if key == "sd" else key
        checks.append(Check(name, expected, got, tol, passed))
    checks.append(Check("rank 1", "GARANTI", ranked[0].company_id, None, ranked[0].company_id == "GARANTI"))
    checks.append(Check(f"rank {len(ranked)}", "KOZA_MADENCILIK", ranked[-1].company_id, None,
                        ranked[-1].company_id == "KOZA_MADENCILIK"))
    return checks
