"""Descriptive statistics, plot series and report files."""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import FixtureIOError, ValidationError
from .index import WriResult
from .model import Company

# Which standard deviation matches the published 0.214 on the Appendix
# vector: sample (n-1) gives 0.2146, population gives 0.2110.
PUBLISHED_SD_CONVENTION = "sample"


class ReportIOError(FixtureIOError):
    """A report file could not be written or read back."""


@dataclass(frozen=True)
class DatasetStats:
    count: int
    mean: float
    maximum: float
    minimum: float
    sd_population: float
    # None when count < 2
    sd_sample: Optional[float]

    def sd(self, convention: str = PUBLISHED_SD_CONVENTION) -> Optional[float]:
        if convention == "sample":
            return self.sd_sample
        if convention == "population":
            return self.sd_population
        raise ValueError(f"unknown sd convention {convention!r}")


def describe(values: Iterable[float]) -> DatasetStats:
    data = [float(v) for v in values]
    if not data:
        raise ValidationError("cannot describe an empty vector")
    return DatasetStats(
        count=len(data),
        mean=statistics.fmean(data),
        maximum=max(data),
        minimum=min(data),
        sd_population=statistics.pstdev(data),
        sd_sample=statistics.stdev(data) if len(data) > 1 else None,
    )


@dataclass(frozen=True)
class PlotSeries:
    points: tuple[tuple[int, float], ...]

    @property
    def x(self) -> list[int]:
        return [p[0] for p in self.points]

    @property
    def y(self) -> list[float]:
        return [p[1] for p in self.points]


def plot_series(results: Iterable[WriResult], universe: Iterable[Company]) -> PlotSeries:
    """(plot_index, wri) pairs in ascending WRI order."""
    index_of = {c.id: c.plot_index for c in universe}
    pairs = sorted(((index_of[r.company_id], r.wri) for r in results), key=lambda p: (p[1], p[0]))
    return PlotSeries(tuple(pairs))


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="", encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc}") from exc


def export_report(
    results: Sequence[WriResult],
    stats: DatasetStats,
    fmt: str,
    path: Union[str, Path],
    universe: Iterable[Company] = (),
    meta: Optional[dict] = None,
) -> Path:
    """Write rankings as CSV (``company_id,name,wri,rank``) or JSON.

    Floats go out via ``repr`` so reading them back is lossless. ``meta`` is
    merged into the top of the JSON document (method tag, timestamps...).
    """
    path = Path(path)
    names = {c.id: c.name for c in universe}
    ordered = sorted(results, key=lambda r: r.rank)
    if fmt == "csv":
        with _open_for_write(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["company_id", "name", "wri", "rank"])
            for r in ordered:
                writer.writerow([r.company_id, names.get(r.company_id, r.company_id), repr(r.wri), r.rank])
    elif fmt == "json":
        doc = dict(meta or {})
        doc["stats"] = asdict(stats)
        doc["results"] = [
            {
                "company_id": r.company_id,
                "name": names.get(r.company_id, r.company_id),
                "wri": r.wri,
                "raw_wri": r.raw_wri,
                "rank": r.rank,
                "contributions": r.contributions,
            }
            for r in ordered
        ]
        with _open_for_write(path) as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    else:
        raise ValidationError(f"unknown report format {fmt!r}")
    return path


def export_plot_series(series: PlotSeries, path: Union[str, Path]) -> Path:
    path = Path(path)
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["plot_index", "wri"])
        for x, y in series.points:
            writer.writerow([x, repr(y)])
    return path


def read_report_csv(path: Union[str, Path]) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc}") from exc
    return [{**row, "wri": float(row["wri"]), "rank": int(row["rank"])} for row in rows]


def load_golden(path: Union[str, Path]) -> list[WriResult]:
    """Read the ``company_id,name,wri`` golden table into unranked results."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc}") from exc
    try:
        return [WriResult(row["company_id"], float(row["wri"])) for row in rows]
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed golden table ({exc})") from exc


def format_table(results: Sequence[WriResult], universe: Iterable[Company] = (), top: Optional[int] = None) -> str:
    names = {c.id: c.name for c in universe}
    ordered = sorted(results, key=lambda r: r.rank)
    if top is not None:
        ordered = ordered[:top]
    width = max([len(names.get(r.company_id, r.company_id)) for r in ordered] + [7])
    lines = [f"{'rank':>4}  {'company':<{width}}  wri"]
    for r in ordered:
        lines.append(f"{r.rank:>4}  {names.get(r.company_id, r.company_id):<{width}}  {r.wri:.9f}")
    return "\n".join(lines)


def stamp() -> str:
    return datetime.now().astimezone().isoformat(timespec="seconds")
