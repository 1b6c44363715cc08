"""Per-indicator normalization of a dense snapshot."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConfigError, IntegrityError, ValidationError
from .model import IndicatorSpec, Polarity, Snapshot

MINMAX = "minmax"
ZSCORE = "zscore"
METHODS = (MINMAX, ZSCORE)

SUBTRACT = "subtract"
INVERT_THEN_NORMALIZE = "invert-then-normalize"
ORIENTATIONS = (SUBTRACT, INVERT_THEN_NORMALIZE)


@dataclass(frozen=True)
class NormalizedSeries:
    values: np.ndarray
    # (min, max) for minmax, (mean, population sd) for zscore
    location: float
    scale: float
    degenerate: bool


@dataclass(frozen=True)
class NormalizedMatrix:
    """Companies x indicators, one normalized column per included indicator.

    ``minimum``/``maximum`` are the raw extremes of each column (after
    inversion when ``orientation`` is invert-then-normalize). ``signs`` is
    filled in by :func:`orient`; until then every entry is +1.
    """

    company_ids: tuple[str, ...]
    indicator_ids: tuple[str, ...]
    values: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    degenerate: np.ndarray
    signs: np.ndarray
    method: str = MINMAX
    orientation: str = SUBTRACT
    oriented: bool = False

    def column(self, indicator_id: str) -> np.ndarray:
        return self.values[:, self.indicator_ids.index(indicator_id)]

    def value(self, company_id: str, indicator_id: str) -> float:
        return float(self.values[self.company_ids.index(company_id), self.indicator_ids.index(indicator_id)])


def _as_series(series: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(series), dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("cannot normalize an empty series")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("series contains non-finite values")
    return arr


def min_max_normalize(series: Iterable[float]) -> NormalizedSeries:
    """Map ``series`` onto [0, 1] via (x - min) / (max - min).

    A constant series maps to all zeros and is marked degenerate.
    """
    x = _as_series(series)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return NormalizedSeries(np.zeros_like(x), lo, hi, True)
    return NormalizedSeries((x - lo) / (hi - lo), lo, hi, False)


def z_score_normalize(series: Iterable[float]) -> NormalizedSeries:
    """Standardize with the population standard deviation."""
    x = _as_series(series)
    mu = float(x.mean())
    sigma = float(x.std(ddof=0))
    # a constant series can still produce a sigma of a few ulps; tiny spreads can underflow to 0
    if x.max() == x.min() or sigma == 0.0 or not math.isfinite(sigma):
        return NormalizedSeries(np.zeros_like(x), mu, 0.0, True)
    return NormalizedSeries((x - mu) / sigma, mu, sigma, False)


def snapshot_matrix(snapshot: Snapshot) -> tuple[tuple[str, ...], list[IndicatorSpec], np.ndarray]:
    """Dense raw matrix over universe order x included-indicator order."""
    specs = snapshot.included_indicators()
    company_ids = tuple(c.id for c in snapshot.universe)
    row = {cid: i for i, cid in enumerate(company_ids)}
    col = {s.id: j for j, s in enumerate(specs)}
    raw = np.full((len(company_ids), len(specs)), np.nan)
    filled = np.zeros(raw.shape, dtype=bool)
    for obs in snapshot.observations:
        i, j = row.get(obs.company_id), col.get(obs.indicator_id)
        if i is None or j is None:
            continue
        if obs.is_missing:
            raise IntegrityError(f"cell ({obs.company_id}, {obs.indicator_id}) is MISSING; impute first")
        raw[i, j] = obs.raw_value
        filled[i, j] = True
    if not filled.all():
        i, j = map(int, np.argwhere(~filled)[0])
        raise IntegrityError(f"no observation for cell ({company_ids[i]}, {specs[j].id})")
    return company_ids, specs, raw


def normalize_matrix(
    company_ids: Sequence[str],
    specs: Sequence[IndicatorSpec],
    raw: np.ndarray,
    method: str = MINMAX,
    orientation: str = SUBTRACT,
) -> NormalizedMatrix:
    if method not in METHODS:
        raise ConfigError(f"unknown normalization method {method!r}")
    if orientation not in ORIENTATIONS:
        raise ConfigError(f"unknown orientation {orientation!r}")
    raw = np.asarray(raw, dtype=np.float64)
    n, k = raw.shape
    values = np.zeros((n, k))
    mins, maxs, means, sds = (np.zeros(k) for _ in range(4))
    degenerate = np.zeros(k, dtype=bool)
    for j, spec in enumerate(specs):
        col = raw[:, j]
        if orientation == INVERT_THEN_NORMALIZE and spec.polarity is Polarity.NEGATIVE:
            col = -col
        mins[j], maxs[j] = col.min(), col.max()
        means[j], sds[j] = col.mean(), col.std(ddof=0)
        norm = min_max_normalize(col) if method == MINMAX else z_score_normalize(col)
        values[:, j] = norm.values
        degenerate[j] = norm.degenerate
    return NormalizedMatrix(
        company_ids=tuple(company_ids),
        indicator_ids=tuple(s.id for s in specs),
        values=values,
        minimum=mins,
        maximum=maxs,
        mean=means,
        sd=sds,
        degenerate=degenerate,
        signs=np.ones(k),
        method=method,
        orientation=orientation,
    )


def normalize_snapshot(snapshot: Snapshot, method: str = MINMAX, orientation: str = SUBTRACT) -> NormalizedMatrix:
    company_ids, specs, raw = snapshot_matrix(snapshot)
    return normalize_matrix(company_ids, specs, raw, method, orientation)


def orient(catalog: Iterable[IndicatorSpec], matrix: NormalizedMatrix) -> NormalizedMatrix:
    """Record a -1 sign on negative-polarity columns; values are left alone.

    Under invert-then-normalize the raw values were already flipped, so every
    column keeps +1. Idempotent.
    """
    by_id = {s.id: s for s in catalog}
    signs = np.ones(len(matrix.indicator_ids))
    for j, ind in enumerate(matrix.indicator_ids):
        spec = by_id.get(ind)
        if spec is None:
            raise ConfigError(f"indicator {ind!r} is not in the catalog")
        if spec.polarity is Polarity.NEGATIVE and matrix.orientation == SUBTRACT:
            signs[j] = -1.0
    return replace(matrix, signs=signs, oriented=True)


def export_matrix_csv(matrix: NormalizedMatrix, path: Union[str, Path]) -> Path:
    """Write ``company_id`` plus one column per indicator id."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["company_id", *matrix.indicator_ids])
        for i, cid in enumerate(matrix.company_ids):
            writer.writerow([cid, *(repr(float(v)) for v in matrix.values[i])])
    return path
