"""Web Reputation Index: aggregation, final rescale and ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateError, IntegrityError
from .model import IndicatorSpec, Polarity
from .normalize import SUBTRACT, NormalizedMatrix, min_max_normalize

BY_COMPANY_ID = "by_company_id"
RESCALE_MINMAX = "minmax"
RESCALE_MAX = "max"


@dataclass(frozen=True)
class IndexConfig:
    rescale_final: bool = True
    tie_break: str = BY_COMPANY_ID
    orientation: str = SUBTRACT
    # "max" divides by the largest WRI instead; the published table (max 1,
    # min 0.132) fits that variant, not a full min-max
    rescale_mode: str = RESCALE_MINMAX


@dataclass(frozen=True)
class WriResult:
    company_id: str
    wri: float
    rank: int = 0
    # indicator id -> signed normalized value that went into the sum
    contributions: dict = field(default_factory=dict)
    # value straight out of the formula, kept when ``wri`` is rescaled
    raw_wri: Optional[float] = None


def indicator_counts(matrix: NormalizedMatrix, catalog: Iterable[IndicatorSpec]) -> tuple[int, int]:
    """Return (C, K): positive and total indicators that take part in the sum.

    Degenerate columns are dropped from both counts.
    """
    by_id = {s.id: s for s in catalog}
    c = k = 0
    for j, ind in enumerate(matrix.indicator_ids):
        if matrix.degenerate[j]:
            continue
        spec = by_id.get(ind)
        if spec is None:
            raise ConfigError(f"indicator {ind!r} is not in the catalog")
        k += 1
        if spec.polarity is Polarity.POSITIVE:
            c += 1
    return c, k


def compute_wri(matrix: NormalizedMatrix, catalog: Iterable[IndicatorSpec]) -> list[WriResult]:
    """WRI = (sum of positive columns - sum of negative columns) / C per company.

    ``matrix`` must already be oriented. The numerator is an exactly rounded
    sum (``math.fsum``) of the signed contributions.
    """
    catalog = list(catalog)
    if not matrix.oriented:
        raise ConfigError("matrix must be oriented before aggregation")
    c, _ = indicator_counts(matrix, catalog)
    if c == 0:
        raise ConfigError("no positive, non-degenerate indicators: C = 0")
    active = [j for j in range(len(matrix.indicator_ids)) if not matrix.degenerate[j]]

    results = []
    for i, cid in enumerate(matrix.company_ids):
        contributions = {}
        for j in active:
            v = matrix.values[i, j]
            if not math.isfinite(v):
                raise IntegrityError(f"cell ({cid}, {matrix.indicator_ids[j]}) is not a finite value")
            contributions[matrix.indicator_ids[j]] = float(matrix.signs[j] * v)
        wri = math.fsum(contributions.values()) / c
        results.append(WriResult(cid, wri, contributions=contributions, raw_wri=wri))
    return results


def rescale_index(results: Sequence[WriResult], mode: str = RESCALE_MINMAX) -> list[WriResult]:
    """Min-max the WRI vector itself so the best company sits at 1."""
    if len(results) < 2:
        raise DegenerateError("rescaling needs at least two companies")
    if mode == RESCALE_MAX:
        top = max(r.wri for r in results)
        if top <= 0:
            raise DegenerateError("max rescale needs a positive top WRI")
        return [replace(r, wri=r.wri / top) for r in results]
    if mode != RESCALE_MINMAX:
        raise ConfigError(f"unknown rescale mode {mode!r}")
    scaled = min_max_normalize([r.wri for r in results])
    if scaled.degenerate:
        raise DegenerateError("all WRI values are equal; cannot rescale")
    return [replace(r, wri=float(v)) for r, v in zip(results, scaled.values)]


def rank(results: Iterable[WriResult], tie_break: str = BY_COMPANY_ID) -> list[WriResult]:
    """Sort by descending WRI and number 1..N; ties go to the lower company id."""
    if tie_break != BY_COMPANY_ID:
        raise ConfigError(f"unknown tie_break {tie_break!r}")
    ordered = sorted(results, key=lambda r: (-r.wri, r.company_id))
    return [replace(r, rank=i) for i, r in enumerate(ordered, 1)]


def build_index(
    matrix: NormalizedMatrix,
    catalog: Iterable[IndicatorSpec],
    config: IndexConfig = IndexConfig(),
) -> list[WriResult]:
    results = compute_wri(matrix, catalog)
    if config.rescale_final:
        results = rescale_index(results, config.rescale_mode)
    return rank(results, config.tie_break)


def wri_bounds(c: int, k: int) -> tuple[float, float]:
    """Range forced by the formula when every normalized value is in [0, 1]."""
    return -(k - c) / c, 1.0


def as_array(results: Sequence[WriResult]) -> np.ndarray:
    return np.array([r.wri for r in results])
