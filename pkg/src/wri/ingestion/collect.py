"""Snapshot assembly (live or replay) and imputation of missing cells."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Mapping, Optional, Sequence

from ..errors import ConfigError, FixtureIOError
from ..model import (
    MISSING, Company, Defect, IndicatorSpec, Observation, Polarity, Provenance, Snapshot,
)
from .adapters import DEFAULT_USER_AGENT, AdapterError, SourceAdapter
from .fixtures import RECORD, FixtureStore
from .ratelimit import RateLimit, RateLimiterPool

logger = logging.getLogger(__name__)

LIVE = "live"
REPLAY = "replay"

RANK_IMPUTE_NOTE = "rank imputed to worst observed value"


@dataclass
class CollectionRun:
    snapshot: Snapshot
    problems: list[str] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        obs = self.snapshot.observations
        return {
            "cells": len(obs),
            "collected": sum(1 for o in obs if not o.is_missing and o.provenance is not Provenance.IMPUTED),
            "missing": sum(1 for o in obs if o.is_missing),
            "imputed": sum(1 for o in obs if o.provenance is Provenance.IMPUTED),
        }


def _plan(catalog: Sequence[IndicatorSpec], adapters: Mapping[str, SourceAdapter]) -> dict[str, list[str]]:
    """source_id -> included indicator ids it must supply."""
    plan: dict[str, list[str]] = {}
    for spec in catalog:
        if not spec.included:
            continue
        adapter = adapters.get(spec.source_id)
        if adapter is None:
            raise ConfigError(f"no adapter registered for source {spec.source_id!r} (indicator {spec.id})")
        if spec.id not in adapter.indicator_ids:
            raise ConfigError(f"adapter {spec.source_id!r} does not declare indicator {spec.id!r}")
        plan.setdefault(spec.source_id, []).append(spec.id)
    return plan


class _SourceWorker:
    def __init__(self, adapter, indicator_ids, mode, store, session, limiters, user_agent, stamp):
        self.adapter = adapter
        self.indicator_ids = indicator_ids
        self.mode = mode
        self.store = store
        self.session = session
        self.limiters = limiters
        self.user_agent = user_agent
        self.stamp = stamp
        self.problems: list[str] = []

    def _payload(self, company: Company) -> Optional[bytes]:
        a = self.adapter
        if self.mode == REPLAY:
            try:
                payload = self.store.replay(a.source_id, company.id, a.fixture_suffix)
            except FixtureIOError as exc:
                raise AdapterError(str(exc)) from exc
            if payload is None:
                self.problems.append(f"{a.source_id}/{company.id}: no fixture")
            return payload
        if not a.endpoint:
            self.problems.append(f"{a.source_id}/{company.id}: no endpoint configured")
            return None
        self.limiters.acquire(a.source_id)
        try:
            payload = a.fetch(company, self.session, self.user_agent)
        except AdapterError as exc:
            self.problems.append(str(exc))
            return None
        if self.store is not None and self.store.mode == RECORD:
            self.store.record(a.source_id, company.id, payload, a.fixture_suffix)
        return payload

    def run(self, universe: Sequence[Company]) -> list[Observation]:
        provenance = Provenance.FIXTURE if self.mode == REPLAY else Provenance.LIVE
        out = []
        for company in universe:
            values = {ind: MISSING for ind in self.indicator_ids}
            payload = None
            try:
                payload = self._payload(company)
                if payload is not None:
                    parsed = self.adapter.parse(payload)
                    values.update({k: v for k, v in parsed.items() if k in values})
            except AdapterError as exc:
                self.problems.append(f"{self.adapter.source_id}/{company.id}: {exc}")
            except FixtureIOError:
                # failing to record is fatal: the run would silently lose data
                raise
            except Exception as exc:  # one broken adapter must not sink the run
                logger.exception("adapter %s crashed on %s", self.adapter.source_id, company.id)
                self.problems.append(f"{self.adapter.source_id}/{company.id}: {type(exc).__name__}: {exc}")
            for ind, value in values.items():
                if value is MISSING and payload is not None:
                    self.problems.append(f"{self.adapter.source_id}/{company.id}: {ind} missing")
                out.append(Observation(company.id, ind, value, provenance, self.stamp()))
        return out


def run_collection(
    universe: Sequence[Company],
    catalog: Sequence[IndicatorSpec],
    adapters: Mapping[str, SourceAdapter],
    mode: str = REPLAY,
    fixture_store: Optional[FixtureStore] = None,
    *,
    session=None,
    rate_limits: Optional[Mapping[str, RateLimit]] = None,
    default_rate_limit: Optional[RateLimit] = None,
    user_agent: str = DEFAULT_USER_AGENT,
    deterministic: bool = False,
    max_workers: int = 4,
    limiter_pool: Optional[RateLimiterPool] = None,
) -> CollectionRun:
    """Run every source adapter over the universe and assemble a snapshot.

    Sources run concurrently, companies within one source run in order so
    the per-source rate limit holds. Failures turn into MISSING cells and a
    line in ``problems``; only configuration errors raise. Replay mode never
    opens a network connection.
    """
    if mode not in (LIVE, REPLAY):
        raise ConfigError(f"unknown collection mode {mode!r}")
    if mode == REPLAY and fixture_store is None:
        raise ConfigError("replay mode needs a fixture store")
    plan = _plan(catalog, adapters)

    if mode == LIVE and session is None:
        import requests

        session = requests.Session()
    limiters = limiter_pool or RateLimiterPool(rate_limits, default_rate_limit)
    stamp = (lambda: None) if deterministic else (lambda: datetime.now(timezone.utc))

    workers = [
        _SourceWorker(adapters[sid], inds, mode, fixture_store, session, limiters, user_agent, stamp)
        for sid, inds in plan.items()
    ]
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        batches = list(pool.map(lambda w: w.run(universe), workers))

    observations = [o for batch in batches for o in batch]
    problems = sorted(p for w in workers for p in w.problems)
    for p in problems:
        logger.warning(p)
    snapshot = Snapshot(tuple(observations), tuple(universe), tuple(catalog), stamp()).sealed()
    return CollectionRun(snapshot, problems)


def collect(universe, catalog, mode, fixture_store, adapters, **kwargs) -> Snapshot:
    return run_collection(universe, catalog, adapters, mode, fixture_store, **kwargs).snapshot


def impute(snapshot: Snapshot) -> Snapshot:
    """Fill every MISSING or absent included cell.

    Count-like cells become 0. Negative-polarity rank cells take the worst
    (largest) observed rank of their column instead, because 0 would be the
    best possible rank; those cells carry a note and show up in
    :func:`imputation_defects`.
    """
    specs = snapshot.included_indicators()
    worst_rank = {}
    for spec in specs:
        if spec.polarity is Polarity.NEGATIVE and spec.is_rank:
            seen = [o.raw_value for o in snapshot.observations
                    if o.indicator_id == spec.id and not o.is_missing]
            worst_rank[spec.id] = max(seen) if seen else None

    def filled(company_id, spec, template=None):
        if spec.id in worst_rank:
            worst = worst_rank[spec.id]
            value = 0.0 if worst is None else worst
            note = RANK_IMPUTE_NOTE if worst is not None else "rank imputed to 0: no observed values"
        else:
            value, note = 0.0, None
        collected_at = template.collected_at if template is not None else None
        return Observation(company_id, spec.id, value, Provenance.IMPUTED, collected_at, note)

    by_key = {(o.company_id, o.indicator_id): o for o in snapshot.observations}
    spec_of = {s.id: s for s in specs}
    out = []
    changed = False
    for o in snapshot.observations:
        if o.is_missing and o.indicator_id in spec_of:
            out.append(filled(o.company_id, spec_of[o.indicator_id], o))
            changed = True
        else:
            out.append(o)
    for company in snapshot.universe:
        for spec in specs:
            if (company.id, spec.id) not in by_key:
                out.append(filled(company.id, spec))
                changed = True
    if not changed:
        return snapshot
    return replace(snapshot, observations=tuple(out)).sealed()


def imputation_defects(snapshot: Snapshot) -> list[Defect]:
    """Imputed rank cells: filled, but not trustworthy."""
    return [
        Defect("imputed-rank", f"({o.company_id}, {o.indicator_id}): {o.note}", o.company_id, o.indicator_id)
        for o in snapshot.observations
        if o.provenance is Provenance.IMPUTED and o.note
    ]
