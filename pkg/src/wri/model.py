"""Shared data model: indicators, companies, observations and snapshots.

Catalog and universe files are YAML documents::

    indicators:
      - id: fb_likes
        display_name: Facebook like count
        group: social_media        # social_media | webometrics | blogs | wiki
        polarity: positive         # positive | negative
        source_id: facebook
        unit: count
        included: true

    companies:
      - id: GARANTI
        name: GARANTİ
        website: https://www.garanti.com.tr
        plot_index: 30

Snapshots are JSON (see ``snapshot_to_dict``).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, replace
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import yaml

from .errors import ParseError, ValidationError

GROUPS = ("social_media", "webometrics", "blogs", "wiki")


class Polarity(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Provenance(str, enum.Enum):
    LIVE = "live"
    FIXTURE = "fixture"
    IMPUTED = "imputed"


class _Missing:
    """Marker for a cell that no source could fill."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()

RawValue = Union[float, _Missing]


@dataclass(frozen=True)
class IndicatorSpec:
    id: str
    display_name: str
    group: str
    polarity: Polarity
    source_id: str
    unit: str = "count"
    included: bool = True

    @property
    def is_rank(self) -> bool:
        return self.unit == "rank"


@dataclass(frozen=True)
class Company:
    id: str
    name: str
    website: str
    plot_index: int


@dataclass(frozen=True)
class Observation:
    company_id: str
    indicator_id: str
    raw_value: RawValue
    provenance: Provenance
    collected_at: Optional[datetime] = None
    note: Optional[str] = None

    @property
    def is_missing(self) -> bool:
        return self.raw_value is MISSING


@dataclass(frozen=True)
class Snapshot:
    observations: tuple[Observation, ...]
    universe: tuple[Company, ...]
    catalog: tuple[IndicatorSpec, ...]
    created_at: Optional[datetime] = None

    def included_indicators(self) -> list[IndicatorSpec]:
        return [spec for spec in self.catalog if spec.included]

    def cell(self, company_id: str, indicator_id: str) -> Optional[Observation]:
        for obs in self.observations:
            if obs.company_id == company_id and obs.indicator_id == indicator_id:
                return obs
        return None

    def sealed(self) -> "Snapshot":
        """Return a copy with observations in (company_id, indicator_id) order."""
        ordered = tuple(sorted(self.observations, key=lambda o: (o.company_id, o.indicator_id)))
        return replace(self, observations=ordered)

    def without_timestamps(self) -> "Snapshot":
        obs = tuple(replace(o, collected_at=None) for o in self.observations)
        return replace(self, observations=obs, created_at=None)


@dataclass
class Defect:
    kind: str
    message: str
    company_id: Optional[str] = None
    indicator_id: Optional[str] = None

    def __str__(self) -> str:
        return self.message


# -- catalog ----------------------------------------------------------------

def _read_yaml(path: Union[str, Path], key: str) -> list[dict]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get(key), list):
        raise ParseError(f"{path}: expected a mapping with a '{key}' list")
    return doc[key]


def _require(entry: dict, name: str, where: str) -> Any:
    if name not in entry or entry[name] is None:
        raise ParseError(f"{where}: missing field '{name}'")
    return entry[name]


def parse_catalog(entries: Iterable[dict]) -> tuple[IndicatorSpec, ...]:
    specs = []
    for i, entry in enumerate(entries):
        where = f"indicator #{i}"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected a mapping")
        polarity = _require(entry, "polarity", where)
        try:
            polarity = Polarity(polarity)
        except ValueError:
            raise ValidationError(f"{where}: unknown polarity {polarity!r}") from None
        group = _require(entry, "group", where)
        if group not in GROUPS:
            raise ValidationError(f"{where}: unknown group {group!r}")
        included = entry.get("included", True)
        if not isinstance(included, bool):
            raise ValidationError(f"{where}: 'included' must be a boolean")
        specs.append(IndicatorSpec(
            id=str(_require(entry, "id", where)),
            display_name=str(entry.get("display_name") or entry["id"]),
            group=group,
            polarity=polarity,
            source_id=str(_require(entry, "source_id", where)),
            unit=str(entry.get("unit", "count")),
            included=included,
        ))
    validate_catalog(specs)
    return tuple(specs)


def validate_catalog(specs: Sequence[IndicatorSpec]) -> None:
    seen = set()
    for spec in specs:
        if spec.id in seen:
            raise ValidationError(f"duplicate indicator id {spec.id!r}")
        seen.add(spec.id)


def load_catalog(path: Union[str, Path, None] = None) -> tuple[IndicatorSpec, ...]:
    """Load an indicator catalog; with no path, the bundled 17-indicator one."""
    if path is None:
        path = default_data_path("catalog.yaml")
    return parse_catalog(_read_yaml(path, "indicators"))


def catalog_to_dicts(specs: Iterable[IndicatorSpec]) -> list[dict]:
    out = []
    for spec in specs:
        d = asdict(spec)
        d["polarity"] = spec.polarity.value
        out.append(d)
    return out


def dump_catalog(specs: Iterable[IndicatorSpec], path: Union[str, Path]) -> None:
    doc = {"indicators": catalog_to_dicts(specs)}
    Path(path).write_text(yaml.safe_dump(doc, allow_unicode=True, sort_keys=False), encoding="utf-8")


# -- universe ---------------------------------------------------------------

def parse_universe(entries: Iterable[dict]) -> tuple[Company, ...]:
    companies = []
    for i, entry in enumerate(entries):
        where = f"company #{i}"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected a mapping")
        plot_index = _require(entry, "plot_index", where)
        if not isinstance(plot_index, int) or isinstance(plot_index, bool) or plot_index < 1:
            raise ValidationError(f"{where}: plot_index must be a positive integer")
        companies.append(Company(
            id=str(_require(entry, "id", where)),
            name=str(entry.get("name") or entry["id"]),
            website=str(entry.get("website", "")),
            plot_index=plot_index,
        ))
    validate_universe(companies)
    return tuple(companies)


def validate_universe(companies: Sequence[Company]) -> None:
    ids, indices = set(), set()
    for c in companies:
        if c.id in ids:
            raise ValidationError(f"duplicate company id {c.id!r}")
        if c.plot_index in indices:
            raise ValidationError(f"duplicate plot_index {c.plot_index} ({c.id})")
        ids.add(c.id)
        indices.add(c.plot_index)
    if indices and indices != set(range(1, len(companies) + 1)):
        raise ValidationError(f"plot_index values must be 1..{len(companies)}")


def load_universe(path: Union[str, Path, None] = None) -> tuple[Company, ...]:
    """Load a company universe; with no path, the bundled XU030 list."""
    if path is None:
        path = default_data_path("universe.yaml")
    return parse_universe(_read_yaml(path, "companies"))


def dump_universe(companies: Iterable[Company], path: Union[str, Path]) -> None:
    doc = {"companies": [asdict(c) for c in companies]}
    Path(path).write_text(yaml.safe_dump(doc, allow_unicode=True, sort_keys=False), encoding="utf-8")


def default_data_path(name: str) -> Path:
    return Path(str(resources.files("wri") / "data" / name))


# -- snapshots --------------------------------------------------------------

def validate_snapshot(snapshot: Snapshot) -> list[Defect]:
    """Return every defect found; an empty list means the snapshot is dense and clean."""
    defects: list[Defect] = []
    company_ids = {c.id for c in snapshot.universe}
    indicator_ids = {s.id for s in snapshot.catalog}
    included = [s.id for s in snapshot.catalog if s.included]

    seen: dict[tuple[str, str], int] = {}
    for obs in snapshot.observations:
        key = (obs.company_id, obs.indicator_id)
        if obs.company_id not in company_ids:
            defects.append(Defect("unknown-company", f"observation references unknown company {obs.company_id!r}",
                                  obs.company_id, obs.indicator_id))
            continue
        if obs.indicator_id not in indicator_ids:
            defects.append(Defect("unknown-indicator", f"observation references unknown indicator {obs.indicator_id!r}",
                                  obs.company_id, obs.indicator_id))
            continue
        seen[key] = seen.get(key, 0) + 1
        if obs.is_missing:
            defects.append(Defect("missing-value", f"missing value for ({obs.company_id}, {obs.indicator_id})",
                                  obs.company_id, obs.indicator_id))
        elif not math.isfinite(obs.raw_value):
            defects.append(Defect("non-finite", f"non-finite value {obs.raw_value!r} for "
                                  f"({obs.company_id}, {obs.indicator_id})", obs.company_id, obs.indicator_id))

    for company in snapshot.universe:
        for ind in included:
            n = seen.get((company.id, ind), 0)
            if n == 0:
                defects.append(Defect("missing-cell", f"missing cell ({company.id}, {ind})", company.id, ind))
            elif n > 1:
                defects.append(Defect("duplicate-cell", f"{n} observations for ({company.id}, {ind})",
                                      company.id, ind))
    return defects


def _ts(value: Optional[datetime]) -> Optional[str]:
    return value.isoformat() if value is not None else None


def _parse_ts(value: Optional[str]) -> Optional[datetime]:
    return datetime.fromisoformat(value) if value else None


def snapshot_to_dict(snapshot: Snapshot) -> dict:
    """JSON layout: catalog, universe and one object per observation (null = MISSING)."""
    return {
        "created_at": _ts(snapshot.created_at),
        "catalog": catalog_to_dicts(snapshot.catalog),
        "universe": [asdict(c) for c in snapshot.universe],
        "observations": [
            {
                "company_id": o.company_id,
                "indicator_id": o.indicator_id,
                "raw_value": None if o.is_missing else o.raw_value,
                "provenance": o.provenance.value,
                "collected_at": _ts(o.collected_at),
                **({"note": o.note} if o.note else {}),
            }
            for o in snapshot.observations
        ],
    }


def snapshot_from_dict(doc: dict) -> Snapshot:
    try:
        catalog = parse_catalog(doc["catalog"])
        universe = parse_universe(doc["universe"])
        observations = []
        for o in doc["observations"]:
            raw = o["raw_value"]
            observations.append(Observation(
                company_id=o["company_id"],
                indicator_id=o["indicator_id"],
                raw_value=MISSING if raw is None else float(raw),
                provenance=Provenance(o["provenance"]),
                collected_at=_parse_ts(o.get("collected_at")),
                note=o.get("note"),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed snapshot: {exc!r}") from exc
    return Snapshot(tuple(observations), universe, catalog, _parse_ts(doc.get("created_at")))


def write_snapshot(snapshot: Snapshot, path: Union[str, Path]) -> Path:
    path = Path(path)
    # NaN is written as-is so validate_snapshot still sees it after a round trip
    path.write_text(json.dumps(snapshot_to_dict(snapshot), ensure_ascii=False, indent=1), encoding="utf-8")
    return path


def read_snapshot(path: Union[str, Path]) -> Snapshot:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return snapshot_from_dict(doc)


__all__ = [
    "MISSING", "Polarity", "Provenance", "IndicatorSpec", "Company", "Observation", "Snapshot", "Defect",
    "load_catalog", "load_universe", "parse_catalog", "parse_universe", "dump_catalog", "dump_universe",
    "validate_snapshot", "snapshot_to_dict", "snapshot_from_dict", "write_snapshot", "read_snapshot",
]
