"""Source adapters: turn one response per (source, company) into raw values.

Adapters are configured from a YAML sources file (``data/sources.yaml`` by
default)::

    user_agent: wri-collector/0.1
    default_rate_limit: {max_requests: 1, per_seconds: 1.0}
    sources:
      bing:
        kind: json                     # json | html
        endpoint: https://example.org/backlinks?site={domain}   # null = fixture only
        rate_limit: {max_requests: 2, per_seconds: 1.0}
        fields:
          bing_backlinks: backlinks.total

For ``json`` sources each field is a dotted path into the response document
(integer components index lists). For ``html`` sources each field is a regex
whose first group captures the number. Endpoint templates may use
``{website}``, ``{domain}``, ``{company_id}`` and ``{name}``.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union
from urllib.parse import quote, urlparse

import yaml

from ..errors import ConfigError, ParseError
from ..model import MISSING, Company, IndicatorSpec, RawValue, default_data_path
from .ratelimit import RateLimit

logger = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "wri-collector/0.1"
COUNT_UNITS = ("count", "flag", "USD", "seconds")


class AdapterError(Exception):
    """A single fetch or parse failed; the cell becomes MISSING."""


def parse_number(value: Any) -> RawValue:
    """Coerce a scraped value to float; None/blank become MISSING."""
    if value is None:
        return MISSING
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().replace(",", "").replace(" ", "").replace(" ", "")
        if not text:
            return MISSING
        # dotted thousands ("2.747.255")
        if text.count(".") > 1:
            text = text.replace(".", "")
        try:
            return float(text)
        except ValueError:
            raise AdapterError(f"not a number: {value!r}") from None
    raise AdapterError(f"unsupported value type {type(value).__name__}")


def dig(doc: Any, path: str) -> Any:
    """Follow a dotted path; return None when any step is absent."""
    node = doc
    for part in path.split("."):
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                return None
        elif isinstance(node, dict):
            if part not in node:
                return None
            node = node[part]
        else:
            return None
    return node


@dataclass
class SourceAdapter:
    """Base adapter: knows its endpoint and which indicators it emits."""

    source_id: str
    fields: dict[str, str]
    endpoint: Optional[str] = None
    rate_limit: Optional[RateLimit] = None
    units: dict[str, str] = field(default_factory=dict)

    fixture_suffix = ".json"
    fragile = False

    @property
    def indicator_ids(self) -> tuple[str, ...]:
        return tuple(self.fields)

    def url_for(self, company: Company) -> str:
        if not self.endpoint:
            raise AdapterError(f"no endpoint configured for source {self.source_id!r}")
        domain = urlparse(company.website).netloc or company.website
        if domain.startswith("www."):
            domain = domain[4:]
        return self.endpoint.format(
            website=quote(company.website, safe=""),
            domain=domain,
            company_id=quote(company.id, safe=""),
            name=quote(company.name, safe=""),
        )

    def fetch(self, company: Company, session, user_agent: str = DEFAULT_USER_AGENT,
              timeout: float = 10.0) -> bytes:
        import requests

        url = self.url_for(company)
        try:
            resp = session.get(url, headers={"User-Agent": user_agent}, timeout=timeout)
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise AdapterError(f"{self.source_id}: GET {url} failed: {exc}") from exc
        return resp.content

    def extract(self, payload: bytes) -> dict[str, Any]:
        raise NotImplementedError

    def parse(self, payload: bytes) -> dict[str, RawValue]:
        """Map every declared indicator to a value or MISSING.

        Negative numbers for count-like units are rejected as MISSING.
        """
        raw = self.extract(payload)
        out: dict[str, RawValue] = {}
        for ind in self.fields:
            try:
                value = parse_number(raw.get(ind))
            except AdapterError as exc:
                logger.warning("%s/%s: %s", self.source_id, ind, exc)
                value = MISSING
            if value is not MISSING:
                if not math.isfinite(value):
                    value = MISSING
                elif value < 0 and self.units.get(ind, "count") in COUNT_UNITS:
                    logger.warning("%s/%s: negative count %r dropped", self.source_id, ind, value)
                    value = MISSING
            out[ind] = value
        return out


@dataclass
class JsonAdapter(SourceAdapter):
    def extract(self, payload: bytes) -> dict[str, Any]:
        try:
            doc = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise AdapterError(f"{self.source_id}: response is not JSON: {exc}") from exc
        return {ind: dig(doc, path) for ind, path in self.fields.items()}


@dataclass
class HtmlRegexAdapter(SourceAdapter):
    """Scrapes numbers out of an HTML page with per-field regexes.

    Fragile by nature: any markup change on the provider side breaks it.
    Prefer a JSON source or fixtures.
    """

    fixture_suffix = ".html"
    fragile = True

    def __post_init__(self):
        try:
            self._patterns = {ind: re.compile(rx, re.S) for ind, rx in self.fields.items()}
        except re.error as exc:
            raise ConfigError(f"{self.source_id}: bad regex: {exc}") from exc

    def extract(self, payload: bytes) -> dict[str, Any]:
        text = payload.decode("utf-8", errors="replace")
        out = {}
        for ind, pattern in self._patterns.items():
            m = pattern.search(text)
            out[ind] = m.group(1) if m else None
        return out


ADAPTER_KINDS = {"json": JsonAdapter, "html": HtmlRegexAdapter}


@dataclass
class SourceConfig:
    adapters: dict[str, SourceAdapter]
    user_agent: str = DEFAULT_USER_AGENT
    default_rate_limit: RateLimit = field(default_factory=lambda: RateLimit("*"))

    def rate_limits(self) -> dict[str, RateLimit]:
        return {sid: a.rate_limit for sid, a in self.adapters.items() if a.rate_limit is not None}


def _rate_limit(source_id: str, doc: Optional[Mapping]) -> Optional[RateLimit]:
    if doc is None:
        return None
    try:
        return RateLimit(source_id, int(doc.get("max_requests", 1)), float(doc.get("per_seconds", 1.0)))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{source_id}: bad rate_limit {doc!r}: {exc}") from exc


def build_sources(doc: Mapping, catalog: Optional[list[IndicatorSpec]] = None) -> SourceConfig:
    if not isinstance(doc, Mapping) or not isinstance(doc.get("sources"), Mapping):
        raise ConfigError("sources config needs a 'sources' mapping")
    units = {s.id: s.unit for s in catalog or ()}
    adapters = {}
    for source_id, entry in doc["sources"].items():
        kind = entry.get("kind", "json")
        cls = ADAPTER_KINDS.get(kind)
        if cls is None:
            raise ConfigError(f"{source_id}: unknown adapter kind {kind!r}")
        fields = entry.get("fields")
        if not isinstance(fields, Mapping) or not fields:
            raise ConfigError(f"{source_id}: 'fields' must be a non-empty mapping")
        adapters[source_id] = cls(
            source_id=source_id,
            fields={str(k): str(v) for k, v in fields.items()},
            endpoint=entry.get("endpoint"),
            rate_limit=_rate_limit(source_id, entry.get("rate_limit")),
            units={ind: units.get(ind, "count") for ind in fields},
        )
    default = _rate_limit("*", doc.get("default_rate_limit")) or RateLimit("*")
    return SourceConfig(adapters, str(doc.get("user_agent") or DEFAULT_USER_AGENT), default)


def load_sources(path: Union[str, Path, None] = None,
                 catalog: Optional[list[IndicatorSpec]] = None) -> SourceConfig:
    if path is None:
        path = default_data_path("sources.yaml")
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ParseError(f"cannot load sources config {path}: {exc}") from exc
    return build_sources(doc, catalog)
