"""Collection of raw indicator values from sources or recorded fixtures."""

from .adapters import (
    AdapterError, HtmlRegexAdapter, JsonAdapter, SourceAdapter, SourceConfig, build_sources, load_sources,
)
from .collect import LIVE, REPLAY, CollectionRun, collect, imputation_defects, impute, run_collection
from .fixtures import FixtureStore, record_fixture
from .ratelimit import RateLimit, RateLimiter, RateLimiterPool

__all__ = [
    "AdapterError", "HtmlRegexAdapter", "JsonAdapter", "SourceAdapter", "SourceConfig", "build_sources",
    "load_sources", "LIVE", "REPLAY", "CollectionRun", "collect", "imputation_defects", "impute",
    "run_collection", "FixtureStore", "record_fixture", "RateLimit", "RateLimiter", "RateLimiterPool",
]
