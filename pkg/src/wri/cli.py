"""Command-line entry point: ``wri collect | index | verify | report``.

Exit codes: 0 success, 1 validation or configuration error, 2 I/O error.

Settings come from ``--config FILE`` (YAML) and from flags; a flag that is
given explicitly wins over the config file. Config keys::

    catalog, universe, sources, fixtures, out, mode, method, orientation,
    rescale_final, rescale_mode, deterministic, user_agent, workers,
    rate_limits: {<source_id>: {max_requests: N, per_seconds: S}}
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import __version__
from .analytics import export_plot_series, export_report, format_table, stamp
from .errors import ConfigError, FixtureIOError, ParseError, WriError
from .index import RESCALE_MAX, RESCALE_MINMAX, IndexConfig
from .ingestion import FixtureStore, RateLimit, impute, imputation_defects, load_sources, run_collection
from .ingestion.collect import LIVE, REPLAY
from .ingestion.fixtures import RECORD
from .model import default_data_path, load_catalog, load_universe, read_snapshot, write_snapshot
from .normalize import INVERT_THEN_NORMALIZE, MINMAX, SUBTRACT, ZSCORE, export_matrix_csv
from .pipeline import index_snapshot, verify_golden

log = logging.getLogger("wri")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


@dataclass
class RunConfig:
    catalog: Optional[Path] = None
    universe: Optional[Path] = None
    sources: Optional[Path] = None
    fixtures: Optional[Path] = None
    out: Path = Path("out")
    mode: str = REPLAY
    record: bool = False
    method: str = MINMAX
    orientation: str = SUBTRACT
    rescale_final: bool = True
    rescale_mode: str = RESCALE_MINMAX
    deterministic: bool = False
    user_agent: Optional[str] = None
    workers: int = 4
    rate_limits: dict = field(default_factory=dict)

    def check(self) -> None:
        for name in ("catalog", "universe", "sources"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise ConfigError(f"{name} file not found: {path}")
        if self.mode not in (LIVE, REPLAY):
            raise ConfigError(f"mode must be live or replay, not {self.mode!r}")
        if self.mode == REPLAY and self.fixtures is not None and not self.fixtures.is_dir():
            raise ConfigError(f"fixture root not found: {self.fixtures}")
        if self.record and self.mode != LIVE:
            raise ConfigError("--record only makes sense with --mode live")
        if self.record and self.fixtures is None:
            raise ConfigError("--record needs --fixtures DIR")

    def fixture_root(self) -> Path:
        return self.fixtures if self.fixtures is not None else default_data_path("fixtures")


_PATH_KEYS = {"catalog", "universe", "sources", "fixtures", "out"}


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            doc = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ParseError(f"{args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ParseError(f"{args.config}: expected a mapping")
        unknown = set(doc) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(doc)
    for key in RunConfig.__dataclass_fields__:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key in _PATH_KEYS & set(values):
        if values[key] is not None:
            values[key] = Path(values[key])
    cfg = RunConfig(**values)
    cfg.check()
    return cfg


def _load_inputs(cfg: RunConfig):
    catalog = load_catalog(cfg.catalog)
    universe = load_universe(cfg.universe)
    sources = load_sources(cfg.sources, list(catalog))
    return catalog, universe, sources


def cmd_collect(cfg: RunConfig) -> Path:
    catalog, universe, sources = _load_inputs(cfg)
    if cfg.mode == REPLAY:
        store = FixtureStore(cfg.fixture_root())
    else:
        store = FixtureStore(cfg.fixtures, mode=RECORD) if cfg.record else None
    limits = sources.rate_limits()
    for sid, lim in cfg.rate_limits.items():
        limits[sid] = RateLimit(sid, int(lim.get("max_requests", 1)), float(lim.get("per_seconds", 1.0)))
    run = run_collection(
        universe, catalog, sources.adapters, cfg.mode, store,
        rate_limits=limits,
        default_rate_limit=sources.default_rate_limit,
        user_agent=cfg.user_agent or sources.user_agent,
        deterministic=cfg.deterministic,
        max_workers=cfg.workers,
    )
    counts = run.counts()
    snapshot = impute(run.snapshot)
    imputed = sum(1 for o in snapshot.observations if o.provenance.value == "imputed")
    for p in run.problems:
        print(f"warning: {p}", file=sys.stderr)
    for d in imputation_defects(snapshot):
        print(f"warning: {d}", file=sys.stderr)
    path = _write(lambda p: write_snapshot(snapshot, p), cfg.out / "snapshot.json")
    print(f"cells: {counts['cells']}  collected: {counts['collected']}  "
          f"missing: {counts['missing']}  imputed: {imputed}")
    print(f"snapshot written to {path}")
    return path


def _write(writer, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return writer(path)
    except OSError as exc:
        raise FixtureIOError(f"cannot write {path}: {exc}") from exc


def cmd_index(cfg: RunConfig, snapshot_path: Path, top: int = 10) -> list[Path]:
    if not snapshot_path.is_file():
        raise FixtureIOError(f"snapshot not found: {snapshot_path}")
    snapshot = read_snapshot(snapshot_path)
    config = IndexConfig(rescale_final=cfg.rescale_final, orientation=cfg.orientation,
                         rescale_mode=cfg.rescale_mode)
    run = index_snapshot(snapshot, cfg.method, config)
    meta = {
        "method": cfg.method,
        "orientation": cfg.orientation,
        "rescale_final": cfg.rescale_final,
        "rescale_mode": cfg.rescale_mode if cfg.rescale_final else None,
        "positive_indicators": run.c,
        "total_indicators": run.k,
        "degenerate_indicators": [i for i, d in zip(run.matrix.indicator_ids, run.matrix.degenerate) if d],
    }
    if not cfg.deterministic:
        meta = {"generated_at": stamp(), **meta}
    out = cfg.out
    universe = snapshot.universe
    written = [
        _write(lambda p: export_report(run.results, run.stats, "csv", p, universe), out / "rankings.csv"),
        _write(lambda p: export_report(run.results, run.stats, "json", p, universe, meta), out / "rankings.json"),
        _write(lambda p: export_plot_series(run.plot, p), out / "plot_series.csv"),
        _write(lambda p: export_matrix_csv(run.matrix, p), out / "normalized.csv"),
    ]
    print(f"method: {cfg.method}  C={run.c}  K={run.k}")
    print(format_table(run.results, universe, top))
    s = run.stats
    print(f"mean {s.mean:.3f}  max {s.maximum:.3f}  min {s.minimum:.3f}  "
          f"sd(sample) {s.sd_sample if s.sd_sample is None else round(s.sd_sample, 3)}  "
          f"sd(population) {s.sd_population:.3f}  n {s.count}")
    for p in written:
        print(f"wrote {p}")
    return written


def cmd_verify(golden: Optional[Path]) -> bool:
    if golden is not None and not golden.is_file():
        raise FixtureIOError(f"golden file not found: {golden}")
    checks = verify_golden(golden)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print("verify: " + ("all checks passed" if ok else "FAILED"))
    return ok


def cmd_report(path: Path, top: Optional[int]) -> None:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FixtureIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    rows = doc.get("results", [])
    if top is not None:
        rows = rows[:top]
    width = max([len(r["name"]) for r in rows] + [7])
    print(f"{'rank':>4}  {'company':<{width}}  wri")
    for r in rows:
        print(f"{r['rank']:>4}  {r['name']:<{width}}  {r['wri']:.9f}")
    stats = doc.get("stats")
    if stats:
        print("  ".join(f"{k} {v:.6g}" if isinstance(v, float) else f"{k} {v}" for k, v in stats.items()))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wri", description="Web reputation index pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML run config; explicit flags override it")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--deterministic", action="store_true", default=None,
                       help="omit timestamps so repeated runs are byte-identical")

    p = sub.add_parser("collect", help="collect raw indicator values into a snapshot")
    common(p)
    p.add_argument("--catalog")
    p.add_argument("--universe")
    p.add_argument("--sources")
    p.add_argument("--mode", choices=[LIVE, REPLAY])
    p.add_argument("--fixtures", help="fixture root (replay: default is the bundled corpus)")
    p.add_argument("--record", action="store_true", default=None, help="live mode: store every response")
    p.add_argument("--user-agent", dest="user_agent")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("index", help="normalize, aggregate and rank a snapshot")
    common(p)
    p.add_argument("snapshot", type=Path)
    p.add_argument("--method", choices=[MINMAX, ZSCORE])
    p.add_argument("--orientation", choices=[SUBTRACT, INVERT_THEN_NORMALIZE])
    p.add_argument("--no-rescale", dest="rescale_final", action="store_false", default=None)
    p.add_argument("--rescale-mode", dest="rescale_mode", choices=[RESCALE_MINMAX, RESCALE_MAX])
    p.add_argument("--top", type=int, default=10)

    p = sub.add_parser("verify", help="check the golden table against the published statistics")
    p.add_argument("--golden", type=Path, help="golden CSV (default: bundled table)")

    p = sub.add_parser("report", help="print a rankings.json produced by 'index'")
    p.add_argument("rankings", type=Path)
    p.add_argument("--top", type=int)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "collect":
            cmd_collect(build_config(args))
        elif args.command == "index":
            cmd_index(build_config(args), args.snapshot, args.top)
        elif args.command == "verify":
            if not cmd_verify(args.golden):
                return EXIT_INVALID
        elif args.command == "report":
            cmd_report(args.rankings, args.top)
    except WriError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
