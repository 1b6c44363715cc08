"""Regenerate the bundled fixture corpus under src/wri/data/fixtures.

Published figures (maxima, minima, averages, named holders) are pinned;
every other cell is synthetic, drawn with a fixed seed and scaled so the
column statistics hit those figures. Synthetic values loosely follow the
published index order so the corpus ranks like the published table.

    python scripts/build_corpus.py [--out DIR]
"""

import argparse
import json
import shutil
from pathlib import Path

import numpy as np
import yaml

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "wri" / "data"
SEED = 2014
N = 30

# indicator -> column constraints. "anchors" are exact published cells.
SPEC = {
    "wiki_page_views": dict(anchors={"THY": 12259}, zeros=["KOZA_MADENCILIK"], scale=3000, power=2.0),
    "wiki_language_count": dict(anchors={"THY": 46}, zeros=["KOZA_MADENCILIK"], scale=12, power=1.0, floor=1),
    "linkedin_followers": dict(anchors={"TURKCELL": 68114},
                               zeros=["KOZA_MADENCILIK", "KOZA_ALTIN", "IHLAS_HOLDING", "KARDEMIR"],
                               scale=12000, power=2.0),
    "hate_marks": dict(anchors={"GARANTI": 18964},
                       zeros=["KOZA_MADENCILIK", "KOZA_ALTIN", "ENKA", "EMLAK_KONUT", "TAV", "ERDEMIR"],
                       scale=2500, power=3.0),
    "love_marks": dict(anchors={"GARANTI": 822},
                       zeros=["KOZA_MADENCILIK", "KOZA_ALTIN", "ENKA", "EMLAK_KONUT", "TAV", "ERDEMIR",
                              "IHLAS_HOLDING", "SISECAM"],
                       scale=120, power=3.0),
    "has_facebook_page": dict(flag=True, zeros=["KOZA_MADENCILIK"]),
    "fb_likes": dict(anchors={"TURKCELL": 2747255}, zeros=["KOZA_MADENCILIK"], mean=273693, power=2.5),
    "site_value": dict(anchors={}, holder="GARANTI", max=621305, mean=105724, power=2.0),
    "bing_backlinks": dict(anchors={"AKBANK": 3540}, mean=137, power=1.5, floor=1),
    "google_backlinks": dict(anchors={"TURK_TELEKOM": 3313000}, mean=307817, power=2.0, floor=1),
    "daily_visitors": dict(anchors={"GARANTI": 637285}, mean=62656, power=2.5, floor=50),
    "alexa_rank_tr": dict(rank=True, best={"GARANTI": 24}, worst=65836),
    "alexa_rank_global": dict(rank=True, best={"GARANTI": 1442}, mean=570013),
    "time_on_site": dict(anchors={}, max=480, mean=240, power=0.5, floor=60),
    "fb_shares": dict(anchors={"TURKCELL": 1969}, mean=211, power=2.0),
    "tweets": dict(anchors={"HALKBANK": 276}, mean=22, power=2.0),
    "google_trends": dict(anchors={}, holder="GARANTI", min=19, max=100, power=1.0),
}


def load_universe():
    doc = yaml.safe_load((DATA / "universe.yaml").read_text(encoding="utf-8"))
    companies = sorted(doc["companies"], key=lambda c: c["plot_index"])
    golden = {}
    for line in (DATA / "golden_appendix.csv").read_text(encoding="utf-8").splitlines()[1:]:
        cid, _, wri = line.split(",")
        golden[cid] = float(wri)
    return [c["id"] for c in companies], golden


def fit_sum(col, total, cap, pinned, floor=0):
    """Scale the free entries of ``col`` to integers in [floor, cap) summing to ``total``."""
    values = col.astype(float).copy()
    free = ~pinned
    fixed = pinned.copy()
    while True:
        target = total - values[fixed].sum()
        idx = free & ~fixed
        values[idx] = values[idx] * target / values[idx].sum()
        low = idx & (values < floor)
        high = idx & (values > cap - 1)
        if not low.any() and not high.any():
            break
        values[low] = floor
        values[high] = cap - 1
        fixed |= low | high
    ints = np.floor(values[free]).astype(np.int64)
    residual = int(round(total - values[pinned].sum() - ints.sum()))
    order = np.argsort(-(values[free] - ints))
    room = [k for k in order if ints[k] < cap - 1]
    for k in room[:residual]:
        ints[k] += 1
    values[free] = ints
    assert values.sum() == total, (values.sum(), total)
    assert values[free].max() < cap and values[free].min() >= floor
    return values


def build_columns(ids, golden, rng):
    pos = {cid: i for i, cid in enumerate(ids)}
    strength = np.array([golden[c] for c in ids])
    cols, anchors = {}, {}
    for ind, rule in SPEC.items():
        noise = rng.lognormal(0.0, 0.45, N)
        pinned = np.zeros(N, dtype=bool)
        paper_cells = set()
        if rule.get("flag"):
            col = np.ones(N)
            for cid in rule["zeros"]:
                col[pos[cid]] = 0
            cols[ind], anchors[ind] = col, set(ids)
            continue
        if rule.get("rank"):
            # ranks fall as strength rises
            base = (1.0 / strength) ** 3 * noise
            best = rule["best"]
            (best_id, best_val), = best.items()
            col = np.zeros(N)
            col[pos[best_id]] = best_val
            pinned[pos[best_id]] = True
            paper_cells.add(best_id)
            if "worst" in rule:
                raw = best_val + (rule["worst"] - best_val) * (base - base.min()) / (base.max() - base.min())
                col[~pinned] = np.round(raw[~pinned])
                worst_id = ids[int(np.argmax(np.where(pinned, -1, base)))]
                col[pos[worst_id]] = rule["worst"]
                paper_cells.add(worst_id)
                col[~pinned] = np.maximum(col[~pinned], best_val + 1)
            else:
                scaled = base / base[~pinned].mean()
                col[~pinned] = best_val + 1 + scaled[~pinned] * (rule["mean"] * N - best_val) / N
                col = fit_rank_sum(col, pinned, rule["mean"] * N, best_val)
            cols[ind], anchors[ind] = col, paper_cells
            continue

        base = strength ** rule["power"] * noise
        col = base.copy()
        for cid in rule.get("zeros", []):
            col[pos[cid]] = 0
            pinned[pos[cid]] = True
            paper_cells.add(cid)
        for cid, v in rule["anchors"].items():
            col[pos[cid]] = v
            pinned[pos[cid]] = True
            paper_cells.add(cid)
        cap = max(rule["anchors"].values()) if rule["anchors"] else rule["max"]
        if not rule["anchors"]:
            # the holder of an unnamed maximum is a synthetic choice
            top = pos[rule["holder"]] if "holder" in rule else int(np.argmax(np.where(pinned, -np.inf, base)))
            col[top] = rule["max"]
            pinned[top] = True
            paper_cells.add(ids[top])
        if "mean" in rule:
            col = fit_sum(col, rule["mean"] * N, cap, pinned, rule.get("floor", 0))
        elif "min" in rule:
            free = ~pinned
            lo = rule["min"]
            raw = col[free]
            col[free] = np.round(lo + (cap - 1 - lo) * (raw - raw.min()) / (raw.max() - raw.min()))
            paper_cells.add(ids[int(np.argmin(np.where(pinned, np.inf, col)))])
        else:
            free = ~pinned
            col[free] = np.round(col[free] / col[free].max() * rule["scale"] * 1.0)
            col[free] = np.minimum(col[free], cap - 1)
        if "floor" in rule and "mean" not in rule:
            free = ~pinned
            col[free] = np.maximum(col[free], rule["floor"])
        cols[ind], anchors[ind] = col, paper_cells
    return cols, anchors


def fit_rank_sum(col, pinned, total, best_val):
    free = ~pinned
    target = total - col[pinned].sum()
    w = col[free] - best_val
    ints = np.round(best_val + w * (target - best_val * free.sum()) / w.sum()).astype(np.int64)
    ints = np.maximum(ints, best_val + 1)
    ints[np.argmax(ints)] += int(target - ints.sum())
    col = col.copy()
    col[free] = ints
    assert col.sum() == total
    return col


def set_path(doc, path, value):
    parts = path.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DATA / "fixtures")
    args = ap.parse_args()

    ids, golden = load_universe()
    rng = np.random.default_rng(SEED)
    cols, anchors = build_columns(ids, golden, rng)
    sources = yaml.safe_load((DATA / "sources.yaml").read_text(encoding="utf-8"))["sources"]

    if args.out.exists():
        shutil.rmtree(args.out)
    keys = []
    for source_id, entry in sources.items():
        for i, cid in enumerate(ids):
            doc, cells = {}, {}
            for ind, path in entry["fields"].items():
                v = cols[ind][i]
                value = bool(v) if ind == "has_facebook_page" else int(v)
                set_path(doc, path, value)
                cells[ind] = "paper" if cid in anchors[ind] else "synthetic"
            out = args.out / source_id / f"{cid}.json"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
            keys.append({"source_id": source_id, "company_id": cid, "cells": cells})
    manifest = {
        "label": "synthetic-constrained",
        "seed": SEED,
        "generator": "scripts/build_corpus.py",
        "keys": keys,
    }
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(keys)} fixtures to {args.out}")


if __name__ == "__main__":
    main()
