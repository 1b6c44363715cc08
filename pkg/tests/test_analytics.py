import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wri.analytics import (
    ReportIOError, describe, export_plot_series, export_report, load_golden, plot_series, read_report_csv,
)
from wri.errors import ValidationError
from wri.index import WriResult, rank
from wri.model import default_data_path

from conftest import APPENDIX


@pytest.fixture
def golden_ranked(universe):
    return rank(load_golden(default_data_path("golden_appendix.csv")))


def test_golden_file_matches_appendix():
    assert [(r.company_id, r.wri) for r in load_golden(default_data_path("golden_appendix.csv"))] == APPENDIX


def test_describe_appendix():
    s = describe(w for _, w in APPENDIX)
    assert s.count == 30
    assert abs(s.mean - 0.454) <= 0.001
    assert s.maximum == 1.0
    assert abs(s.minimum - 0.132) <= 0.001
    # oracle: the column sum, done by hand
    assert s.mean == pytest.approx(math.fsum(w for _, w in APPENDIX) / 30, abs=1e-15)


def test_describe_single_value():
    s = describe([0.5])
    assert (s.mean, s.sd_population, s.minimum, s.maximum) == (0.5, 0.0, 0.5, 0.5)
    assert s.sd_sample is None


def test_describe_two_values():
    s = describe([0, 1])
    assert s.mean == 0.5 and s.sd_population == 0.5
    assert s.sd_sample == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_describe_empty():
    with pytest.raises(ValidationError):
        describe([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.randoms())
def test_describe_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    a, b = describe(xs), describe(ys)
    assert a.count == b.count and a.minimum == b.minimum and a.maximum == b.maximum
    assert a.mean == pytest.approx(b.mean, abs=1e-9)
    assert a.sd_population == pytest.approx(b.sd_population, abs=1e-9)
    assert a.minimum <= a.mean <= a.maximum or math.isclose(a.minimum, a.maximum)


def test_plot_series_appendix(golden_ranked, universe):
    series = plot_series(golden_ranked, universe)
    assert series.points[0] == (1, 0.132165144)
    assert series.points[-1] == (30, 1.0)
    assert series.x == list(range(1, 31))
    assert all(a <= b for a, b in zip(series.y, series.y[1:]))


def test_plot_series_single(universe):
    assert len(plot_series([WriResult("GARANTI", 1.0, 1)], universe).points) == 1


def test_plot_series_ignores_input_order(golden_ranked, universe):
    assert plot_series(golden_ranked[::-1], universe) == plot_series(golden_ranked, universe)


def test_csv_round_trip_is_exact(tmp_path, golden_ranked, universe):
    stats = describe(r.wri for r in golden_ranked)
    path = export_report(golden_ranked, stats, "csv", tmp_path / "r.csv", universe)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "company_id,name,wri,rank"
    rows = read_report_csv(path)
    assert [row["wri"] for row in rows] == [r.wri for r in golden_ranked]
    assert rows[0]["name"] == "GARANTİ"


def test_json_report_has_stats_and_contributions(tmp_path, universe):
    results = rank([WriResult("GARANTI", 1.0, contributions={"fb_likes": 0.25, "hate_marks": -1.0}),
                    WriResult("THY", 0.7, contributions={"fb_likes": 1 / 3, "hate_marks": -0.0})])
    stats = describe(r.wri for r in results)
    path = export_report(results, stats, "json", tmp_path / "r.json", universe, {"method": "minmax"})
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["method"] == "minmax"
    assert doc["stats"]["count"] == 2 and doc["stats"]["mean"] == stats.mean
    assert doc["results"][1]["contributions"]["fb_likes"] == 1 / 3
    assert doc["results"][0]["name"] == "GARANTİ"


def test_unwritable_path(tmp_path, golden_ranked):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    stats = describe(r.wri for r in golden_ranked)
    with pytest.raises(ReportIOError, match="file"):
        export_report(golden_ranked, stats, "csv", blocker / "r.csv")


def test_unknown_format(tmp_path, golden_ranked):
    with pytest.raises(ValidationError):
        export_report(golden_ranked, describe([1.0]), "xml", tmp_path / "r.xml")


def test_plot_csv(tmp_path, golden_ranked, universe):
    path = export_plot_series(plot_series(golden_ranked, universe), tmp_path / "p.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "plot_index,wri" and lines[1] == "1,0.132165144" and lines[-1] == "30,1.0"
