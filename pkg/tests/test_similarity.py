import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from playervectors.events import PlayerMatchRecord
from playervectors.similarity import (
    ReportError, SeasonPopulation, build_report, load_report_schema, manhattan, most_similar,
    similarity_percent, validate_report, write_report, write_style_rows_csv,
)
from playervectors.styles import (PositionActionConfig, assign_styles, fit_styles,
                                  name_styles)
from playervectors.vectors import PlayerMatchVector, VectorLayout

vec = st.lists(st.floats(0, 10, allow_nan=False), min_size=6, max_size=6).map(np.array)


def test_manhattan_examples(rng):
    u = rng.random(44)
    assert manhattan(u, u) == 0.0
    assert manhattan([1, 0], [0, 1]) == 2.0
    w = rng.random(44)
    assert manhattan(u, w) == pytest.approx(sum(abs(a - b) for a, b in zip(u, w)), abs=1e-12)
    with pytest.raises(ValueError):
        manhattan([1, 2], [1])


@given(vec, vec, vec)
def test_metric_axioms(u, v, w):
    assert manhattan(u, v) == manhattan(v, u)
    assert manhattan(u, w) <= manhattan(u, v) + manhattan(v, w) + 1e-12
    assert manhattan(u, u) == 0


def test_percent_examples():
    assert similarity_percent(0, 8) == 100.0
    assert similarity_percent(8, 8) == 0.0
    assert similarity_percent(4, 8) == 50.0
    assert similarity_percent(0, 0) == 100.0
    with pytest.raises(ValueError):
        similarity_percent(9, 8)


@given(st.floats(0, 100), st.floats(0, 100), st.floats(1e-3, 100))
def test_percent_strictly_decreasing(a, b, dmax):
    a, b = sorted((a * dmax / 100, b * dmax / 100))
    assert similarity_percent(a, dmax) >= similarity_percent(b, dmax)
    if b - a > 1e-12 * dmax:  # gaps below float resolution of S cannot separate
        assert similarity_percent(a, dmax) > similarity_percent(b, dmax)


HAND = {
    "a": np.array([0.0, 0.0, 0.0]),
    "b": np.array([1.0, 0.0, 0.0]),   # d(a,b) = 1
    "c": np.array([1.0, 2.0, 0.0]),   # d(a,c) = 3
    "d": np.array([0.0, 0.0, 5.0]),   # d(a,d) = 5, d(c,d) = 8 = D_max
}


def test_population_d_max_and_ranking():
    pop = SeasonPopulation(HAND)
    assert pop.d_max == 8.0
    res = most_similar("a", pop, top_n=10)
    assert [r.player_b for r in res] == ["b", "c", "d"]
    assert [r.manhattan for r in res] == [1.0, 3.0, 5.0]
    assert [r.percent for r in res] == [87.5, 62.5, 37.5]
    assert pop.compare("c", "d").percent == 0.0


def test_duplicate_ranks_first_and_ties_by_id():
    pop = SeasonPopulation({**HAND, "zz": HAND["a"].copy(), "aa": HAND["b"].copy()})
    res = most_similar("a", pop, 3)
    assert [(r.player_b, r.percent) for r in res][:1] == [("zz", 100.0)]
    assert [r.player_b for r in res[1:]] == ["aa", "b"]


def test_ranking_invariant_to_far_players():
    pop = SeasonPopulation(HAND)
    far = {**HAND, "x": np.array([50.0, 50.0, 50.0])}
    assert [r.player_b for r in most_similar("a", pop, 2)] == \
        [r.player_b for r in most_similar("a", SeasonPopulation(far), 2)]


def test_most_similar_errors():
    with pytest.raises(ValueError):
        most_similar("a", SeasonPopulation({"a": HAND["a"]}))
    with pytest.raises(KeyError):
        most_similar("q", SeasonPopulation(HAND))


def test_population_id_changes_with_content():
    a = SeasonPopulation(HAND).population_id
    b = SeasonPopulation({**HAND, "a": np.array([0.0, 0.0, 1e-9])}).population_id
    assert a != b and a == SeasonPopulation(dict(HAND)).population_id


# -- report --------------------------------------------------------------------

LAYOUT = VectorLayout.default()


def _fixture():
    r = np.random.default_rng(5)
    vectors, records = [], {}
    for i in range(40):
        pid = f"p{i % 4}"
        pos = "ST" if i % 2 == 0 else "CB"
        v = r.random(44)
        if pid == "p3":
            v = vectors[-2].v.copy() if i >= 4 else v  # p3 copies p1's shape
        pv = PlayerMatchVector(pid, f"m{i // 4}", v, pos, layout=LAYOUT)
        vectors.append(pv)
        records[pv.key] = PlayerMatchRecord(pv.match_id, pid, 90.0, "FW", 6.0 + (i % 5) / 2,
                                            i % 2, 1, 0, "domestic" if i % 3 else "foreign",
                                            ("win", "draw", "loss")[i % 3], "T1", "2025")
    cfg = PositionActionConfig({"ST": PositionActionConfig().positions["ST"],
                                "CB": PositionActionConfig().positions["CB"]})
    catalog = name_styles(fit_styles(
        {p: [v for v in vectors if v.position_label == p] for p in ("ST", "CB")}, LAYOUT, cfg))
    for pv, (sid, _) in zip(vectors, assign_styles(vectors, catalog)):
        pv.style = sid
    return vectors, records, catalog


def test_report_parts_and_schema(tmp_path):
    vectors, records, catalog = _fixture()
    rep = build_report("p0", "p1", "2025", catalog, vectors, records)
    validate_report(rep)
    assert set(rep) == {"schema_version", "season", "basic_info", "similarity", "style_stats",
                        "chart", "season_vectors"}
    for side, pid in (("a", "p0"), ("b", "p1")):
        n = sum(v.player_id == pid for v in vectors)
        assert rep["basic_info"][side]["matches"] == n
        assert sum(r["matches"] for r in rep["style_stats"][side]) == n
        assert len(rep["season_vectors"][side]) == 44
    assert rep["season_vectors"]["slots"] == list(LAYOUT.codes)
    sim = rep["similarity"]
    assert sim["population_size"] == 4 and 0 <= sim["percent"] <= 100
    chart = rep["chart"]
    assert all(len(s["matches"]) == len(chart["labels"]) for s in chart["series"])
    write_report(tmp_path / "r.json", rep)
    assert json.loads((tmp_path / "r.json").read_text()) == rep
    write_style_rows_csv(tmp_path / "r.csv", rep)
    assert (tmp_path / "r.csv").read_text().startswith("player_id,position,style_id")


def test_report_same_player_is_100_percent():
    vectors, records, catalog = _fixture()
    rep = build_report("p2", "p2", "2025", catalog, vectors, records)
    assert rep["similarity"]["percent"] == 100.0
    assert rep["style_stats"]["a"] == rep["style_stats"]["b"]


def test_report_unknown_player():
    vectors, records, catalog = _fixture()
    with pytest.raises(ReportError):
        build_report("p0", "nobody", "2025", catalog, vectors, records)
    with pytest.raises(ReportError):
        build_report("p0", "p1", "1999", catalog, vectors, records)


def test_schema_rejects_extra_keys():
    import jsonschema
    vectors, records, catalog = _fixture()
    rep = build_report("p0", "p1", "2025", catalog, vectors, records)
    rep["extra"] = 1
    with pytest.raises(jsonschema.ValidationError):
        validate_report(rep)
    assert load_report_schema()["properties"]["schema_version"]["const"] == "1.0"
