"""Player similarity on season vectors and the five-part comparison report."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .styles import TABLE2_POSITION_ORDER, StyleCatalog
from .vectors import PlayerMatchVector, season_vector

REPORT_SCHEMA_VERSION = "1.0"


class ReportError(ValueError):
    pass


def manhattan(u, w):
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if u.shape != w.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {w.shape}")
    return float(np.abs(u - w).sum())


def similarity_percent(d_ij, d_max):
    """``(1 - d_ij / d_max) * 100``; an all-identical population (``d_max == 0``) gives 100."""
    if d_max < 0 or d_ij < 0:
        raise ValueError("distances must be non-negative")
    if d_max == 0:
        return 100.0
    if d_ij > d_max:
        raise ValueError(f"d_ij={d_ij} exceeds d_max={d_max}")
    return (1.0 - d_ij / d_max) * 100.0


@dataclass(frozen=True)
class SimilarityResult:
    player_a: str
    player_b: str
    manhattan: float
    percent: float


class SeasonPopulation:
    """Season vectors of every player in one season, with the cached ``D_max``."""

    def __init__(self, vectors: Mapping):
        self.ids = tuple(sorted(vectors))
        self.matrix = (np.array([np.asarray(vectors[p], dtype=np.float64) for p in self.ids])
                       if self.ids else np.zeros((0, 0)))
        self._row = {p: i for i, p in enumerate(self.ids)}

    @classmethod
    def from_match_vectors(cls, vectors: Sequence[PlayerMatchVector]):
        by_player = {}
        for pv in vectors:
            by_player.setdefault(pv.player_id, []).append(pv)
        return cls({p: season_vector(vs) for p, vs in by_player.items()})

    def __len__(self):
        return len(self.ids)

    def __contains__(self, player_id):
        return player_id in self._row

    def vector(self, player_id):
        if player_id not in self._row:
            raise KeyError(f"player {player_id!r} not in population")
        return self.matrix[self._row[player_id]]

    @cached_property
    def d_max(self):
        if len(self.ids) < 2:
            return 0.0
        return float(pdist(self.matrix, "cityblock").max())

    @cached_property
    def population_id(self):
        h = hashlib.sha256()
        for p in self.ids:
            h.update(p.encode("utf-8") + b"\0")
        h.update(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def compare(self, a, b):
        d = manhattan(self.vector(a), self.vector(b))
        return SimilarityResult(a, b, d, similarity_percent(min(d, self.d_max), self.d_max))


def most_similar(player_id, population: SeasonPopulation, top_n=10):
    """Nearest players by Manhattan distance, self excluded; ties by player id."""
    if len(population) < 2:
        raise ValueError("population needs at least two players")
    q = population.vector(player_id)
    dists = np.abs(population.matrix - q).sum(axis=1)
    order = sorted((float(d), p) for p, d in zip(population.ids, dists) if p != player_id)
    top = order[:max(0, min(int(top_n), len(order)))]
    return [SimilarityResult(player_id, p, d, similarity_percent(min(d, population.d_max),
                                                                 population.d_max))
            for d, p in top]


def load_report_schema():
    text = resources.files("playervectors").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def validate_report(report):
    import jsonschema

    jsonschema.validate(report, load_report_schema())


def _season_keys(records: Mapping, season):
    if season is None:
        return None
    return {k for k, r in records.items() if r.season == season}


def _player_info(pid, vectors, records):
    recs = [records[pv.key] for pv in vectors if pv.key in records]
    positions = {}
    for pv in vectors:
        positions[pv.position_label] = positions.get(pv.position_label, 0) + 1
    nationality = sorted({r.nationality_class for r in recs})
    return {
        "player_id": pid,
        "teams": sorted({r.team_id for r in recs}),
        "nationality": "/".join(nationality) if nationality else "unknown",
        "matches": len(vectors),
        "minutes": float(sum(r.minutes_played for r in recs)),
        "positions": dict(sorted(positions.items())),
    }


def _style_rows(vectors, records, catalog: StyleCatalog):
    by_style = {}
    for pv in vectors:
        by_style.setdefault((pv.position_label, pv.style), []).append(pv)
    played = {pv.position_label for pv in vectors}
    order = [p for p in TABLE2_POSITION_ORDER if p in played] + sorted(
        p for p in played if p not in TABLE2_POSITION_ORDER)
    rows = []
    for pos in order:
        for sid in range(catalog.positions[pos].k):
            pvs = by_style.get((pos, sid), [])
            ratings = [records[pv.key].rating for pv in pvs if pv.key in records]
            rows.append({
                "position": pos, "style_id": sid, "style": catalog.style_name(pos, sid),
                "matches": len(pvs),
                "mean_rating": float(np.mean(ratings)) if ratings else None,
            })
    return rows


def _chart(rows_a, rows_b, a, b):
    labels = []
    for row in rows_a + rows_b:
        label = f"{row['position']}: {row['style']}"
        if label not in labels:
            labels.append(label)
    series = []
    for pid, rows in ((a, rows_a), (b, rows_b)):
        lookup = {f"{r['position']}: {r['style']}": r for r in rows}
        series.append({
            "player_id": pid,
            "matches": [lookup[lab]["matches"] if lab in lookup else 0 for lab in labels],
            "mean_rating": [lookup[lab]["mean_rating"] if lab in lookup else None for lab in labels],
        })
    return {"kind": "grouped_bar", "labels": labels, "series": series}


def build_report(player_a, player_b, season, catalog: StyleCatalog,
                 vectors: Sequence[PlayerMatchVector], records: Mapping,
                 population: Optional[SeasonPopulation] = None):
    """Five-part comparison of two players over one season.

    Only styled player-matches (with a position and a style) take part. The
    similarity population is every player with such a match in the season.
    """
    keys = _season_keys(records, season)
    styled = [pv for pv in vectors if pv.position_label is not None and pv.style is not None
              and (keys is None or pv.key in keys)]
    mine = {p: [pv for pv in styled if pv.player_id == p] for p in (player_a, player_b)}
    for p, pvs in mine.items():
        if not pvs:
            raise ReportError(f"player {p!r} has no eligible matches in season {season!r}")
    population = population or SeasonPopulation.from_match_vectors(styled)
    sim = population.compare(player_a, player_b)
    rows_a = _style_rows(mine[player_a], records, catalog)
    rows_b = _style_rows(mine[player_b], records, catalog)
    layout = mine[player_a][0].layout
    slots = list(layout.codes) if layout is not None else [
        str(i) for i in range(len(mine[player_a][0].v))]
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "season": "" if season is None else str(season),
        "basic_info": {"a": _player_info(player_a, mine[player_a], records),
                       "b": _player_info(player_b, mine[player_b], records)},
        "similarity": {"manhattan": sim.manhattan, "percent": sim.percent,
                       "d_max": population.d_max, "population_size": len(population),
                       "population_id": population.population_id},
        "style_stats": {"a": rows_a, "b": rows_b},
        "chart": _chart(rows_a, rows_b, player_a, player_b),
        "season_vectors": {"slots": slots,
                           "a": [float(x) for x in population.vector(player_a)],
                           "b": [float(x) for x in population.vector(player_b)]},
    }


def write_report(path, report):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def write_style_rows_csv(path, report):
    """Flatten part iii of a report to CSV."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["player_id", "position", "style_id", "style", "matches", "mean_rating"])
        for side in ("a", "b"):
            pid = report["basic_info"][side]["player_id"]
            for r in report["style_stats"][side]:
                w.writerow([pid, r["position"], r["style_id"], r["style"], r["matches"],
                            "" if r["mean_rating"] is None else repr(r["mean_rating"])])
