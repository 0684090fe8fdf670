"""Per-position playing styles: a second NMF over player-vector slices."""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .events import ActionCategory, format_float
from .nmf import FactorModel, NMFOptions, nmf_fit, nmf_transform_many
from .positions import POSITION_LABELS
from .vectors import PlayerMatchVector, VectorLayout

A = ActionCategory

# Row order of the per-style summary table.
TABLE2_POSITION_ORDER = ("ST", "CM", "L/RW", "L/RFB", "CB")

DEFAULT_POSITION_ACTIONS = {
    "ST": ((A.SHOT, A.CROSS, A.DRIBBLE, A.PASS, A.KEY_PASS, A.HEADER), 4),
    "CM": ((A.DRIBBLE, A.PASS, A.LONG_PASS, A.RECOVERY, A.HEADER, A.KEY_PASS), 4),
    "L/RW": ((A.SHOT, A.CROSS, A.DRIBBLE, A.PASS, A.KEY_PASS), 3),
    "L/RFB": ((A.CROSS, A.DRIBBLE, A.PASS, A.RECOVERY, A.INTERCEPTION), 4),
    "CB": ((A.DRIBBLE, A.PASS, A.LONG_PASS, A.HEADER, A.CLEARANCE, A.INTERCEPTION), 3),
}

TABLE2_COLUMNS = ("Position", "Style", "Total", "Domestic", "Foreign",
                  "Rating", "Rating SD", "Goals", "Goals SD", "Shots", "Shots SD",
                  "Assists", "Assists SD", "Win/Loss")


class StyleError(ValueError):
    pass


@dataclass
class PositionActionConfig:
    """Which action categories feed each position's style NMF, and how many styles."""

    positions: dict = field(default_factory=lambda: dict(DEFAULT_POSITION_ACTIONS))

    def __post_init__(self):
        self.positions = {
            pos: (tuple(A.parse(c) for c in cats), int(n))
            for pos, (cats, n) in self.positions.items()
        }

    @classmethod
    def from_dict(cls, data: Optional[Mapping]):
        if not data:
            return cls()
        return cls({pos: (spec["actions"], spec["styles"]) for pos, spec in data.items()})

    def to_dict(self):
        return {pos: {"actions": [c.value for c in cats], "styles": n}
                for pos, (cats, n) in self.positions.items()}

    @property
    def total_styles(self):
        return sum(n for _, n in self.positions.values())


@dataclass(frozen=True)
class StyleRule:
    position: str
    name: str
    signature: tuple  # slot codes the style prefers


def _rules(position, *rows):
    return [StyleRule(position, name, tuple(sig.split())) for name, sig in rows]


DEFAULT_STYLE_RULES = tuple(
    _rules("ST",
           ("Poacher", "CS FH"),
           ("Second Striker", "LS CD CP"),
           ("Mobile Striker", "RS LtS RBC LBC RFD LFD RFP LFP"),
           ("Target Man", "MFH"))
    + _rules("CM",
             ("Playmaker", "CD CP CLP"),
             ("L Defensive Midfielder", "LBD LBP LBLP LBR"),
             ("R Defensive Midfielder", "RBD RBP RBLP RBR"),
             ("Wide Midfielder", "RFD LFD RFP LFP RFLP LFLP RFR LFR MFH"))
    + _rules("L/RW",
             ("Inside Forward", "CD CP CS LS"),
             ("L Winger", "LFC LBC LFD LFP"),
             ("R Winger", "RFC RBC RFD RFP"))
    + _rules("L/RFB",
             ("L Wing Back", "LFD LFP LFC LBC"),
             ("R Wing Back", "RFD RFP RFC RBC"),
             ("L Back", "LBD LBP LBR"),
             ("R Back", "RBD RBP RBR"))
    + _rules("CB",
             ("L Ball Playing Defender", "LBD LBP LBLP"),
             ("R Ball Playing Defender", "RBD RBP RBLP"),
             ("Central Defender", "BH MC LC IC RC"))
)


@dataclass
class StyleStats:
    n: int = 0
    n_domestic: int = 0
    n_foreign: int = 0
    rating_mean: float = math.nan
    rating_sd: float = math.nan
    goals_mean: float = math.nan
    goals_sd: float = math.nan
    shots_mean: float = math.nan
    shots_sd: float = math.nan
    assists_mean: float = math.nan
    assists_sd: float = math.nan
    wins: int = 0
    draws: int = 0
    losses: int = 0
    start_positions: dict = field(default_factory=dict)

    @property
    def win_loss(self):
        if self.losses:
            return self.wins / self.losses
        return math.inf if self.wins else math.nan

    def frequent_start_positions(self, threshold=100):
        return {p: c for p, c in self.start_positions.items() if c > threshold}

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "n", "n_domestic", "n_foreign", "rating_mean", "rating_sd", "goals_mean",
            "goals_sd", "shots_mean", "shots_sd", "assists_mean", "assists_sd",
            "wins", "draws", "losses")}
        out["win_loss"] = self.win_loss
        out["start_positions"] = dict(sorted(self.start_positions.items()))
        return {k: _json_float(v) for k, v in out.items()}


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _from_json_float(v):
    return float(v) if isinstance(v, str) else v


@dataclass
class PositionStyles:
    position: str
    categories: tuple
    slot_codes: tuple
    slot_indices: tuple
    model: FactorModel
    names: list = field(default_factory=list)
    stats: list = field(default_factory=list)

    @property
    def k(self):
        return self.model.k

    @property
    def components(self):
        """``(k, d')`` style components over this position's slots."""
        return self.model.W.T


@dataclass
class StyleCatalog:
    positions: dict = field(default_factory=dict)

    @property
    def total_styles(self):
        return sum(p.k for p in self.positions.values())

    def style_name(self, position, style_id):
        names = self.positions[position].names
        return names[style_id] if names else f"Style-{position}-{style_id}"

    def to_dict(self):
        out = {}
        for pos, ps in self.positions.items():
            out[pos] = {
                "categories": [c.value for c in ps.categories],
                "slot_codes": list(ps.slot_codes),
                "slot_indices": list(ps.slot_indices),
                "k": ps.k,
                "components": [[float(x) for x in row] for row in ps.model.W.T],
                "names": list(ps.names),
                "stats": [s.to_dict() for s in ps.stats],
                "nmf": {k: v for k, v in ps.model.metadata().items() if k != "objective_trace"},
                "objective": float(ps.model.objective_trace[-1]) if ps.model.objective_trace else None,
            }
        return {"positions": out}

    @classmethod
    def from_dict(cls, data):
        positions = {}
        for pos, d in data["positions"].items():
            W = np.array(d["components"], dtype=np.float64).T
            model = FactorModel(W, np.zeros((d["k"], 0)), d["k"], category=pos,
                                seed=d["nmf"].get("seed", 0))
            stats = []
            for s in d.get("stats", []):
                s = dict(s)
                s.pop("win_loss", None)
                stats.append(StyleStats(**{k: _from_json_float(v) for k, v in s.items()}))
            positions[pos] = PositionStyles(
                pos, tuple(A.parse(c) for c in d["categories"]), tuple(d["slot_codes"]),
                tuple(d["slot_indices"]), model, list(d["names"]), stats)
        return cls(positions)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def sub_vectors(vectors: Sequence, indices):
    """Columns of the position's slots, shape ``(d', l)``."""
    arr = np.array([pv.v if isinstance(pv, PlayerMatchVector) else pv for pv in vectors],
                   dtype=np.float64)
    return np.ascontiguousarray(arr[:, list(indices)].T)


def fit_styles(vectors_by_position: Mapping, layout: VectorLayout,
               cfg: Optional[PositionActionConfig] = None, opts: Optional[NMFOptions] = None,
               seeds: Optional[Mapping] = None):
    """Fit one style NMF per position on that position's slot subset.

    ``seeds`` optionally overrides ``opts.seed`` per position.
    """
    cfg = cfg or PositionActionConfig()
    opts = opts or NMFOptions()
    catalog = StyleCatalog()
    for pos, (cats, n_styles) in cfg.positions.items():
        group = vectors_by_position.get(pos, [])
        if len(group) == 0:
            raise StyleError(f"no player-matches for position {pos}")
        if len(group) < n_styles:
            raise StyleError(f"position {pos} has {len(group)} samples for {n_styles} styles")
        idx = tuple(layout.indices(cats))
        X = sub_vectors(group, idx)
        pos_opts = NMFOptions(**{**opts.to_dict(), "seed": (seeds or {}).get(pos, opts.seed)})
        model = nmf_fit(X, n_styles, pos_opts, category=pos)
        catalog.positions[pos] = PositionStyles(
            pos, cats, tuple(layout.slots[i].code for i in idx), idx, model)
    return catalog


def style_scores(catalog_or_ps, vectors, position=None):
    """Transformed style weights ``(k, l)`` of vectors under one position's model."""
    ps = catalog_or_ps.positions[position] if position is not None else catalog_or_ps
    X = sub_vectors(vectors, ps.slot_indices)
    return nmf_transform_many(ps.model, X)


def assign_style(v, catalog: StyleCatalog, position=None):
    """Most similar style of one player-match: ``(style_id, degenerate)``.

    ``v`` is a :class:`PlayerMatchVector` (its ``position_label`` is used unless
    ``position`` is given) or a bare vector with ``position``.
    """
    if position is None:
        position = getattr(v, "position_label", None)
    if position not in catalog.positions:
        raise StyleError(f"position {position!r} not in style catalog")
    scores = style_scores(catalog, [v], position)[:, 0]
    if not scores.any():
        return 0, True
    return int(np.argmax(scores)), False


def assign_styles(vectors: Sequence[PlayerMatchVector], catalog: StyleCatalog):
    """Style id and degenerate flag for every vector, batched per position."""
    out = [None] * len(vectors)
    by_pos = {}
    for i, pv in enumerate(vectors):
        if pv.position_label not in catalog.positions:
            raise StyleError(f"position {pv.position_label!r} not in style catalog")
        by_pos.setdefault(pv.position_label, []).append(i)
    for pos, idx in by_pos.items():
        scores = style_scores(catalog, [vectors[i] for i in idx], pos)
        for col, i in enumerate(idx):
            s = scores[:, col]
            out[i] = (int(np.argmax(s)), False) if s.any() else (0, True)
    return out


def _mean_sd(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    mean = arr.sum() / arr.size
    return float(mean), float(np.sqrt(((arr - mean) ** 2).sum() / arr.size))


def compute_stats(records: Sequence):
    """Aggregates of one style's player-match records (population SD)."""
    st = StyleStats(n=len(records))
    st.n_domestic = sum(r.nationality_class == "domestic" for r in records)
    st.n_foreign = sum(r.nationality_class == "foreign" for r in records)
    st.rating_mean, st.rating_sd = _mean_sd([r.rating for r in records])
    st.goals_mean, st.goals_sd = _mean_sd([r.goals for r in records])
    st.shots_mean, st.shots_sd = _mean_sd([r.shots for r in records])
    st.assists_mean, st.assists_sd = _mean_sd([r.assists for r in records])
    outcomes = Counter(r.match_outcome for r in records)
    st.wins, st.draws, st.losses = outcomes["win"], outcomes["draw"], outcomes["loss"]
    st.start_positions = dict(sorted(Counter(r.start_position_label for r in records).items()))
    return st


def style_stats(assignments: Mapping, records: Mapping, catalog: StyleCatalog):
    """Fill ``catalog`` stats from ``{(match_id, player_id): (position, style_id)}``.

    ``records`` maps the same keys to :class:`PlayerMatchRecord`.
    """
    groups = {pos: [[] for _ in range(ps.k)] for pos, ps in catalog.positions.items()}
    for key, (pos, sid) in sorted(assignments.items()):
        rec = records.get(key)
        if rec is None:
            raise StyleError(f"no player-match record for {key}")
        groups[pos][sid].append(rec)
    for pos, ps in catalog.positions.items():
        ps.stats = [compute_stats(g) for g in groups[pos]]
    return catalog


def slot_shares(components):
    """Share of each slot's total weight held by each component, ``(k, d')``."""
    comps = np.asarray(components, dtype=np.float64)
    comps = comps / np.where(comps.sum(axis=1, keepdims=True) > 0,
                             comps.sum(axis=1, keepdims=True), 1.0)
    totals = comps.sum(axis=0, keepdims=True)
    return comps / np.where(totals > 0, totals, 1.0)


def name_components(position, slot_codes, components, rules=DEFAULT_STYLE_RULES, min_score=0.4):
    """Names for one position's style components.

    A rule's score for a component is the component's mean share of the rule's
    signature slots. Names are matched one-to-one to maximise the total score;
    pairs scoring below ``min_score`` fall back to ``Style-<position>-<i>``.
    """
    comps = np.asarray(components, dtype=np.float64)
    k = comps.shape[0]
    fallback = [f"Style-{position}-{i}" for i in range(k)]
    pos_rules = [r for r in rules if r.position == position]
    if not pos_rules or k == 0:
        return fallback
    shares = slot_shares(comps)
    col = {code: i for i, code in enumerate(slot_codes)}
    score = np.zeros((k, len(pos_rules)))
    for j, rule in enumerate(pos_rules):
        idx = [col[c] for c in rule.signature if c in col]
        if idx:
            score[:, j] = shares[:, idx].mean(axis=1)
    rows, cols = linear_sum_assignment(-score)
    names = list(fallback)
    for r, c in zip(rows, cols):
        if score[r, c] >= min_score:
            names[r] = pos_rules[c].name
    return names


def name_styles(catalog: StyleCatalog, rules=DEFAULT_STYLE_RULES, min_score=0.4):
    for pos, ps in catalog.positions.items():
        ps.names = name_components(pos, ps.slot_codes, ps.components, rules, min_score)
    return catalog


def _ordered_positions(catalog):
    known = [p for p in TABLE2_POSITION_ORDER if p in catalog.positions]
    return known + sorted(p for p in catalog.positions if p not in known)


def table2_rows(catalog: StyleCatalog):
    rows = []
    for pos in _ordered_positions(catalog):
        ps = catalog.positions[pos]
        for sid in range(ps.k):
            st = ps.stats[sid] if ps.stats else StyleStats()
            rows.append([pos, catalog.style_name(pos, sid), st.n, st.n_domestic, st.n_foreign,
                         st.rating_mean, st.rating_sd, st.goals_mean, st.goals_sd,
                         st.shots_mean, st.shots_sd, st.assists_mean, st.assists_sd,
                         st.win_loss])
    return rows


def write_table2(path, catalog: StyleCatalog):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE2_COLUMNS)
        for row in table2_rows(catalog):
            w.writerow([x if isinstance(x, (str, int)) else format_float(x) for x in row])


def write_start_positions(path, catalog: StyleCatalog, threshold=100):
    """Start-position breakdown per style, keeping positions seen more than ``threshold`` times."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Position", "Style", "Total", "Start Position", "Count"])
        for pos in _ordered_positions(catalog):
            ps = catalog.positions[pos]
            for sid, st in enumerate(ps.stats):
                for sp, count in st.frequent_start_positions(threshold).items():
                    w.writerow([pos, catalog.style_name(pos, sid), st.n, sp, count])


def read_table2(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        return list(r)


__all__ = [
    "POSITION_LABELS", "DEFAULT_POSITION_ACTIONS", "DEFAULT_STYLE_RULES",
    "PositionActionConfig", "StyleRule", "StyleStats", "PositionStyles", "StyleCatalog",
    "fit_styles", "assign_style", "assign_styles", "style_stats", "compute_stats",
    "name_components", "name_styles", "write_table2", "table2_rows",
]
