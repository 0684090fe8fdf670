"""Synthetic seasons with planted positions and playing styles.

Every outfield starter is bound to one archetype for the season. An archetype
fixes how many actions of each category the player makes per 90 minutes and
where: each category is a mixture of isotropic Gaussians, by default centred on
the anchors of the named vector slots. Files come out in the ingestion formats
together with a truth file naming each eligible player-match's planted
position and style.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .events import (ActionCategory, MatchEvent, PitchPoint, PlayerMatchRecord, RawEventType,
                     write_events, write_records)
from .vectors import DEFAULT_SLOTS

A = ActionCategory
_ANCHORS = {s.code: s.anchor for s in DEFAULT_SLOTS}

# Raw event name used for each category; key passes are passes with a Keypass result.
_RAW_NAME = {
    A.SHOT: "Shot", A.CROSS: "Cross", A.DRIBBLE: "TakeOn", A.PASS: "Simple pass",
    A.LONG_PASS: "Long pass", A.KEY_PASS: "Simple pass", A.INTERCEPTION: "Interception",
    A.CLEARANCE: "Clearance", A.HEADER: "Aerial duel", A.RECOVERY: "Ball recovery",
}
# Untyped on-ball actions; they carry no category but follow the player's
# formation spot, as real touch maps do.
_TOUCHES = ("Touch", "Tackle", "Defensive duel", "Foul conceded")

TRUTH_COLUMNS = ("player_id", "match_id", "position", "style")


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class Spot:
    x: float
    y: float
    weight: float = 1.0
    sd: float = 3.0

    def mirrored(self):
        return Spot(self.x, 100.0 - self.y, self.weight, self.sd)


@dataclass(frozen=True)
class ArchetypeSpec:
    position: str
    style: str
    side: str  # "C", "L", "R" or "both" (a left-side spec mirrored for right slots)
    rates: dict  # category -> actions per 90 minutes
    spots: dict  # category -> tuple of Spot
    rating: tuple = (6.8, 0.6)  # mean, sd
    goal_prob: float = 0.1  # per shot
    assist_prob: float = 0.1  # per key pass
    foreign_share: float = 0.15
    outcome_bias: float = 0.0

    def validate(self):
        if self.side not in ("C", "L", "R", "both"):
            raise SynthError(f"{self.style}: side must be C, L, R or both")
        for cat, rate in self.rates.items():
            if not rate >= 0:
                raise SynthError(f"{self.style}: negative rate for {cat}")
            if rate > 0 and not self.spots.get(cat):
                raise SynthError(f"{self.style}: no spots for {cat}")
        for cat, spots in self.spots.items():
            for s in spots:
                if not (0 <= s.x <= 100 and 0 <= s.y <= 100) or s.weight < 0 or s.sd < 0:
                    raise SynthError(f"{self.style}: invalid spot {s} for {cat}")
        if not 0 <= self.foreign_share <= 1:
            raise SynthError(f"{self.style}: foreign_share outside [0, 1]")
        return self

    def mirrored(self):
        return replace(self, spots={c: tuple(s.mirrored() for s in ss)
                                    for c, ss in self.spots.items()})

    def mean_location(self):
        """Rate-weighted mean of all categorised actions."""
        tot = np.zeros(2)
        mass = 0.0
        for cat, rate in self.rates.items():
            spots = self.spots.get(cat, ())
            w = np.array([s.weight for s in spots])
            if rate == 0 or w.sum() == 0:
                continue
            xy = np.array([[s.x, s.y] for s in spots])
            mult = 2 if cat is A.KEY_PASS else 1  # key passes also count as passes
            tot += mult * rate * (w / w.sum()) @ xy
            mass += mult * rate
        return tot / mass if mass else np.array([50.0, 50.0])


def _mix(spec: str, sd=3.0):
    """``"CS:.8 LS:.2"`` -> spots at those slot anchors; ``"x,y:w"`` for raw points."""
    out = []
    for token in spec.split():
        loc, _, w = token.partition(":")
        weight = float(w) if w else 1.0
        if "," in loc:
            x, y = (float(v) for v in loc.split(","))
        else:
            x, y = _ANCHORS[loc]
        out.append(Spot(x, y, weight, sd))
    return tuple(out)


def archetype(position, style, side, table, **kw):
    """Build a spec from ``{category: (rate, "slot:weight ...")}``."""
    rates = {A.parse(c): float(r) for c, (r, _) in table.items()}
    spots = {A.parse(c): _mix(s) for c, (_, s) in table.items()}
    return ArchetypeSpec(position, style, side, rates, spots, **kw).validate()


# Off-ball background per position, kept on the player's own zone so average
# positions stay tight per position.
_ST_BASE = {"Recovery": (0.5, "RFR LFR"), "Interception": (0.3, "RFI LFI")}
_W_BASE = {"Recovery": (2, "LFR"), "Interception": (1, "LFI")}
_CM_BASE = {"Interception": (4, "RFI LFI"), "Shot": (0.3, "LS"), "Clearance": (0.5, "MC")}
_FB_BASE = {"LongPass": (3, "LBLP:.5 LFLP:.5"), "Header": (1, "LBH"), "Clearance": (3, "LC")}
_CB_BASE = {"Recovery": (2, "LBR RBR")}


def _with(base, table):
    out = dict(base)
    out.update(table)
    return out


_LEFT_ARCHETYPES = (
    # strikers
    archetype("ST", "Poacher", "C", _with(_ST_BASE, {
        "Shot": (6, "CS"), "Header": (5, "FH"), "Pass": (3, "CP"),
        "Dribble": (1, "CD"), "KeyPass": (0.5, "RKP LKP"), "Cross": (0.5, "RBC LBC")}),
        rating=(6.9, 0.6), goal_prob=0.2, foreign_share=0.5, outcome_bias=0.1),
    archetype("ST", "Second Striker", "C", _with(_ST_BASE, {
        "Shot": (5, "LS"), "Dribble": (7, "CD"), "Pass": (9, "CP"),
        "KeyPass": (4, "RKP LKP"), "Header": (0.5, "FH:.5 MFH:.5")}),
        rating=(6.8, 0.6), goal_prob=0.08, foreign_share=0.4),
    archetype("ST", "Mobile Striker", "C", _with(_ST_BASE, {
        "Shot": (4, "RS LtS"), "Cross": (3, "RBC LBC"), "Dribble": (6, "RFD LFD"),
        "Pass": (6, "RFP LFP"), "KeyPass": (2, "RKP LKP"), "Header": (1.5, "FH")}),
        rating=(6.8, 0.6), goal_prob=0.1, foreign_share=0.3),
    archetype("ST", "Target Man", "C", _with(_ST_BASE, {
        "Header": (9, "MFH"), "Shot": (3, "CS"),
        "Pass": (5, "CP:.2 RFP:.4 LFP:.4"), "Dribble": (0.5, "CD"), "KeyPass": (0.5, "RKP LKP")}),
        rating=(6.7, 0.6), goal_prob=0.12, foreign_share=0.3),
    # wingers; "both" specs are written for the left side
    archetype("L/RW", "Inside Forward", "both", _with(_W_BASE, {
        "Shot": (4, "LS:.5 CS:.5"), "Dribble": (7, "CD:.85 LFD:.15"),
        "Pass": (10, "CP:.8 LFP:.2"), "KeyPass": (2, "LKP"), "Cross": (0.5, "LBC"),
        "Recovery": (5, "LFR"), "Interception": (3, "LFI")}),
        rating=(6.9, 0.6), goal_prob=0.12, foreign_share=0.4, outcome_bias=0.05),
    archetype("L/RW", "L Winger", "L", _with(_W_BASE, {
        "Cross": (6, "LFC:.4 LBC:.6"), "Dribble": (7, "LFD"), "Pass": (8, "LFP"),
        "KeyPass": (2, "LKP LFKP"), "Shot": (2, "LtS")}),
        rating=(6.8, 0.6), goal_prob=0.08, foreign_share=0.2),
    # central midfielders
    archetype("CM", "Playmaker", "C", _with(_CM_BASE, {
        "Pass": (25, "CP"), "LongPass": (6, "CLP"), "Dribble": (4, "CD"),
        "KeyPass": (2, "RFKP LFKP"), "Recovery": (4, "RFR LFR"), "Header": (1, "MFH")}),
        rating=(7.0, 0.5), goal_prob=0.05, assist_prob=0.15, foreign_share=0.3,
        outcome_bias=0.1),
    archetype("CM", "L Defensive Midfielder", "C", _with(_CM_BASE, {
        "Pass": (20, "LBP:.75 CP:.25"), "LongPass": (5, "LBLP:.8 CLP:.2"),
        "Dribble": (3, "LBD:.8 CD:.2"), "Recovery": (6, "LBR:.6 LFR:.2 RFR:.2"),
        "Header": (2, "MFH"), "KeyPass": (1, "RFKP LFKP")}),
        rating=(6.8, 0.5), goal_prob=0.03, foreign_share=0.1),
    archetype("CM", "R Defensive Midfielder", "C", _with(_CM_BASE, {
        "Pass": (20, "RBP:.75 CP:.25"), "LongPass": (5, "RBLP:.8 CLP:.2"),
        "Dribble": (3, "RBD:.8 CD:.2"), "Recovery": (6, "RBR:.6 LFR:.2 RFR:.2"),
        "Header": (2, "MFH"), "KeyPass": (1, "RFKP LFKP")}),
        rating=(6.8, 0.5), goal_prob=0.03, foreign_share=0.1),
    archetype("CM", "Wide Midfielder", "C", _with(_CM_BASE, {
        "Pass": (18, "RFP LFP"), "LongPass": (6, "RFLP LFLP"), "Dribble": (4, "RFD LFD"),
        "Recovery": (6, "RFR LFR"), "Header": (0.5, "MFH"), "KeyPass": (0.5, "RFKP LFKP")}),
        rating=(6.7, 0.5), goal_prob=0.05, foreign_share=0.15),
    # full backs
    archetype("L/RFB", "L Wing Back", "L", _with(_FB_BASE, {
        "Cross": (4, "LFC:.6 LBC:.4"), "Dribble": (4, "LFD"),
        "Pass": (14, "LFP:.6 LBP:.4"), "Recovery": (5, "LFR:.6 LBR:.4"),
        "Interception": (4, "LFI:.8 LBI:.2")}),
        rating=(6.8, 0.5), goal_prob=0.03, foreign_share=0.1),
    archetype("L/RFB", "L Back", "L", _with(_FB_BASE, {
        "Cross": (1, "LFC"), "Dribble": (3, "LBD"), "Pass": (16, "LBP"),
        "Recovery": (6, "LBR"), "Interception": (4, "LBI:.6 LFI:.4")}),
        rating=(6.7, 0.5), goal_prob=0.02, foreign_share=0.05),
    # centre backs
    archetype("CB", "L Ball Playing Defender", "C", _with(_CB_BASE, {
        "Pass": (14, "LBP:.7 RBP:.3"), "LongPass": (7, "LBLP:.7 RBLP:.3"), "Dribble": (3, "LBD"),
        "Header": (5, "BH:.7 LBH:.3"), "Clearance": (5, "MC:.4 IC:.5 LC:.1"),
        "Interception": (3, "LBI:.5 RBI:.5")}),
        rating=(6.8, 0.5), goal_prob=0.03, foreign_share=0.2),
    archetype("CB", "R Ball Playing Defender", "C", _with(_CB_BASE, {
        "Pass": (14, "RBP:.7 LBP:.3"), "LongPass": (7, "RBLP:.7 LBLP:.3"), "Dribble": (3, "RBD"),
        "Header": (5, "BH:.7 RBH:.3"), "Clearance": (5, "MC:.4 IC:.5 RC:.1"),
        "Interception": (3, "RBI:.5 LBI:.5")}),
        rating=(6.8, 0.5), goal_prob=0.03, foreign_share=0.2),
    archetype("CB", "Central Defender", "C", _with(_CB_BASE, {
        "Pass": (10, "LBP:.3 RBP:.3 CP:.4"), "LongPass": (5, "CLP"), "Dribble": (1, "LBD RBD"),
        "Header": (7, "BH:.8 LBH:.1 RBH:.1"), "Clearance": (7, "MC:.3 IC:.4 LC:.15 RC:.15"),
        "Interception": (3, "LBI RBI")}),
        rating=(6.7, 0.5), goal_prob=0.04, foreign_share=0.15),
)


def right_side(spec: ArchetypeSpec, style):
    return replace(spec.mirrored(), style=style, side="R")


_BY_STYLE = {a.style: a for a in _LEFT_ARCHETYPES}
DEFAULT_ARCHETYPES = _LEFT_ARCHETYPES + (
    right_side(_BY_STYLE["L Winger"], "R Winger"),
    right_side(_BY_STYLE["L Wing Back"], "R Wing Back"),
    right_side(_BY_STYLE["L Back"], "R Back"),
)

# Starting eleven: slot name, planted position, side, start-position label and
# the formation spot the player's untyped touches centre on.
LINEUP = (
    ("ST1", "ST", "C", "FW", (80.0, 50.0)), ("ST2", "ST", "C", "FW", (80.0, 50.0)),
    ("LW", "L/RW", "L", "L/RM", (70.0, 88.0)), ("RW", "L/RW", "R", "L/RM", (70.0, 12.0)),
    ("CM1", "CM", "C", "MF", (50.0, 50.0)), ("CM2", "CM", "C", "MF", (50.0, 50.0)),
    ("LFB", "L/RFB", "L", "L/RD", (35.0, 88.0)), ("RFB", "L/RFB", "R", "L/RD", (35.0, 12.0)),
    ("CB1", "CB", "C", "CD", (20.0, 50.0)), ("CB2", "CB", "C", "CD", (20.0, 50.0)),
)


@dataclass
class SynthConfig:
    n_teams: int = 14
    rounds: Optional[int] = None  # default: double round robin
    season: str = "2025"
    seed: int = 0
    early_sub_rate: float = 0.02  # starters withdrawn before minute 45
    late_sub_rate: float = 0.3
    side_switch_rate: float = 0.01  # wide starters swapping flanks at half time
    bench_size: int = 3
    touch_rate: float = 60.0  # untyped actions per 90 minutes around the formation spot
    touch_sd: float = 8.0

    @classmethod
    def from_dict(cls, data: Optional[Mapping]):
        return cls(**dict(data or {}))

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SyntheticSeason:
    events: list
    records: list
    truth: list  # (player_id, match_id, position, style)
    players: dict = field(default_factory=dict)  # player_id -> (team, slot, style)


def round_robin(n_teams, rounds=None):
    """Circle-method fixtures: list of rounds, each a list of (home, away) team indices."""
    if n_teams < 2:
        raise SynthError("need at least two teams")
    teams = list(range(n_teams)) + ([None] if n_teams % 2 else [])
    n = len(teams)
    single = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = teams[i], teams[n - 1 - i]
            if a is not None and b is not None:
                pairs.append((a, b) if r % 2 == 0 else (b, a))
        single.append(pairs)
        teams = [teams[0], teams[-1]] + teams[1:-1]
    full = single + [[(b, a) for a, b in rnd] for rnd in single]
    if rounds is not None:
        full = [full[i % len(full)] for i in range(rounds)]
    return full


def _candidates(specs, position, side):
    if side == "C":
        return [s for s in specs if s.position == position and s.side == "C"]
    return [s for s in specs if s.position == position and s.side in (side, "both")]


def build_squads(specs: Sequence[ArchetypeSpec], n_teams, rng):
    """Fixed starting elevens (plus keeper and bench) per team, archetypes rotated."""
    squads = []
    players = {}
    for t in range(n_teams):
        team = f"T{t + 1:02d}"
        squad = []
        pos_seen = {}
        for slot, position, side, start_label, spot in LINEUP:
            cands = _candidates(specs, position, side)
            if not cands:
                raise SynthError(f"no archetype for {position} ({side} side)")
            i = pos_seen.get((position, side), 0)
            pos_seen[(position, side)] = i + 1
            n_slots = sum(1 for s in LINEUP if s[1] == position and s[2] == side)
            spec = cands[(t * n_slots + i) % len(cands)]
            if spec.side == "both" and side == "R":
                spec = spec.mirrored()
            pid = f"{team}-{slot}"
            foreign = bool(rng.random() < spec.foreign_share)
            squad.append((pid, slot, position, start_label, spec, foreign, spot))
            players[pid] = (team, slot, spec.style)
        squad.append((f"{team}-GK", "GK", "GK", "GK", None, False, (5.0, 50.0)))
        squads.append((team, squad))
    return squads, players


def _spot_events(spec: ArchetypeSpec, minutes_on, minutes_off, rng):
    """Categorised actions of one player-match as (category, minute, x, y) tuples."""
    span = minutes_off - minutes_on
    out = []
    for cat in A:
        rate = spec.rates.get(cat, 0.0)
        if rate <= 0 or span <= 0:
            continue
        n = rng.poisson(rate * span / 90.0)
        if n == 0:
            continue
        spots = spec.spots[cat]
        w = np.array([s.weight for s in spots])
        which = rng.choice(len(spots), size=n, p=w / w.sum())
        minute = rng.uniform(minutes_on, minutes_off, size=n)
        xy = np.array([[spots[i].x, spots[i].y] for i in which])
        sd = np.array([spots[i].sd for i in which])
        xy = np.clip(xy + rng.standard_normal((n, 2)) * sd[:, None], 0.0, 100.0)
        out.extend((cat, float(m), float(x), float(y)) for m, (x, y) in zip(minute, xy))
    return out


def _outcome(home_strength, away_strength, rng):
    diff = home_strength - away_strength + 0.1
    p_home = 0.375 + 0.5 * np.tanh(diff) * 0.5
    p_draw = 0.25
    u = rng.random()
    if u < p_home:
        return "win", "loss"
    if u < p_home + p_draw:
        return "draw", "draw"
    return "loss", "win"


def _minutes(cfg: SynthConfig, rng):
    u = rng.random()
    if u < cfg.early_sub_rate:
        return float(np.round(rng.uniform(15.0, 44.0), 1))
    if u < cfg.early_sub_rate + cfg.late_sub_rate:
        return float(np.round(rng.uniform(60.0, 89.0), 1))
    return 90.0


def _make_events(match_id, team, pid, spec, spot, on, off, rng, cfg: SynthConfig, switch=False):
    """Events of one player-match; with ``switch`` the second half runs on the other flank."""
    evs = []
    for cat, minute, x, y in _spot_events(spec, on, off, rng):
        result = ""
        if cat is A.SHOT:
            result = "Goal" if rng.random() < spec.goal_prob else (
                "On target" if rng.random() < 0.4 else "Off target")
        elif cat is A.KEY_PASS:
            result = "Assist" if rng.random() < spec.assist_prob else "Keypass"
        elif cat in (A.PASS, A.LONG_PASS, A.CROSS, A.DRIBBLE):
            result = "Successful" if rng.random() < 0.75 else "Unsuccessful"
        evs.append((minute, _RAW_NAME[cat], result, x, y))
    n = rng.poisson(cfg.touch_rate * max(off - on, 0) / 90.0)
    kinds = rng.integers(len(_TOUCHES), size=n)
    minutes = rng.uniform(on, off, size=n)
    xy = np.clip(np.asarray(spot) + rng.standard_normal((n, 2)) * cfg.touch_sd, 0.0, 100.0)
    for kind, minute, (x, y) in zip(kinds, minutes, xy):
        evs.append((float(minute), _TOUCHES[int(kind)], "", float(x), float(y)))
    out = []
    for minute, name, result, x, y in sorted(evs, key=lambda e: e[0]):
        minute = round(minute, 1)
        half = 1 if minute < 45.0 else 2
        if switch and half == 2:
            y = 100.0 - y
        raw = RawEventType(name, result, "")
        out.append(MatchEvent(match_id, pid, team, minute, half, raw, None,
                              PitchPoint(round(x, 2), round(y, 2))))
    return out


def generate_season(specs: Optional[Sequence[ArchetypeSpec]] = None,
                    cfg: Optional[SynthConfig] = None):
    """Simulate one season. Deterministic for a fixed config and seed."""
    specs = list(DEFAULT_ARCHETYPES if specs is None else specs)
    if not specs:
        raise SynthError("no archetypes given")
    for s in specs:
        s.validate()
    cfg = cfg or SynthConfig()
    squads, players = build_squads(specs, cfg.n_teams, np.random.default_rng([cfg.seed, 0]))
    fixtures = round_robin(cfg.n_teams, cfg.rounds)
    events, records, truth = [], [], []
    nationality = {}
    mi = 0
    for rnd in fixtures:
        for home, away in rnd:
            mi += 1
            match_id = f"M{mi:04d}"
            rng = np.random.default_rng([cfg.seed, 1, mi])
            strength = [sum(p[4].outcome_bias for p in squads[t][1] if p[4] is not None)
                        for t in (home, away)]
            outcomes = _outcome(strength[0], strength[1], rng)
            for side_idx, t in enumerate((home, away)):
                team, squad = squads[t]
                outcome = outcomes[side_idx]
                bench = iter(range(1, cfg.bench_size + 1))
                for pid, slot, position, start_label, spec, foreign, spot in squad:
                    nationality[pid] = "foreign" if foreign else "domestic"
                    if spec is None:  # keeper: records only
                        records.append(PlayerMatchRecord(
                            match_id, pid, 90.0, "GK", round(float(rng.normal(6.6, 0.5)), 2),
                            0, 0, 0, nationality[pid], outcome, team, cfg.season, True))
                        continue
                    minutes = _minutes(cfg, rng)
                    switch = (position in ("L/RW", "L/RFB") and minutes > 45
                              and rng.random() < cfg.side_switch_rate)
                    evs = _make_events(match_id, team, pid, spec, spot, 0.0, minutes, rng, cfg,
                                       switch)
                    events.extend(evs)
                    shots = sum(e.raw_type.name == "Shot" for e in evs)
                    goals = sum(e.raw_type.result == "Goal" for e in evs)
                    assists = sum(e.raw_type.result == "Assist" for e in evs)
                    mean, sd = spec.rating
                    bonus = 0.4 * goals + 0.3 * assists + {"win": 0.3, "draw": 0.0, "loss": -0.3}[outcome]
                    rating = round(float(np.clip(rng.normal(mean + bonus, sd), 3.0, 10.0)), 2)
                    records.append(PlayerMatchRecord(
                        match_id, pid, minutes, start_label, rating, goals, shots, assists,
                        nationality[pid], outcome, team, cfg.season, True))
                    if minutes > 45:
                        truth.append((pid, match_id, position, spec.style))
                    else:
                        sub = next(bench, None)
                        if sub is not None:
                            _add_substitute(match_id, team, f"{team}-SUB{sub}", start_label,
                                            spec, spot, minutes, outcome, cfg, rng, events,
                                            records, nationality)
    return SyntheticSeason(events, records, truth, players)


def _add_substitute(match_id, team, pid, start_label, spec, spot, on, outcome, cfg, rng, events,
                    records, nationality):
    nationality.setdefault(pid, "domestic")
    evs = _make_events(match_id, team, pid, spec, spot, on, 90.0, rng, cfg)
    events.extend(evs)
    records.append(PlayerMatchRecord(
        match_id, pid, round(90.0 - on, 1), start_label, round(float(rng.normal(6.5, 0.4)), 2),
        sum(e.raw_type.result == "Goal" for e in evs), sum(e.raw_type.name == "Shot" for e in evs),
        sum(e.raw_type.result == "Assist" for e in evs), nationality[pid], outcome, team,
        cfg.season, False))


def write_truth(path, truth):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_COLUMNS)
        w.writerows(truth)


def read_truth(path):
    """``{(match_id, player_id): (position, style)}``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != TRUTH_COLUMNS:
            raise SynthError(f"{path}: unexpected truth header {header}")
        return {(m, p): (pos, style) for p, m, pos, style in r}


def write_season(out_dir, season: SyntheticSeason, paths: Optional[Mapping] = None):
    """Write the events, records and truth files; returns their paths.

    Files go to ``out_dir`` as events.csv, records.csv and truth.csv unless
    ``paths`` names each one.
    """
    if paths is None:
        out = Path(out_dir)
        paths = {"events": out / "events.csv", "records": out / "records.csv",
                 "truth": out / "truth.csv"}
    paths = {k: Path(v) for k, v in paths.items()}
    for p in paths.values():
        p.parent.mkdir(parents=True, exist_ok=True)
    write_events(paths["events"], season.events)
    write_records(paths["records"], season.records)
    write_truth(paths["truth"], season.truth)
    return paths


def purity(true_labels: Sequence, predicted: Sequence):
    """Fraction of samples matching the majority true label of their predicted cluster."""
    if len(true_labels) != len(predicted):
        raise ValueError("label sequences differ in length")
    if not len(true_labels):
        return float("nan")
    groups = {}
    for t, p in zip(true_labels, predicted):
        groups.setdefault(p, {}).setdefault(t, 0)
        groups[p][t] += 1
    return sum(max(c.values()) for c in groups.values()) / len(true_labels)
