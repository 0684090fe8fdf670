"""Event vocabulary, pitch conventions and ingestion of raw event files.

Coordinates live on a normalised ``[0, 100]^2`` pitch. ``x`` runs along the
length from the player's own goal line (0) to the opponent's (100); ``y`` runs
across from the right touchline (0) to the left one (100), seen from the
attacking team. File layouts are documented in ``docs/formats.md``.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

log = logging.getLogger(__name__)


class IngestError(ValueError):
    """A raw record could not be turned into a valid event or player record."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where = f"{where}{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.path = path


class UnknownEventType(IngestError):
    pass


class ActionCategory(str, enum.Enum):
    SHOT = "Shot"
    CROSS = "Cross"
    DRIBBLE = "Dribble"
    PASS = "Pass"
    LONG_PASS = "LongPass"
    KEY_PASS = "KeyPass"
    INTERCEPTION = "Interception"
    CLEARANCE = "Clearance"
    HEADER = "Header"
    RECOVERY = "Recovery"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for cat in cls:
            if value == cat.value or value == cat.name:
                return cat
        raise ValueError(f"unknown action category {value!r}")


CATEGORIES = tuple(ActionCategory)

# Event names of the source taxonomy, in its table order.
EVENT_NAMES = (
    "Simple pass", "Long pass", "Throw in", "Goal kick", "Freekick pass",
    "Cross", "Freekick cross", "Corner cross",
    "Shot", "Freekick shot", "Penalty shot", "Corner shot",
    "Chance missed", "Offside", "Own goal",
    "Clearance", "Interception", "Tackle", "Defensive duel", "Blocked pass",
    "Blocked shot", "Defensive foul", "Offensive foul",
    "Red card", "Second yellow card", "Yellow card",
    "Aerial duel", "Shield ball out", "Ball recovery", "Offside provoked",
    "Foul conceded", "TakeOn", "Dribble", "Touch", "Dispossessed", "Error",
    "Keeper save", "Keeper pickup", "Penalty faced", "Keeper sweeper",
    "Keeper smother", "Keeper punch", "Keeper claim", "CrossNotClaimed",
)

EVENT_RESULTS = (
    "", "Assist", "Keypass", "Successful", "Unsuccessful", "Goal", "On target",
    "Off target", "On post", "Blocked", "Own goal", "Red card",
    "Second yellow card", "Yellow card",
)

EVENT_ATTRIBUTES = ("", "Through", "Simple", "Out box", "In box")

_CANON = {
    "name": {s.lower(): s for s in EVENT_NAMES},
    "result": {s.lower(): s for s in EVENT_RESULTS},
    "attribute": {s.lower(): s for s in EVENT_ATTRIBUTES},
}

PASS_FAMILY = (
    "Simple pass", "Long pass", "Freekick pass", "Throw in", "Goal kick",
    "Cross", "Freekick cross", "Corner cross",
)

DEFAULT_CATEGORY_TABLE = {name: None for name in EVENT_NAMES}
DEFAULT_CATEGORY_TABLE.update({
    "Shot": ActionCategory.SHOT,
    "Freekick shot": ActionCategory.SHOT,
    "Penalty shot": ActionCategory.SHOT,
    "Corner shot": ActionCategory.SHOT,
    "Cross": ActionCategory.CROSS,
    "Freekick cross": ActionCategory.CROSS,
    "Corner cross": ActionCategory.CROSS,
    "Simple pass": ActionCategory.PASS,
    "Freekick pass": ActionCategory.PASS,
    "Long pass": ActionCategory.LONG_PASS,
    "Dribble": ActionCategory.DRIBBLE,
    "TakeOn": ActionCategory.DRIBBLE,
    "Interception": ActionCategory.INTERCEPTION,
    "Blocked pass": ActionCategory.INTERCEPTION,
    "Clearance": ActionCategory.CLEARANCE,
    "Aerial duel": ActionCategory.HEADER,
    "Ball recovery": ActionCategory.RECOVERY,
})

START_POSITIONS = ("FW", "MF", "CD", "L/RM", "L/RD", "GK")


def _canonical(kind, value, line=None):
    key = (value or "").strip().lower()
    try:
        return _CANON[kind][key]
    except KeyError:
        if kind == "name":
            raise UnknownEventType(f"unknown event type {value!r}", line=line) from None
        raise IngestError(f"unknown event {kind} {value!r}", line=line) from None


@dataclass(frozen=True)
class PitchPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 100.0 and 0.0 <= self.y <= 100.0):
            raise ValueError(f"pitch point ({self.x}, {self.y}) outside [0, 100]^2")

    def mirrored(self):
        """The same spot seen from the other team (180 degree rotation)."""
        return PitchPoint(100.0 - self.x, 100.0 - self.y)


@dataclass(frozen=True)
class RawEventType:
    name: str
    result: str = ""
    attribute: str = ""

    @classmethod
    def parse(cls, name, result="", attribute="", line=None):
        return cls(
            _canonical("name", name, line),
            _canonical("result", result, line),
            _canonical("attribute", attribute, line),
        )


@dataclass
class CategoryMapping:
    """Raw event type to action category table; loadable from config.

    ``key_pass_results`` promote any pass-family event to a key pass; with
    ``key_pass_double_count`` the event also stays in its base category.
    """

    table: dict = field(default_factory=lambda: dict(DEFAULT_CATEGORY_TABLE))
    key_pass_results: tuple = ("Keypass", "Assist")
    key_pass_sources: tuple = PASS_FAMILY
    key_pass_double_count: bool = True
    include_throw_ins: bool = False

    def __post_init__(self):
        table = {}
        for name, cat in self.table.items():
            canon = _canonical("name", name)
            table[canon] = None if cat in (None, "", "None") else ActionCategory.parse(cat)
        for name in EVENT_NAMES:
            table.setdefault(name, None)
        if self.include_throw_ins and table["Throw in"] is None:
            table["Throw in"] = ActionCategory.PASS
        self.table = table
        self.key_pass_results = tuple(_canonical("result", r) for r in self.key_pass_results)
        self.key_pass_sources = tuple(_canonical("name", s) for s in self.key_pass_sources)

    @classmethod
    def from_dict(cls, data: Optional[Mapping]):
        if not data:
            return cls()
        data = dict(data)
        table = dict(DEFAULT_CATEGORY_TABLE)
        table.update(data.pop("table", {}) or {})
        for key in ("key_pass_results", "key_pass_sources"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(table=table, **data)

    def to_dict(self):
        return {
            "table": {k: (None if v is None else v.value) for k, v in sorted(self.table.items())},
            "key_pass_results": list(self.key_pass_results),
            "key_pass_sources": list(self.key_pass_sources),
            "key_pass_double_count": self.key_pass_double_count,
            "include_throw_ins": self.include_throw_ins,
        }

    def base_category(self, name):
        if name == "Throw in" and not self.include_throw_ins:
            return None
        return self.table[name]

    def categories(self, raw: RawEventType):
        """Every category the event contributes to, primary first."""
        base = self.base_category(raw.name)
        if raw.name in self.key_pass_sources and raw.result in self.key_pass_results:
            if self.key_pass_double_count and base is not None and base is not ActionCategory.KEY_PASS:
                return (ActionCategory.KEY_PASS, base)
            return (ActionCategory.KEY_PASS,)
        return () if base is None else (base,)


DEFAULT_MAPPING = CategoryMapping()


def map_raw_to_category(raw_type, mapping: CategoryMapping = DEFAULT_MAPPING):
    """Primary action category of a raw event type, or None when excluded."""
    if isinstance(raw_type, str):
        raw_type = RawEventType.parse(raw_type)
    elif raw_type.name not in mapping.table:
        raise UnknownEventType(f"unknown event type {raw_type.name!r}")
    cats = mapping.categories(raw_type)
    return cats[0] if cats else None


@dataclass(frozen=True)
class MatchEvent:
    match_id: str
    player_id: str
    team_id: str
    minute: float
    half: int
    raw_type: RawEventType
    category: Optional[ActionCategory]
    location: PitchPoint
    extra_categories: tuple = ()

    @property
    def categories(self):
        if self.category is None:
            return ()
        return (self.category,) + self.extra_categories


@dataclass(frozen=True)
class PlayerMatchRecord:
    match_id: str
    player_id: str
    minutes_played: float
    start_position_label: str
    rating: float
    goals: int
    shots: int
    assists: int
    nationality_class: str
    match_outcome: str
    team_id: str = ""
    season: str = ""
    started: bool = True


@dataclass
class IngestConfig:
    mapping: CategoryMapping = field(default_factory=CategoryMapping)
    clamp: bool = True
    clamp_tolerance: float = 0.5
    # "attacking": coordinates already point every team at x=100.
    # "infer": flip each (match, team, half) whose attacking actions sit at x<50.
    orientation: str = "attacking"

    @classmethod
    def from_dict(cls, data: Optional[Mapping]):
        data = dict(data or {})
        mapping = CategoryMapping.from_dict(data.pop("mapping", None))
        cfg = cls(mapping=mapping, **data)
        if cfg.orientation not in ("attacking", "infer"):
            raise ValueError(f"orientation must be 'attacking' or 'infer', got {cfg.orientation!r}")
        return cfg

    def to_dict(self):
        return {
            "mapping": self.mapping.to_dict(),
            "clamp": self.clamp,
            "clamp_tolerance": self.clamp_tolerance,
            "orientation": self.orientation,
        }


@dataclass
class IngestStats:
    lines: int = 0
    events: int = 0
    missing_location: int = 0
    clamped: int = 0
    flipped_groups: int = 0

    @property
    def warnings(self):
        return self.missing_location + self.clamped


EVENT_COLUMNS = ("match_id", "player_id", "team_id", "minute", "half",
                 "type", "result", "attribute", "x", "y")

RECORD_COLUMNS = ("season", "match_id", "team_id", "player_id", "started",
                  "minutes_played", "start_position", "rating", "goals", "shots",
                  "assists", "nationality", "outcome")


def _check_header(header, expected, path):
    if header is None or tuple(h.strip() for h in header) != expected:
        raise IngestError(
            f"header must be {','.join(expected)!r}, got {','.join(header or [])!r}",
            line=1, path=path,
        )


def _coord(value, cfg: IngestConfig, stats, line):
    v = float(value)
    if not math.isfinite(v):
        raise IngestError(f"non-finite coordinate {value!r}", line=line)
    if 0.0 <= v <= 100.0:
        return v
    if cfg.clamp and -cfg.clamp_tolerance <= v <= 100.0 + cfg.clamp_tolerance:
        stats.clamped += 1
        return min(max(v, 0.0), 100.0)
    raise IngestError(f"coordinate {value!r} outside [0, 100]", line=line)


def parse_event_row(row: Sequence[str], cfg: IngestConfig, stats: IngestStats, line: int):
    if len(row) != len(EVENT_COLUMNS):
        raise IngestError(f"expected {len(EVENT_COLUMNS)} fields, got {len(row)}", line=line)
    match_id, player_id, team_id, minute, half, name, result, attribute, x, y = row
    raw = RawEventType.parse(name, result, attribute, line=line)
    try:
        minute_v = float(minute)
        half_v = int(half)
    except ValueError as exc:
        raise IngestError(f"malformed record: {exc}", line=line) from None
    if not minute_v >= 0:
        raise IngestError(f"negative minute {minute!r}", line=line)
    if half_v not in (1, 2):
        raise IngestError(f"half must be 1 or 2, got {half!r}", line=line)
    if not match_id or not player_id:
        raise IngestError("empty match_id or player_id", line=line)
    if x.strip() == "" or y.strip() == "":
        stats.missing_location += 1
        return None
    try:
        loc = PitchPoint(_coord(x, cfg, stats, line), _coord(y, cfg, stats, line))
    except ValueError as exc:
        if isinstance(exc, IngestError):
            raise
        raise IngestError(f"malformed coordinate: {exc}", line=line) from None
    cats = cfg.mapping.categories(raw)
    return MatchEvent(
        match_id=match_id,
        player_id=player_id,
        team_id=team_id,
        minute=minute_v,
        half=half_v,
        raw_type=raw,
        category=cats[0] if cats else None,
        location=loc,
        extra_categories=tuple(cats[1:]),
    )


def read_events(path, config: Optional[IngestConfig] = None):
    """Parse and validate an event file; returns ``(events, stats)``."""
    cfg = config or IngestConfig()
    stats = IngestStats()
    events = []
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), EVENT_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            stats.lines += 1
            try:
                ev = parse_event_row(row, cfg, stats, line)
            except IngestError as exc:
                raise type(exc)(exc.message, line=exc.line, path=path) from None
            if ev is not None:
                events.append(ev)
    if cfg.orientation == "infer":
        events, stats.flipped_groups = normalize_direction(events)
    stats.events = len(events)
    if stats.missing_location:
        log.warning("%s: dropped %d events without coordinates", path, stats.missing_location)
    if stats.clamped:
        log.warning("%s: clamped %d coordinates into [0, 100]", path, stats.clamped)
    return events, stats


def ingest_events(path, config: Optional[IngestConfig] = None):
    """Validated, direction-normalised, categorised events of one file."""
    return read_events(path, config)[0]


_ATTACKING = (ActionCategory.SHOT, ActionCategory.CROSS, ActionCategory.KEY_PASS)


def normalize_direction(events: Sequence[MatchEvent]):
    """Rotate each (match, team, half) so its attacking actions sit at x > 50.

    Groups without shots, crosses or key passes take the opposite orientation
    of the other team in the same match half, or stay untouched.
    """
    sums = defaultdict(lambda: [0.0, 0])
    teams = defaultdict(set)
    for ev in events:
        teams[(ev.match_id, ev.half)].add(ev.team_id)
        if ev.category in _ATTACKING:
            acc = sums[(ev.match_id, ev.team_id, ev.half)]
            acc[0] += ev.location.x
            acc[1] += 1
    flip = {}
    for (match_id, half), members in teams.items():
        for team in members:
            acc = sums.get((match_id, team, half))
            if acc and acc[1]:
                flip[(match_id, team, half)] = acc[0] / acc[1] < 50.0
    for (match_id, half), members in teams.items():
        for team in members:
            key = (match_id, team, half)
            if key in flip:
                continue
            others = [flip[(match_id, o, half)] for o in members
                      if o != team and (match_id, o, half) in flip]
            flip[key] = (not others[0]) if others else False
    out = []
    for ev in events:
        if flip[(ev.match_id, ev.team_id, ev.half)]:
            ev = MatchEvent(ev.match_id, ev.player_id, ev.team_id, ev.minute, ev.half,
                            ev.raw_type, ev.category, ev.location.mirrored(),
                            ev.extra_categories)
        out.append(ev)
    return out, sum(flip.values())


def _parse_bool(value, line):
    v = value.strip().lower()
    if v in ("1", "true", "yes"):
        return True
    if v in ("0", "false", "no"):
        return False
    raise IngestError(f"expected boolean, got {value!r}", line=line)


def parse_record_row(row, line):
    if len(row) != len(RECORD_COLUMNS):
        raise IngestError(f"expected {len(RECORD_COLUMNS)} fields, got {len(row)}", line=line)
    (season, match_id, team_id, player_id, started, minutes, pos, rating,
     goals, shots, assists, nationality, outcome) = row
    if pos not in START_POSITIONS:
        raise IngestError(f"unknown start position {pos!r}", line=line)
    if nationality not in ("domestic", "foreign"):
        raise IngestError(f"nationality must be domestic or foreign, got {nationality!r}", line=line)
    if outcome not in ("win", "draw", "loss"):
        raise IngestError(f"outcome must be win, draw or loss, got {outcome!r}", line=line)
    try:
        rec = PlayerMatchRecord(
            match_id=match_id,
            player_id=player_id,
            minutes_played=float(minutes),
            start_position_label=pos,
            rating=float(rating),
            goals=int(goals),
            shots=int(shots),
            assists=int(assists),
            nationality_class=nationality,
            match_outcome=outcome,
            team_id=team_id,
            season=season,
            started=_parse_bool(started, line),
        )
    except ValueError as exc:
        if isinstance(exc, IngestError):
            raise
        raise IngestError(f"malformed record: {exc}", line=line) from None
    if rec.minutes_played < 0 or min(rec.goals, rec.shots, rec.assists) < 0:
        raise IngestError("negative minutes or counts", line=line)
    return rec


def read_records(path):
    """Parse a player-match record file."""
    path = Path(path)
    records = []
    seen = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), RECORD_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rec = parse_record_row(row, line)
            except IngestError as exc:
                raise IngestError(exc.message, line=exc.line, path=path) from None
            key = (rec.match_id, rec.player_id)
            if key in seen:
                raise IngestError(f"duplicate record for {key}", line=line, path=path)
            seen.add(key)
            records.append(rec)
    return records


def filter_eligible(records: Iterable[PlayerMatchRecord]):
    """Starters who played more than 45 minutes, goalkeepers excluded."""
    return [r for r in records
            if r.started and r.minutes_played > 45 and r.start_position_label != "GK"]


def format_float(v):
    """Shortest round-tripping text for a float."""
    return repr(float(v))


def write_events(path, events: Iterable[MatchEvent]):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for ev in events:
            w.writerow([
                ev.match_id, ev.player_id, ev.team_id, format_float(ev.minute), ev.half,
                ev.raw_type.name, ev.raw_type.result, ev.raw_type.attribute,
                format_float(ev.location.x), format_float(ev.location.y),
            ])


def write_records(path, records: Iterable[PlayerMatchRecord]):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([
                r.season, r.match_id, r.team_id, r.player_id, int(r.started),
                format_float(r.minutes_played), r.start_position_label,
                format_float(r.rating), r.goals, r.shots, r.assists,
                r.nationality_class, r.match_outcome,
            ])


def category_counts(events: Iterable[MatchEvent]):
    return Counter(c for ev in events for c in ev.categories)
