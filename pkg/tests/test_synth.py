import math
from dataclasses import replace
from collections import Counter, defaultdict

import pytest

from playervectors.events import (ActionCategory, IngestConfig, filter_eligible, read_events,
                                  read_records)
from playervectors.synth import (DEFAULT_ARCHETYPES, SynthConfig, SynthError, archetype,
                                 generate_season, purity, read_truth, round_robin, write_season)

A = ActionCategory
SMALL = SynthConfig(n_teams=6, seed=3)


@pytest.fixture(scope="module")
def season():
    return generate_season(None, SMALL)


def _raw_category(ev):
    name, result = ev.raw_type.name, ev.raw_type.result
    if name == "Simple pass" and result in ("Keypass", "Assist"):
        return A.KEY_PASS
    return {"Shot": A.SHOT, "Cross": A.CROSS, "TakeOn": A.DRIBBLE, "Simple pass": A.PASS,
            "Long pass": A.LONG_PASS, "Interception": A.INTERCEPTION, "Clearance": A.CLEARANCE,
            "Aerial duel": A.HEADER, "Ball recovery": A.RECOVERY}.get(name)


def test_round_robin_double():
    rr = round_robin(6)
    assert len(rr) == 10
    pairs = Counter(p for rnd in rr for p in rnd)
    assert len(pairs) == 30 and set(pairs.values()) == {1}
    for rnd in rr:
        teams = [t for p in rnd for t in p]
        assert sorted(teams) == list(range(6))
    assert len(round_robin(5)[0]) == 2
    with pytest.raises(SynthError):
        round_robin(1)


def test_files_parse_without_warnings(tmp_path, season):
    paths = write_season(tmp_path, season)
    events, stats = read_events(paths["events"], IngestConfig())
    assert stats.warnings == 0 and len(events) == len(season.events)
    records = read_records(paths["records"])
    assert len(records) == len(season.records)
    truth = read_truth(paths["truth"])
    eligible = {(r.match_id, r.player_id) for r in filter_eligible(records)}
    assert set(truth) == eligible


def test_byte_identical_for_fixed_seed(tmp_path):
    a = write_season(tmp_path / "a", generate_season(None, SMALL))
    b = write_season(tmp_path / "b", generate_season(None, SMALL))
    for k in a:
        assert a[k].read_bytes() == b[k].read_bytes()
    c = write_season(tmp_path / "c", generate_season(None, SynthConfig(n_teams=6, seed=4)))
    assert a["events"].read_bytes() != c["events"].read_bytes()


def test_zero_shot_rate_gives_no_shots():
    specs = [replace(s, rates={**s.rates, A.SHOT: 0.0}) for s in DEFAULT_ARCHETYPES]
    sea = generate_season(specs, SynthConfig(n_teams=4, seed=1))
    assert not any(ev.raw_type.name == "Shot" for ev in sea.events)
    assert all(r.shots == 0 and r.goals == 0 for r in sea.records)


def test_empirical_rates_within_three_se(season):
    """Per category, pooled over starters, counts match the Poisson expectation."""
    spec_of = _specs(season)
    minutes = {(r.match_id, r.player_id): r.minutes_played for r in season.records
               if r.started and r.player_id in spec_of}
    observed = Counter()
    for ev in season.events:
        key = (ev.match_id, ev.player_id)
        cat = _raw_category(ev)
        if key in minutes and cat is not None:
            observed[cat] += 1
    expected = defaultdict(float)
    for (m, pid), mins in minutes.items():
        for cat, rate in spec_of[pid].rates.items():
            expected[cat] += rate * mins / 90.0
    for cat in A:
        if expected[cat] == 0:
            assert observed[cat] == 0
            continue
        assert abs(observed[cat] - expected[cat]) <= 3 * math.sqrt(expected[cat]), cat


def _specs(season):
    by_style = {}
    for s in DEFAULT_ARCHETYPES:
        by_style.setdefault(s.style, []).append(s)
    out = {}
    for pid, (team, slot, style) in season.players.items():
        cands = by_style[style]
        side = "L" if slot.startswith("L") else "R" if slot.startswith("R") else "C"
        spec = next((s for s in cands if s.side in (side, "both")), cands[0])
        out[pid] = spec
    return out


def test_truth_labels(season):
    positions = Counter(p for _, _, p, _ in season.truth)
    assert set(positions) == {"ST", "CM", "L/RW", "L/RFB", "CB"}
    styles = {s for _, _, _, s in season.truth}
    assert styles == {s.style for s in DEFAULT_ARCHETYPES}


def test_purity():
    assert purity("aabb", [0, 0, 1, 1]) == 1.0
    assert purity("aabb", [0, 0, 0, 0]) == 0.5
    assert purity("abcd", [0, 1, 2, 3]) == 1.0
    assert purity("aaab", [1, 1, 2, 2]) == 0.75
    assert math.isnan(purity([], []))
    with pytest.raises(ValueError):
        purity("ab", [0])


def test_archetype_validation():
    with pytest.raises(SynthError):
        archetype("ST", "x", "Q", {"Shot": (1, "CS")})
    with pytest.raises(SynthError):
        archetype("ST", "x", "C", {"Shot": (-1, "CS")})
    with pytest.raises(SynthError):
        generate_season([], SMALL)
