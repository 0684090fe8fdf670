import math

import numpy as np
import pytest

from playervectors.events import ActionCategory, PlayerMatchRecord
from playervectors.nmf import NMFOptions
from playervectors.styles import (
    DEFAULT_POSITION_ACTIONS, DEFAULT_STYLE_RULES, PositionActionConfig, StyleCatalog,
    StyleError, StyleRule, StyleStats, TABLE2_COLUMNS, assign_style, assign_styles,
    compute_stats, fit_styles, name_components, name_styles, read_table2, slot_shares,
    style_stats, write_start_positions, write_table2,
)
from playervectors.vectors import PlayerMatchVector, VectorLayout

A = ActionCategory
LAYOUT = VectorLayout.default()
CODES = LAYOUT.codes


def planted_vectors(position, signatures, n_per=60, noise=0.02, seed=0):
    """Vectors whose mass sits on one signature's slots per archetype."""
    r = np.random.default_rng(seed)
    out, truth = [], []
    for a, sig in enumerate(signatures):
        base = np.zeros(44)
        base[[CODES.index(c) for c in sig]] = 1.0
        for i in range(n_per):
            v = base * r.uniform(0.5, 1.5) + r.uniform(0, noise, 44)
            out.append(PlayerMatchVector(f"{position}{a}-{i}", f"m{i}", v, position, layout=LAYOUT))
            truth.append(a)
    return out, truth


ST_SIGS = (("CS", "FH"), ("LS", "CD", "CP"), ("RS", "LtS", "RFD", "LFD"), ("MFH",))


def _rec(key, rating=7.0, outcome="win", nat="domestic", goals=0, shots=0, assists=0, start="FW"):
    return PlayerMatchRecord(key[0], key[1], 90.0, start, rating, goals, shots, assists, nat,
                             outcome)


def test_default_position_config():
    cfg = PositionActionConfig()
    assert cfg.total_styles == 18
    assert {p: n for p, (_, n) in cfg.positions.items()} == \
        {"ST": 4, "CM": 4, "L/RW": 3, "L/RFB": 4, "CB": 3}
    assert cfg.positions["L/RFB"][0] == (A.CROSS, A.DRIBBLE, A.PASS, A.RECOVERY, A.INTERCEPTION)
    assert PositionActionConfig.from_dict(cfg.to_dict()).positions == cfg.positions


def test_rules_cover_every_style():
    assert len(DEFAULT_STYLE_RULES) == 18
    for pos, (cats, n) in DEFAULT_POSITION_ACTIONS.items():
        rules = [r for r in DEFAULT_STYLE_RULES if r.position == pos]
        assert len(rules) == n
        allowed = {LAYOUT.slots[i].code for i in LAYOUT.indices(cats)}
        for r in rules:
            assert set(r.signature) <= allowed, (pos, r.name)


def test_planted_striker_archetypes_recovered():
    vecs, truth = planted_vectors("ST", ST_SIGS)
    cfg = PositionActionConfig({"ST": DEFAULT_POSITION_ACTIONS["ST"]})
    catalog = fit_styles({"ST": vecs}, LAYOUT, cfg, NMFOptions(max_iter=2000, tol=1e-7, n_init=3))
    scores = np.array([assign_style(v, catalog)[0] for v in vecs])
    truth = np.array(truth)
    for a in range(4):
        counts = np.bincount(scores[truth == a], minlength=4)
        assert counts.max() >= 0.9 * counts.sum()
    # every archetype lands on its own component
    assert len({int(np.bincount(scores[truth == a]).argmax()) for a in range(4)}) == 4
    name_styles(catalog)
    named = {int(np.bincount(scores[truth == a]).argmax()): a for a in range(4)}
    expected = ["Poacher", "Second Striker", "Mobile Striker", "Target Man"]
    for comp, a in named.items():
        assert catalog.style_name("ST", comp) == expected[a]
    # batch assignment agrees with one-at-a-time
    assert [s for s, _ in assign_styles(vecs, catalog)] == scores.tolist()


def test_single_planted_style_rank_one():
    r = np.random.default_rng(1)
    base = r.uniform(0.1, 1, 44)
    vecs = [PlayerMatchVector(f"p{i}", "m", base * r.uniform(0.5, 2), "CB", layout=LAYOUT)
            for i in range(30)]
    cfg = PositionActionConfig({"CB": (DEFAULT_POSITION_ACTIONS["CB"][0], 1)})
    cat = fit_styles({"CB": vecs}, LAYOUT, cfg, NMFOptions(max_iter=5000, tol=0))
    ps = cat.positions["CB"]
    X = np.array([v.v[list(ps.slot_indices)] for v in vecs]).T
    err = np.linalg.norm(X - ps.model.W @ ps.model.H) / np.linalg.norm(X)
    assert err < 1e-3


def test_fit_styles_errors():
    vecs, _ = planted_vectors("ST", ST_SIGS, n_per=1)
    with pytest.raises(StyleError, match="no player-matches"):
        fit_styles({"ST": vecs}, LAYOUT)
    cfg = PositionActionConfig({"ST": (DEFAULT_POSITION_ACTIONS["ST"][0], 5)})
    with pytest.raises(StyleError, match="samples"):
        fit_styles({"ST": vecs}, LAYOUT, cfg)


def test_assign_pure_component_and_zero():
    vecs, _ = planted_vectors("ST", ST_SIGS, n_per=20)
    cfg = PositionActionConfig({"ST": DEFAULT_POSITION_ACTIONS["ST"]})
    catalog = fit_styles({"ST": vecs}, LAYOUT, cfg)
    ps = catalog.positions["ST"]
    for c in range(ps.k):
        v = np.zeros(44)
        v[list(ps.slot_indices)] = ps.components[c]
        assert assign_style(v, catalog, "ST") == (c, False)
    assert assign_style(np.zeros(44), catalog, "ST") == (0, True)
    with pytest.raises(StyleError):
        assign_style(np.zeros(44), catalog, "CB")


def test_stats_hand_fixture():
    keys = [("m1", "a"), ("m2", "a"), ("m3", "b"), ("m4", "b")]
    recs = [_rec(keys[0], 7, "win"), _rec(keys[1], 8, "win"), _rec(keys[2], 7, "loss"),
            _rec(keys[3], 8, "draw")]
    st = compute_stats(recs)
    assert st.rating_mean == 7.5 and st.rating_sd == 0.5 and st.win_loss == 2.0
    assert st.n == 4 and st.n_domestic == 4 and st.n_foreign == 0
    assert (st.wins, st.draws, st.losses) == (2, 1, 1)


def test_win_loss_conventions():
    assert StyleStats(wins=3).win_loss == math.inf
    assert math.isnan(StyleStats().win_loss)
    assert StyleStats(wins=0, losses=2).win_loss == 0.0


def streaming_mean_sd(xs):
    """Welford's running mean and population variance."""
    n, mean, m2 = 0, 0.0, 0.0
    for x in xs:
        n += 1
        d = x - mean
        mean += d / n
        m2 += d * (x - mean)
    return mean, math.sqrt(m2 / n)


def test_stats_match_streaming_recomputation():
    r = np.random.default_rng(3)
    recs = [_rec(("m", f"p{i}"), rating=float(r.uniform(5, 9)), goals=int(r.integers(0, 3)),
                 shots=int(r.integers(0, 6)), assists=int(r.integers(0, 2)),
                 outcome=str(r.choice(["win", "draw", "loss"])),
                 nat=str(r.choice(["domestic", "foreign"]))) for i in range(500)]
    st = compute_stats(recs)
    for attr, field in (("rating", "rating"), ("goals", "goals"), ("shots", "shots"),
                        ("assists", "assists")):
        mean, sd = streaming_mean_sd([getattr(x, field) for x in recs])
        assert abs(getattr(st, f"{attr}_mean") - mean) < 1e-12
        assert abs(getattr(st, f"{attr}_sd") - sd) < 1e-12
    wins = sum(x.match_outcome == "win" for x in recs)
    losses = sum(x.match_outcome == "loss" for x in recs)
    assert st.win_loss == wins / losses
    assert st.n_domestic + st.n_foreign == 500


def _catalog_with_assignments():
    vecs, truth = planted_vectors("ST", ST_SIGS, n_per=10)
    cfg = PositionActionConfig({"ST": DEFAULT_POSITION_ACTIONS["ST"]})
    catalog = fit_styles({"ST": vecs}, LAYOUT, cfg)
    assigned = {v.key: ("ST", s) for v, (s, _) in zip(vecs, assign_styles(vecs, catalog))}
    records = {v.key: _rec(v.key, rating=6 + (i % 3), outcome=("win", "loss", "draw")[i % 3],
                           start="FW" if i % 4 else "MF") for i, v in enumerate(vecs)}
    return catalog, assigned, records


def test_style_stats_partition_and_missing_record():
    catalog, assigned, records = _catalog_with_assignments()
    style_stats(assigned, records, catalog)
    assert sum(s.n for s in catalog.positions["ST"].stats) == len(assigned)
    records.pop(next(iter(assigned)))
    with pytest.raises(StyleError, match="no player-match record"):
        style_stats(assigned, records, catalog)


def test_catalog_roundtrip(tmp_path):
    catalog, assigned, records = _catalog_with_assignments()
    name_styles(style_stats(assigned, records, catalog))
    catalog.save(tmp_path / "c.json")
    back = StyleCatalog.load(tmp_path / "c.json")
    assert back.to_dict()["positions"]["ST"]["stats"] == catalog.to_dict()["positions"]["ST"]["stats"]
    np.testing.assert_array_equal(back.positions["ST"].components, catalog.positions["ST"].components)
    assert back.positions["ST"].names == catalog.positions["ST"].names


def test_table2_csv(tmp_path):
    catalog, assigned, records = _catalog_with_assignments()
    name_styles(style_stats(assigned, records, catalog))
    write_table2(tmp_path / "t.csv", catalog)
    rows = read_table2(tmp_path / "t.csv")
    assert list(rows[0]) == list(TABLE2_COLUMNS) and len(rows) == 4
    for row, st in zip(rows, catalog.positions["ST"].stats):
        assert int(row["Total"]) == st.n
        assert float(row["Rating"]) == st.rating_mean
        assert float(row["Win/Loss"]) == st.win_loss or math.isnan(st.win_loss)
    write_start_positions(tmp_path / "s.csv", catalog, threshold=1)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "Position,Style,Total,Start Position,Count" and len(lines) > 1


def test_naming_reference_signatures():
    codes = [LAYOUT.slots[i].code for i in LAYOUT.indices(DEFAULT_POSITION_ACTIONS["ST"][0])]

    def comp(*slots):
        c = np.full(len(codes), 0.01)
        c[[codes.index(s) for s in slots]] = 1.0
        return c

    names = name_components("ST", codes, [comp("LS", "CD", "CP"), comp("CS", "FH"),
                                          comp("MFH"), comp("RS", "LtS", "RFD", "LFD")])
    assert names == ["Second Striker", "Poacher", "Target Man", "Mobile Striker"]


def test_naming_fallback():
    codes = ["CS", "LS"]
    comps = np.array([[1.0, 1.0], [1.0, 1.0]])
    rules = (StyleRule("ST", "Poacher", ("CS",)),)
    # equal shares of 0.5 fall short of a 0.6 threshold
    assert name_components("ST", codes, comps, rules, 0.6) == ["Style-ST-0", "Style-ST-1"]
    assert name_components("XX", codes, comps) == ["Style-XX-0", "Style-XX-1"]


def test_slot_shares_columns_sum_to_one(rng):
    shares = slot_shares(rng.random((4, 9)))
    np.testing.assert_allclose(shares.sum(axis=0), 1.0)
