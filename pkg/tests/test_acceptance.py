"""Acceptance suite: one group of tests per criterion, summarised at the end of the run."""
import csv
import filecmp
import math
import statistics
from collections import Counter, defaultdict

import numpy as np
import pytest

from playervectors import pipeline
from playervectors.config import Config
from playervectors.events import ActionCategory
from playervectors.nmf import NMFOptions, initial_factors, multiplicative_updates, nmf_fit, \
    reconstruction_error
from playervectors.positions import POSITION_LABELS, cluster_positions, select_k, silhouette_mean
from playervectors.similarity import SeasonPopulation, most_similar, similarity_percent
from playervectors.synth import DEFAULT_ARCHETYPES, purity, read_truth
from playervectors.vectors import VectorLayout

from blobs import EIGHT_BLOBS, blob_points, samples_from_points

EXPECTED_ABBREVIATIONS = (
    "CS LS RS LS LBC RBC RFC LFC CD RFD LFD LBD RBD LBP RFP LFP CP RBP LBLP LFLP RFLP CLP "
    "RBLP RFKP RKP LKP LFKP LBI RFI LFI RBI MC LC IC RC BH MFH RBH LBH FH LBR RFR LFR RBR"
).split()

criterion = pytest.mark.criterion


# -- shared synthetic league run ----------------------------------------------

@pytest.fixture(scope="session")
def league(tmp_path_factory):
    """Default config on the synthetic league, run twice into separate artifact roots."""
    root = tmp_path_factory.mktemp("league")
    cfg = Config(base_dir=root)
    pipeline.run_synth(cfg)
    runs = []
    for name in ("run_a", "run_b"):
        c = Config({"paths": {"artifacts": name}}, base_dir=root)
        store = pipeline.open_store(c)
        runs.append((c, store, pipeline.run_pipeline(c, store)))
    return root, runs


# -- 1 ------------------------------------------------------------------------

@criterion(1, "44-dimensional vectors with the expected slot abbreviations")
def test_c1_vector_layout():
    layout = VectorLayout.default()
    assert layout.total_dim == 44
    assert list(layout.abbreviations) == EXPECTED_ABBREVIATIONS
    assert len(set(layout.codes)) == 44
    assert [layout.k(c) for c in ActionCategory] == [4, 4, 5, 5, 5, 4, 4, 4, 5, 4]


# -- 2 ------------------------------------------------------------------------

@criterion(2, "18 styles split 4/4/3/4/3 over five positions")
def test_c2_style_count(league):
    _, runs = league
    meta = runs[0][2]["fit-styles"]
    assert meta["styles"] == 18
    assert meta["per_position"] == {"ST": 4, "CM": 4, "L/RW": 3, "L/RFB": 4, "CB": 3}


# -- 3 ------------------------------------------------------------------------

def reference_step(M, W, H, eps=1e-12):
    H = H * (W.T @ M) / (W.T @ W @ H + eps)
    W = W * (M @ H.T) / (W @ H @ H.T + eps)
    return W, H


@criterion(3, "NMF: monotone objective, planted recovery, reference agreement")
def test_c3a_monotone():
    r = np.random.default_rng(2024)
    for i in range(20):
        d, l, k = int(r.integers(10, 200)), int(r.integers(5, 50)), int(r.integers(1, 6))
        M = r.random((d, l)) * (r.random((d, l)) < 0.6)
        W, H = initial_factors(M, k, seed=i)
        trace, n_iter, _ = multiplicative_updates(M, W, H, 500)
        assert n_iter == 500 and len(trace) == 501
        assert np.max(np.diff(trace)) <= 1e-9, i


@criterion(3)
@pytest.mark.parametrize("seed, d, l, k", [(0, 200, 50, 5), (1, 120, 40, 3), (2, 60, 30, 2),
                                           (3, 200, 20, 4), (4, 90, 50, 5)])
def test_c3b_planted(seed, d, l, k):
    r = np.random.default_rng(seed)
    M = r.uniform(0.2, 1, (d, k)) @ r.uniform(0.2, 1, (k, l))
    model = nmf_fit(M, k, NMFOptions(max_iter=100_000, tol=0.0, atol=1e-8, n_init=4, seed=seed))
    assert reconstruction_error(model, M) < 1e-6


@criterion(3)
def test_c3c_reference_agreement():
    r = np.random.default_rng(7)
    for i in range(5):
        M = r.random((int(r.integers(20, 200)), int(r.integers(5, 50))))
        W0, H0 = initial_factors(M, 4, seed=i)
        ref = [(W0, H0)]
        for _ in range(500):
            ref.append(reference_step(M, *ref[-1]))
        worst = []

        def check(t, W, H):
            Wr, Hr = ref[t]
            worst.append(max(np.abs(W - Wr).max(), np.abs(H - Hr).max()))

        multiplicative_updates(M, W0.copy(), H0.copy(), 500, callback=check)
        assert len(worst) == 500 and max(worst) < 1e-10


# -- 4 ------------------------------------------------------------------------

def brute_silhouette(points, labels):
    """Direct s(i) = (b - a) / max(a, b) over the full distance matrix."""
    n = len(points)
    D = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))
    total = 0.0
    for i in range(n):
        same = labels == labels[i]
        if same.sum() == 1:
            continue
        a = D[i, same].sum() / (same.sum() - 1)
        b = min(D[i, labels == c].mean() for c in np.unique(labels) if c != labels[i])
        total += (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return total / n


@criterion(4, "silhouette equals the brute-force oracle on 100 fixtures")
def test_c4_silhouette_oracle():
    r = np.random.default_rng(99)
    for f in range(100):
        n = 500 if f % 10 == 0 else int(r.integers(3, 501))
        k = int(r.integers(2, min(n, 10) + 1))
        pts = r.random((n, 2)) * 100
        labels = r.integers(0, k, n)
        labels[:2] = [0, 1]
        assert abs(silhouette_mean(pts, labels) - brute_silhouette(pts, labels)) < 1e-12, f


# -- 5 ------------------------------------------------------------------------

@criterion(5, "eight planted blobs give k = 8 and the five merged positions")
def test_c5_position_selection():
    centres = [c for c, _ in EIGHT_BLOBS]
    pts, truth = blob_points(centres, n_per=80, sd=2.5, seed=11)
    k, _, _ = select_k(pts, range(5, 11), n_init=10, seed=4)
    assert k == 8
    model, kept, labels, _ = cluster_positions(samples_from_points(pts), range(5, 11), seed=4)
    assert model.k == 8 and set(labels) == set(POSITION_LABELS)
    true_labels = [EIGHT_BLOBS[truth[int(s.player_id[1:])]][1] for s in kept]
    assert purity(true_labels, labels) >= 0.95
    assert sum(t == p for t, p in zip(true_labels, labels)) / len(labels) >= 0.95


# -- 6 ------------------------------------------------------------------------

def _styled(store):
    with store.path("styles", "assignments.csv").open(newline="") as fh:
        return list(csv.DictReader(fh))


@criterion(6, "synthetic league style purity >= 0.90 and exact Table 2 aggregates")
def test_c6_style_purity(league):
    root, runs = league
    _, store, _ = runs[0]
    truth = read_truth(root / "data/truth.csv")
    rows = _styled(store)
    per_pos = Counter(truth[(r["match_id"], r["player_id"])][0] for r in rows)
    assert len({s.style for s in DEFAULT_ARCHETYPES}) == 18
    assert min(per_pos.values()) >= 500 and len(per_pos) == 5
    true_styles = [truth[(r["match_id"], r["player_id"])][1] for r in rows]
    predicted = [(r["position"], r["style_id"]) for r in rows]
    assert purity(true_styles, predicted) >= 0.90


def _fmt_equal(text, value):
    if math.isnan(value):
        return text == "nan"
    if math.isinf(value):
        return text == "inf"
    return abs(float(text) - value) <= 1e-12


@criterion(6)
def test_c6_table2_recomputation(league):
    root, runs = league
    _, store, _ = runs[0]
    with (root / "data/records.csv").open(newline="") as fh:
        records = {(r["match_id"], r["player_id"]): r for r in csv.DictReader(fh)}
    groups = defaultdict(list)
    for row in _styled(store):
        groups[(row["position"], row["style"])].append(records[(row["match_id"], row["player_id"])])
    with store.path("table2", "table2.csv").open(newline="") as fh:
        table = list(csv.DictReader(fh))
    assert len(table) == len(groups) == 18
    for row in table:
        recs = groups[(row["Position"], row["Style"])]
        assert int(row["Total"]) == len(recs)
        assert int(row["Domestic"]) == sum(r["nationality"] == "domestic" for r in recs)
        assert int(row["Foreign"]) == sum(r["nationality"] == "foreign" for r in recs)
        for col, field in (("Rating", "rating"), ("Goals", "goals"), ("Shots", "shots"),
                           ("Assists", "assists")):
            xs = [float(r[field]) for r in recs]
            assert _fmt_equal(row[col], statistics.fmean(xs)), col
            assert _fmt_equal(row[col + " SD"], statistics.pstdev(xs)), col
        wins = sum(r["outcome"] == "win" for r in recs)
        losses = sum(r["outcome"] == "loss" for r in recs)
        wl = wins / losses if losses else (math.inf if wins else math.nan)
        assert _fmt_equal(row["Win/Loss"], wl)


# -- 7 ------------------------------------------------------------------------

@criterion(7, "similarity is 100% for identical players, 0% at D_max and monotone")
def test_c7_similarity_semantics():
    pop = SeasonPopulation({
        "a": np.array([0.0, 0.0, 0.0]), "a2": np.array([0.0, 0.0, 0.0]),
        "b": np.array([1.0, 0.0, 0.0]), "c": np.array([1.0, 2.0, 0.0]),
        "d": np.array([0.0, 0.0, 5.0]),
    })
    assert pop.d_max == 8.0
    assert pop.compare("a", "a2").percent == 100.0
    assert pop.compare("c", "d").percent == 0.0
    ds = np.linspace(0, 8, 50)
    assert np.all(np.diff([similarity_percent(d, 8.0) for d in ds]) < 0)
    ranked = most_similar("a", pop, top_n=4)
    assert [r.player_b for r in ranked] == ["a2", "b", "c", "d"]
    assert [r.percent for r in ranked] == [100.0, 87.5, 62.5, 37.5]


# -- 8 ------------------------------------------------------------------------

@criterion(8, "two pipeline runs produce byte-identical artifacts")
def test_c8_determinism(league):
    root, _ = league
    a, b = root / "run_a", root / "run_b"
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b and len(files_a) > 10
    _, mismatch, errors = filecmp.cmpfiles(a, b, [str(p) for p in files_a], shallow=False)
    assert mismatch == [] and errors == []
