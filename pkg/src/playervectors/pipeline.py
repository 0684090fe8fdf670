"""Pipeline stages over the artifact store.

Each stage reads the artifacts of earlier stages, writes its own directory and
finishes by writing ``meta.json``. Stages are deterministic for a fixed
config; nothing time- or host-dependent is written.
"""
from __future__ import annotations

import csv
import logging
from collections import Counter
from pathlib import Path

import numpy as np

from . import kernels
from .config import Config
from .events import (ActionCategory, IngestConfig, IngestError, PitchPoint, filter_eligible,
                     format_float, read_events, read_records, write_events, write_records)
from .heatmap import GridSpec, bin_counts, gaussian_weights, normalize_grid
from .nmf import NMFOptions, load_model, nmf_fit, save_model
from .positions import AvgPositionSample, average_positions, cluster_positions
from .similarity import SeasonPopulation, build_report, most_similar
from .store import (ArtifactStore, file_sha256, load_sparse_columns,
                    save_sparse_columns, write_json)
from .styles import (PositionActionConfig, StyleCatalog, assign_styles, fit_styles, name_styles,
                     style_stats, write_start_positions, write_table2)
from .synth import SynthConfig, generate_season, write_season
from .vectors import VectorLayout, align_components, assemble, read_vectors_csv, write_vectors_csv

log = logging.getLogger(__name__)

STAGES = ("ingest", "heatmaps", "fit-vectors", "cluster-positions", "fit-styles", "table2")
STAGE_DIRS = {"ingest": "ingest", "heatmaps": "heatmaps", "fit-vectors": "vectors",
        "cluster-positions": "positions", "fit-styles": "styles", "table2": "table2"}


def open_store(cfg: Config):
    return ArtifactStore(cfg.artifact_root, cfg.fingerprint())


def grid_spec(cfg: Config):
    return GridSpec(**cfg["grid"])


def layout_of(cfg: Config):
    ks = cfg["layout"].get("k")
    return VectorLayout.default() if not ks else VectorLayout.from_ks(ks)


def _key_csv_write(path, keys):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["match_id", "player_id"])
        w.writerows(keys)


def _key_csv_read(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        return [tuple(row) for row in r]


def _records_by_key(store):
    return {(r.match_id, r.player_id): r for r in read_records(store.path("ingest", "records.csv"))}


def _group(events, keys):
    wanted = set(keys)
    out = {}
    for ev in events:
        key = (ev.match_id, ev.player_id)
        if key in wanted:
            out.setdefault(key, []).append(ev)
    return out


# -- ingest -------------------------------------------------------------------

def run_ingest(cfg: Config, store: ArtifactStore, force=False):
    icfg = IngestConfig.from_dict(cfg["ingest"])
    events, stats = read_events(cfg.path("events"), icfg)
    records = read_records(cfg.path("records"))
    if cfg["season"] is not None:
        records = [r for r in records if r.season == str(cfg["season"])]
        matches = {r.match_id for r in records}
        events = [ev for ev in events if ev.match_id in matches]
    eligible = sorted((r.match_id, r.player_id) for r in filter_eligible(records))
    if not eligible:
        raise IngestError("no eligible player-matches (starters with more than 45 minutes)")
    by_key = _group(events, eligible)
    store.stage_dir("ingest", create=True)
    write_events(store.path("ingest", "events.csv"),
                 [ev for key in eligible for ev in by_key.get(key, ())])
    write_records(store.path("ingest", "records.csv"), records)
    _key_csv_write(store.path("ingest", "eligible.csv"), eligible)
    samples = average_positions(by_key, eligible, cfg["positions"]["categorised_only"])
    write_position_samples(store.path("ingest", "positions.csv"), samples)
    return store.finish("ingest", {
        "inputs": {"events": file_sha256(cfg.path("events")),
                   "records": file_sha256(cfg.path("records"))},
        "events": stats.events, "missing_location": stats.missing_location,
        "clamped": stats.clamped, "flipped_groups": stats.flipped_groups,
        "records": len(records), "eligible": len(eligible),
        "without_actions": len(eligible) - len(samples),
    })


def write_position_samples(path, samples):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["match_id", "player_id", "x", "y", "y_half1", "y_half2", "n_actions"])
        for s in samples:
            w.writerow([s.match_id, s.player_id, format_float(s.mean_location.x),
                        format_float(s.mean_location.y),
                        *("" if v is None else format_float(v) for v in s.per_half_mean_y),
                        s.n_actions])


def read_position_samples(path):
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        for m, p, x, y, y1, y2, n in r:
            out.append(AvgPositionSample(p, m, PitchPoint(float(x), float(y)),
                                         tuple(None if v == "" else float(v) for v in (y1, y2)),
                                         int(n)))
    return out


# -- heatmaps -----------------------------------------------------------------

def run_heatmaps(cfg: Config, store: ArtifactStore, force=False):
    store.require("ingest", ["events.csv", "eligible.csv"], "ingest", force)
    spec = grid_spec(cfg)
    layout = layout_of(cfg)
    icfg = IngestConfig.from_dict({**cfg["ingest"], "orientation": "attacking"})
    events, _ = read_events(store.path("ingest", "events.csv"), icfg)
    keys = _key_csv_read(store.path("ingest", "eligible.csv"))
    by_key = _group(events, keys)
    store.stage_dir("heatmaps", create=True)
    _key_csv_write(store.path("heatmaps", "index.csv"), keys)
    totals = {}
    for cat in layout.categories:
        indptr, indices, data = [0], [], []
        for key in keys:
            evs = [ev for ev in by_key.get(key, ()) if cat in ev.categories]
            counts = bin_counts([ev.location.x for ev in evs], [ev.location.y for ev in evs], spec)
            flat = counts.reshape(-1)
            nz = np.flatnonzero(flat)
            indices.extend(nz.tolist())
            data.extend(flat[nz].tolist())
            indptr.append(len(indices))
        save_sparse_columns(store.path("heatmaps", f"{cat.value}.bin"), spec.size, indptr,
                            indices, data)
        totals[cat.value] = int(sum(data))
    return store.finish("heatmaps", {"grid": spec.to_dict(), "columns": len(keys),
                                     "events_per_category": totals})


def load_category_matrix(store, category, spec: GridSpec, minutes=None):
    """Smoothed, normalised heatmap matrix ``(m*n, l)`` of one category."""
    rows, indptr, indices, data = load_sparse_columns(
        store.path("heatmaps", f"{ActionCategory.parse(category).value}.bin"))
    if rows != spec.size:
        raise ValueError(f"heatmaps were binned on {rows} cells, grid has {spec.size}")
    ncols = len(indptr) - 1
    M = np.zeros((spec.size, ncols))
    weights = gaussian_weights(spec.sigma)
    for j in range(ncols):
        lo, hi = indptr[j], indptr[j + 1]
        if lo == hi:
            continue
        counts = np.zeros(spec.size)
        counts[indices[lo:hi]] = data[lo:hi]
        grid = counts.reshape(spec.m, spec.n)
        if spec.sigma > 0:
            grid = kernels.scatter_smooth(grid, weights)
        mins = None if minutes is None else minutes[j]
        M[:, j] = normalize_grid(grid, int(data[lo:hi].sum()), spec, mins).reshape(-1)
    return M


# -- fit-vectors --------------------------------------------------------------

def run_fit_vectors(cfg: Config, store: ArtifactStore, force=False):
    store.require("heatmaps", ["index.csv"], "heatmaps", force)
    spec = grid_spec(cfg)
    layout = layout_of(cfg)
    keys = _key_csv_read(store.path("heatmaps", "index.csv"))
    minutes = None
    if spec.normalization == "per90":
        recs = _records_by_key(store)
        minutes = [recs[k].minutes_played for k in keys]
    store.stage_dir("vectors", create=True)
    (store.stage_dir("vectors") / "models").mkdir(exist_ok=True)
    models, summary = {}, {}
    for cat in layout.categories:
        M = load_category_matrix(store, cat, spec, minutes)
        k = layout.k(cat)
        opts = NMFOptions(seed=cfg.seed(f"nmf.{cat.value.lower()}"), **cfg["nmf"])
        model = align_components(nmf_fit(M, k, opts, category=cat.value),
                                 layout.slots_for(cat), spec)
        save_model(model, store.path("vectors", f"models/{cat.value}.bin"),
                   {"slots": [s.code for s in layout.slots_for(cat)]})
        models[cat] = model
        summary[cat.value] = {"k": k, "n_iter": model.n_iter,
                              "objective": model.objective_trace[-1],
                              "converged": model.converged, "degenerate": model.degenerate}
    vectors = assemble(models, keys, layout)
    write_vectors_csv(store.path("vectors", "vectors.csv"), vectors, layout)
    write_json(store.path("vectors", "layout.json"), layout.to_dict())
    return store.finish("vectors", {"dim": layout.total_dim, "vectors": len(vectors),
                                    "models": summary})


def load_models(store, layout):
    return {cat: load_model(store.path("vectors", f"models/{cat.value}.bin"))
            for cat in layout.categories}


# -- cluster-positions --------------------------------------------------------

def run_cluster_positions(cfg: Config, store: ArtifactStore, force=False):
    store.require("ingest", ["positions.csv"], "ingest", force)
    p = cfg["positions"]
    samples = read_position_samples(store.path("ingest", "positions.csv"))
    model, kept, labels, switched = cluster_positions(
        samples, range(p["k_min"], p["k_max"] + 1), n_init=p["n_init"], max_iter=p["max_iter"],
        seed=cfg.seed("kmeans"), switch_threshold=p["switch_threshold"], merge_map=p["merge_map"],
        lateral_min=p["lateral_min"], mirror_tol=p["mirror_tol"], central_tol=p["central_tol"])
    store.stage_dir("positions", create=True)
    model.save(store.path("positions", "model.json"))
    clusters = model.cluster_of([[s.mean_location.x, s.mean_location.y] for s in kept])
    rows = [(s.match_id, s.player_id, "", "", "side_switch") for s in switched]
    rows += [(s.match_id, s.player_id, int(c), lab, "ok")
             for s, c, lab in zip(kept, clusters, labels)]
    with store.path("positions", "assignments.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["match_id", "player_id", "cluster", "position", "status"])
        w.writerows(sorted(rows))
    return store.finish("positions", {
        "k": model.k, "silhouette": model.silhouette,
        "silhouette_by_k": {str(k): v for k, v in sorted(model.silhouette_by_k.items())},
        "merge_map": {str(c): lab for c, lab in sorted(model.merge_map.items())},
        "counts": dict(sorted(Counter(labels).items())), "side_switches": len(switched),
    })


def read_position_assignments(store):
    out = {}
    with store.path("positions", "assignments.csv").open(newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        for row in r:
            if row["status"] == "ok":
                out[(row["match_id"], row["player_id"])] = row["position"]
    return out


# -- fit-styles ---------------------------------------------------------------

def run_fit_styles(cfg: Config, store: ArtifactStore, force=False):
    store.require("vectors", ["vectors.csv"], "fit-vectors", force)
    store.require("positions", ["assignments.csv"], "cluster-positions", force)
    layout = layout_of(cfg)
    s = cfg["styles"]
    pcfg = PositionActionConfig.from_dict(s["positions"])
    vectors = read_vectors_csv(store.path("vectors", "vectors.csv"), layout)
    positions = read_position_assignments(store)
    labelled = []
    for pv in vectors:
        pv.position_label = positions.get(pv.key)
        if pv.position_label is not None:
            labelled.append(pv)
    groups = {}
    for pv in labelled:
        groups.setdefault(pv.position_label, []).append(pv)
    catalog = fit_styles(groups, layout, pcfg, NMFOptions(**s["nmf"]),
                         seeds={pos: cfg.seed(f"styles.{pos}") for pos in pcfg.positions})
    assigned = assign_styles(labelled, catalog)
    records = _records_by_key(store)
    assignments = {}
    for pv, (sid, _) in zip(labelled, assigned):
        pv.style = sid
        assignments[pv.key] = (pv.position_label, sid)
    style_stats(assignments, records, catalog)
    name_styles(catalog, min_score=s["naming_min_score"])
    store.stage_dir("styles", create=True)
    catalog.save(store.path("styles", "catalog.json"))
    with store.path("styles", "assignments.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["match_id", "player_id", "position", "style_id", "style", "degenerate"])
        for pv, (sid, degenerate) in zip(labelled, assigned):
            w.writerow([pv.match_id, pv.player_id, pv.position_label, sid,
                        catalog.style_name(pv.position_label, sid), int(degenerate)])
    write_vectors_csv(store.path("styles", "vectors.csv"), labelled, layout)
    return store.finish("styles", {
        "styles": catalog.total_styles,
        "per_position": {pos: ps.k for pos, ps in catalog.positions.items()},
        "names": {pos: ps.names for pos, ps in catalog.positions.items()},
        "degenerate": sum(d for _, d in assigned),
    })


def load_styled_vectors(cfg: Config, store: ArtifactStore, force=False):
    store.require("styles", ["vectors.csv", "assignments.csv", "catalog.json"], "fit-styles", force)
    vectors = read_vectors_csv(store.path("styles", "vectors.csv"), layout_of(cfg))
    styles = {}
    with store.path("styles", "assignments.csv").open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            styles[(row["match_id"], row["player_id"])] = int(row["style_id"])
    for pv in vectors:
        pv.style = styles[pv.key]
    return vectors, StyleCatalog.load(store.path("styles", "catalog.json"))


# -- table2 -------------------------------------------------------------------

def run_table2(cfg: Config, store: ArtifactStore, force=False):
    store.require("styles", ["catalog.json"], "fit-styles", force)
    catalog = StyleCatalog.load(store.path("styles", "catalog.json"))
    store.stage_dir("table2", create=True)
    write_table2(store.path("table2", "table2.csv"), catalog)
    write_start_positions(store.path("table2", "start_positions.csv"), catalog,
                          cfg["styles"]["start_position_min"])
    return store.finish("table2", {"rows": catalog.total_styles})


STAGE_FUNCS = {
    "ingest": run_ingest, "heatmaps": run_heatmaps, "fit-vectors": run_fit_vectors,
    "cluster-positions": run_cluster_positions, "fit-styles": run_fit_styles,
    "table2": run_table2,
}


def run_pipeline(cfg: Config, store: ArtifactStore = None, force=False):
    store = store or open_store(cfg)
    out = {}
    for stage in STAGES:
        log.info("stage %s", stage)
        out[stage] = STAGE_FUNCS[stage](cfg, store, force)
    return out


# -- reports ------------------------------------------------------------------

def _season_records(cfg, store, force):
    store.require("ingest", ["records.csv"], "ingest", force)
    return _records_by_key(store)


def compare(cfg: Config, store: ArtifactStore, a, b, force=False):
    vectors, catalog = load_styled_vectors(cfg, store, force)
    records = _season_records(cfg, store, force)
    season = cfg["season"]
    return build_report(a, b, None if season is None else str(season), catalog, vectors, records)


def similar(cfg: Config, store: ArtifactStore, player, top_n=10, force=False):
    vectors, _ = load_styled_vectors(cfg, store, force)
    population = SeasonPopulation.from_match_vectors(vectors)
    return most_similar(player, population, top_n), population


def run_synth(cfg: Config, out_dir=None, seed=None):
    """Generate a synthetic season into ``out_dir`` or the configured input paths."""
    scfg = SynthConfig.from_dict({**cfg["synth"],
                                  "seed": cfg.seed("synth") if seed is None else seed})
    season = generate_season(None, scfg)
    if out_dir is not None:
        return write_season(out_dir, season), season
    return write_season(None, season, {k: cfg.path(k) for k in ("events", "records", "truth")}), season
