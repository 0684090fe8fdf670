"""Position detection from average action locations."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .events import PitchPoint

log = logging.getLogger(__name__)

POSITION_LABELS = ("ST", "L/RW", "CM", "L/RFB", "CB")


class ClusteringError(ValueError):
    pass


class MergeError(ClusteringError):
    """Clusters could not be merged into the five positions automatically."""


@dataclass(frozen=True)
class AvgPositionSample:
    player_id: str
    match_id: str
    mean_location: PitchPoint
    per_half_mean_y: tuple = (None, None)
    n_actions: int = 0

    @property
    def key(self):
        return (self.match_id, self.player_id)


def average_positions(events_by_key: Mapping, eligible_keys: Sequence, categorised_only=False):
    """Mean location of a player's located actions, per eligible player-match.

    ``events_by_key`` maps ``(match_id, player_id)`` to events. All located
    events count unless ``categorised_only``. Player-matches without a single
    usable action are skipped with a warning.
    """
    samples = []
    skipped = 0
    for key in eligible_keys:
        evs = [ev for ev in events_by_key.get(key, ())
               if not categorised_only or ev.category is not None]
        if not evs:
            skipped += 1
            continue
        xs = np.array([ev.location.x for ev in evs])
        ys = np.array([ev.location.y for ev in evs])
        halves = np.array([ev.half for ev in evs])
        per_half = tuple(float(ys[halves == h].mean()) if (halves == h).any() else None
                         for h in (1, 2))
        samples.append(AvgPositionSample(key[1], key[0], PitchPoint(float(xs.mean()), float(ys.mean())),
                                         per_half, len(evs)))
    if skipped:
        log.warning("skipped %d player-matches without located actions", skipped)
    return samples


def detect_side_switch(sample: AvgPositionSample, threshold=30.0):
    """True when the two halves sit on opposite flanks, more than ``threshold`` apart."""
    y1, y2 = sample.per_half_mean_y
    if y1 is None or y2 is None:
        return False
    return (y1 - 50.0) * (y2 - 50.0) < 0 and abs(y1 - y2) > threshold


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    wcss: float
    n_iter: int
    wcss_trace: list = field(default_factory=list)


def _kmeanspp(points, k, rng):
    n = len(points)
    centers = [points[rng.integers(n)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=np.float64)


def _lloyd(points, centroids, max_iter):
    labels, d2 = kernels.kmeans_assign(points, centroids)
    trace = [float(d2.sum())]
    k = len(centroids)
    it = 0
    for it in range(1, max_iter + 1):
        new = np.empty_like(centroids)
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            if counts[c]:
                new[c] = points[labels == c].mean(axis=0)
            else:
                # refill an empty cluster with the worst-served point
                far = int(np.argmax(d2))
                new[c] = points[far]
                d2[far] = 0.0
        centroids = new
        new_labels, d2 = kernels.kmeans_assign(points, centroids)
        trace.append(float(d2.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return centroids, labels, trace, it


def kmeans(points, k, n_init=10, max_iter=300, seed=0):
    """Lloyd's algorithm from k-means++ seeds; best of ``n_init`` restarts by WCSS."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ClusteringError("points must be a 2-D array")
    if k < 1:
        raise ClusteringError("k must be >= 1")
    n_distinct = len(np.unique(points, axis=0))
    if n_distinct < k:
        raise ClusteringError(f"only {n_distinct} distinct points for k={k}")
    best = None
    for r in range(max(n_init, 1)):
        rng = np.random.default_rng([seed, r])
        cents, labels, trace, n_iter = _lloyd(points, _kmeanspp(points, k, rng), max_iter)
        if best is None or trace[-1] < best.wcss:
            best = KMeansResult(cents, labels, trace[-1], n_iter, trace)
    return best


def silhouette_mean(points, labels):
    """Mean silhouette over all samples (Euclidean; singletons score 0)."""
    points = np.asarray(points, dtype=np.float64)
    _, labels = np.unique(np.asarray(labels), return_inverse=True)
    k = int(labels.max()) + 1 if len(labels) else 0
    if k < 2:
        raise ClusteringError("silhouette needs at least two clusters")
    return float(kernels.silhouette_samples(points, labels, k).mean())


@dataclass
class PositionModel:
    k: int
    centroids: np.ndarray
    silhouette: float
    merge_map: dict = field(default_factory=dict)
    labels: tuple = POSITION_LABELS
    silhouette_by_k: dict = field(default_factory=dict)

    def cluster_of(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return kernels.kmeans_assign(points, self.centroids)[0]

    def assign(self, points):
        """Merged position label of each point (nearest centroid)."""
        return [self.merge_map[int(c)] for c in self.cluster_of(points)]

    def to_dict(self):
        return {
            "k": self.k,
            "centroids": [[float(x), float(y)] for x, y in self.centroids],
            "silhouette": float(self.silhouette),
            "merge_map": {str(c): lab for c, lab in sorted(self.merge_map.items())},
            "labels": list(self.labels),
            "silhouette_by_k": {str(k): float(v) for k, v in sorted(self.silhouette_by_k.items())},
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            k=int(data["k"]),
            centroids=np.array(data["centroids"], dtype=np.float64),
            silhouette=float(data["silhouette"]),
            merge_map={int(c): lab for c, lab in data["merge_map"].items()},
            labels=tuple(data["labels"]),
            silhouette_by_k={int(k): float(v) for k, v in data.get("silhouette_by_k", {}).items()},
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def select_k(points, k_range=range(5, 11), n_init=10, max_iter=300, seed=0):
    """Fit k-means for every k and keep the best mean silhouette (ties: smaller k).

    Returns ``(k, draft_model, labels)``; the draft has no merge map yet.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    scores = {}
    fits = {}
    for k in k_range:
        res = kmeans(points, k, n_init=n_init, max_iter=max_iter, seed=seed + 1000 * k)
        fits[k] = res
        scores[k] = silhouette_mean(points, res.labels)
    best_k = max(scores, key=lambda k: (scores[k], -k))
    res = fits[best_k]
    draft = PositionModel(best_k, res.centroids, scores[best_k], silhouette_by_k=scores)
    return best_k, draft, res.labels


def _validate_merge_map(merge_map, k):
    merge_map = {int(c): lab for c, lab in merge_map.items()}
    if set(merge_map) != set(range(k)):
        raise MergeError(f"merge_map must cover cluster ids 0..{k - 1}")
    bad = set(merge_map.values()) - set(POSITION_LABELS)
    if bad:
        raise MergeError(f"unknown position labels {sorted(bad)}")
    if set(merge_map.values()) != set(POSITION_LABELS):
        raise MergeError("merge_map must reach all five positions")
    return merge_map


def merge_side_clusters(centroids, silhouette=float("nan"), merge_map=None, lateral_min=15.0,
                        mirror_tol=10.0, central_tol=8.0, silhouette_by_k=None):
    """Map k clusters onto the five positions, pairing mirrored flank clusters.

    A cluster is a flank cluster when its centroid lies more than
    ``lateral_min`` from the midline ``y = 50``. Flank clusters on opposite
    sides whose centroids coincide within ``mirror_tol`` after reflection form
    pairs; the most advanced pair becomes L/RW and the deepest L/RFB. Central
    clusters go to ST (most advanced), CB (deepest) or CM, where clusters within
    ``central_tol`` of the ST or CB depth join those. A user ``merge_map`` is
    validated and used as is.
    """
    centroids = np.asarray(centroids, dtype=np.float64)
    k = len(centroids)
    if merge_map is not None:
        return PositionModel(k, centroids, silhouette, _validate_merge_map(merge_map, k),
                             silhouette_by_k=dict(silhouette_by_k or {}))
    x, y = centroids[:, 0], centroids[:, 1]
    wide = [c for c in range(k) if abs(y[c] - 50.0) > lateral_min]
    central = [c for c in range(k) if c not in wide]
    candidates = []
    for i in wide:
        for j in wide:
            if i < j and (y[i] - 50.0) * (y[j] - 50.0) < 0:
                dist = float(np.hypot(x[i] - x[j], (100.0 - y[i]) - y[j]))
                if dist <= mirror_tol:
                    candidates.append((dist, i, j))
    pairs = []
    used = set()
    for dist, i, j in sorted(candidates):
        if i not in used and j not in used:
            pairs.append((i, j))
            used.update((i, j))
    if len(pairs) < 2:
        raise MergeError(
            f"found {len(pairs)} mirrored flank pair(s), need 2; supply merge_map in the config")
    pair_x = [0.5 * (x[i] + x[j]) for i, j in pairs]
    top, bottom = int(np.argmax(pair_x)), int(np.argmin(pair_x))
    if top == bottom:
        raise MergeError("flank pairs do not separate by depth; supply merge_map")
    mapping = {}
    for p, (i, j) in enumerate(pairs):
        near_top = abs(pair_x[p] - pair_x[top]) <= abs(pair_x[p] - pair_x[bottom])
        mapping[i] = mapping[j] = "L/RW" if near_top else "L/RFB"
    for c in wide:
        if c not in mapping:
            near_top = abs(x[c] - pair_x[top]) <= abs(x[c] - pair_x[bottom])
            mapping[c] = "L/RW" if near_top else "L/RFB"
    if len(central) < 3:
        raise MergeError(f"only {len(central)} central cluster(s); need ST, CM and CB")
    st = max(central, key=lambda c: (x[c], -c))
    cb = min(central, key=lambda c: (x[c], c))
    for c in central:
        if abs(x[c] - x[st]) <= central_tol:
            mapping[c] = "ST"
        elif abs(x[c] - x[cb]) <= central_tol:
            mapping[c] = "CB"
        else:
            mapping[c] = "CM"
    mapping = dict(sorted(mapping.items()))
    if set(mapping.values()) != set(POSITION_LABELS):
        missing = sorted(set(POSITION_LABELS) - set(mapping.values()))
        raise MergeError(f"automatic merge left positions {missing} empty; supply merge_map")
    return PositionModel(k, centroids, silhouette, mapping,
                         silhouette_by_k=dict(silhouette_by_k or {}))


def cluster_positions(samples: Sequence[AvgPositionSample], k_range=range(5, 11), n_init=10,
                      max_iter=300, seed=0, switch_threshold=30.0, merge_map=None, **merge_kw):
    """Drop side switchers, pick k, merge flanks.

    Returns ``(model, kept_samples, labels, switched_samples)`` where ``labels``
    is the position of each kept sample.
    """
    switched = [s for s in samples if detect_side_switch(s, switch_threshold)]
    flagged = {s.key for s in switched}
    kept = [s for s in samples if s.key not in flagged]
    points = np.array([[s.mean_location.x, s.mean_location.y] for s in kept])
    k, draft, cluster_labels = select_k(points, k_range, n_init, max_iter, seed)
    model = merge_side_clusters(draft.centroids, draft.silhouette, merge_map,
                                silhouette_by_k=draft.silhouette_by_k, **merge_kw)
    labels = [model.merge_map[int(c)] for c in cluster_labels]
    return model, kept, labels, switched
