"""Smoothed per-action heatmaps and the heatmap matrix fed to NMF."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .events import ActionCategory, MatchEvent

NORMALIZATIONS = ("l1", "per90", "none")


@dataclass(frozen=True)
class GridSpec:
    m: int = 50  # cells along the pitch length
    n: int = 34  # cells across the pitch width
    sigma: float = 1.5  # Gaussian radius, in cells
    normalization: str = "l1"

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.m}x{self.n}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    @property
    def size(self):
        return self.m * self.n

    def to_dict(self):
        return {"m": self.m, "n": self.n, "sigma": self.sigma,
                "normalization": self.normalization}

    def cell_centers(self):
        """Pitch coordinates of every cell centre, row-major, shape ``(m*n, 2)``."""
        xs = (np.arange(self.m) + 0.5) * 100.0 / self.m
        ys = (np.arange(self.n) + 0.5) * 100.0 / self.n
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


@lru_cache(maxsize=32)
def gaussian_weights(sigma):
    """Normalised Gaussian truncated at ``ceil(3 * sigma)`` cells."""
    if sigma == 0:
        return np.ones(1)
    radius = int(math.ceil(3 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    w /= w.sum()
    w.flags.writeable = False
    return w


@dataclass
class Heatmap:
    grid: np.ndarray
    player_id: str
    match_id: str
    category: ActionCategory
    event_count: int

    @property
    def shape(self):
        return self.grid.shape


def cell_index(x, y, m, n):
    """Grid cell of a pitch point; the far edges belong to the last cell."""
    i = np.minimum((np.asarray(x, dtype=np.float64) * m / 100.0).astype(np.int64), m - 1)
    j = np.minimum((np.asarray(y, dtype=np.float64) * n / 100.0).astype(np.int64), n - 1)
    return i, j


def bin_counts(xs, ys, spec: GridSpec):
    counts = np.zeros((spec.m, spec.n))
    if len(xs):
        i, j = cell_index(xs, ys, spec.m, spec.n)
        np.add.at(counts, (i, j), 1.0)
    return counts


def smooth_counts(xs, ys, spec: GridSpec):
    """Binned and smoothed counts before normalisation (sums to the event count)."""
    counts = bin_counts(xs, ys, spec)
    if spec.sigma == 0 or not counts.any():
        return counts
    return kernels.scatter_smooth(counts, gaussian_weights(spec.sigma))


def normalize_grid(grid, event_count, spec: GridSpec, minutes=None):
    if event_count == 0:
        return np.zeros_like(grid)
    if spec.normalization == "l1":
        return grid / grid.sum()
    if spec.normalization == "per90":
        if not minutes:
            raise ValueError("per90 normalisation needs minutes played")
        return grid * (90.0 / minutes)
    return grid


def build_heatmap(events: Sequence[MatchEvent], spec: GridSpec, *, player_id=None,
                  match_id=None, category=None, minutes=None):
    """Heatmap of one player's actions of one category in one match.

    Identity fields default to those of the first event; they must be given
    explicitly for an empty event list.
    """
    if events:
        first = events[0]
        player_id = first.player_id if player_id is None else player_id
        match_id = first.match_id if match_id is None else match_id
        category = first.category if category is None else category
        for ev in events:
            if ev.player_id != player_id or ev.match_id != match_id or category not in ev.categories:
                raise ValueError("events must share player, match and category")
    if category is not None:
        category = ActionCategory.parse(category)
    xs = np.fromiter((ev.location.x for ev in events), dtype=np.float64, count=len(events))
    ys = np.fromiter((ev.location.y for ev in events), dtype=np.float64, count=len(events))
    grid = normalize_grid(smooth_counts(xs, ys, spec), len(events), spec, minutes)
    return Heatmap(grid, player_id, match_id, category, len(events))


def vectorize(h):
    """Row-major flattening of a heatmap (or bare grid)."""
    grid = h.grid if isinstance(h, Heatmap) else np.asarray(h)
    return np.ascontiguousarray(grid).reshape(-1).copy()


def unvectorize(x, spec: GridSpec):
    return np.asarray(x).reshape(spec.m, spec.n)


def build_matrix(heatmaps: Sequence[Heatmap]):
    """Stack heatmaps as columns of ``M`` ordered by ``(match_id, player_id)``.

    Returns ``(M, index)`` where ``index[j]`` is the ``(match_id, player_id)``
    pair of column ``j``.
    """
    if not heatmaps:
        raise ValueError("no heatmaps to stack")
    shape = heatmaps[0].shape
    category = heatmaps[0].category
    by_key = {}
    for h in heatmaps:
        if h.shape != shape:
            raise ValueError("heatmaps must share one grid")
        if h.category != category:
            raise ValueError("heatmaps must share one category")
        key = (h.match_id, h.player_id)
        if key in by_key:
            raise ValueError(f"duplicate heatmap for (match, player) {key}")
        by_key[key] = h
    index = sorted(by_key)
    M = np.empty((shape[0] * shape[1], len(index)))
    for j, key in enumerate(index):
        M[:, j] = vectorize(by_key[key])
    return M, index


def category_matrix(events_by_key, keys, category, spec: GridSpec, minutes=None):
    """Build ``M`` for one category straight from grouped events.

    ``events_by_key`` maps ``(match_id, player_id)`` to that player's events in
    the match; ``keys`` fixes the column order. Columns of keys without any
    action of ``category`` stay zero.
    """
    category = ActionCategory.parse(category)
    M = np.zeros((spec.size, len(keys)))
    counts = np.zeros(len(keys), dtype=np.int64)
    for j, key in enumerate(keys):
        evs = [ev for ev in events_by_key.get(key, ()) if category in ev.categories]
        if not evs:
            continue
        xs = np.fromiter((ev.location.x for ev in evs), dtype=np.float64, count=len(evs))
        ys = np.fromiter((ev.location.y for ev in evs), dtype=np.float64, count=len(evs))
        mins = None if minutes is None else minutes[key]
        M[:, j] = normalize_grid(smooth_counts(xs, ys, spec), len(evs), spec, mins).reshape(-1)
        counts[j] = len(evs)
    return M, counts
