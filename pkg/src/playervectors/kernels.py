"""Numeric inner loops, each in a numba and a pure-numpy flavour.

The public functions dispatch on :func:`playervectors._accel.get_backend`.
Both flavours implement the same arithmetic; they agree to floating-point
rounding, not bit-for-bit, so a single run always sticks to one backend.
"""
import numpy as np

from ._accel import get_backend, njit

__all__ = [
    "reflect_index",
    "smoothing_operator",
    "scatter_smooth",
    "kmeans_assign",
    "silhouette_samples",
    "nmf_transform_columns",
]


@njit
def reflect_index(t, size):
    """Fold ``t`` back into ``[0, size)`` by half-sample mirroring."""
    period = 2 * size
    t = t % period
    if t < 0:
        t += period
    if t >= size:
        t = period - 1 - t
    return t


def smoothing_operator(size, weights):
    """Column-stochastic ``size x size`` matrix scattering one cell through ``weights``.

    Column ``s`` holds where the mass of cell ``s`` lands after convolution with
    the (odd-length, symmetric) kernel ``weights``, with out-of-range targets
    mirrored back. Every column sums to ``weights.sum()``.
    """
    radius = (len(weights) - 1) // 2
    op = np.zeros((size, size))
    for s in range(size):
        for o in range(-radius, radius + 1):
            op[reflect_index(s + o, size), s] += weights[o + radius]
    return op


def _scatter_smooth_numpy(counts, weights):
    a_m = smoothing_operator(counts.shape[0], weights)
    a_n = smoothing_operator(counts.shape[1], weights)
    return a_m @ counts @ a_n.T


@njit
def _scatter_smooth_numba(counts, weights):
    m, n = counts.shape
    radius = (weights.shape[0] - 1) // 2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            c = counts[i, j]
            if c == 0.0:
                continue
            for di in range(-radius, radius + 1):
                ti = reflect_index(i + di, m)
                wi = c * weights[di + radius]
                for dj in range(-radius, radius + 1):
                    tj = reflect_index(j + dj, n)
                    out[ti, tj] += wi * weights[dj + radius]
    return out


def scatter_smooth(counts, weights):
    """Smooth a count grid with a separable kernel, reflecting at the edges.

    Mass is conserved exactly (up to rounding) whenever ``weights`` sums to 1.
    """
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if get_backend() == "numba":
        return _scatter_smooth_numba(counts, weights)
    return _scatter_smooth_numpy(counts, weights)


def _kmeans_assign_numpy(points, centroids):
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(len(points)), labels]


@njit
def _kmeans_assign_numba(points, centroids):
    n, dim = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n)
    for i in range(n):
        best_d = np.inf
        best_c = 0
        for c in range(k):
            d = 0.0
            for t in range(dim):
                diff = points[i, t] - centroids[c, t]
                d += diff * diff
            if d < best_d:
                best_d = d
                best_c = c
        labels[i] = best_c
        best[i] = best_d
    return labels, best


def kmeans_assign(points, centroids):
    """Nearest-centroid labels and squared distances (ties go to the lower index)."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    if get_backend() == "numba":
        return _kmeans_assign_numba(points, centroids)
    return _kmeans_assign_numpy(points, centroids)


def _cluster_distance_sums_numpy(points, labels, k, chunk=512):
    n = len(points)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    sums = np.empty((n, k))
    for start in range(0, n, chunk):
        block = points[start:start + chunk]
        dist = np.sqrt(((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
        sums[start:start + chunk] = dist @ onehot
    return sums


@njit
def _cluster_distance_sums_numba(points, labels, k):
    n, dim = points.shape
    sums = np.zeros((n, k))
    for i in range(n):
        for j in range(i + 1, n):
            d = 0.0
            for t in range(dim):
                diff = points[i, t] - points[j, t]
                d += diff * diff
            d = np.sqrt(d)
            sums[i, labels[j]] += d
            sums[j, labels[i]] += d
    return sums


def silhouette_samples(points, labels, k):
    """Per-sample silhouette values; members of singleton clusters score 0."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if get_backend() == "numba":
        sums = _cluster_distance_sums_numba(points, labels, k)
    else:
        sums = _cluster_distance_sums_numpy(points, labels, k)
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    n = len(points)
    own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[np.arange(n), labels] / (own - 1.0)
        means = sums / sizes[None, :]
    means[np.arange(n), labels] = np.inf
    means[:, sizes == 0] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s[own <= 1] = 0.0
    return s


def _nmf_transform_numpy(gram, wtx, init, max_iter, tol, eps):
    h = init.copy()
    iters = np.zeros(h.shape[1], dtype=np.int64)
    active = np.flatnonzero(h.sum(axis=0) > 0)
    for it in range(1, max_iter + 1):
        if active.size == 0:
            break
        ha = h[:, active]
        new = ha * wtx[:, active] / (gram @ ha + eps)
        h[:, active] = new
        iters[active] = it
        change = np.abs(new - ha).max(axis=0)
        scale = new.max(axis=0)
        done = change <= tol * np.maximum(scale, 1e-300)
        active = active[~done]
    return h, iters


@njit
def _nmf_transform_numba(gram, wtx, init, max_iter, tol, eps):
    k, cols = init.shape
    h = init.copy()
    iters = np.zeros(cols, dtype=np.int64)
    new = np.empty(k)
    for c in range(cols):
        total = 0.0
        for r in range(k):
            total += h[r, c]
        if total <= 0.0:
            continue
        for it in range(1, max_iter + 1):
            change = 0.0
            scale = 0.0
            for r in range(k):
                denom = 0.0
                for q in range(k):
                    denom += gram[r, q] * h[q, c]
                new[r] = h[r, c] * wtx[r, c] / (denom + eps)
            for r in range(k):
                diff = abs(new[r] - h[r, c])
                if diff > change:
                    change = diff
                if new[r] > scale:
                    scale = new[r]
                h[r, c] = new[r]
            iters[c] = it
            if change <= tol * max(scale, 1e-300):
                break
    return h, iters


def nmf_transform_columns(gram, wtx, init, max_iter, tol, eps):
    """Multiplicative updates for ``H`` with ``W`` frozen, column by column.

    ``gram`` is ``W.T @ W`` and ``wtx`` is ``W.T @ X``. Each column stops on its
    own once the largest entry change falls below ``tol`` times its largest
    entry, so a column's result never depends on which other columns share the
    call.
    """
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    wtx = np.ascontiguousarray(wtx, dtype=np.float64)
    init = np.ascontiguousarray(init, dtype=np.float64)
    if get_backend() == "numba":
        return _nmf_transform_numba(gram, wtx, init, int(max_iter), float(tol), float(eps))
    return _nmf_transform_numpy(gram, wtx, init, int(max_iter), float(tol), float(eps))
