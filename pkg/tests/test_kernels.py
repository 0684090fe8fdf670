"""The numba and numpy flavours of every kernel agree."""
import numpy as np
import pytest

from playervectors import _accel, kernels
from playervectors.heatmap import gaussian_weights

pytestmark = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")


def both(fn, *args):
    out = {}
    old = _accel.get_backend()
    try:
        for name in ("numba", "numpy"):
            _accel.set_backend(name)
            out[name] = fn(*args)
    finally:
        _accel.set_backend(old)
    return out["numba"], out["numpy"]


def test_reflect_index():
    assert [kernels.reflect_index(t, 4) for t in range(-3, 8)] == [2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]


def test_smoothing_operator_columns_sum_to_one():
    op = kernels.smoothing_operator(7, gaussian_weights(1.5))
    np.testing.assert_allclose(op.sum(axis=0), 1.0, atol=1e-15)


def test_scatter_smooth(rng):
    counts = rng.poisson(0.3, size=(50, 34)).astype(float)
    a, b = both(kernels.scatter_smooth, counts, gaussian_weights(1.5))
    np.testing.assert_allclose(a, b, atol=1e-13)
    assert abs(a.sum() - counts.sum()) < 1e-9


def test_kmeans_assign(rng):
    pts, cen = rng.random((300, 2)), rng.random((7, 2))
    (la, da), (lb, db) = both(kernels.kmeans_assign, pts, cen)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_allclose(da, db, atol=1e-15)


def test_kmeans_assign_tie_goes_to_lower_index():
    pts = np.array([[0.5, 0.0]])
    cen = np.array([[0.0, 0.0], [1.0, 0.0]])
    for labels, _ in both(kernels.kmeans_assign, pts, cen):
        assert labels[0] == 0


def test_silhouette_samples(rng):
    pts = rng.random((257, 2))
    labels = rng.integers(0, 5, 257)
    a, b = both(kernels.silhouette_samples, pts, labels, 5)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_nmf_transform_columns(rng):
    W = rng.random((40, 4))
    X = rng.random((40, 6))
    X[:, 3] = 0
    init = np.repeat(X.sum(axis=0, keepdims=True) / 4, 4, axis=0)
    (ha, ia), (hb, ib) = both(kernels.nmf_transform_columns, W.T @ W, W.T @ X, init, 3000,
                              1e-10, 1e-12)
    np.testing.assert_allclose(ha, hb, rtol=1e-9, atol=1e-12)
    np.testing.assert_array_equal(ia, ib)
    assert ia[3] == 0 and not ha[:, 3].any()


def test_env_flag_parsing(monkeypatch):
    monkeypatch.setenv(_accel.DISABLE_ENV, "1")
    assert _accel._env_disabled()
    monkeypatch.setenv(_accel.DISABLE_ENV, "0")
    assert not _accel._env_disabled()
    with pytest.raises(ValueError):
        _accel.set_backend("gpu")
