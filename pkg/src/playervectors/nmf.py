"""Dense NMF by Lee-Seung multiplicative updates on the Frobenius objective."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels

EPS = 1e-12


@dataclass
class NMFOptions:
    max_iter: int = 500
    tol: float = 1e-4  # stop once the relative objective decrease drops below this
    seed: int = 0
    atol: float = 0.0  # also stop once the objective itself drops below this
    n_init: int = 1  # seeded restarts; the lowest final objective wins

    def to_dict(self):
        return {"max_iter": self.max_iter, "tol": self.tol, "seed": self.seed,
                "atol": self.atol, "n_init": self.n_init}


@dataclass
class FactorModel:
    W: np.ndarray  # (d, k), columns are unit-L1 components
    H: np.ndarray  # (k, l), one compressed column per sample
    k: int
    category: Optional[str] = None
    objective_trace: list = field(default_factory=list)
    seed: int = 0
    n_iter: int = 0
    converged: bool = False
    degenerate: bool = False

    @property
    def shape(self):
        return self.W.shape[0], self.H.shape[1]

    def reconstruct(self):
        return self.W @ self.H

    def metadata(self):
        return {
            "category": self.category,
            "k": self.k,
            "rows": self.W.shape[0],
            "cols": self.H.shape[1],
            "seed": self.seed,
            "n_iter": self.n_iter,
            "converged": self.converged,
            "degenerate": self.degenerate,
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def initial_factors(M, k, seed, restart=0):
    """Uniform ``(0, 1]`` draws scaled by ``sqrt(mean(M) / k)``; W drawn first."""
    rng = np.random.default_rng(seed if restart == 0 else [seed, restart])
    scale = np.sqrt(M.mean() / k)
    W = scale * (1.0 - rng.random((M.shape[0], k)))
    H = scale * (1.0 - rng.random((k, M.shape[1])))
    return W, H


# Below this fraction of ||M||^2 the expanded form loses too many digits to
# cancellation and the residual is formed explicitly.
_EXPANDED_FLOOR = 1e-4


def frobenius_objective(M, M_sq, WtM, WtW, W, H):
    """``||M - WH||_F``, via cached products while the fit is still coarse."""
    val = M_sq - 2.0 * np.vdot(WtM, H) + np.vdot(WtW, H @ H.T)
    if val > _EXPANDED_FLOOR * M_sq:
        return float(np.sqrt(val))
    return float(np.linalg.norm(M - W @ H))


def multiplicative_updates(M, W, H, max_iter, tol=0.0, callback=None, atol=0.0):
    """Run H-then-W multiplicative updates in place.

    Returns ``(objective_trace, n_iter, converged)``. ``objective_trace[0]`` is
    the objective at the initial factors and entry ``t`` the objective after
    iteration ``t``. ``callback(t, W, H)`` runs after every iteration.
    """
    M_sq = float(np.vdot(M, M))
    WtM = W.T @ M
    WtW = W.T @ W
    trace = [frobenius_objective(M, M_sq, WtM, WtW, W, H)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        H *= WtM / (WtW @ H + EPS)
        HHt = H @ H.T
        W *= (M @ H.T) / (W @ HHt + EPS)
        WtM = W.T @ M
        WtW = W.T @ W
        obj = frobenius_objective(M, M_sq, WtM, WtW, W, H)
        trace.append(obj)
        if callback is not None:
            callback(it, W, H)
        prev = trace[-2]
        if tol > 0 and prev > 0 and (prev - obj) / prev < tol:
            converged = True
            break
        if obj <= atol:
            converged = True
            break
    return trace, it, converged


def _first_nonzero(col):
    nz = np.flatnonzero(col > 0)
    return int(nz[0]) if nz.size else col.size


def normalize_and_order(W, H):
    """Scale W columns to unit L1 (folding the scale into H) and sort components.

    Components are ordered by decreasing total usage (row sums of H); ties go
    to the component whose W column has its first nonzero cell earlier.
    """
    scale = W.sum(axis=0)
    safe = np.where(scale > 0, scale, 1.0)
    W = W / safe
    H = H * safe[:, None]
    usage = H.sum(axis=1)
    keys = [(-usage[c], _first_nonzero(W[:, c])) for c in range(W.shape[1])]
    order = sorted(range(W.shape[1]), key=lambda c: keys[c])
    return np.ascontiguousarray(W[:, order]), np.ascontiguousarray(H[order])


def _validate(M, k):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("M must be a 2-D matrix")
    if not np.isfinite(M).all():
        raise ValueError("M contains non-finite entries")
    if (M < 0).any():
        raise ValueError("M has negative entries")
    if not 1 <= k <= min(M.shape):
        raise ValueError(f"k={k} out of range 1..{min(M.shape)}")
    return M


def nmf_fit(M, k, opts: Optional[NMFOptions] = None, category=None, init=None):
    """Factorise ``M ~= W H`` with ``W, H >= 0``.

    ``init`` optionally supplies starting ``(W, H)``; otherwise they are drawn
    from ``opts.seed``. An all-zero ``M`` gives zero factors flagged
    ``degenerate``.
    """
    opts = opts or NMFOptions()
    M = _validate(M, k)
    d, l = M.shape
    if not M.any():
        return FactorModel(np.zeros((d, k)), np.zeros((k, l)), k, category,
                           [0.0], opts.seed, 0, True, True)
    best = None
    for restart in range(1 if init is not None else max(opts.n_init, 1)):
        if init is None:
            W, H = initial_factors(M, k, opts.seed, restart)
        else:
            W, H = (np.array(a, dtype=np.float64) for a in init)
        trace, n_iter, converged = multiplicative_updates(
            M, W, H, opts.max_iter, opts.tol, atol=opts.atol)
        if best is None or trace[-1] < best[2][-1]:
            best = (W, H, trace, n_iter, converged)
        if trace[-1] <= opts.atol:
            break
    W, H, trace, n_iter, converged = best
    W, H = normalize_and_order(W, H)
    return FactorModel(W, H, k, category, trace, opts.seed, n_iter, converged, False)


def nmf_transform_many(model: FactorModel, X, max_iter=5000, tol=1e-9):
    """Compressed representation of every column of ``X`` under a fixed ``W``.

    Each column starts from a flat vector carrying its L1 mass and runs
    multiplicative updates until its entries stop moving.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != model.W.shape[0]:
        raise ValueError(f"expected columns of length {model.W.shape[0]}, got {X.shape[0]}")
    if (X < 0).any():
        raise ValueError("X has negative entries")
    W = model.W
    gram = W.T @ W
    wtx = W.T @ X
    init = np.repeat(X.sum(axis=0, keepdims=True) / model.k, model.k, axis=0)
    H, _ = kernels.nmf_transform_columns(gram, wtx, init, max_iter, tol, EPS)
    return H


def nmf_transform(model: FactorModel, x, max_iter=5000, tol=1e-9):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a vector")
    return nmf_transform_many(model, x, max_iter, tol)[:, 0]


def reconstruction_error(model: FactorModel, M):
    M = np.asarray(M, dtype=np.float64)
    if M.shape != model.shape:
        raise ValueError(f"M has shape {M.shape}, model expects {model.shape}")
    return float(np.linalg.norm(M - model.W @ model.H))


# Binary layout: magic, then little-endian uint64 rows, cols, k, seed,
# then W (rows x k) and H (k x cols) as row-major little-endian float64.
MODEL_MAGIC = b"PVNMF001"
_HEADER = struct.Struct("<8sQQQQ")


def save_model(model: FactorModel, path, extra_meta=None):
    path = Path(path)
    d, l = model.shape
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MODEL_MAGIC, d, l, model.k, model.seed))
        fh.write(np.ascontiguousarray(model.W, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.H, dtype="<f8").tobytes())
    meta = model.metadata()
    meta.update(extra_meta or {})
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_model(path):
    path = Path(path)
    raw = path.read_bytes()
    magic, d, l, k, seed = _HEADER.unpack_from(raw)
    if magic != MODEL_MAGIC:
        raise ValueError(f"{path} is not a factor model file")
    off = _HEADER.size
    W = np.frombuffer(raw, dtype="<f8", count=d * k, offset=off).reshape(d, k).astype(np.float64)
    off += 8 * d * k
    H = np.frombuffer(raw, dtype="<f8", count=k * l, offset=off).reshape(k, l).astype(np.float64)
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return FactorModel(
        W, H, int(k), meta.get("category"), meta.get("objective_trace", []), int(seed),
        meta.get("n_iter", 0), meta.get("converged", False), meta.get("degenerate", False),
    )
