"""Directory-tree artifact store: JSON metadata plus binary matrices."""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class MissingArtifact(RuntimeError):
    def __init__(self, path, hint=""):
        self.path = Path(path)
        msg = f"missing artifact {self.path}"
        super().__init__(msg + (f"; {hint}" if hint else ""))


class FingerprintMismatch(RuntimeError):
    pass


def file_sha256(path, chunk=1 << 20):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(chunk), b""):
            h.update(block)
    return h.hexdigest()


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


class ArtifactStore:
    """One directory per stage; each holds ``meta.json`` with the config fingerprint."""

    def __init__(self, root, fingerprint):
        self.root = Path(root)
        self.fingerprint = fingerprint

    def stage_dir(self, stage, create=False):
        d = self.root / stage
        if create:
            d.mkdir(parents=True, exist_ok=True)
        return d

    def path(self, stage, name):
        return self.root / stage / name

    def finish(self, stage, meta):
        """Write the stage's metadata, marking it complete."""
        out = {"stage": stage, "format_version": FORMAT_VERSION, "fingerprint": self.fingerprint}
        out.update(meta)
        write_json(self.path(stage, "meta.json"), out)
        return out

    def require(self, stage, names=(), producer=None, force=False):
        """Metadata of a completed stage, checking its files and fingerprint."""
        hint = f"run `playervectors {producer or stage}` first"
        meta_path = self.path(stage, "meta.json")
        if not meta_path.exists():
            raise MissingArtifact(meta_path, hint)
        for name in names:
            if not self.path(stage, name).exists():
                raise MissingArtifact(self.path(stage, name), hint)
        meta = read_json(meta_path)
        if meta.get("fingerprint") != self.fingerprint and not force:
            raise FingerprintMismatch(
                f"{meta_path} was built with config {meta.get('fingerprint')}, current config is "
                f"{self.fingerprint}; rerun `playervectors {producer or stage}` or pass --force")
        return meta


# Sparse column matrix: magic, little-endian uint64 rows, cols, nnz, then
# indptr (cols + 1 x uint64), row indices (nnz x uint32), values (nnz x float64).
SPARSE_MAGIC = b"PVCSC001"
_SPARSE_HEADER = struct.Struct("<8sQQQ")


def save_sparse_columns(path, rows, indptr, indices, data):
    indptr = np.asarray(indptr, dtype="<u8")
    indices = np.asarray(indices, dtype="<u4")
    data = np.asarray(data, dtype="<f8")
    with Path(path).open("wb") as fh:
        fh.write(_SPARSE_HEADER.pack(SPARSE_MAGIC, rows, len(indptr) - 1, len(data)))
        fh.write(indptr.tobytes())
        fh.write(indices.tobytes())
        fh.write(data.tobytes())


def load_sparse_columns(path):
    """``(rows, indptr, indices, data)`` of a file written by :func:`save_sparse_columns`."""
    raw = Path(path).read_bytes()
    magic, rows, cols, nnz = _SPARSE_HEADER.unpack_from(raw)
    if magic != SPARSE_MAGIC:
        raise ValueError(f"{path} is not a sparse column file")
    off = _SPARSE_HEADER.size
    indptr = np.frombuffer(raw, "<u8", cols + 1, off).astype(np.int64)
    off += 8 * (cols + 1)
    indices = np.frombuffer(raw, "<u4", nnz, off).astype(np.int64)
    off += 4 * nnz
    data = np.frombuffer(raw, "<f8", nnz, off).astype(np.float64)
    return int(rows), indptr, indices, data
