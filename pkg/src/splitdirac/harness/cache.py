"""On-disk cache of reference solutions.

File layout (all integers little-endian)::

    magic      b"SDRF"                  4 bytes
    version    uint8 (FORMAT_VERSION)   1 byte
    hdr_len    uint32                   4 bytes
    header     UTF-8 JSON               hdr_len bytes  (grid, eps, params hash, metadata)
    payload    complex128 '<c16'        2*M*16 bytes   (phi1 then phi2)

A file-system lock per key makes sure exactly one process computes a missing
entry while others wait for it.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import time
from pathlib import Path
from typing import Callable

import numpy as np
from filelock import FileLock

from ..spectral import Grid, SpinorField

log = logging.getLogger(__name__)

MAGIC = b"SDRF"
FORMAT_VERSION = 1
CACHE_ENV = "SPLITDIRAC_CACHE_DIR"


class CacheCorrupt(Exception):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "splitdirac"


def reference_key(grid: Grid, T: float, eps: float, lambda1: float, lambda2: float,
                  potential: np.ndarray, initial: np.ndarray, scheme: str, tau_e: float) -> str:
    h = hashlib.sha256()
    meta = {"a": grid.a, "b": grid.b, "M": grid.M, "T": T, "eps": eps, "lambda1": lambda1,
            "lambda2": lambda2, "scheme": scheme, "tau_e": tau_e, "v": FORMAT_VERSION}
    h.update(json.dumps(meta, sort_keys=True).encode())
    h.update(np.ascontiguousarray(potential, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(initial, dtype="<c16").tobytes())
    return h.hexdigest()[:32]


def write_field(path: Path, field: SpinorField, header: dict):
    hdr = dict(header, a=field.grid.a, b=field.grid.b, M=field.grid.M)
    blob = json.dumps(hdr, sort_keys=True).encode()
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC + struct.pack("<BI", FORMAT_VERSION, len(blob)) + blob)
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())
    os.replace(tmp, path)


def read_field(path: Path) -> tuple[SpinorField, dict]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise CacheCorrupt(f"{path}: bad magic")
    version, n = struct.unpack_from("<BI", data, 4)
    if version != FORMAT_VERSION:
        raise CacheCorrupt(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    try:
        hdr = json.loads(data[9:9 + n])
        grid = Grid(float(hdr["a"]), float(hdr["b"]), int(hdr["M"]))
    except (ValueError, KeyError) as exc:
        raise CacheCorrupt(f"{path}: bad header ({exc})") from None
    payload = data[9 + n:]
    if len(payload) != 2 * grid.M * 16:
        raise CacheCorrupt(f"{path}: payload has {len(payload)} bytes, expected {2 * grid.M * 16}")
    values = np.frombuffer(payload, dtype="<c16").reshape(2, grid.M)
    try:
        return SpinorField(grid, values.astype(complex)), hdr
    except ValueError as exc:
        raise CacheCorrupt(f"{path}: {exc}") from None


class ReferenceCache:
    def __init__(self, directory: str | os.PathLike | None = None):
        self.dir = Path(directory) if directory is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def path(self, key: str) -> Path:
        return self.dir / f"{key}.sdrf"

    def get_or_compute(self, key: str, compute: Callable[[], SpinorField], header: dict | None = None) -> SpinorField:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.path(key)
        with FileLock(str(path) + ".lock"):
            if path.exists():
                try:
                    field, _ = read_field(path)
                    self.hits += 1
                    return field
                except CacheCorrupt as exc:
                    log.warning("reference cache entry corrupt, recomputing: %s", exc)
            self.misses += 1
            t0 = time.perf_counter()
            field = compute()
            meta = dict(header or {}, key=key, seconds=round(time.perf_counter() - t0, 3),
                        created=time.strftime("%Y-%m-%dT%H:%M:%S%z"))
            write_field(path, field, meta)
            return field
