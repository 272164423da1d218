"""On-disk Sample Cache of optimized sets, keyed by (N, M).

File layout (all little-endian)::

    offset  size  field
    0       8     magic b"LCDSYM01"
    8       4     version (u32)
    12      4     dim N (u32)
    16      4     half_count L (u32)
    20      1     includes_center (u8, 0 or 1)
    21      3     reserved, zero
    24      8*L*N half_positions, row-major float64
    ...     4     CRC-32 of everything before it (u32)

Files are named ``d{N}_m{M}.lcdsym`` and written through a temp file plus
``os.replace`` so readers never observe a partial file.
"""
from __future__ import annotations

import os
import struct
import tempfile
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .errors import CacheIntegrityError, ConfigError
from .mixture import SymmetricSampleSet

MAGIC = b"LCDSYM01"
VERSION = 1
HEADER = struct.Struct("<8sIIIB3s")
TRAILER = struct.Struct("<I")
ENV_VAR = "LCDSYM_CACHE_DIR"
DEFAULT_ROOT = "./sample-cache/"
SUFFIX = ".lcdsym"


@dataclass(frozen=True)
class CacheKey:
    dim: int
    total_samples: int

    def __post_init__(self):
        if self.dim < 1 or self.total_samples < 2 * self.dim:
            raise ConfigError(f"invalid cache key N={self.dim}, M={self.total_samples}: need M >= 2N")

    @property
    def filename(self) -> str:
        return f"d{self.dim}_m{self.total_samples}{SUFFIX}"

    @classmethod
    def of(cls, sset: SymmetricSampleSet) -> "CacheKey":
        return cls(sset.dim, sset.total_samples)


def default_root() -> Path:
    return Path(os.environ.get(ENV_VAR, DEFAULT_ROOT))


def _resolve(root) -> Path:
    return default_root() if root is None else Path(root)


def encode(sset: SymmetricSampleSet) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, sset.dim, sset.half_count, int(sset.includes_center), b"\0\0\0")
    body = header + np.ascontiguousarray(sset.half_positions, dtype="<f8").tobytes()
    return body + TRAILER.pack(zlib.crc32(body))


def decode(data: bytes, path="<bytes>") -> SymmetricSampleSet:
    if len(data) < HEADER.size + TRAILER.size:
        raise CacheIntegrityError(path, f"truncated file ({len(data)} bytes)")
    magic, version, dim, half, center, reserved = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CacheIntegrityError(path, f"bad magic {magic!r}")
    if version != VERSION:
        raise CacheIntegrityError(path, f"unsupported version {version}")
    if center not in (0, 1) or reserved != b"\0\0\0":
        raise CacheIntegrityError(path, "corrupt header flags")
    if dim < 1 or half < 1:
        raise CacheIntegrityError(path, f"invalid dimensions N={dim}, L={half}")
    expected = HEADER.size + 8 * dim * half + TRAILER.size
    if len(data) != expected:
        raise CacheIntegrityError(path, f"size {len(data)} bytes, expected {expected}")
    (crc,) = TRAILER.unpack_from(data, expected - TRAILER.size)
    if zlib.crc32(data[: expected - TRAILER.size]) != crc:
        raise CacheIntegrityError(path, "checksum mismatch")
    pos = np.frombuffer(data, dtype="<f8", count=dim * half, offset=HEADER.size).reshape(half, dim)
    if not np.all(np.isfinite(pos)):
        raise CacheIntegrityError(path, "non-finite sample coordinates")
    return SymmetricSampleSet(pos.astype(np.float64), bool(center))


def path_for(key: CacheKey, root=None) -> Path:
    return _resolve(root) / key.filename


def store(sset: SymmetricSampleSet, root=None) -> Path:
    key = CacheKey.of(sset)
    root = _resolve(root)
    target = root / key.filename
    data = encode(sset)
    try:
        root.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{key.filename}.", suffix=".tmp", dir=root)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write sample cache file {target}: {exc}") from exc
    return target


def lookup(key: CacheKey, root=None) -> Optional[SymmetricSampleSet]:
    path = path_for(key, root)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        return None
    sset = decode(data, path)
    if CacheKey.of(sset) != key:
        raise CacheIntegrityError(path, f"contents are N={sset.dim}, M={sset.total_samples}, not {key}")
    return sset


def entries(root=None) -> Iterator[Path]:
    root = _resolve(root)
    if not root.is_dir():
        return iter(())
    return iter(sorted(root.glob(f"d*_m*{SUFFIX}")))


def validate(path) -> SymmetricSampleSet:
    path = Path(path)
    return decode(path.read_bytes(), path)


def purge(root=None) -> int:
    n = 0
    for p in entries(root):
        p.unlink()
        n += 1
    return n
