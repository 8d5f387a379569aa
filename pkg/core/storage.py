# core/storage.py
import os
import struct
import logging
from pathlib import Path
from typing import Dict, Iterable, Optional

import numpy as np

from core.arith import ArithTables, build_tables, DEFAULT_MAX_LIMIT
from core.cache import invalidate_tables, table_ks, tables_cache, tables_key
from core.errors import CapacityError

logger = logging.getLogger(__name__)

MAGIC = b"RLAB"
FORMAT_VERSION = 1

# Layout (little endian):
#   magic "RLAB" | u16 version | u64 N
#   d, r2, omega          : u64 length + length * u64
#   squarefree            : u64 length + length * u8
#   u16 count of d_k tables, then per table: u16 k | u64 length + length * u64
_U16 = struct.Struct("<H")
_U64 = struct.Struct("<Q")


def cache_filename(N: int, k_list: Iterable[int]) -> str:
    ks = "-".join(str(k) for k in sorted(set(k_list))) or "none"
    return f"tables_N{int(N)}_k{ks}.rlab"


def _write_array(fh, arr: np.ndarray, dtype: str):
    data = np.ascontiguousarray(arr, dtype=dtype)
    fh.write(_U64.pack(len(data)))
    fh.write(data.tobytes())


def _read_array(fh, dtype: str, itemsize: int) -> np.ndarray:
    (length,) = _U64.unpack(fh.read(8))
    raw = fh.read(length * itemsize)
    if len(raw) != length * itemsize:
        raise ValueError("truncated table payload")
    return np.frombuffer(raw, dtype=dtype).copy()


def save_tables(tables: ArithTables, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U16.pack(FORMAT_VERSION))
        fh.write(_U64.pack(tables.limit))
        for arr in (tables.d, tables.r2, tables.omega):
            _write_array(fh, arr, "<u8")
        _write_array(fh, tables.squarefree, "u1")
        fh.write(_U16.pack(len(tables.dk)))
        for k in sorted(tables.dk):
            fh.write(_U16.pack(k))
            _write_array(fh, tables.dk[k], "<u8")
    os.replace(tmp, path)
    return path


def read_header(path) -> Dict:
    """Header fields plus per-table lengths, without loading the payload into tables"""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        (version,) = _U16.unpack(fh.read(2))
        (N,) = _U64.unpack(fh.read(8))
        lengths = {}
        for name, itemsize in (("d", 8), ("r2", 8), ("omega", 8), ("squarefree", 1)):
            (length,) = _U64.unpack(fh.read(8))
            fh.seek(length * itemsize, os.SEEK_CUR)
            lengths[name] = length
        (count,) = _U16.unpack(fh.read(2))
        k_list = []
        for _ in range(count):
            (k,) = _U16.unpack(fh.read(2))
            (length,) = _U64.unpack(fh.read(8))
            fh.seek(length * 8, os.SEEK_CUR)
            k_list.append(k)
            lengths[f"d{k}"] = length
    return {"magic": magic.decode(), "version": version, "N": N, "k_list": k_list, "lengths": lengths}


def load_tables(path) -> ArithTables:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError("not a resonance-lab table cache")
        (version,) = _U16.unpack(fh.read(2))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        (N,) = _U64.unpack(fh.read(8))
        d, r2, omega = (_read_array(fh, "<u8", 8).astype(np.int64) for _ in range(3))
        squarefree = _read_array(fh, "u1", 1).astype(bool)
        (count,) = _U16.unpack(fh.read(2))
        dk = {}
        for _ in range(count):
            (k,) = _U16.unpack(fh.read(2))
            dk[k] = _read_array(fh, "<u8", 8).astype(np.int64)
    if len(d) != N + 1:
        raise ValueError(f"table length {len(d)} does not match N={N}")
    return ArithTables(limit=int(N), d=d, r2=r2, omega=omega, squarefree=squarefree, dk=dk)


class TableStorage:
    def __init__(self, cache_dir=None, max_limit: int = DEFAULT_MAX_LIMIT):
        self.cache_dir = Path(cache_dir or os.getenv("RLAB_CACHE_DIR", "cache"))
        self.max_limit = max_limit

    def path_for(self, N: int, k_list: Iterable[int]) -> Path:
        return self.cache_dir / cache_filename(N, k_list)

    # --- TABLES (MEMORY CACHE -> DISK -> BUILD) ---

    def get_tables(self, N: int, k_list: Iterable[int] = ()) -> ArithTables:
        """Get sieve tables (Cached)"""
        k_list = list(table_ks(k_list))
        if int(N) > self.max_limit:
            raise CapacityError(f"sieve limit {int(N):,} exceeds the memory cap {self.max_limit:,}")
        key = tables_key(N, k_list)
        if key in tables_cache:
            return tables_cache[key]

        path = self.path_for(N, k_list)
        tables = None
        if path.exists():
            try:
                tables = load_tables(path)
                logging.info(f"📂 Loaded tables from {path}")
            except Exception as e:
                logging.error(f"❌ Cache read failed for {path}: {e} (rebuilding)")

        if tables is None:
            tables = build_tables(N, k_list, max_limit=self.max_limit)
            self.save(tables)

        tables_cache[key] = tables
        return tables

    def save(self, tables: ArithTables) -> Optional[Path]:
        """Save tables to disk (Invalidates Cache)"""
        path = self.path_for(tables.limit, tables.k_list)
        try:
            save_tables(tables, path)
            logging.info(f"💾 Cached tables to {path}")
        except OSError as e:
            logging.error(f"⚠️ Could not write table cache {path}: {e}")
            return None
        invalidate_tables(tables.limit, tables.k_list)
        return path
