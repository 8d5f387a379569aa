# core/write_queue.py
import csv
import json
import logging
from collections import defaultdict
from pathlib import Path


class ResultWriter:
    """
    Buffered writer for CSV rows and JSON documents.

    Rows are grouped by destination file and written in bulk every
    `flush_every` rows (and on close). Output is deterministic: CSV floats use
    repr, JSON uses sorted keys and a trailing newline.
    """

    def __init__(self, flush_every=1000):
        self.flush_every = flush_every
        # path -> buffered rows / header
        self._rows = defaultdict(list)
        self._headers = {}
        self._opened = set()
        self.written = defaultdict(int)

    def add_row(self, path, header, row):
        """Buffer one CSV row"""
        path = Path(path)
        header = tuple(header)
        known = self._headers.setdefault(path, header)
        if known != header:
            raise ValueError(f"header mismatch for {path}: {known} vs {header}")
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        self._rows[path].append(list(row))
        if len(self._rows[path]) >= self.flush_every:
            self._flush_path(path)

    def add_rows(self, path, header, rows):
        for row in rows:
            self.add_row(path, header, row)

    def write_json(self, path, document):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(document, fh, sort_keys=True, indent=2, default=_json_default)
            fh.write("\n")
        logging.debug(f"✅ Wrote JSON {path}")

    def _flush_path(self, path):
        rows = self._rows.pop(path, [])
        first = path not in self._opened
        if not rows and not first:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with open(path, "w" if first else "a", encoding="utf-8", newline="") as fh:
                out = csv.writer(fh, lineterminator="\n")
                if first:
                    out.writerow(self._headers[path])
                    self._opened.add(path)
                out.writerows(rows)
            self.written[path] += len(rows)
            logging.debug(f"✅ Flushed {len(rows)} rows to {path}")
        except OSError as e:
            logging.error(f"❌ Result flush error [{path}]: {e}")
            raise

    def flush(self):
        for path in list(self._headers):
            self._flush_path(path)

    def close(self):
        self.flush()
        self._rows.clear()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False


def _json_default(value):
    # numpy scalars and arrays
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")
