import os
import sys
import struct
from pathlib import Path

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.storage import read_header  # noqa: E402

load_dotenv()


def inspect(cache_dir):
    """Header of every cached table file in cache_dir"""
    rows = []
    for path in sorted(Path(cache_dir).glob("*.rlab")):
        try:
            header = read_header(path)
        except (OSError, ValueError, struct.error) as e:
            header = {"error": str(e)}
        header["file"] = path.name
        header["bytes"] = path.stat().st_size
        rows.append(header)
    return rows


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    cache_dir = argv[0] if argv else os.getenv("RLAB_CACHE_DIR", "cache")
    rows = inspect(cache_dir)

    print(f"--- TABLE CACHE ({cache_dir}) ---")
    if not rows:
        print("(empty)")
    for row in rows:
        if "error" in row:
            print(f"{row['file']}: unreadable ({row['error']})")
            continue
        ks = ",".join(str(k) for k in row["k_list"]) or "-"
        print(f"{row['file']}: {row['magic']} v{row['version']} N={row['N']:,} k={ks} "
              f"({row['bytes'] / 1e6:.1f} MB)")
        print("    lengths: " + ", ".join(f"{name}={n:,}" for name, n in row["lengths"].items()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
