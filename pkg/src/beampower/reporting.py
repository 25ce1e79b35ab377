"""CSV output: header row, one comment line with the resolved config hash,
full-precision decimal floats so reruns diff byte-for-byte.
"""

from __future__ import annotations

import os


def fmt(value) -> str:
    """Full-precision, reproducible cell text."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, str)):
        return str(value)
    # numpy scalars
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


def write_csv(path, columns, rows, cfg_hash: str) -> None:
    """Write rows (iterables matching `columns`) under a config-hash comment."""
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_sha256={cfg_hash}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path):
    """Read back a write_csv file: (columns, rows of strings, cfg_hash)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    cfg_hash = ""
    if lines and lines[0].startswith("# config_sha256="):
        cfg_hash = lines[0].split("=", 1)[1]
        lines = lines[1:]
    columns = lines[0].split(",") if lines else []
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return columns, rows, cfg_hash
