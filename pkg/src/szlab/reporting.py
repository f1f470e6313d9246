"""CSV/JSON emission with reproducible formatting.

Numbers render with 17 significant digits (round-trip exact for float64),
CSV follows RFC 4180 quoting with CRLF line endings, JSON is written with
sorted keys; re-running a seeded experiment therefore reproduces its output
files byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


def format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)):
        return str(x)
    return "%.17g" % float(x)


def render_cell(x) -> str:
    if isinstance(x, str):
        return x
    return format_number(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([render_cell(c) for c in row])
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def columns_to_rows(table: dict, keys) -> list:
    return [tuple(table[k][i] for k in keys)
            for i in range(len(table[keys[0]]))]
