"""CSV/JSON emission with reproducible number formatting.

Floats are written in their shortest round-trip form (``repr``), files are
written once via a temp file and rename, and all CSVs use LF endings with a
mandatory header row.
"""

import csv
import datetime as _dt
import io
import json
import math
import os
import tempfile

import numpy as np

from . import __version__

__all__ = [
    "atomic_write",
    "format_value",
    "make_envelope",
    "read_table_csv",
    "table_to_csv",
    "write_json",
    "write_table",
]


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def table_to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, columns, rows):
    atomic_write(path, table_to_csv(columns, rows))


def _parse_cell(text):
    if text == "true":
        return True
    if text == "false":
        return False
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table_csv(path):
    """Read a CSV written by :func:`write_table` back into ``(columns, rows)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[_parse_cell(c) for c in r] for r in reader if r]
    return columns, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else format_value(v)
    return obj


def make_envelope(subcommand, config, results, provenance=None, timestamp=None):
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {
        "toolkit": "bennett_bounds",
        "version": __version__,
        "subcommand": subcommand,
        "timestamp": stamp,
        "config": _jsonable(config),
        "results": _jsonable(results),
        "provenance": _jsonable(provenance or {}),
    }


def write_json(path, payload):
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
