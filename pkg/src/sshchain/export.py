"""CSV / JSON writers.

Floats are rounded to ``precision`` significant digits and then printed
with the shortest representation that round-trips that rounded value.
Files are written to a temporary sibling and renamed into place, so a
failed write never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PRECISION_RANGE = (6, 17)


class ExportError(OSError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    metadata: dict = field(default_factory=dict)


def round_float(x: float, precision: int) -> float:
    return float(f"{x:.{precision}g}")


def format_value(x: Any, precision: int) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(round_float(x, precision))
    return str(x)


def _json_value(x: Any, precision: int) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not math.isfinite(x) else round_float(x, precision)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(y, precision) for y in x]
    return x


def table_csv(table: Table, precision: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(x, precision) for x in row])
    return buf.getvalue()


def table_json(table: Table, precision: int) -> str:
    doc = {
        "metadata": table.metadata,
        "columns": table.columns,
        "rows": [[_json_value(x, precision) for x in row] for row in table.rows],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def matrix_csv(
    row_name: str, row_values, col_name: str, col_values, matrix: np.ndarray, precision: int
) -> str:
    """First row holds the column-axis grid, first column the row-axis grid."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{row_name}\\{col_name}"] + [format_value(float(c), precision) for c in col_values])
    for r, line in zip(row_values, matrix):
        writer.writerow([format_value(float(r), precision)] + [format_value(float(x), precision) for x in line])
    return buf.getvalue()


def matrices_json(
    metadata: dict, row_name: str, row_values, col_name: str, col_values,
    matrices: dict[str, np.ndarray], status: list[list[str]], precision: int,
) -> str:
    doc = {
        "metadata": metadata,
        "rows": {"name": row_name, "values": _json_value(list(row_values), precision)},
        "cols": {"name": col_name, "values": _json_value(list(col_values), precision)},
        "matrices": {k: _json_value(m.tolist(), precision) for k, m in matrices.items()},
        "status": status,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(text: str, path: str | None) -> None:
    """Write to ``path`` atomically, or to stdout when ``path`` is None or '-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".sshchain-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)


def export_table(table: Table, path: str | None, fmt: str = "csv", precision: int = 12) -> None:
    if fmt == "csv":
        write_text(table_csv(table, precision), path)
    elif fmt == "json":
        write_text(table_json(table, precision), path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
