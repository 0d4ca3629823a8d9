"""
Metrics CSV Utilities

Every solve and sweep cell produces one metrics row. This module owns the
CSV schema and guarantees that the file body depends only on the rows:

    solver,lambda,c_lambda,seed,relerr,nnz,loss,time_s,outer_iters,inexactness

SCHEMA RULES:
-------------
- Columns are never omitted; a missing value is written as an empty field.
- Floats are written with repr-precision (17 significant digits), so equal
  numbers always render to equal text.
- An optional run timestamp goes into a leading comment line
  (`# generated ...`) and never into the body. Readers skip comment lines.

READING:
--------
read_csv_rows() skips comment lines and returns the body as string dicts;
the determinism check reads its own sweep files back through it.

USAGE:
------
    from sparse_iscra.utils.csv_utils import write_metrics_csv, read_csv_rows

    write_metrics_csv("sweep.csv", rows, timestamp="2026-10-17T10:00:00")
    rows = read_csv_rows("sweep.csv")
"""

import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

METRICS_HEADER: List[str] = [
    "solver", "lambda", "c_lambda", "seed", "relerr",
    "nnz", "loss", "time_s", "outer_iters", "inexactness",
]

COMMENT_PREFIX = "#"


def format_field(value: Any) -> str:
    """
    Render one metrics field.

    None and NaN become empty strings, floats use repr precision, bools and
    everything else use str().
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if value != value:
            return ""
        return repr(float(value))
    # numpy scalars
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return format_field(value.item())
    return str(value)


def metrics_to_text(rows: Iterable[Dict[str, Any]], timestamp: Optional[str] = None) -> str:
    """
    Serialize metrics rows to CSV text with the fixed header.

    Args:
        rows: Dicts keyed by METRICS_HEADER names; unknown keys are ignored
        timestamp: Optional run timestamp, written as a comment line

    Returns:
        str: The CSV document
    """
    buffer = io.StringIO()
    if timestamp:
        buffer.write(f"{COMMENT_PREFIX} generated {timestamp}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for row in rows:
        writer.writerow([format_field(row.get(column)) for column in METRICS_HEADER])
    return buffer.getvalue()


def write_metrics_csv(
    file_path: Union[str, Path],
    rows: Iterable[Dict[str, Any]],
    timestamp: Optional[str] = None
) -> Path:
    """
    Write metrics rows to a CSV file, creating parent directories.

    Args:
        file_path: Destination path
        rows: Metrics rows (already in the order they should appear)
        timestamp: Optional comment-line timestamp

    Returns:
        Path: The written file
    """
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(metrics_to_text(rows, timestamp), encoding="utf-8")
    return path


def read_csv_rows(file_path: Union[str, Path]) -> List[Dict[str, str]]:
    """
    Read all data rows of a metrics CSV.

    Comment lines are skipped.

    Returns:
        List[Dict[str, str]]: One dict per row, keyed by header names

    Raises:
        FileNotFoundError: If the file does not exist
    """
    with open(file_path, 'r', encoding='utf-8') as f:
        data_lines = (line for line in f if not line.startswith(COMMENT_PREFIX))
        return list(csv.DictReader(data_lines))
