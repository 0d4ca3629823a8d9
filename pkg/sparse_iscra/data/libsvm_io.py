"""
LIBSVM text format reader/writer

Each line is

    label idx:val idx:val ...

with 1-based, strictly increasing indices. The reader returns a dense
ProblemInstance (labels become b) with all-zero columns removed, plus the
column map: column j of the instance is original LIBSVM feature column_map[j].

Relative paths are resolved against $SPARSE_ISCRA_DATA_DIR when set.

Usage:
    instance, column_map = read_libsvm("pyrim_scale")
    write_libsvm("copy.txt", instance, column_map)
"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..models.problem import ProblemInstance
from ..utils.config import resolve_data_path
from ..utils.errors import InvalidArgumentError, ParseError


def _parse_float(token: str, what: str, line_number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"invalid {what} {token!r}", line_number) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} {token!r}", line_number)
    return value


def parse_line(line: str, line_number: int) -> Tuple[float, List[Tuple[int, float]]]:
    """
    Parse one data line into (label, [(1-based index, value), ...]).

    Raises:
        ParseError: Malformed token or non-increasing indices
    """
    parts = line.split()
    label = _parse_float(parts[0], "label", line_number)
    entries: List[Tuple[int, float]] = []
    previous = 0
    for token in parts[1:]:
        index_text, sep, value_text = token.partition(":")
        if not sep:
            raise ParseError(f"expected idx:val, got {token!r}", line_number)
        try:
            index = int(index_text)
        except ValueError:
            raise ParseError(f"invalid index {index_text!r}", line_number) from None
        if index < 1:
            raise ParseError(f"indices are 1-based, got {index}", line_number)
        if index <= previous:
            raise ParseError(f"indices must be strictly increasing ({index} after {previous})", line_number)
        entries.append((index, _parse_float(value_text, "value", line_number)))
        previous = index
    return label, entries


def read_libsvm(
    file_path: Union[str, Path],
    n_features: Optional[int] = None,
) -> Tuple[ProblemInstance, Tuple[int, ...]]:
    """
    Read a LIBSVM file into a dense, cleaned instance.

    Args:
        file_path: Path (relative paths resolve against SPARSE_ISCRA_DATA_DIR)
        n_features: Declared feature count; inferred from the largest index if None

    Returns:
        Tuple[ProblemInstance, Tuple[int, ...]]: Instance and the original
        1-based feature index of every kept column

    Raises:
        ParseError: Malformed line, index above n_features, or no data
        OSError: File cannot be read
    """
    path = resolve_data_path(file_path)
    labels: List[float] = []
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    with path.open('r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            label, entries = parse_line(line, line_number)
            if n_features is not None and entries and entries[-1][0] > n_features:
                raise ParseError(f"index {entries[-1][0]} exceeds declared n = {n_features}", line_number)
            row = len(labels)
            labels.append(label)
            for index, value in entries:
                rows.append(row)
                cols.append(index - 1)
                vals.append(value)
    if not labels:
        raise ParseError(f"no data rows in {path}")

    n = n_features if n_features is not None else (max(cols) + 1 if cols else 0)
    if n < 1:
        raise ParseError(f"no features in {path}")
    A = sparse.coo_matrix((vals, (rows, cols)), shape=(len(labels), n)).toarray()
    keep = np.flatnonzero(A.any(axis=0))
    if keep.size == 0:
        raise ParseError(f"every column of {path} is zero")
    column_map = tuple(int(j) + 1 for j in keep)
    instance = ProblemInstance(A[:, keep], np.array(labels), cleaned=True, name=path.stem)
    return instance, column_map


def write_libsvm(
    file_path: Union[str, Path],
    instance: ProblemInstance,
    column_map: Optional[Sequence[int]] = None,
) -> Path:
    """
    Write an instance in LIBSVM format (zero entries omitted, values in
    shortest round-trip repr).

    Args:
        file_path: Output path
        instance: Instance to write
        column_map: 1-based feature index per column; 1..n if None

    Returns:
        Path: The written file
    """
    n = instance.n
    indices = list(column_map) if column_map is not None else list(range(1, n + 1))
    if len(indices) != n or any(b <= a for a, b in zip(indices, indices[1:])) or indices[0] < 1:
        raise InvalidArgumentError("column_map must hold n strictly increasing 1-based indices")
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as f:
        for row, label in zip(instance.A, instance.b):
            tokens = [repr(float(label))]
            tokens.extend(f"{indices[j]}:{float(row[j])!r}" for j in np.flatnonzero(row))
            f.write(" ".join(tokens) + "\n")
    return path
