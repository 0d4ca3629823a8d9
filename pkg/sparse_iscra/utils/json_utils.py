"""
JSON artifact helpers.

Solutions, trace summaries and diagnostics reports are written as JSON with
indent=2. numpy arrays and scalars are converted to plain lists and numbers;
infinities become the strings "inf"/"-inf" so the output stays strict JSON.
"""

import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy/dataclass/tuple/set values to JSON-safe types."""
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def dump_json(data: Any, file_path: Union[str, Path]) -> Path:
    """Write data as indented JSON, creating parent directories."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, indent=2)
        f.write("\n")
    return path


def load_json(file_path: Union[str, Path]) -> Any:
    """Read a JSON file (config files and written artifacts)."""
    with Path(file_path).open('r', encoding='utf-8') as f:
        return json.load(f)
