import csv
import io
import json
import math
import os
from typing import Any, Iterable, List, Sequence

import numpy as np

from utils.constants import CSV_LINE_TERMINATOR, FLOAT_FORMAT


def format_float(value: float) -> str:
    """17 significant digits, always with a decimal point or exponent; non-finite values become null."""
    value = float(value)
    if not math.isfinite(value):
        return "null"
    text = format(value, FLOAT_FORMAT)
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text with round-trippable floats.

    Floats are formatted here since json.dumps offers no control over them.
    """
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end_pad = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(_plain(v), bool) for v in obj):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end_pad + "]"
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def write_text(path: str, text: str) -> None:
    """Write UTF-8 text with LF newlines, creating parent directories."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV with a header row, LF line endings and 17-digit floats."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator=CSV_LINE_TERMINATOR)
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(_plain(v), float) else _plain(v) for v in row])
    return buffer.getvalue()


def parse_float_list(text: str) -> List[float]:
    """Comma-separated list of floats, e.g. '0.1,0.5,0.9'."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ValueError(f"Expected a comma-separated list of numbers, got '{text}'") from e
