"""CSV and JSON writers with fixed formatting (UTF-8, LF, header row)."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

DEFAULT_PRECISION = 17


def fmt(value, precision: int = DEFAULT_PRECISION) -> str:
    """Numbers to ``precision`` significant digits; everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, f".{precision}g")
    if value is None:
        return ""
    try:  # numpy scalars
        return fmt(value.item(), precision)
    except AttributeError:
        return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], precision: int = DEFAULT_PRECISION) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([fmt(x, precision) for x in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, path: Optional[str | Path]) -> None:
    """Write to ``path``, or stdout when path is None or '-'."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def sibling(path: Optional[str | Path], suffix: str) -> Optional[Path]:
    """``out.csv`` -> ``out.<suffix>``; None stays None (stdout)."""
    if path is None or str(path) == "-":
        return None
    return Path(path).with_suffix(suffix)
