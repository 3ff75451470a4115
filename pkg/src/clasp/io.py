"""Reading series from disk.

Two formats are understood:

``plain``
    One decimal number per line, UTF-8, blank lines ignored.
``annotated``
    A JSON document with ``name`` (string), ``window`` (integer, optional),
    ``change_points`` (integer array, optional) and ``time_series``
    (number array).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

PLAIN = "plain"
ANNOTATED = "annotated"
FORMATS = (PLAIN, ANNOTATED)


@dataclass(frozen=True)
class DatasetRecord:
    name: str
    values: np.ndarray
    window: int | None = None
    change_points: tuple[int, ...] | None = None


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError("file not found", path=path) from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", path=path) from None
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), path=path) from None


def _parse_plain(text: str, path: Path) -> DatasetRecord:
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        token = line.strip()
        if not token:
            continue
        try:
            v = float(token)
        except ValueError:
            raise ParseError(f"not a number: {token!r}", path=path, line=lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {token!r}", path=path, line=lineno)
        values.append(v)
    if not values:
        raise ParseError("no values", path=path)
    return DatasetRecord(path.stem, np.asarray(values))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_annotated(text: str, path: Path) -> DatasetRecord:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", path=path)

    series = doc.get("time_series")
    if not isinstance(series, list) or not series:
        raise ParseError("must be a nonempty number array", path=path, field="time_series")
    for i, v in enumerate(series):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ParseError(f"element {i} is not a finite number: {v!r}", path=path, field="time_series")
    values = np.asarray(series, dtype=np.float64)
    n = values.size

    name = doc.get("name", path.stem)
    if not isinstance(name, str):
        raise ParseError("must be a string", path=path, field="name")

    window = doc.get("window")
    if window is not None and (not _is_int(window) or window < 1):
        raise ParseError(f"must be a positive integer, got {window!r}", path=path, field="window")

    cps = doc.get("change_points")
    if cps is not None:
        if not isinstance(cps, list) or not all(_is_int(c) for c in cps):
            raise ParseError("must be an integer array", path=path, field="change_points")
        for c in cps:
            if not 0 < c < n:
                raise ParseError(
                    f"change point {c} outside (0, {n}) for {n} values",
                    path=path, field="change_points",
                )
        if sorted(set(cps)) != cps:
            raise ParseError("must be strictly ascending", path=path, field="change_points")
        cps = tuple(cps)
    return DatasetRecord(name, values, window, cps)


def load_series(path, fmt: str = PLAIN) -> DatasetRecord:
    """Load a record from ``path`` in format ``fmt`` (``plain``/``annotated``)."""
    path = Path(path)
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}", path=path)
    text = _read_text(path)
    if fmt == PLAIN:
        return _parse_plain(text, path)
    return _parse_annotated(text, path)


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
