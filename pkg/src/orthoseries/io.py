"""Signal CSV ingestion and deterministic JSON/CSV output."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .design import MIN_N, SampledSignal, make_grid

SCHEMA = "1"
GRID_TOL = 1e-9


class SignalFileError(ValueError):
    pass


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats written to 17 significant digits; NaN/inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    return _string(str(obj))


def _string(s: str) -> str:
    import json
    return json.dumps(s)


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_rows(path) -> list[tuple[int, list[float]]]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            if not rows and lineno == 1 and not all(_is_number(c) for c in cells):
                continue
            if len(cells) not in (1, 2) or not all(_is_number(c) for c in cells):
                raise SignalFileError(f"{path}: malformed row at line {lineno}: {row!r}")
            rows.append((lineno, [float(c) for c in cells]))
    if {len(r) for _, r in rows} == {1, 2}:
        raise SignalFileError(f"{path}: rows mix one- and two-column layouts")
    return rows


def _to_signal(path, rows, domain) -> SampledSignal:
    if len(rows) < MIN_N:
        raise SignalFileError(f"{path}: {len(rows)} observations; at least {MIN_N} required")
    grid = make_grid(len(rows), domain)
    if len(rows[0][1]) == 2:
        xs = np.array([r[0] for _, r in rows])
        steps = np.diff(xs)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0)) + 1
            raise SignalFileError(f"{path}: x is not increasing at line {rows[bad][0]}")
        off = np.abs(xs - grid.points) > GRID_TOL
        if np.any(off):
            i = int(np.argmax(off))
            raise SignalFileError(
                f"{path}: x={xs[i]!r} at line {rows[i][0]} is off the design grid "
                f"(expected {grid.points[i]!r})"
            )
    xi = np.array([r[-1] for _, r in rows])
    if not np.all(np.isfinite(xi)):
        raise SignalFileError(f"{path}: non-finite observations")
    return SampledSignal(grid, xi)


def parse_signal_csv(path, domain: tuple[float, float] = (-1.0, 1.0)) -> SampledSignal:
    """Read ``xi`` (one column) or ``x, xi`` (two columns) in row order.

    A non-numeric first row is treated as a header.  Supplied ``x`` values
    must match the canonical grid within 1e-9.
    """
    return _to_signal(path, _read_rows(path), domain)


def parse_stream_csv(path, window_length: int, domain: tuple[float, float] = (-1.0, 1.0)) -> list[SampledSignal]:
    """Split a concatenated stream into consecutive windows of ``window_length`` rows.

    With two columns, ``x`` restarts on the canonical grid in every window.
    """
    rows = _read_rows(path)
    if window_length < MIN_N:
        raise SignalFileError(f"window length {window_length} is below {MIN_N}")
    if not rows or len(rows) % window_length:
        raise SignalFileError(f"{path}: {len(rows)} rows is not a multiple of the window length {window_length}")
    return [_to_signal(path, rows[i:i + window_length], domain) for i in range(0, len(rows), window_length)]


def write_signal_csv(path, s: SampledSignal) -> None:
    write_csv(path, ["x", "xi"], zip(s.grid.points, s.xi))
