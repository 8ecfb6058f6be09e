"""Event-table CSV ingestion and export, observation windows, and report formatting."""

from __future__ import annotations

import csv
import json
import math
import warnings
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import Trajectory, TrajectorySet
from .errors import DataError, InvalidSampleError, ParameterError

__all__ = [
    "load_trajectories",
    "write_trajectories",
    "read_id_list",
    "window_rescale",
    "fmt",
    "write_rows_csv",
    "write_json",
    "TiedEventsWarning",
]

HEADER = ("traj_id", "time")


class TiedEventsWarning(UserWarning):
    """A trajectory holds several jumps at the same time stamp."""


def fmt(value) -> str:
    """Numbers with 9 significant digits; everything else via ``str``."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _parse_rows(path):
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return
        if tuple(h.strip() for h in header) != HEADER:
            raise DataError(f"expected header 'traj_id,time', got {','.join(header)!r}", line=1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DataError(f"expected 2 fields, got {len(row)}", line=line)
            tid, raw = row[0].strip(), row[1].strip()
            if not tid:
                raise DataError("empty traj_id", line=line)
            try:
                t = float(raw)
            except ValueError:
                raise DataError(f"cannot parse time {raw!r}", line=line) from None
            if not math.isfinite(t):
                raise DataError(f"non-finite time {raw!r}", line=line)
            yield line, tid, t


def load_trajectories(path, horizon: float, include_empty_ids: Iterable[str] = ()) -> TrajectorySet:
    """Read a ``traj_id,time`` CSV into a sample observed on ``(0, horizon]``.

    Trajectories appear in order of first appearance, followed by ids from
    ``include_empty_ids`` that have no rows (zero-event paths are data too).
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise ParameterError(f"horizon must be a positive real, got {horizon!r}")
    groups: dict[str, list[float]] = {}
    for line, tid, t in _parse_rows(path):
        if not 0 < t <= horizon:
            raise DataError(f"time {t!r} of trajectory {tid!r} outside (0, {horizon}]", line=line)
        groups.setdefault(tid, []).append(t)
    for tid in include_empty_ids:
        groups.setdefault(tid, [])
    if len(groups) < 2:
        raise InvalidSampleError(f"need at least 2 trajectories, found {len(groups)}")
    trajectories = []
    for tid, times in groups.items():
        tr = Trajectory(np.sort(np.asarray(times, dtype=float)), horizon)
        if tr.has_ties:
            warnings.warn(f"trajectory {tid!r} has tied event times; each counts as a jump",
                          TiedEventsWarning, stacklevel=2)
        trajectories.append(tr)
    return TrajectorySet(trajectories, horizon)


def read_id_list(path) -> list[str]:
    """One trajectory id per line; blank lines and ``#`` comments ignored."""
    ids = []
    for raw in Path(path).read_text(encoding="utf-8-sig").splitlines():
        s = raw.split("#", 1)[0].strip()
        if s:
            ids.append(s)
    return ids


def write_trajectories(sample: TrajectorySet, path, ids: list[str] | None = None) -> list[str]:
    """Write the ingestion format; times use ``repr`` so reloading is exact. Returns the ids."""
    ids = [str(i) for i in range(sample.n)] if ids is None else list(ids)
    if len(ids) != sample.n:
        raise ParameterError("one id per trajectory required")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for tid, tr in zip(ids, sample):
            for t in tr.events:
                w.writerow((tid, repr(float(t))))
    return ids


def window_rescale(sample: TrajectorySet, a: float, b: float) -> TrajectorySet:
    """Keep events in ``(a, b]``, shift them by ``-a``; the new horizon is ``b - a``."""
    if not 0 <= a < b <= sample.horizon:
        raise ParameterError(f"window needs 0 <= a < b <= {sample.horizon}, got a={a}, b={b}")
    if a == 0 and b == sample.horizon:
        return sample
    keep = (sample.times > a) & (sample.times <= b)
    counts = np.bincount(sample.owners[keep], minlength=sample.n)
    return TrajectorySet.from_flat(sample.times[keep] - a, counts, b - a)


def write_rows_csv(rows: list[dict], path_or_file, fields=None) -> None:
    fields = list(fields or (rows[0].keys() if rows else []))
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([fmt(r[k]) for k in fields])
    finally:
        if own:
            fh.close()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.9g}") if math.isfinite(v) else None
    return obj


def write_json(doc, path_or_file) -> None:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    if isinstance(path_or_file, (str, Path)):
        Path(path_or_file).write_text(text, encoding="utf-8")
    else:
        path_or_file.write(text)
