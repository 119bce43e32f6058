"""CSV ingestion into per-tick point batches.

Expected header: ``object_id,time,x,y`` with optional ``lon,lat``. Time is
either a number of seconds or an ISO-8601 timestamp. Ticks are counted
from the earliest time, ``tick_seconds`` wide, starting at 0; ticks with no
points are still yielded so the window advances. When an object has several
rows in one tick the last row in file order wins.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, Iterator, List, Optional, Tuple

from .model import TrajectoryPoint

EARTH_RADIUS_M = 6_371_008.8
REQUIRED = ("object_id", "time", "x", "y")


class IngestError(ValueError):
    """The input file cannot be read or has a bad header."""


@dataclass
class IngestStats:
    rows: int = 0
    malformed: int = 0
    duplicates: int = 0
    ticks: int = 0


def parse_time(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def equirectangular(lon: float, lat: float, lon0: float, lat0: float) -> Tuple[float, float]:
    """Local planar meters around (lon0, lat0)."""
    k = math.pi / 180.0 * EARTH_RADIUS_M
    return (lon - lon0) * k * math.cos(math.radians(lat0)), (lat - lat0) * k


def read_rows(path: str, project: bool = False, stats: Optional[IngestStats] = None):
    """Parsed ``(object_id, seconds, x, y)`` rows in file order."""
    stats = stats if stats is not None else IngestStats()
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    rows = []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return rows, stats
        except csv.Error as exc:
            raise IngestError(f"unparseable header: {exc}") from exc
        names = [h.strip().lower() for h in header]
        if any(name not in names for name in REQUIRED):
            raise IngestError(f"header must contain {','.join(REQUIRED)}; got {','.join(header)}")
        if project and not {"lon", "lat"} <= set(names):
            raise IngestError("projection needs lon and lat columns")
        col = {name: names.index(name) for name in names}
        try:
            for rec in reader:
                if not rec or all(not f.strip() for f in rec):
                    continue
                stats.rows += 1
                try:
                    oid = rec[col["object_id"]].strip()
                    if not oid:
                        raise ValueError("empty id")
                    t = parse_time(rec[col["time"]])
                    if project:
                        x, y = float(rec[col["lon"]]), float(rec[col["lat"]])
                    else:
                        x, y = float(rec[col["x"]]), float(rec[col["y"]])
                    if not all(math.isfinite(v) for v in (t, x, y)):
                        raise ValueError("non-finite value")
                except (ValueError, IndexError, OverflowError):
                    stats.malformed += 1
                    continue
                rows.append((oid, t, x, y))
        except csv.Error as exc:
            raise IngestError(f"bad CSV near line {reader.line_num}: {exc}") from exc
    if project and rows:
        lon0 = sum(r[2] for r in rows) / len(rows)
        lat0 = sum(r[3] for r in rows) / len(rows)
        rows = [(o, t, *equirectangular(x, y, lon0, lat0)) for o, t, x, y in rows]
    return rows, stats


def ingest(path: str, fmt: str = "csv", tick_seconds: float = 1.0, project: bool = False,
           stats: Optional[IngestStats] = None) -> Iterator[Tuple[int, List[TrajectoryPoint]]]:
    """Yield ``(tick, points)`` for every tick from 0 to the last one."""
    if fmt != "csv":
        raise IngestError(f"unsupported format {fmt!r}")
    if not tick_seconds > 0:
        raise IngestError("tick_seconds must be positive")
    rows, stats = read_rows(path, project, stats)
    if not rows:
        return
    t0 = min(r[1] for r in rows)
    buckets: Dict[int, Dict[str, TrajectoryPoint]] = {}
    for oid, t, x, y in rows:
        tick = int(math.floor((t - t0) / tick_seconds + 1e-9))
        slot = buckets.setdefault(tick, {})
        if oid in slot:
            stats.duplicates += 1
        slot[oid] = TrajectoryPoint(oid, tick, x, y)
    last = max(buckets)
    stats.ticks = last + 1
    for tick in range(last + 1):
        slot = buckets.get(tick, {})
        yield tick, [slot[o] for o in sorted(slot)]


def write_csv(path: str, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUIRED)
        for q in points:
            w.writerow([q.object_id, q.t, repr(float(q.x)), repr(float(q.y))])
