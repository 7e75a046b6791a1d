"""Reading wrist-IMU attitude logs into typed recordings.

A session is a CSV export with one row per sample holding a timestamp and
the three attitude Euler angles (yaw, roll, pitch) in radians.  Parsing is
tolerant: rows with unparseable cells survive as NaN-marked frames so that
:func:`clean` can interpolate or drop them afterwards.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import warnings
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllMissingError,
    EmptyFileError,
    ManifestError,
    MissingColumnError,
    NonMonotoneTimeError,
    RecordingLoadError,
)

YAW_LIMIT = math.pi
PITCH_LIMIT = math.pi / 2


class Skill(IntEnum):
    """Player skill group; doubles as the classifier label."""

    BEGINNER = 0
    INTERMEDIATE = 1

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Skill":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ManifestError(f"unknown skill {label!r}") from None


class Handedness(Enum):
    LEFT = "left"
    RIGHT = "right"


class Session(Enum):
    """Recording block within the collection protocol."""

    FOREHAND_10A = "forehand10a"
    FOREHAND_10B = "forehand10b"
    FOREHAND_20 = "forehand20"
    BACKHAND_10A = "backhand10a"
    BACKHAND_10B = "backhand10b"

    @property
    def is_forehand(self) -> bool:
        return self.value.startswith("forehand")

    @property
    def planned_swings(self) -> int:
        return 20 if self.value.endswith("20") else 10


@dataclass(frozen=True)
class ImuFrame:
    """One attitude sample. NaN fields mark values that failed to parse."""

    t: float
    yaw: float
    roll: float
    pitch: float

    def is_complete(self) -> bool:
        return all(math.isfinite(v) for v in (self.t, self.yaw, self.roll, self.pitch))


@dataclass(frozen=True)
class ColumnMap:
    """Header names for the four required CSV columns."""

    time: str = "loggingTime"
    yaw: str = "motionYaw(rad)"
    roll: str = "motionRoll(rad)"
    pitch: str = "motionPitch(rad)"

    def as_tuple(self) -> tuple[str, str, str, str]:
        return (self.time, self.yaw, self.roll, self.pitch)


@dataclass(frozen=True)
class CleaningPolicy:
    """How :func:`clean` treats gaps and jitter.

    Gaps of at most ``max_gap`` consecutive missing values are filled by
    linear interpolation; longer gaps (and gaps touching either end) are
    dropped.  When ``smooth`` is on, yaw/roll/pitch get a centered moving
    average of width ``smooth_window``, truncated at the edges.
    """

    max_gap: int = 3
    smooth: bool = True
    smooth_window: int = 5

    def __post_init__(self) -> None:
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ValueError("smooth_window must be a positive odd integer")


@dataclass(frozen=True)
class Recording:
    participant_id: str
    skill: Skill
    handedness: Handedness
    session: Session
    frames: tuple[ImuFrame, ...]

    def channel_matrix(self) -> np.ndarray:
        """Frames as an (n, 3) array of yaw/roll/pitch."""
        return np.array([[f.yaw, f.roll, f.pitch] for f in self.frames], dtype=float)

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames], dtype=float)


def _parse_float(cell: str) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return math.nan


def _parse_time(cell: str) -> float:
    """Seconds from a numeric cell or an ISO-8601 timestamp; NaN if neither."""
    v = _parse_float(cell)
    if math.isfinite(v):
        return v
    if not cell:
        return math.nan
    text = cell.strip().replace("Z", "+00:00")
    # SensorLog style puts a space before the offset ("... 13:04:55.123 +0200").
    if " +" in text or " -" in text[10:]:
        head, _, tail = text.rpartition(" ")
        if tail and (tail[0] in "+-"):
            text = head + tail
    # fromisoformat needs a colon inside the offset until Python 3.11
    text = re.sub(r"([+-]\d{2})(\d{2})$", r"\1:\2", text)
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        return math.nan
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_sensor_csv(text: str, column_map: ColumnMap | None = None) -> list[ImuFrame]:
    """Parse CSV text into frames, rebasing time so the first sample is 0.

    Raises MissingColumnError, EmptyFileError or NonMonotoneTimeError.
    Out-of-range angles (|yaw| > pi, |pitch| > pi/2) only warn.
    """
    cmap = column_map or ColumnMap()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise EmptyFileError("no header row")
    for name in cmap.as_tuple():
        if name not in reader.fieldnames:
            raise MissingColumnError(f"column {name!r} not in header")

    frames: list[ImuFrame] = []
    for row in reader:
        frames.append(
            ImuFrame(
                t=_parse_time(row.get(cmap.time) or ""),
                yaw=_parse_float(row.get(cmap.yaw) or ""),
                roll=_parse_float(row.get(cmap.roll) or ""),
                pitch=_parse_float(row.get(cmap.pitch) or ""),
            )
        )
    if not frames:
        raise EmptyFileError("no data rows")

    finite_ts = [f.t for f in frames if math.isfinite(f.t)]
    for a, b in zip(finite_ts, finite_ts[1:]):
        if b <= a:
            raise NonMonotoneTimeError(f"time goes from {a} to {b}")
    if finite_ts:
        base = finite_ts[0]
        frames = [replace(f, t=f.t - base) for f in frames]

    n_yaw = sum(1 for f in frames if math.isfinite(f.yaw) and abs(f.yaw) > YAW_LIMIT)
    n_pitch = sum(1 for f in frames if math.isfinite(f.pitch) and abs(f.pitch) > PITCH_LIMIT)
    if n_yaw or n_pitch:
        warnings.warn(
            f"{n_yaw} yaw value(s) outside [-pi, pi], "
            f"{n_pitch} pitch value(s) outside [-pi/2, pi/2]",
            stacklevel=2,
        )
    return frames


def _fill_channel(values: np.ndarray, max_gap: int) -> np.ndarray:
    """Interpolate interior NaN runs of length <= max_gap, index-linearly."""
    out = values.copy()
    n = len(out)
    isnan = np.isnan(out)
    i = 0
    while i < n:
        if not isnan[i]:
            i += 1
            continue
        j = i
        while j < n and isnan[j]:
            j += 1
        # run [i, j); anchors are i-1 and j
        if i > 0 and j < n and (j - i) <= max_gap:
            left, right = out[i - 1], out[j]
            span = j - (i - 1)
            for k in range(i, j):
                out[k] = left + (right - left) * (k - (i - 1)) / span
        i = j
    return out


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with the window truncated at the edges."""
    half = window // 2
    n = len(values)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def clean(frames: Sequence[ImuFrame], policy: CleaningPolicy | None = None) -> list[ImuFrame]:
    """Fill short gaps, drop unfillable rows, optionally smooth the channels.

    With smoothing off the result is a fixed point: cleaning twice equals
    cleaning once.  Raises AllMissingError when a channel has no data.
    """
    pol = policy or CleaningPolicy()
    if not frames:
        return []
    cols = {
        "t": np.array([f.t for f in frames], dtype=float),
        "yaw": np.array([f.yaw for f in frames], dtype=float),
        "roll": np.array([f.roll for f in frames], dtype=float),
        "pitch": np.array([f.pitch for f in frames], dtype=float),
    }
    for name, vals in cols.items():
        if np.isnan(vals).all():
            raise AllMissingError(f"channel {name!r} has no parseable values")
        cols[name] = _fill_channel(vals, pol.max_gap)

    keep = ~np.any([np.isnan(v) for v in cols.values()], axis=0)
    kept = {name: vals[keep] for name, vals in cols.items()}
    if pol.smooth and pol.smooth_window > 1 and len(kept["t"]) > 0:
        for name in ("yaw", "roll", "pitch"):
            kept[name] = _moving_average(kept[name], pol.smooth_window)

    return [
        ImuFrame(t=float(t), yaw=float(y), roll=float(r), pitch=float(p))
        for t, y, r, p in zip(kept["t"], kept["yaw"], kept["roll"], kept["pitch"])
    ]


def frames_to_csv(frames: Iterable[ImuFrame], column_map: ColumnMap | None = None) -> str:
    """Render frames back to CSV text that parse_sensor_csv round-trips."""
    cmap = column_map or ColumnMap()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cmap.as_tuple())
    for f in frames:
        writer.writerow([repr(f.t), repr(f.yaw), repr(f.roll), repr(f.pitch)])
    return buf.getvalue()


@dataclass(frozen=True)
class ManifestEntry:
    participant_id: str
    skill: Skill
    handedness: Handedness
    session: Session
    csv_path: str

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "skill": self.skill.label,
            "handedness": self.handedness.value,
            "session": self.session.value,
            "csv_path": self.csv_path,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestEntry":
        try:
            return cls(
                participant_id=str(d["participant_id"]),
                skill=Skill.from_label(d["skill"]),
                handedness=Handedness(d["handedness"]),
                session=Session(d["session"]),
                csv_path=str(d["csv_path"]),
            )
        except (KeyError, ValueError) as e:
            raise ManifestError(f"bad manifest entry: {e}") from e


@dataclass(frozen=True)
class DatasetManifest:
    """Index of session files; one entry per (participant, session) CSV."""

    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        seen_paths: set[str] = set()
        attrs: dict[str, tuple[Skill, Handedness]] = {}
        for e in self.entries:
            if e.csv_path in seen_paths:
                raise ManifestError(f"duplicate csv_path {e.csv_path!r}")
            seen_paths.add(e.csv_path)
            prev = attrs.get(e.participant_id)
            cur = (e.skill, e.handedness)
            if prev is not None and prev != cur:
                raise ManifestError(
                    f"participant {e.participant_id!r} has conflicting skill/handedness"
                )
            attrs[e.participant_id] = cur

    def participants(self) -> list[str]:
        out: list[str] = []
        for e in self.entries:
            if e.participant_id not in out:
                out.append(e.participant_id)
        return out

    def to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.entries], indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ManifestError("manifest must be a JSON array")
        return cls(entries=tuple(ManifestEntry.from_dict(d) for d in data))

    @classmethod
    def from_path(cls, path: str | Path) -> "DatasetManifest":
        return cls.from_json(Path(path).read_text())


def load_dataset(
    manifest: DatasetManifest,
    base_dir: str | Path = ".",
    *,
    forehand_only: bool = True,
    column_map: ColumnMap | None = None,
    policy: CleaningPolicy | None = None,
) -> list[Recording]:
    """Load, parse and clean every manifest entry, in manifest order.

    Relative csv_path values resolve against base_dir.  Failures are wrapped
    in RecordingLoadError carrying the entry identity.
    """
    base = Path(base_dir)
    out: list[Recording] = []
    for entry in manifest.entries:
        if forehand_only and not entry.session.is_forehand:
            continue
        path = Path(entry.csv_path)
        if not path.is_absolute():
            path = base / path
        try:
            text = path.read_text()
            frames = clean(parse_sensor_csv(text, column_map), policy)
        except (OSError, ValueError) as e:
            raise RecordingLoadError(
                f"{entry.participant_id}/{entry.session.value} ({path}): {e}"
            ) from e
        out.append(
            Recording(
                participant_id=entry.participant_id,
                skill=entry.skill,
                handedness=entry.handedness,
                session=entry.session,
                frames=tuple(frames),
            )
        )
    return out
