"""Heartbeat data model, log ingestion/validation and heart-rate derivation.

Timestamps are kept as integer nanoseconds since run start and only
converted to float seconds at rate-derivation time, so precision is not
lost at high beat rates (~1e5 beats/s).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateTimingError,
    EmptyInputError,
    InsufficientDataError,
    LogParseError,
    ValidationError,
)

NS_PER_S = 1_000_000_000
LOG_HEADER = "thread_id,seq,timestamp_ns"
LABELS = ("normal", "memoryleak", "shutdown")


@dataclass(frozen=True)
class HeartbeatRecord:
    """One emitted beat: owning thread, per-thread sequence number, time."""

    thread_id: int
    seq: int
    timestamp_ns: int

    def __post_init__(self):
        if self.thread_id < 0:
            raise ValidationError(f"negative thread_id {self.thread_id}")
        if self.seq < 0:
            raise ValidationError(f"negative seq {self.seq}")
        if self.timestamp_ns < 0:
            raise ValidationError(f"negative timestamp {self.timestamp_ns}")


class HeartbeatSequence:
    """All beats of one thread, ordered by sequence number.

    Sequence numbers are normalized to a dense 0-based range, so the
    canonical storage is just the timestamp array; ``records`` is
    materialized on demand.
    """

    __slots__ = ("thread_id", "timestamps_ns")

    def __init__(self, thread_id: int, timestamps_ns):
        ts = np.asarray(timestamps_ns, dtype=np.int64)
        if ts.ndim != 1 or ts.size == 0:
            raise EmptyInputError("a heartbeat sequence must hold at least one record")
        if thread_id < 0:
            raise ValidationError(f"negative thread_id {thread_id}")
        if ts[0] < 0:
            raise ValidationError("negative timestamp")
        if np.any(np.diff(ts) < 0):
            bad = int(np.argmax(np.diff(ts) < 0)) + 1
            raise ValidationError(
                f"thread {thread_id}: timestamp decreases at seq {bad}"
            )
        self.thread_id = int(thread_id)
        self.timestamps_ns = ts
        self.timestamps_ns.setflags(write=False)

    def __len__(self):
        return int(self.timestamps_ns.size)

    def __eq__(self, other):
        return (
            isinstance(other, HeartbeatSequence)
            and self.thread_id == other.thread_id
            and np.array_equal(self.timestamps_ns, other.timestamps_ns)
        )

    def __repr__(self):
        return (
            f"HeartbeatSequence(thread_id={self.thread_id}, "
            f"n={len(self)}, completion_time_ns={self.completion_time_ns})"
        )

    @property
    def records(self) -> list[HeartbeatRecord]:
        tid = self.thread_id
        return [
            HeartbeatRecord(tid, i, int(t)) for i, t in enumerate(self.timestamps_ns)
        ]

    @property
    def completion_time_ns(self) -> int:
        return int(self.timestamps_ns[-1])

    @classmethod
    def from_records(cls, records) -> "HeartbeatSequence":
        """Build from (seq, timestamp) pairs of a single thread.

        Sequence numbers may start anywhere, but must be dense and
        duplicate-free; they are rebased to start at 0.
        """
        if not records:
            raise EmptyInputError("no records")
        tid = records[0].thread_id
        ordered = sorted(records, key=lambda r: r.seq)
        base = ordered[0].seq
        for i, rec in enumerate(ordered):
            if rec.thread_id != tid:
                raise ValidationError(
                    f"mixed thread ids {tid} and {rec.thread_id} in one sequence"
                )
            if rec.seq != base + i:
                kind = "duplicate" if i > 0 and rec.seq == ordered[i - 1].seq else "gap in"
                raise ValidationError(
                    f"thread {tid}: {kind} sequence numbers at seq {rec.seq}"
                )
        return cls(tid, [r.timestamp_ns for r in ordered])


class HeartRateSeries:
    """Derived (time, beats/second) points for one thread."""

    __slots__ = ("t", "rates", "source_thread")

    def __init__(self, t, rates, source_thread: int = 0):
        t = np.asarray(t, dtype=np.float64)
        rates = np.asarray(rates, dtype=np.float64)
        if t.shape != rates.shape or t.ndim != 1:
            raise ValidationError("t and rates must be 1-d arrays of equal length")
        if t.size:
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(rates)):
                raise ValidationError("non-finite value in heart-rate series")
            if np.any(np.diff(t) <= 0):
                raise ValidationError("timestamps must strictly increase")
            if np.any(rates <= 0):
                raise ValidationError("rates must be positive")
        self.t = t
        self.rates = rates
        self.source_thread = int(source_thread)
        self.t.setflags(write=False)
        self.rates.setflags(write=False)

    def __len__(self):
        return int(self.t.size)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.rates.tolist()))

    def __repr__(self):
        return (
            f"HeartRateSeries(thread={self.source_thread}, n={len(self)})"
        )


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window geometry for the local (windowed) features.

    ``w`` is the window size in samples; windows are placed every
    ``stride`` samples (default: non-overlapping, stride == w).  The
    window count is derived from the series length, see num_windows.
    """

    w: int
    stride: int | None = None

    def __post_init__(self):
        if self.w < 1:
            raise ValidationError(f"window size must be >= 1, got {self.w}")
        if self.stride is None:
            object.__setattr__(self, "stride", self.w)
        if self.stride < 1:
            raise ValidationError(f"stride must be >= 1, got {self.stride}")

    def num_windows(self, length: int) -> int:
        """Number of full windows in a series of ``length`` samples."""
        if length - 1 < self.w:
            return 0
        return 1 + (length - 1 - self.w) // self.stride

    def starts(self, length: int):
        return range(0, (self.num_windows(length)) * self.stride, self.stride)


# ---------------------------------------------------------------------------
# Log I/O
# ---------------------------------------------------------------------------

def ingest_log(path) -> list[HeartbeatSequence]:
    """Read a heartbeat CSV log into one validated sequence per thread.

    Lines starting with '#' are ignored (emitters may add wall-clock and
    end-marker comments).  Raises LogParseError with the offending line
    number on malformed rows and ValidationError on invariant breaks.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")

    header = None
    per_thread: dict[int, list[tuple[int, int]]] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            if line != LOG_HEADER:
                raise LogParseError(
                    f"expected header '{LOG_HEADER}', got '{line}'", line_no
                )
            header = line
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise LogParseError(f"expected 3 fields, got {len(parts)}", line_no)
        try:
            tid, seq, ts = (int(p) for p in parts)
        except ValueError:
            raise LogParseError(f"non-integer field in '{line}'", line_no) from None
        if tid < 0 or seq < 0 or ts < 0:
            raise LogParseError(f"negative value in '{line}'", line_no)
        per_thread.setdefault(tid, []).append((seq, ts))

    if header is None:
        raise EmptyInputError(f"{path}: empty log (no header)")

    sequences = []
    for tid in sorted(per_thread):
        rows = sorted(per_thread[tid], key=lambda r: r[0])
        base = rows[0][0]
        for i, (seq, _) in enumerate(rows):
            if seq != base + i:
                kind = "duplicate" if i > 0 and seq == rows[i - 1][0] else "gap in"
                raise ValidationError(
                    f"thread {tid}: {kind} sequence numbers at seq {seq}"
                )
        ts = np.asarray([r[1] for r in rows], dtype=np.int64)
        drops = np.diff(ts) < 0
        if np.any(drops):
            bad = base + int(np.argmax(drops)) + 1
            raise ValidationError(
                f"thread {tid}: timestamp decreases at seq {bad}"
            )
        sequences.append(HeartbeatSequence(tid, ts))
    return sequences


def write_log(sequences, path) -> None:
    """Write sequences to the canonical CSV log (LF endings, thread-major)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(LOG_HEADER + "\n")
        for seq in sorted(sequences, key=lambda s: s.thread_id):
            tid = seq.thread_id
            fh.writelines(
                f"{tid},{i},{int(t)}\n" for i, t in enumerate(seq.timestamps_ns)
            )


# ---------------------------------------------------------------------------
# Dataset manifest (run-name -> {log_path, label, profile, ...})
# ---------------------------------------------------------------------------

def load_manifest(path) -> dict[str, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, dict):
        raise ValidationError("manifest must be a JSON object")
    for name, entry in manifest.items():
        if not isinstance(entry, dict):
            raise ValidationError(f"manifest entry '{name}' must be an object")
        for key in ("log_path", "label", "profile"):
            if key not in entry:
                raise ValidationError(f"manifest entry '{name}' lacks '{key}'")
        if entry["label"] not in LABELS:
            raise ValidationError(
                f"manifest entry '{name}': unknown label '{entry['label']}'"
            )
    return manifest


def save_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def manifest_log_path(manifest_path, entry) -> str:
    """Resolve an entry's log path relative to the manifest location."""
    log_path = entry["log_path"]
    if os.path.isabs(log_path):
        return log_path
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), log_path)


# ---------------------------------------------------------------------------
# Heart-rate derivation
# ---------------------------------------------------------------------------

def derive_heart_rate(seq: HeartbeatSequence, rate_window: int = 1) -> HeartRateSeries:
    """Derive beats/second over a backward-looking window of beats.

    Point i sits at the timestamp of record i+rate_window and carries
    rate_window / (elapsed seconds of the window); the output is shorter
    than the input by rate_window points.
    """
    if rate_window < 1:
        raise ValidationError(f"rate_window must be >= 1, got {rate_window}")
    n = len(seq)
    if n < rate_window + 1:
        raise InsufficientDataError(
            f"thread {seq.thread_id}: need at least {rate_window + 1} records, "
            f"got {n}"
        )
    ts = seq.timestamps_ns
    dt_ns = ts[rate_window:] - ts[:-rate_window]
    if np.any(dt_ns <= 0):
        bad = int(np.argmax(dt_ns <= 0))
        raise DegenerateTimingError(
            f"thread {seq.thread_id}: zero elapsed time in window starting at "
            f"seq {bad}"
        )
    t = ts[rate_window:] / NS_PER_S
    rates = rate_window * NS_PER_S / dt_ns.astype(np.float64)
    return HeartRateSeries(t, rates, source_thread=seq.thread_id)


def mean_rate(series: HeartRateSeries) -> float:
    """Arithmetic mean of the rate values (beats/second)."""
    if len(series) == 0:
        raise EmptyInputError("cannot average an empty heart-rate series")
    return float(np.mean(series.rates))
