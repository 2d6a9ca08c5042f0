"""The six features a candidate/reference heartbeat pair is judged by.

Global and local time ratios come straight from the raw timestamp
sequences; the heartbeat-ratio and distance features (GHR, LHR, DTW,
LB_Keogh) operate on model-aligned rate series so both sides are
sampled at identical timestamps.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import kernels
from .align import DEFAULT_GRID_SIZE, DEFAULT_MAX_DEGREE, DEFAULT_R2_THRESHOLD, align
from .core import HeartbeatSequence, HeartRateSeries, WindowConfig, derive_heart_rate
from .errors import (
    DegenerateReferenceError,
    DegenerateTimingError,
    EmptyInputError,
    FeatureError,
    HeartbeatError,
    InfeasibleBandError,
    InsufficientDataError,
    LengthMismatchError,
    ValidationError,
)

DEFAULT_EPS = 1e-9

COST_MODES = ("absolute", "squared")


@dataclass(frozen=True)
class FeatureVector:
    """gtr/ltr: completion-time ratios; ghr/lhr: rate ratios; dtw/lb: distances."""

    gtr: float
    ltr: float
    ghr: float
    lhr: float
    dtw: float
    lb: float

    def __post_init__(self):
        for name in ("gtr", "ltr", "ghr", "lhr", "dtw", "lb"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.gtr, self.ltr, self.ghr, self.lhr, self.dtw, self.lb)
        if not all(np.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite feature value in {vals}")
        if self.gtr <= 0:
            raise ValidationError(f"gtr must be positive, got {self.gtr}")
        if self.ghr <= 0:
            raise ValidationError(f"ghr must be positive, got {self.ghr}")
        if self.dtw < 0 or self.lb < 0:
            raise ValidationError("distances must be non-negative")

    def as_dict(self) -> dict[str, float]:
        return {
            "gtr": self.gtr, "ltr": self.ltr, "ghr": self.ghr,
            "lhr": self.lhr, "dtw": self.dtw, "lb": self.lb,
        }


@dataclass(frozen=True)
class Envelope:
    """Windowed upper/lower bound sequences of a rate series."""

    upper: np.ndarray
    lower: np.ndarray
    window: int

    def __post_init__(self):
        u = np.asarray(self.upper, dtype=np.float64)
        l = np.asarray(self.lower, dtype=np.float64)
        if u.shape != l.shape:
            raise ValidationError("upper and lower must have equal length")
        if np.any(l > u):
            raise ValidationError("lower bound exceeds upper bound")
        object.__setattr__(self, "upper", u)
        object.__setattr__(self, "lower", l)


FEATURE_CSV_HEADER = "run,thread_id,gtr,ltr,ghr,lhr,dtw,lb"


def write_features_csv(entries, path) -> None:
    """Write (run, thread_id, FeatureVector) triples as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(FEATURE_CSV_HEADER + "\n")
        for run, thread_id, fv in entries:
            fh.write(
                f"{run},{thread_id},{fv.gtr!r},{fv.ltr!r},{fv.ghr!r},"
                f"{fv.lhr!r},{fv.dtw!r},{fv.lb!r}\n"
            )


def read_features_csv(path) -> list[tuple[str, int, "FeatureVector"]]:
    """Read back what write_features_csv wrote."""
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
        if header != FEATURE_CSV_HEADER:
            raise ValidationError(
                f"expected header '{FEATURE_CSV_HEADER}', got '{header}'"
            )
        for line in fh:
            line = line.strip()
            if not line:
                continue
            run, tid, *vals = line.split(",")
            if len(vals) != 6:
                raise ValidationError(f"expected 8 fields in '{line}'")
            gtr, ltr, ghr, lhr, dtw_v, lb_v = (float(v) for v in vals)
            entries.append(
                (run, int(tid),
                 FeatureVector(gtr=gtr, ltr=ltr, ghr=ghr, lhr=lhr,
                               dtw=dtw_v, lb=lb_v))
            )
    return entries


def _rates(series) -> np.ndarray:
    if isinstance(series, HeartRateSeries):
        return series.rates
    return np.asarray(series, dtype=np.float64)


# ---------------------------------------------------------------------------
# Time ratios (raw timestamp sequences)
# ---------------------------------------------------------------------------

def global_time_ratio(c: HeartbeatSequence, q: HeartbeatSequence) -> float:
    """Completion time of the candidate over completion time of the reference."""
    t_q = q.completion_time_ns
    if t_q <= 0:
        raise DegenerateReferenceError("reference completion time is zero")
    return c.completion_time_ns / t_q


def local_time_ratio(
    c: HeartbeatSequence, q: HeartbeatSequence, cfg: WindowConfig
) -> float:
    """Mean of per-window elapsed-time ratios over non-overlapping windows."""
    n = min(len(c), len(q))
    k = cfg.num_windows(n)
    if k < 1:
        raise InsufficientDataError(
            f"window size {cfg.w} needs at least {cfg.w + 1} shared records, got {n}"
        )
    tc = c.timestamps_ns
    tq = q.timestamps_ns
    total = 0.0
    for i in cfg.starts(n):
        dq = int(tq[i + cfg.w]) - int(tq[i])
        if dq == 0:
            raise DegenerateTimingError(
                f"reference window at record {i} has zero elapsed time"
            )
        total += (int(tc[i + cfg.w]) - int(tc[i])) / dq
    return total / k


# ---------------------------------------------------------------------------
# Heartbeat (rate) ratios
# ---------------------------------------------------------------------------

def global_heartbeat_ratio(c, q) -> float:
    """Mean candidate rate over mean reference rate."""
    cr = _rates(c)
    qr = _rates(q)
    if cr.size == 0 or qr.size == 0:
        raise EmptyInputError("cannot compute heartbeat ratio of empty series")
    q_mean = float(np.mean(qr))
    if q_mean == 0.0:
        raise DegenerateReferenceError("reference mean rate is zero")
    return float(np.mean(cr)) / q_mean


def local_heartbeat_ratio(
    c, q, cfg: WindowConfig, eps: float = DEFAULT_EPS
) -> float:
    """Mean of per-window rate-delta ratios over non-overlapping windows.

    Windows whose reference delta is smaller than ``eps`` in magnitude
    carry no local-trend information and are skipped; if every window is
    skipped the reference is flat and the ratio is undefined.
    """
    cr = _rates(c)
    qr = _rates(q)
    n = min(cr.size, qr.size)
    k = cfg.num_windows(n)
    if k < 1:
        raise InsufficientDataError(
            f"window size {cfg.w} needs at least {cfg.w + 1} shared points, got {n}"
        )
    total = 0.0
    kept = 0
    for i in cfg.starts(n):
        dq = qr[i + cfg.w] - qr[i]
        if abs(dq) < eps:
            continue
        total += (cr[i + cfg.w] - cr[i]) / dq
        kept += 1
    if kept == 0:
        raise DegenerateReferenceError(
            "all windows skipped: reference rate is constant within eps"
        )
    return total / kept


# ---------------------------------------------------------------------------
# Warping distance and its cheap lower bound
# ---------------------------------------------------------------------------

def dtw_distance(q, c, cost: str = "absolute", band: int | None = None) -> float:
    """Minimal cumulative warping cost between two rate series.

    ``cost`` selects the per-cell distance (|q_i - c_j| or its square);
    ``band`` restricts the warp to |i - j| <= band.
    """
    if cost not in COST_MODES:
        raise ValueError(f"cost must be one of {COST_MODES}, got '{cost}'")
    qr = _rates(q)
    cr = _rates(c)
    if qr.size == 0 or cr.size == 0:
        raise EmptyInputError("cannot warp an empty series")
    if band is not None:
        if band < 1:
            raise ValidationError(f"band must be positive, got {band}")
        if band < abs(qr.size - cr.size):
            raise InfeasibleBandError(
                f"band {band} cannot bridge a length difference of "
                f"{abs(qr.size - cr.size)}"
            )
    return float(kernels.dtw(qr, cr, squared=(cost == "squared"),
                             band=-1 if band is None else band))


def envelope(q, w: int) -> Envelope:
    """Windowed upper/lower bounds of a series, truncated at the edges."""
    qr = _rates(q)
    if qr.size == 0:
        raise EmptyInputError("cannot build an envelope of an empty series")
    if w < 1:
        raise ValidationError(f"envelope window must be >= 1, got {w}")
    upper, lower = kernels.envelope(qr, w)
    return Envelope(upper, lower, w)


def lb_keogh(q, c, w: int) -> float:
    """Envelope-based lower bound on the banded squared warping cost."""
    qr = _rates(q)
    cr = _rates(c)
    if qr.size != cr.size:
        raise LengthMismatchError(
            f"series lengths differ: {qr.size} vs {cr.size} (align first)"
        )
    env = envelope(qr, w)
    return float(kernels.lb_keogh_value(cr, env.upper, env.lower))


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

@contextmanager
def _feature(name):
    try:
        yield
    except HeartbeatError as exc:
        raise FeatureError(name, exc) from exc


def extract_features(
    c_seq: HeartbeatSequence,
    q_seq: HeartbeatSequence,
    cfg: WindowConfig,
    rate_window: int = 1,
    grid_size: int = DEFAULT_GRID_SIZE,
    eps: float = DEFAULT_EPS,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> FeatureVector:
    """Compute all six features of candidate c_seq against reference q_seq.

    Time ratios use the raw timestamps; the remaining features use rate
    series aligned on a shared grid.  Failures are annotated with the
    feature (or stage) that raised them.
    """
    with _feature("gtr"):
        gtr = global_time_ratio(c_seq, q_seq)
    with _feature("ltr"):
        ltr = local_time_ratio(c_seq, q_seq, cfg)
    with _feature("rate-derivation"):
        q_rates = derive_heart_rate(q_seq, rate_window)
        c_rates = derive_heart_rate(c_seq, rate_window)
    with _feature("alignment"):
        pair = align(q_rates, c_rates, grid_size, r2_threshold, max_degree)
    with _feature("ghr"):
        ghr = global_heartbeat_ratio(pair.rates_c, pair.rates_q)
    with _feature("lhr"):
        lhr = local_heartbeat_ratio(pair.rates_c, pair.rates_q, cfg, eps)
    with _feature("dtw"):
        dtw_value = dtw_distance(pair.rates_q, pair.rates_c, cost="absolute")
    with _feature("lb"):
        lb_value = lb_keogh(pair.rates_q, pair.rates_c, cfg.w)
    return FeatureVector(gtr=gtr, ltr=ltr, ghr=ghr, lhr=lhr,
                         dtw=dtw_value, lb=lb_value)
