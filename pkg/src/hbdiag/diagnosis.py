"""Normal-range training, the HSA rule tree, and evaluation metrics.

Ranges are empirical confidence intervals of each feature over normal
training runs.  The classifier walks a fixed decision tree: similar
distance profile -> inspect completion-time and rate ratios; dissimilar
distance profile -> anomaly, with early completion overriding to
shutdown.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .core import HeartbeatSequence, WindowConfig
from .errors import (
    ConfigurationError,
    DegenerateBaselineError,
    InsufficientDataError,
    ValidationError,
)
from .features import FeatureVector, extract_features

FEATURE_NAMES = ("gtr", "ltr", "ghr", "lhr", "dtw", "lb")


class DiagnosisStatus(str, Enum):
    NORMAL = "normal"
    MEMORYLEAK = "memoryleak"
    SHUTDOWN = "shutdown"

    def __str__(self):
        return self.value


STATUSES = (DiagnosisStatus.NORMAL, DiagnosisStatus.MEMORYLEAK, DiagnosisStatus.SHUTDOWN)


@dataclass(frozen=True)
class NormalRanges:
    """Trained [lo, hi] interval per feature.

    Grouped views: distance_range = {dtw, lb}, time_range = {gtr, ltr},
    heartrate_range = {ghr, lhr}; mintime/maxtime are the completion-time
    ratio bounds the shutdown/leak branches compare against.
    """

    gtr: tuple[float, float]
    ltr: tuple[float, float]
    ghr: tuple[float, float]
    lhr: tuple[float, float]
    dtw: tuple[float, float]
    lb: tuple[float, float]

    def __post_init__(self):
        for name in FEATURE_NAMES:
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValidationError(f"{name}: non-finite interval [{lo}, {hi}]")
            if lo > hi:
                raise ValidationError(f"{name}: inverted interval [{lo}, {hi}]")
            object.__setattr__(self, name, (float(lo), float(hi)))

    @property
    def mintime(self) -> float:
        return self.gtr[0]

    @property
    def maxtime(self) -> float:
        return self.gtr[1]

    @property
    def distance_range(self) -> dict[str, tuple[float, float]]:
        return {"dtw": self.dtw, "lb": self.lb}

    @property
    def time_range(self) -> dict[str, tuple[float, float]]:
        return {"gtr": self.gtr, "ltr": self.ltr}

    @property
    def heartrate_range(self) -> dict[str, tuple[float, float]]:
        return {"ghr": self.ghr, "lhr": self.lhr}

    def as_dict(self) -> dict[str, list[float]]:
        return {name: list(getattr(self, name)) for name in FEATURE_NAMES}

    @classmethod
    def from_dict(cls, data: dict) -> "NormalRanges":
        missing = [n for n in FEATURE_NAMES if n not in data]
        if missing:
            raise ValidationError(f"ranges missing features: {missing}")
        return cls(**{n: tuple(data[n]) for n in FEATURE_NAMES})


def train_normal_ranges(
    normals: list[FeatureVector], confidence: float = 0.95
) -> NormalRanges:
    """Empirical central confidence interval per feature, independently.

    With confidence c the interval is the [(1-c)/2, 1-(1-c)/2] percentile
    pair (linear interpolation); confidence 1.0 yields [min, max].
    """
    if len(normals) < 10:
        raise InsufficientDataError(
            f"need at least 10 normal feature vectors, got {len(normals)}"
        )
    if not 0.0 < confidence <= 1.0:
        raise ValidationError(f"confidence must be in (0, 1], got {confidence}")
    tail = 100.0 * (1.0 - confidence) / 2.0
    intervals = {}
    for name in FEATURE_NAMES:
        vals = np.asarray([getattr(f, name) for f in normals], dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"non-finite training value for feature {name}")
        lo, hi = np.percentile(vals, [tail, 100.0 - tail])
        intervals[name] = (float(lo), float(hi))
    return NormalRanges(**intervals)


def _inside(value: float, interval: tuple[float, float]) -> bool:
    return interval[0] <= value <= interval[1]


def hsa_diagnose(f: FeatureVector, r: NormalRanges) -> DiagnosisStatus:
    """Classify one feature vector against trained normal ranges."""
    return hsa_diagnose_detail(f, r)[0]


def hsa_diagnose_detail(
    f: FeatureVector, r: NormalRanges
) -> tuple[DiagnosisStatus, bool]:
    """Like hsa_diagnose, also reporting the no-rule-fired warning.

    When the distance features look normal and the time ratios do not,
    but neither the shutdown nor the memory-leak condition holds, no rule
    assigns a status; the result stays normal with ``warning`` set.
    """
    status = DiagnosisStatus.NORMAL
    warning = False
    distances_normal = _inside(f.dtw, r.dtw) and _inside(f.lb, r.lb)
    if distances_normal:
        times_normal = _inside(f.gtr, r.gtr) and _inside(f.ltr, r.ltr)
        if not times_normal:
            if f.gtr < r.mintime:
                status = DiagnosisStatus.SHUTDOWN
            if f.gtr > r.maxtime and not (
                _inside(f.ghr, r.ghr) and _inside(f.lhr, r.lhr)
            ):
                status = DiagnosisStatus.MEMORYLEAK
            if status is DiagnosisStatus.NORMAL:
                warning = True
    else:
        status = DiagnosisStatus.MEMORYLEAK
        if f.gtr < r.mintime:
            status = DiagnosisStatus.SHUTDOWN
    return status, warning


@dataclass(frozen=True)
class ThreadDiagnosis:
    thread_id: int
    status: DiagnosisStatus
    warning: bool
    features: FeatureVector

    def __iter__(self):
        # unpacks as (thread_id, status)
        return iter((self.thread_id, self.status))


def diagnose_run(
    candidate: list[HeartbeatSequence],
    reference: dict[int, HeartbeatSequence],
    r: NormalRanges,
    cfg: WindowConfig,
    rate_window: int = 1,
    grid_size: int = 100,
    eps: float = 1e-9,
) -> list[ThreadDiagnosis]:
    """Extract features and classify every thread of a candidate run.

    ``reference`` maps thread_id to that thread's reference sequence;
    every candidate thread must have one.
    """
    results = []
    for seq in sorted(candidate, key=lambda s: s.thread_id):
        ref = reference.get(seq.thread_id)
        if ref is None:
            raise ConfigurationError(
                f"no reference sequence for thread {seq.thread_id}"
            )
        feats = extract_features(
            seq, ref, cfg, rate_window=rate_window, grid_size=grid_size, eps=eps
        )
        status, warning = hsa_diagnose_detail(feats, r)
        results.append(ThreadDiagnosis(seq.thread_id, status, warning, feats))
    return results


# ---------------------------------------------------------------------------
# Evaluation metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvaluationReport:
    """Per-class precision/recall/F1, macro F-score, and confusion counts.

    ``confusion[true][predicted]`` holds counts; macro_f averages the F1
    of the classes listed in ``macro_classes`` (all three by default).
    """

    per_class: dict[str, dict[str, float]]
    macro_f: float
    confusion: dict[str, dict[str, int]]
    macro_classes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "per_class": self.per_class,
            "macro_f": self.macro_f,
            "confusion": self.confusion,
            "macro_classes": list(self.macro_classes),
        }

    def to_text(self) -> str:
        names = [s.value for s in STATUSES]
        width = max(len(n) for n in names) + 2
        lines = ["class".ljust(width) + "precision    recall        f1   support"]
        for name in names:
            row = self.per_class[name]
            lines.append(
                name.ljust(width)
                + f"{row['precision']:9.4f} {row['recall']:9.4f} "
                + f"{row['f1']:9.4f} {int(row['support']):9d}"
            )
        lines.append(f"macro F-score: {self.macro_f:.4f}")
        lines.append("")
        lines.append("confusion (rows = truth, columns = prediction)")
        header = "".ljust(width) + "".join(n.rjust(12) for n in names)
        lines.append(header)
        for t in names:
            lines.append(
                t.ljust(width)
                + "".join(str(self.confusion[t][p]).rjust(12) for p in names)
            )
        return "\n".join(lines)


def evaluate(
    predictions: list[DiagnosisStatus],
    labels: list[DiagnosisStatus],
    macro_classes: tuple[DiagnosisStatus, ...] = STATUSES,
) -> EvaluationReport:
    """Score predictions against ground truth with the 0/0 -> 0 convention."""
    if len(predictions) != len(labels):
        raise ValidationError(
            f"got {len(predictions)} predictions for {len(labels)} labels"
        )
    if not labels:
        raise ValidationError("cannot evaluate zero samples")
    names = [s.value for s in STATUSES]
    confusion = {t: {p: 0 for p in names} for t in names}
    for pred, truth in zip(predictions, labels):
        confusion[DiagnosisStatus(truth).value][DiagnosisStatus(pred).value] += 1

    per_class = {}
    for name in names:
        tp = confusion[name][name]
        fp = sum(confusion[t][name] for t in names if t != name)
        fn = sum(confusion[name][p] for p in names if p != name)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[name] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": float(tp + fn),
        }
    macro_names = tuple(DiagnosisStatus(c).value for c in macro_classes)
    macro_f = float(np.mean([per_class[n]["f1"] for n in macro_names]))
    return EvaluationReport(per_class, macro_f, confusion, macro_names)


def compute_overhead(e_alpha, e_beta) -> float:
    """Relative CPU-usage increase (instrumented - baseline) / baseline.

    Computed in exact decimal-aware arithmetic: usage pairs are nearly
    equal in practice and naive float subtraction loses the small
    difference to cancellation (e.g. 1.025 - 1.0 != 0.025 in binary64).
    """
    alpha = Fraction(str(e_alpha)) if isinstance(e_alpha, float) else Fraction(e_alpha)
    beta = Fraction(str(e_beta)) if isinstance(e_beta, float) else Fraction(e_beta)
    if beta <= 0:
        raise DegenerateBaselineError(
            f"baseline CPU usage must be positive, got {e_beta}"
        )
    return float((alpha - beta) / beta)
