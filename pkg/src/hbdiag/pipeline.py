"""Dataset-level workflows: train ranges from a corpus, diagnose runs,
and run the repeated split/train/test evaluation cycle.

The CLI is a thin wrapper around these functions so the whole flow is
scriptable and testable in-process.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .align import DEFAULT_GRID_SIZE, DEFAULT_MAX_DEGREE, DEFAULT_R2_THRESHOLD
from .core import (
    HeartbeatSequence,
    WindowConfig,
    ingest_log,
    load_manifest,
    manifest_log_path,
)
from .diagnosis import (
    DiagnosisStatus,
    EvaluationReport,
    NormalRanges,
    STATUSES,
    ThreadDiagnosis,
    diagnose_run,
    evaluate,
    train_normal_ranges,
)
from .errors import ConfigurationError, InsufficientDataError, ValidationError
from .features import DEFAULT_EPS, extract_features
from .synth import DEFAULT_TRAIN_FRACTION, split_runs


@dataclass(frozen=True)
class AnalysisParams:
    """Knobs of the feature-extraction stage, shared by train and diagnose."""

    w: int = 5
    stride: int | None = None
    rate_window: int = 1
    grid_size: int = DEFAULT_GRID_SIZE
    eps: float = DEFAULT_EPS
    r2_threshold: float = DEFAULT_R2_THRESHOLD
    max_degree: int = DEFAULT_MAX_DEGREE

    def __post_init__(self):
        if self.stride is None:
            object.__setattr__(self, "stride", self.w)

    def window_config(self) -> WindowConfig:
        return WindowConfig(self.w, self.stride)

    def as_dict(self) -> dict:
        return {
            "w": self.w,
            "stride": self.stride,
            "rate_window": self.rate_window,
            "grid_size": self.grid_size,
            "eps": self.eps,
            "r2_threshold": self.r2_threshold,
            "max_degree": self.max_degree,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown analysis parameters: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TrainedProfile:
    """Trained ranges plus the reference run they were extracted against."""

    ranges: NormalRanges
    reference_run: str
    reference_log: str
    n_vectors: int


@dataclass(frozen=True)
class TrainedModel:
    profiles: dict[str, TrainedProfile]
    params: AnalysisParams
    confidence: float

    def as_dict(self, base_dir=None) -> dict:
        out_profiles = {}
        for name, tp in self.profiles.items():
            log = tp.reference_log
            if base_dir is not None and os.path.isabs(log):
                log = os.path.relpath(log, base_dir)
            out_profiles[name] = {
                "ranges": tp.ranges.as_dict(),
                "reference_run": tp.reference_run,
                "reference_log": log,
                "n_vectors": tp.n_vectors,
            }
        return {
            "analysis": self.params.as_dict(),
            "confidence": self.confidence,
            "profiles": out_profiles,
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "TrainedModel":
        for key in ("analysis", "confidence", "profiles"):
            if key not in data:
                raise ValidationError(f"ranges file lacks '{key}'")
        params = AnalysisParams.from_dict(data["analysis"])
        profiles = {}
        for name, entry in data["profiles"].items():
            log = entry["reference_log"]
            if base_dir is not None and not os.path.isabs(log):
                log = os.path.normpath(os.path.join(base_dir, log))
            profiles[name] = TrainedProfile(
                ranges=NormalRanges.from_dict(entry["ranges"]),
                reference_run=entry["reference_run"],
                reference_log=log,
                n_vectors=int(entry.get("n_vectors", 0)),
            )
        return cls(profiles=profiles, params=params, confidence=float(data["confidence"]))


def load_run(manifest_path, manifest: dict, name: str) -> list[HeartbeatSequence]:
    if name not in manifest:
        raise ConfigurationError(f"run '{name}' not in manifest")
    return ingest_log(manifest_log_path(manifest_path, manifest[name]))


def run_completion_ns(seqs: list[HeartbeatSequence]) -> int:
    return max(s.completion_time_ns for s in seqs)


def choose_reference(runs: dict[str, list[HeartbeatSequence]]) -> str:
    """Pick the run with median completion time (ties: lexicographic name)."""
    ordered = sorted(runs, key=lambda n: (run_completion_ns(runs[n]), n))
    return ordered[len(ordered) // 2]


def train_from_manifest(
    manifest_path,
    manifest: dict,
    train_names: list[str],
    params: AnalysisParams,
    confidence: float = 0.95,
    min_normal_runs: int = 10,
) -> TrainedModel:
    """Train per-profile normal ranges from the listed training runs.

    For each profile the reference is the normal training run with median
    completion time; features of every normal training thread against the
    same-thread reference feed the percentile intervals.
    """
    normals_by_profile: dict[str, list[str]] = {}
    for name in train_names:
        entry = manifest[name]
        if entry["label"] == "normal":
            normals_by_profile.setdefault(entry["profile"], []).append(name)

    total_normals = sum(len(v) for v in normals_by_profile.values())
    if total_normals < min_normal_runs:
        raise InsufficientDataError(
            f"need at least {min_normal_runs} normal training runs, "
            f"got {total_normals}"
        )

    cfg = params.window_config()
    profiles = {}
    for profile, names in sorted(normals_by_profile.items()):
        runs = {n: load_run(manifest_path, manifest, n) for n in sorted(names)}
        ref_name = choose_reference(runs)
        ref_by_thread = {s.thread_id: s for s in runs[ref_name]}
        vectors = []
        for name in sorted(runs):
            for seq in runs[name]:
                ref = ref_by_thread.get(seq.thread_id)
                if ref is None:
                    raise ConfigurationError(
                        f"run '{name}' thread {seq.thread_id} has no reference "
                        f"thread in '{ref_name}'"
                    )
                vectors.append(
                    extract_features(
                        seq, ref, cfg,
                        rate_window=params.rate_window,
                        grid_size=params.grid_size,
                        eps=params.eps,
                        r2_threshold=params.r2_threshold,
                        max_degree=params.max_degree,
                    )
                )
        ranges = train_normal_ranges(vectors, confidence)
        profiles[profile] = TrainedProfile(
            ranges=ranges,
            reference_run=ref_name,
            reference_log=manifest_log_path(manifest_path, manifest[ref_name]),
            n_vectors=len(vectors),
        )
    return TrainedModel(profiles=profiles, params=params, confidence=confidence)


def diagnose_log(
    candidate: list[HeartbeatSequence],
    reference: list[HeartbeatSequence],
    ranges: NormalRanges,
    params: AnalysisParams,
) -> list[ThreadDiagnosis]:
    ref_by_thread = {s.thread_id: s for s in reference}
    return diagnose_run(
        candidate, ref_by_thread, ranges, params.window_config(),
        rate_window=params.rate_window, grid_size=params.grid_size, eps=params.eps,
    )


def thread_truth(entry: dict, thread_ids: list[int]) -> list[DiagnosisStatus]:
    """Per-thread ground truth: anomalies hit the listed threads only."""
    label = DiagnosisStatus(entry["label"])
    anomalous = set(entry.get("anomalous_threads", []))
    if label is DiagnosisStatus.NORMAL:
        return [DiagnosisStatus.NORMAL] * len(thread_ids)
    return [
        label if tid in anomalous else DiagnosisStatus.NORMAL for tid in thread_ids
    ]


@dataclass(frozen=True)
class RepeatResult:
    split_seed: int
    report: EvaluationReport
    n_train: int
    n_test: int
    notices: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvaluationSummary:
    repeats: list[RepeatResult]
    mean_macro_f: float

    def as_dict(self) -> dict:
        return {
            "mean_macro_f": self.mean_macro_f,
            "repeats": [
                {
                    "split_seed": r.split_seed,
                    "n_train": r.n_train,
                    "n_test": r.n_test,
                    "notices": list(r.notices),
                    **r.report.as_dict(),
                }
                for r in self.repeats
            ],
        }


def evaluate_manifest(
    manifest_path,
    repeats: int = 3,
    seed: int = 0,
    params: AnalysisParams | None = None,
    confidence: float = 0.95,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    min_normal_runs: int = 10,
) -> EvaluationSummary:
    """Repeat the split/train/diagnose cycle and average the macro F-score.

    Repeat r uses split seed ``seed + r``; each repeat re-trains ranges on
    its own training normals and scores per-thread predictions on the
    test runs.
    """
    manifest = load_manifest(manifest_path)
    params = params or AnalysisParams()
    results = []
    for r in range(repeats):
        split_seed = seed + r
        assignment = split_runs(manifest, split_seed, train_fraction)
        train_names = sorted(n for n, s in assignment.items() if s == "train")
        test_names = sorted(n for n, s in assignment.items() if s == "test")
        model = train_from_manifest(
            manifest_path, manifest, train_names, params, confidence,
            min_normal_runs=min_normal_runs,
        )

        predictions: list[DiagnosisStatus] = []
        truth: list[DiagnosisStatus] = []
        notices = []
        reference_cache: dict[str, list] = {}
        for name in test_names:
            entry = manifest[name]
            profile = entry["profile"]
            if profile not in model.profiles:
                raise ConfigurationError(
                    f"no trained ranges for profile '{profile}' (run '{name}')"
                )
            trained = model.profiles[profile]
            candidate = load_run(manifest_path, manifest, name)
            if profile not in reference_cache:
                reference_cache[profile] = ingest_log(trained.reference_log)
            reference = reference_cache[profile]
            diags = diagnose_log(candidate, reference, trained.ranges, params)
            predictions.extend(d.status for d in diags)
            truth.extend(thread_truth(entry, [d.thread_id for d in diags]))

        present = tuple(s for s in STATUSES if s in set(truth))
        if len(present) < len(STATUSES):
            missing = [s.value for s in STATUSES if s not in present]
            notices.append(
                f"classes {missing} absent from test split; excluded from macro mean"
            )
        report = evaluate(predictions, truth, macro_classes=present)
        results.append(
            RepeatResult(
                split_seed=split_seed,
                report=report,
                n_train=len(train_names),
                n_test=len(test_names),
                notices=tuple(notices),
            )
        )
    mean_macro = float(np.mean([r.report.macro_f for r in results]))
    return EvaluationSummary(repeats=results, mean_macro_f=mean_macro)
