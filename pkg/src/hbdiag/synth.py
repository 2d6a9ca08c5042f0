"""Synthetic heartbeat corpora with injected anomalies.

Normal runs emit beats at a configured base rate with multiplicative
log-normal jitter.  A memory leak stretches inter-beat intervals by a
factor growing linearly in elapsed time (same beat count, later
completion, sagging rate); a shutdown truncates the victim thread at a
seeded random offset.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .core import NS_PER_S, HeartbeatSequence, save_manifest, write_log
from .errors import (
    DegenerateInjectionError,
    MisuseError,
    ValidationError,
)

DEFAULT_JITTER = 0.05
DEFAULT_LEAK_SLOWDOWN = 0.1
DEFAULT_OFFSET_RANGE = (0.3, 0.9)
DEFAULT_TRAIN_FRACTION = 0.3
DEFAULT_RUNS = 300


@dataclass(frozen=True)
class WorkloadProfile:
    """Shape of one synthetic workload: beat rate, threads, length, noise."""

    name: str
    base_rate: float
    num_threads: int = 4
    duration_s: float = 5.0
    jitter: float = DEFAULT_JITTER

    def __post_init__(self):
        if self.base_rate <= 0:
            raise ValidationError(f"base_rate must be positive, got {self.base_rate}")
        if self.num_threads < 1:
            raise ValidationError(f"num_threads must be >= 1, got {self.num_threads}")
        if self.duration_s <= 0:
            raise ValidationError(f"duration_s must be positive, got {self.duration_s}")
        if not 0.0 <= self.jitter < 1.0:
            raise ValidationError(f"jitter must be in [0, 1), got {self.jitter}")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "base_rate": self.base_rate,
            "num_threads": self.num_threads,
            "duration_s": self.duration_s,
            "jitter": self.jitter,
        }


# Mean measured rates of the instrumented benchmark suite, used as
# ready-made profile presets.  Durations are scaled so a run stays at
# roughly 5000 beats per thread.
BENCHMARK_RATES = {
    "npb-bt": 97519.4,
    "npb-lu": 346877.5,
    "npb-cg": 176311.3,
    "npb-sp": 528756.4,
    "jacobi": 5488.1,
    "arraybench": 31695.64,
}

PROFILE_PRESETS = {
    "default": WorkloadProfile("default", base_rate=100.0, duration_s=4.0),
    **{
        name: WorkloadProfile(name, base_rate=rate, duration_s=5000.0 / rate)
        for name, rate in BENCHMARK_RATES.items()
    },
}


@dataclass(frozen=True)
class AnomalySpec:
    """Parameters of one injected fault."""

    kind: str
    leak_slowdown: float = DEFAULT_LEAK_SLOWDOWN
    offset_range: tuple[float, float] = DEFAULT_OFFSET_RANGE
    victims: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("memoryleak", "shutdown"):
            raise ValidationError(f"unknown anomaly kind '{self.kind}'")
        if self.kind == "memoryleak" and self.leak_slowdown < 0:
            raise ValidationError(
                f"leak_slowdown must be >= 0, got {self.leak_slowdown}"
            )
        lo, hi = self.offset_range
        if self.kind == "shutdown" and not (0.0 < lo <= hi <= 1.0):
            raise ValidationError(
                f"offset_range must lie within (0, 1], got {self.offset_range}"
            )
        if self.victims < 1:
            raise ValidationError(f"victims must be >= 1, got {self.victims}")


def gen_normal(profile: WorkloadProfile, seed) -> list[HeartbeatSequence]:
    """Generate one normal run: one sequence per thread, beats in [0, duration).

    Inter-beat intervals are (1/base_rate) * lognormal(-jitter^2/2, jitter)
    so the mean interval stays on target; intervals are clamped to >= 1 ns
    to keep timestamps strictly increasing.  Deterministic per seed.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    duration_ns = int(round(profile.duration_s * NS_PER_S))
    base_interval_ns = NS_PER_S / profile.base_rate
    sequences = []
    for tid, child in enumerate(ss.spawn(profile.num_threads)):
        rng = np.random.default_rng(child)
        chunk = max(16, int(profile.base_rate * profile.duration_s * 1.2) + 16)
        stamps = [np.zeros(1, dtype=np.int64)]
        last = 0
        while last < duration_ns:
            if profile.jitter > 0:
                factors = rng.lognormal(
                    mean=-0.5 * profile.jitter**2, sigma=profile.jitter, size=chunk
                )
            else:
                factors = np.ones(chunk)
            intervals = np.maximum(
                1, np.rint(base_interval_ns * factors).astype(np.int64)
            )
            cum = last + np.cumsum(intervals)
            stamps.append(cum)
            last = int(cum[-1])
        ts = np.concatenate(stamps)
        ts = ts[ts < duration_ns]
        sequences.append(HeartbeatSequence(tid, ts))
    return sequences


def inject_memory_leak(
    seqs: list[HeartbeatSequence], spec: AnomalySpec
) -> list[HeartbeatSequence]:
    """Stretch every thread's intervals by 1 + leak_slowdown * elapsed_seconds.

    Beat counts are preserved; completion time strictly grows whenever
    leak_slowdown > 0 (the leak acts on the whole run).
    """
    if spec.kind != "memoryleak":
        raise MisuseError(f"inject_memory_leak got kind '{spec.kind}'")
    rate = spec.leak_slowdown
    out = []
    for seq in seqs:
        ts = seq.timestamps_ns
        if rate == 0.0:
            out.append(HeartbeatSequence(seq.thread_id, ts.copy()))
            continue
        new_ts = np.empty_like(ts)
        new_ts[0] = ts[0]
        t = int(ts[0])
        for i in range(1, ts.size):
            dt = int(ts[i]) - int(ts[i - 1])
            elapsed_s = (t + dt) / NS_PER_S
            t += int(round(dt * (1.0 + rate * elapsed_s)))
            new_ts[i] = t
        if ts.size > 1 and new_ts[-1] <= ts[-1]:
            new_ts[-1] = ts[-1] + 1  # guarantee strictly later completion
        out.append(HeartbeatSequence(seq.thread_id, new_ts))
    return out


def inject_shutdown(
    seqs: list[HeartbeatSequence], spec: AnomalySpec
) -> tuple[list[HeartbeatSequence], list[int]]:
    """Truncate seeded victim threads at a random offset into the run.

    The offset is duration * uniform(offset_range); beats after it are
    dropped from each victim.  Returns the new sequences and the victim
    thread ids.
    """
    if spec.kind != "shutdown":
        raise MisuseError(f"inject_shutdown got kind '{spec.kind}'")
    if not seqs:
        raise DegenerateInjectionError("no sequences to inject into")
    rng = np.random.default_rng(spec.rng_seed)
    duration_ns = max(s.completion_time_ns for s in seqs)
    frac = float(rng.uniform(*spec.offset_range))
    cutoff = int(round(frac * duration_ns))
    n_victims = min(spec.victims, len(seqs))
    victim_ids = sorted(
        int(seqs[i].thread_id)
        for i in rng.choice(len(seqs), size=n_victims, replace=False)
    )
    out = []
    for seq in seqs:
        if seq.thread_id not in victim_ids:
            out.append(seq)
            continue
        kept = seq.timestamps_ns[seq.timestamps_ns <= cutoff]
        if kept.size < 2:
            raise DegenerateInjectionError(
                f"cutoff {cutoff} ns leaves {kept.size} beats in thread "
                f"{seq.thread_id}"
            )
        out.append(HeartbeatSequence(seq.thread_id, kept))
    return out, victim_ids


def build_dataset(
    out_dir,
    profiles: list[WorkloadProfile] | None = None,
    class_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    n_runs: int = DEFAULT_RUNS,
    seed: int = 0,
    leak_slowdown: float = DEFAULT_LEAK_SLOWDOWN,
    offset_range: tuple[float, float] = DEFAULT_OFFSET_RANGE,
    victims: int = 1,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> tuple[str, dict]:
    """Generate a labeled corpus: one log per run plus a JSON manifest.

    The class mix maps to per-class run counts by largest remainder; the
    train/test split is stratified per class and recorded in the
    manifest.  Everything is deterministic for a given seed.
    """
    if profiles is None:
        profiles = [PROFILE_PRESETS["default"]]
    mix = np.asarray(class_mix, dtype=np.float64)
    if mix.size != 3 or np.any(mix < 0) or abs(float(mix.sum()) - 1.0) > 1e-9:
        raise ValidationError(
            f"class mix must be 3 non-negative fractions summing to 1, got {class_mix}"
        )
    if n_runs < 1:
        raise ValidationError(f"n_runs must be >= 1, got {n_runs}")
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(
            f"train_fraction must be in (0, 1), got {train_fraction}"
        )

    counts = _largest_remainder(mix, n_runs)
    labels = (
        ["normal"] * counts[0] + ["memoryleak"] * counts[1] + ["shutdown"] * counts[2]
    )

    os.makedirs(out_dir, exist_ok=True)
    root = np.random.SeedSequence(seed)
    run_seeds = root.spawn(n_runs)

    manifest = {}
    total_beats = 0
    width = max(3, len(str(n_runs - 1)))
    for idx, label in enumerate(labels):
        profile = profiles[idx % len(profiles)]
        run_ss = run_seeds[idx]
        inject_seed = int(run_ss.generate_state(1)[0])
        seqs = gen_normal(profile, run_ss)
        anomalous_threads: list[int] = []
        anomaly: dict = {}
        if label == "memoryleak":
            spec = AnomalySpec("memoryleak", leak_slowdown=leak_slowdown,
                               rng_seed=inject_seed)
            seqs = inject_memory_leak(seqs, spec)
            anomalous_threads = [s.thread_id for s in seqs]
            anomaly = {"leak_slowdown": leak_slowdown}
        elif label == "shutdown":
            spec = AnomalySpec("shutdown", offset_range=offset_range,
                               victims=victims, rng_seed=inject_seed)
            seqs, anomalous_threads = inject_shutdown(seqs, spec)
            anomaly = {"offset_range": list(offset_range), "victims": victims}

        name = f"run_{idx:0{width}d}_{label}"
        log_name = name + ".csv"
        write_log(seqs, os.path.join(out_dir, log_name))
        total_beats += sum(len(s) for s in seqs)
        manifest[name] = {
            "log_path": log_name,
            "label": label,
            "profile": profile.name,
            "profile_params": profile.as_dict(),
            "anomaly": anomaly,
            "anomalous_threads": anomalous_threads,
            "seed": seed,
            "run_index": idx,
        }

    for name, split in split_runs(manifest, seed, train_fraction).items():
        manifest[name]["split"] = split

    manifest_path = os.path.join(out_dir, "manifest.json")
    save_manifest(manifest, manifest_path)
    summary = {
        "runs": n_runs,
        "beats": total_beats,
        "classes": {
            "normal": counts[0], "memoryleak": counts[1], "shutdown": counts[2],
        },
        "manifest": manifest_path,
    }
    return manifest_path, summary


def split_runs(manifest: dict, seed: int, train_fraction: float = DEFAULT_TRAIN_FRACTION) -> dict[str, str]:
    """Stratified train/test assignment: train_fraction of each class."""
    by_label: dict[str, list[str]] = {}
    for name in sorted(manifest):
        by_label.setdefault(manifest[name]["label"], []).append(name)
    rng = np.random.default_rng(seed)
    assignment = {}
    for label in sorted(by_label):
        names = by_label[label]
        order = rng.permutation(len(names))
        n_train = int(round(train_fraction * len(names)))
        chosen = {names[i] for i in order[:n_train]}
        for name in names:
            assignment[name] = "train" if name in chosen else "test"
    return assignment


def _largest_remainder(mix: np.ndarray, total: int) -> list[int]:
    raw = mix * total
    counts = np.floor(raw).astype(int)
    short = total - int(counts.sum())
    order = np.argsort(-(raw - counts), kind="stable")
    for i in range(short):
        counts[order[i]] += 1
    return counts.tolist()
