"""Command-line entry point: simulate, train, diagnose, evaluate, overhead.

Every command takes its parameters from flags and, optionally, a TOML or
JSON config file (flags win).  Exit codes: 0 success / all normal,
1 runtime error, 2 usage error, 3 anomaly detected.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline, synth
from .core import ingest_log, load_manifest, manifest_log_path
from .diagnosis import DiagnosisStatus, compute_overhead
from .errors import HeartbeatError
from .features import write_features_csv
from .pipeline import AnalysisParams, TrainedModel
from .synth import PROFILE_PRESETS, WorkloadProfile

log = logging.getLogger("hbdiag")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_ANOMALY = 3


def _parse_mix(value) -> tuple[float, float, float]:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ValueError(f"class mix needs 3 values, got {len(parts)}")
    return tuple(float(p) for p in parts)


ANALYSIS_FLAGS = {
    "w": (int, 5, "sliding-window size in samples"),
    "stride": (int, None, "window stride (default: window size)"),
    "rate_window": (int, 1, "beats per rate-derivation window"),
    "grid_size": (int, 100, "points on the shared alignment grid"),
    "eps": (float, 1e-9, "flat-reference threshold for local rate ratios"),
    "r2_threshold": (float, 0.9, "fit acceptance threshold"),
    "max_degree": (int, 10, "polynomial degree cap"),
}

COMMAND_DEFAULTS: dict[str, dict] = {
    "simulate": {
        "out": None,
        "runs": synth.DEFAULT_RUNS,
        "seed": 0,
        "mix": (1 / 3, 1 / 3, 1 / 3),
        "profile": "default",
        "rate": None,
        "threads": None,
        "duration": None,
        "jitter": None,
        "leak_slowdown": synth.DEFAULT_LEAK_SLOWDOWN,
        "offset_lo": synth.DEFAULT_OFFSET_RANGE[0],
        "offset_hi": synth.DEFAULT_OFFSET_RANGE[1],
        "victims": 1,
        "train_fraction": synth.DEFAULT_TRAIN_FRACTION,
    },
    "train": {
        "manifest": None,
        "out": "ranges.json",
        "confidence": 0.95,
        "split": "train",
        **{k: v for k, (_, v, _) in ANALYSIS_FLAGS.items()},
    },
    "diagnose": {
        "ranges": None,
        "manifest": None,
        "run": None,
        "log": None,
        "reference": None,
        "profile": None,
        "out": "statuses.json",
        "features_csv": None,
    },
    "evaluate": {
        "manifest": None,
        "repeats": 3,
        "seed": 0,
        "confidence": 0.95,
        "train_fraction": synth.DEFAULT_TRAIN_FRACTION,
        "out": "evaluation.json",
        **{k: v for k, (_, v, _) in ANALYSIS_FLAGS.items()},
    },
    "overhead": {
        "with_usage": None,
        "without_usage": None,
        "with_file": None,
        "without_file": None,
    },
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_analysis_flags(parser):
    for name, (typ, _default, help_text) in ANALYSIS_FLAGS.items():
        parser.add_argument(_flag(name), type=typ, help=help_text,
                            default=argparse.SUPPRESS, dest=name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbdiag",
        description="Diagnose performance anomalies from heartbeat logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a labeled synthetic corpus")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--runs", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--mix", default=argparse.SUPPRESS,
                   help="normal,memoryleak,shutdown fractions (sum to 1)")
    p.add_argument("--profile", default=argparse.SUPPRESS,
                   choices=sorted(PROFILE_PRESETS))
    p.add_argument("--rate", type=float, default=argparse.SUPPRESS,
                   help="override profile base rate (beats/s)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    p.add_argument("--duration", type=float, default=argparse.SUPPRESS,
                   help="run duration in seconds")
    p.add_argument("--jitter", type=float, default=argparse.SUPPRESS)
    p.add_argument("--leak-slowdown", type=float, default=argparse.SUPPRESS,
                   dest="leak_slowdown")
    p.add_argument("--offset-lo", type=float, default=argparse.SUPPRESS,
                   dest="offset_lo")
    p.add_argument("--offset-hi", type=float, default=argparse.SUPPRESS,
                   dest="offset_hi")
    p.add_argument("--victims", type=int, default=argparse.SUPPRESS)
    p.add_argument("--train-fraction", type=float, default=argparse.SUPPRESS,
                   dest="train_fraction")
    p.add_argument("--config", default=None)

    p = sub.add_parser("train", help="train normal feature ranges")
    p.add_argument("--manifest", default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="ranges JSON path")
    p.add_argument("--confidence", type=float, default=argparse.SUPPRESS)
    p.add_argument("--split", choices=("train", "all"), default=argparse.SUPPRESS,
                   help="which manifest runs feed training")
    _add_analysis_flags(p)
    p.add_argument("--config", default=None)

    p = sub.add_parser("diagnose", help="classify the threads of one run")
    p.add_argument("--ranges", default=argparse.SUPPRESS, help="trained ranges JSON")
    p.add_argument("--manifest", default=argparse.SUPPRESS)
    p.add_argument("--run", default=argparse.SUPPRESS, help="manifest run name")
    p.add_argument("--log", default=argparse.SUPPRESS, help="candidate log path")
    p.add_argument("--reference", default=argparse.SUPPRESS,
                   help="reference log path (defaults to the trained one)")
    p.add_argument("--profile", default=argparse.SUPPRESS,
                   help="profile name in the ranges file")
    p.add_argument("--out", default=argparse.SUPPRESS, help="statuses JSON path")
    p.add_argument("--features-csv", dest="features_csv", default=argparse.SUPPRESS,
                   help="also export the per-thread feature vectors as CSV")
    p.add_argument("--config", default=None)

    p = sub.add_parser("evaluate", help="repeated split/train/test evaluation")
    p.add_argument("--manifest", default=argparse.SUPPRESS)
    p.add_argument("--repeats", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--confidence", type=float, default=argparse.SUPPRESS)
    p.add_argument("--train-fraction", type=float, default=argparse.SUPPRESS,
                   dest="train_fraction")
    p.add_argument("--out", default=argparse.SUPPRESS, help="evaluation JSON path")
    _add_analysis_flags(p)
    p.add_argument("--config", default=None)

    p = sub.add_parser("overhead", help="instrumentation overhead from CPU usage")
    p.add_argument("--with", dest="with_usage", default=argparse.SUPPRESS,
                   help="CPU usage with heartbeats")
    p.add_argument("--without", dest="without_usage", default=argparse.SUPPRESS,
                   help="CPU usage without heartbeats")
    p.add_argument("--with-file", dest="with_file", default=argparse.SUPPRESS,
                   help="measurement file (JSON with cpu_seconds, or a number)")
    p.add_argument("--without-file", dest="without_file", default=argparse.SUPPRESS)
    p.add_argument("--config", default=None)

    return parser


class UsageError(Exception):
    pass


def _load_config_file(path) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(COMMAND_DEFAULTS[command])
    config_path = getattr(args, "config", None)
    if config_path:
        file_cfg = _load_config_file(config_path)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise UsageError(
                f"unknown config keys for '{command}': {sorted(unknown)}"
            )
        cfg.update(file_cfg)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg.update(overrides)
    return cfg


def _require(cfg: dict, *keys):
    for key in keys:
        if cfg.get(key) in (None, ""):
            raise UsageError(f"missing required option {_flag(key)}")


def _analysis_params(cfg: dict) -> AnalysisParams:
    return AnalysisParams(
        w=int(cfg["w"]),
        stride=None if cfg["stride"] is None else int(cfg["stride"]),
        rate_window=int(cfg["rate_window"]),
        grid_size=int(cfg["grid_size"]),
        eps=float(cfg["eps"]),
        r2_threshold=float(cfg["r2_threshold"]),
        max_degree=int(cfg["max_degree"]),
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: dict) -> int:
    _require(cfg, "out")
    mix = _parse_mix(cfg["mix"])
    if abs(sum(mix) - 1.0) > 1e-9:
        raise UsageError(f"class mix must sum to 1, got {sum(mix):.4f}")
    base = PROFILE_PRESETS[cfg["profile"]]
    profile = WorkloadProfile(
        name=base.name,
        base_rate=cfg["rate"] if cfg["rate"] is not None else base.base_rate,
        num_threads=cfg["threads"] if cfg["threads"] is not None else base.num_threads,
        duration_s=cfg["duration"] if cfg["duration"] is not None else base.duration_s,
        jitter=cfg["jitter"] if cfg["jitter"] is not None else base.jitter,
    )
    manifest_path, summary = synth.build_dataset(
        cfg["out"],
        profiles=[profile],
        class_mix=mix,
        n_runs=int(cfg["runs"]),
        seed=int(cfg["seed"]),
        leak_slowdown=float(cfg["leak_slowdown"]),
        offset_range=(float(cfg["offset_lo"]), float(cfg["offset_hi"])),
        victims=int(cfg["victims"]),
        train_fraction=float(cfg["train_fraction"]),
    )
    classes = summary["classes"]
    print(f"wrote {summary['runs']} runs ({summary['beats']} beats) to {cfg['out']}")
    print(
        f"classes: normal={classes['normal']} memoryleak={classes['memoryleak']} "
        f"shutdown={classes['shutdown']}"
    )
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_train(cfg: dict) -> int:
    _require(cfg, "manifest", "out")
    manifest = load_manifest(cfg["manifest"])
    if cfg["split"] == "train":
        names = sorted(n for n, e in manifest.items() if e.get("split") == "train")
    else:
        names = sorted(manifest)
    params = _analysis_params(cfg)
    model = pipeline.train_from_manifest(
        cfg["manifest"], manifest, names, params, confidence=float(cfg["confidence"])
    )
    out_dir = os.path.dirname(os.path.abspath(cfg["out"]))
    os.makedirs(out_dir, exist_ok=True)
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(model.as_dict(base_dir=out_dir), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for profile, trained in sorted(model.profiles.items()):
        print(f"profile {profile} (reference {trained.reference_run}, "
              f"{trained.n_vectors} vectors):")
        for feat, (lo, hi) in sorted(trained.ranges.as_dict().items()):
            print(f"  {feat:>4}: [{lo:.4f}, {hi:.4f}]")
    print(f"ranges written to {cfg['out']}")
    return EXIT_OK


def _resolve_diagnose_inputs(cfg):
    ranges_path = cfg["ranges"]
    base_dir = os.path.dirname(os.path.abspath(ranges_path))
    with open(ranges_path, "r", encoding="utf-8") as fh:
        model = TrainedModel.from_dict(json.load(fh), base_dir=base_dir)

    if cfg["log"] is not None:
        candidate_path = cfg["log"]
        profile = cfg["profile"]
        run_name = os.path.basename(candidate_path)
    elif cfg["manifest"] is not None and cfg["run"] is not None:
        manifest = load_manifest(cfg["manifest"])
        if cfg["run"] not in manifest:
            raise UsageError(f"run '{cfg['run']}' not in manifest")
        entry = manifest[cfg["run"]]
        candidate_path = manifest_log_path(cfg["manifest"], entry)
        profile = cfg["profile"] or entry["profile"]
        run_name = cfg["run"]
    else:
        raise UsageError("need either --log or --manifest with --run")

    if profile is None:
        if len(model.profiles) != 1:
            raise UsageError(
                f"ranges file holds profiles {sorted(model.profiles)}; pass --profile"
            )
        profile = next(iter(model.profiles))
    if profile not in model.profiles:
        raise UsageError(f"profile '{profile}' not in ranges file")
    trained = model.profiles[profile]
    reference_path = cfg["reference"] or trained.reference_log
    return model, trained, candidate_path, reference_path, run_name


def cmd_diagnose(cfg: dict) -> int:
    _require(cfg, "ranges")
    model, trained, candidate_path, reference_path, run_name = (
        _resolve_diagnose_inputs(cfg)
    )
    candidate = ingest_log(candidate_path)
    reference = ingest_log(reference_path)
    diags = pipeline.diagnose_log(candidate, reference, trained.ranges, model.params)

    print(f"run {run_name} vs reference {os.path.basename(reference_path)}")
    header = (f"{'thread':>6} {'status':<12} {'gtr':>10} {'ltr':>10} "
              f"{'ghr':>10} {'lhr':>10} {'dtw':>12} {'lb':>12}")
    print(header)
    for d in diags:
        f = d.features
        note = "  (warning: time ratios out of range)" if d.warning else ""
        print(
            f"{d.thread_id:>6} {d.status.value:<12} {f.gtr:>10.4f} {f.ltr:>10.4f} "
            f"{f.ghr:>10.4f} {f.lhr:>10.4f} {f.dtw:>12.4f} {f.lb:>12.4f}{note}"
        )

    anomalies = [d for d in diags if d.status is not DiagnosisStatus.NORMAL]
    result = {
        "run": run_name,
        "reference": reference_path,
        "anomalous": bool(anomalies),
        "threads": [
            {
                "thread_id": d.thread_id,
                "status": d.status.value,
                "warning": d.warning,
                "features": d.features.as_dict(),
            }
            for d in diags
        ],
    }
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if cfg["features_csv"]:
        write_features_csv(
            [(run_name, d.thread_id, d.features) for d in diags],
            cfg["features_csv"],
        )
    if anomalies:
        print(f"{len(anomalies)} anomalous thread(s) detected")
        return EXIT_ANOMALY
    print("all threads normal")
    return EXIT_OK


def cmd_evaluate(cfg: dict) -> int:
    _require(cfg, "manifest")
    params = _analysis_params(cfg)
    summary = pipeline.evaluate_manifest(
        cfg["manifest"],
        repeats=int(cfg["repeats"]),
        seed=int(cfg["seed"]),
        params=params,
        confidence=float(cfg["confidence"]),
        train_fraction=float(cfg["train_fraction"]),
    )
    for r in summary.repeats:
        print(f"--- repeat (split seed {r.split_seed}): "
              f"{r.n_train} train / {r.n_test} test runs ---")
        for notice in r.notices:
            print(f"notice: {notice}")
        print(r.report.to_text())
        print()
    print(f"mean macro F-score over {len(summary.repeats)} repeats: "
          f"{summary.mean_macro_f:.4f}")
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(summary.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _read_usage(value, path):
    if value is not None:
        return value
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read().strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return text
    if isinstance(data, dict):
        if "cpu_seconds" not in data:
            raise UsageError(f"{path}: measurement file lacks 'cpu_seconds'")
        return data["cpu_seconds"]
    return data


def cmd_overhead(cfg: dict) -> int:
    has_alpha = cfg["with_usage"] is not None or cfg["with_file"] is not None
    has_beta = cfg["without_usage"] is not None or cfg["without_file"] is not None
    if not (has_alpha and has_beta):
        raise UsageError(
            "need both measurements: --with/--with-file and --without/--without-file"
        )
    alpha = _read_usage(cfg["with_usage"], cfg.get("with_file"))
    beta = _read_usage(cfg["without_usage"], cfg.get("without_file"))
    try:
        overhead = compute_overhead(alpha, beta)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid usage value: {exc}") from exc
    print(f"{overhead * 100:.2f}%")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "diagnose": cmd_diagnose,
    "evaluate": cmd_evaluate,
    "overhead": cmd_overhead,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("HBDIAG_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HeartbeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
