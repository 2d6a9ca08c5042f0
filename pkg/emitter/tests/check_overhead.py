#!/usr/bin/env python3
"""Acceptance check: instrumentation overhead at a 1-beat-per-1000-
iterations throttle stays under 5%, median of 5 trials; a 1-beat-per-
iteration run must cost strictly more than the throttled one.

Usage: check_overhead.py /path/to/overhead_harness [workdir]
Environment: HB_BENCH_SECONDS per-mode loop budget (default 5).
"""

import json
import os
import statistics
import subprocess
import sys
import tempfile


def run_harness(binary, workdir, tag, seconds, beat_every):
    prefix = os.path.join(workdir, f"{tag}_")
    cmd = [
        binary, "--seconds", str(seconds), "--beat-every", str(beat_every),
        "--threads", "4", "--out-prefix", prefix,
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        print(f"harness failed: {proc.stderr}", file=sys.stderr)
        sys.exit(1)
    with open(prefix + "heartbeat.json") as fh:
        alpha = json.load(fh)["cpu_seconds"]
    with open(prefix + "baseline.json") as fh:
        beta = json.load(fh)["cpu_seconds"]
    return (alpha - beta) / beta


def main():
    if len(sys.argv) < 2:
        print("usage: check_overhead.py HARNESS_BINARY [WORKDIR]", file=sys.stderr)
        return 2
    binary = sys.argv[1]
    workdir = sys.argv[2] if len(sys.argv) > 2 else tempfile.mkdtemp()
    os.makedirs(workdir, exist_ok=True)
    seconds = float(os.environ.get("HB_BENCH_SECONDS", "5"))

    throttled = [
        run_harness(binary, workdir, f"t{i}", seconds, 1000) for i in range(5)
    ]
    median = statistics.median(throttled)
    ok_median = median < 0.05
    status = "PASS" if ok_median else "FAIL"
    trials = ", ".join(f"{t * 100:.2f}%" for t in throttled)
    print(
        f"[ACCEPTANCE-SECONDARY] emitter-overhead: {status} "
        f"(median {median * 100:.2f}% of trials [{trials}])"
    )

    # monotonicity: emitting every iteration must cost strictly more
    dense = run_harness(binary, workdir, "dense", min(seconds, 2.0), 1)
    ok_mono = dense > median
    mono_status = "PASS" if ok_mono else "FAIL"
    print(
        f"[ACCEPTANCE-SECONDARY] emitter-overhead-monotonicity: {mono_status} "
        f"(every-iteration {dense * 100:.2f}% > throttled {median * 100:.2f}%)"
    )
    return 0 if ok_median and ok_mono else 1


if __name__ == "__main__":
    sys.exit(main())
