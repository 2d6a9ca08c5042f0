"""hbdiag: performance-anomaly diagnosis from heartbeat time series.

Heartbeat logs from instrumented multi-threaded programs are turned into
per-thread heart-rate series; a candidate run is compared against a
normal reference via completion-time ratios, heart-rate ratios, a
warping distance and its envelope lower bound; a fixed rule tree maps
those six features to {normal, memoryleak, shutdown}.
"""

from .core import (
    HeartbeatRecord,
    HeartbeatSequence,
    HeartRateSeries,
    WindowConfig,
    derive_heart_rate,
    ingest_log,
    mean_rate,
    write_log,
)
from .align import AlignedPair, PolyModel, align, auto_fit, fit_polynomial, r_squared
from .features import (
    Envelope,
    FeatureVector,
    dtw_distance,
    envelope,
    extract_features,
    global_heartbeat_ratio,
    global_time_ratio,
    lb_keogh,
    local_heartbeat_ratio,
    local_time_ratio,
    read_features_csv,
    write_features_csv,
)
from .diagnosis import (
    DiagnosisStatus,
    EvaluationReport,
    NormalRanges,
    ThreadDiagnosis,
    compute_overhead,
    diagnose_run,
    evaluate,
    hsa_diagnose,
    hsa_diagnose_detail,
    train_normal_ranges,
)
from .synth import (
    AnomalySpec,
    WorkloadProfile,
    build_dataset,
    gen_normal,
    inject_memory_leak,
    inject_shutdown,
)

__version__ = "0.1.0"
