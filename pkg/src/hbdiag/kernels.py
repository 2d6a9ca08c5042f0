"""Backend selection for the hot kernels.

Prefers the compiled extension, falling back to the NumPy/Python
implementation when the build is unavailable.  Both backends share one
contract; ``available_backends`` exposes them for parity tests and the
benchmark script.
"""

import os

from . import _pykernels

try:
    if os.environ.get("HBDIAG_PURE_PYTHON"):
        raise ImportError("pure-Python backend forced via HBDIAG_PURE_PYTHON")
    from . import _ckernels

    _impl = _ckernels
    COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _ckernels = None
    _impl = _pykernels
    COMPILED = False

BACKEND = _impl.BACKEND

dtw = _impl.dtw
envelope = _impl.envelope
lb_keogh_value = _impl.lb_keogh_value


def available_backends() -> dict:
    backends = {"python": _pykernels}
    if COMPILED:
        backends["compiled"] = _ckernels
    return backends
