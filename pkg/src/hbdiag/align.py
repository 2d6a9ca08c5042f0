"""Polynomial fitting of heart-rate scatter and pairwise time alignment.

Two rate series generally carry different timestamps, so comparing them
pointwise requires a model of each: fit a polynomial to every series,
then evaluate both models on a shared uniform grid over the overlap of
their time domains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HeartRateSeries
from .errors import (
    ConditioningError,
    InsufficientDataError,
    NoOverlapError,
    UndefinedRSquaredError,
    ValidationError,
)

DEFAULT_R2_THRESHOLD = 0.9
DEFAULT_MAX_DEGREE = 10
DEFAULT_GRID_SIZE = 100


@dataclass(frozen=True)
class PolyModel:
    """y = coefficients[0] + sum_k coefficients[k] * x'**k on normalized x.

    Timestamps are mapped to x' = (x - x_shift) / x_scale before
    evaluation; raw nanosecond-scale abscissae would make the design
    matrix numerically singular beyond degree ~3.
    """

    coefficients: tuple[float, ...]
    degree: int
    x_shift: float
    x_scale: float
    r2: float | None = None
    below_threshold: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.degree < 1:
            raise ValidationError(f"degree must be >= 1, got {self.degree}")
        if len(self.coefficients) != self.degree + 1:
            raise ValidationError(
                f"expected {self.degree + 1} coefficients, got {len(self.coefficients)}"
            )
        if not self.x_scale > 0:
            raise ValidationError(f"x_scale must be positive, got {self.x_scale}")
        if not all(np.isfinite(self.coefficients)):
            raise ValidationError("non-finite coefficient")

    def predict(self, x):
        """Evaluate the model at raw (unnormalized) timestamps."""
        xn = (np.asarray(x, dtype=np.float64) - self.x_shift) / self.x_scale
        y = np.zeros_like(xn)
        for c in reversed(self.coefficients):
            y = y * xn + c
        return y

    def __call__(self, x):
        return self.predict(x)


@dataclass(frozen=True)
class AlignedPair:
    """Model-evaluated rates of two series on one shared time grid."""

    grid: np.ndarray
    rates_q: np.ndarray
    rates_c: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        rq = np.asarray(self.rates_q, dtype=np.float64)
        rc = np.asarray(self.rates_c, dtype=np.float64)
        if not (grid.shape == rq.shape == rc.shape):
            raise ValidationError("grid and rate arrays must have equal shape")
        if grid.size < 2:
            raise ValidationError("an aligned pair needs at least 2 grid points")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("grid must strictly increase")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rates_q", rq)
        object.__setattr__(self, "rates_c", rc)


def fit_polynomial(points: HeartRateSeries, degree: int) -> PolyModel:
    """Least-squares polynomial fit of rate against time.

    Solved via SVD (numpy lstsq) on a Vandermonde matrix of normalized
    timestamps; raises ConditioningError if the system is rank-deficient.
    """
    if degree < 1:
        raise ValidationError(f"degree must be >= 1, got {degree}")
    n = len(points)
    if n < degree + 1:
        raise InsufficientDataError(
            f"degree-{degree} fit needs {degree + 1} points, got {n}"
        )
    x = points.t
    y = points.rates
    if np.unique(x).size != n:
        raise ValidationError("duplicate timestamps in fit input")
    shift = float(x[0])
    scale = float(x[-1] - x[0])
    xn = (x - shift) / scale
    design = np.vander(xn, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise ConditioningError(
            f"design matrix rank {rank} < {degree + 1}; degree too high for data"
        )
    return PolyModel(tuple(coef), degree, shift, scale)


def r_squared(model: PolyModel, points: HeartRateSeries) -> float:
    """1 - SS_res/SS_tot; 1.0 means the model reproduces the data."""
    if len(points) < 2:
        raise InsufficientDataError("R-squared needs at least 2 points")
    y = points.rates
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        raise UndefinedRSquaredError("response has zero variance")
    resid = model.predict(points.t) - y
    return 1.0 - float(np.sum(resid**2)) / ss_tot


def auto_fit(
    points: HeartRateSeries,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> PolyModel:
    """Escalate the degree until the fit clears the R-squared threshold.

    Returns the lowest-degree model with R^2 > r2_threshold.  If none of
    the degrees up to max_degree (or up to what the sample count allows)
    reaches it, the last fit is returned flagged ``below_threshold``.
    Constant-rate inputs are accepted as perfect degree-1 fits.
    """
    n = len(points)
    if n < 2:
        raise InsufficientDataError("auto_fit needs at least 2 points")
    model = None
    r2 = -np.inf
    for degree in range(1, max_degree + 1):
        if n < degree + 1:
            break
        model = fit_polynomial(points, degree)
        try:
            r2 = r_squared(model, points)
        except UndefinedRSquaredError:
            # zero-variance response: the flat fit is exact
            r2 = 1.0
        if r2 > r2_threshold:
            return PolyModel(
                model.coefficients, model.degree, model.x_shift, model.x_scale,
                r2=r2, below_threshold=False,
            )
    return PolyModel(
        model.coefficients, model.degree, model.x_shift, model.x_scale,
        r2=float(r2), below_threshold=True,
    )


def align(
    seq_q: HeartRateSeries,
    seq_c: HeartRateSeries,
    grid_size: int = DEFAULT_GRID_SIZE,
    r2_threshold: float = DEFAULT_R2_THRESHOLD,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> AlignedPair:
    """Fit both series and evaluate them on a shared uniform grid.

    The grid spans the intersection of the two time domains; disjoint
    domains raise NoOverlapError.
    """
    if grid_size < 2:
        raise ValidationError(f"grid_size must be >= 2, got {grid_size}")
    if len(seq_q) == 0 or len(seq_c) == 0:
        raise InsufficientDataError("cannot align an empty series")
    lo = max(float(seq_q.t[0]), float(seq_c.t[0]))
    hi = min(float(seq_q.t[-1]), float(seq_c.t[-1]))
    if not lo < hi:
        raise NoOverlapError(
            f"time domains [{seq_q.t[0]}, {seq_q.t[-1]}] and "
            f"[{seq_c.t[0]}, {seq_c.t[-1]}] do not overlap"
        )
    model_q = auto_fit(seq_q, r2_threshold, max_degree)
    model_c = auto_fit(seq_c, r2_threshold, max_degree)
    grid = np.linspace(lo, hi, grid_size)
    return AlignedPair(grid, model_q.predict(grid), model_c.predict(grid))
