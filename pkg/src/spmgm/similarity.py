"""Similarity matrices built from feature vectors.

Two kernels:

* Gaussian, ``A_ij = exp(-d_ij**2 / (2 sigma))`` with Euclidean ``d_ij``.
* Precision-weighted, ``A_ij = exp(-d_ij / sigma)`` with a diagonal
  covariance. With ``metric="inner"`` (default) ``d_ij`` is the
  variance-weighted inner product ``sum_f x_if x_jf / var_f``, exactly as the
  method defines it. That quantity is negative for anti-correlated rows, so
  entries above 1 can appear; they are kept and reported with
  :class:`SimilarityAboveOneWarning`. ``metric="mahalanobis-sq"`` uses the
  squared Mahalanobis distance instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import (
    DimensionMismatch,
    InvalidSimilarity,
    MissingVariances,
    NonPositiveSigma,
    ParseError,
    SimilarityAboveOneWarning,
)
from .graph import SimilarityMatrix

VARIANCE_TOKEN = "#var"
METRICS = ("inner", "mahalanobis-sq")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """``n`` samples by ``d`` features, with an optional per-feature variance."""

    values: np.ndarray
    variances: np.ndarray | None = None

    def __post_init__(self):
        x = np.array(self.values, dtype=np.float64, copy=True)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise DimensionMismatch(f"features must be 2-D, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DimensionMismatch("features contain non-finite entries")
        x.flags.writeable = False
        object.__setattr__(self, "values", x)
        if self.variances is not None:
            var = np.array(self.variances, dtype=np.float64, copy=True).ravel()
            if var.size != x.shape[1]:
                raise DimensionMismatch(f"{var.size} variances for {x.shape[1]} features")
            if not np.all(np.isfinite(var)) or np.any(var <= 0):
                raise DimensionMismatch("variances must be finite and positive")
            var.flags.writeable = False
            object.__setattr__(self, "variances", var)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _features(f) -> FeatureMatrix:
    return f if isinstance(f, FeatureMatrix) else FeatureMatrix(f)


def _check_sigma(sigma) -> float:
    try:
        s = float(sigma)
    except (TypeError, ValueError):
        raise NonPositiveSigma(f"sigma must be a positive number, got {sigma!r}") from None
    if not np.isfinite(s) or s <= 0:
        raise NonPositiveSigma(f"sigma must be a positive number, got {sigma!r}")
    return s


def _finish(expo: np.ndarray) -> SimilarityMatrix:
    with np.errstate(over="ignore"):
        w = np.exp(expo)
    np.fill_diagonal(w, 0.0)
    if not np.all(np.isfinite(w)):
        raise InvalidSimilarity("kernel overflowed; increase sigma or rescale the features")
    return SimilarityMatrix(w)


def gaussian_similarity(f, sigma: float) -> SimilarityMatrix:
    s = _check_sigma(sigma)
    x = _features(f).values
    d2 = squareform(pdist(x, "sqeuclidean")) if x.shape[0] > 1 else np.zeros((x.shape[0],) * 2)
    return _finish(-d2 / (2.0 * s))


def precision_similarity(f, sigma: float, metric: str = "inner") -> SimilarityMatrix:
    s = _check_sigma(sigma)
    fm = _features(f)
    if fm.variances is None:
        raise MissingVariances("the precision-weighted kernel needs per-feature variances")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    if metric == "inner":
        g = (fm.values / fm.variances) @ fm.values.T
        d = (g + g.T) / 2.0
    else:
        z = fm.values / np.sqrt(fm.variances)
        d = squareform(pdist(z, "sqeuclidean")) if fm.n > 1 else np.zeros((fm.n, fm.n))
    a = _finish(-d / s)
    above = a.w > 1.0
    if above.any():
        warnings.warn(
            SimilarityAboveOneWarning(
                f"{int(above.sum()) // 2} pairs have similarity above 1 "
                f"(max {a.w.max():.6g}); the inner-product form rewards anti-correlation",
                count=int(above.sum()) // 2,
                max_value=float(a.w.max()),
            ),
            stacklevel=2,
        )
    return a


def load_features_csv(path) -> FeatureMatrix:
    """Comma-separated rows of floats.

    An optional first row beginning with ``#var`` holds the per-feature
    variances, e.g. ``#var,0.5,2.0``. Blank lines are skipped.
    """
    rows, variances, width = [], None, None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            fields = [t.strip() for t in s.split(",")]
            is_var = fields[0].lower() == VARIANCE_TOKEN
            if is_var:
                if rows or variances is not None:
                    raise ParseError("the variance row must come first", path, lineno)
                fields = fields[1:]
            try:
                vals = [float(t) for t in fields]
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(f"expected {width} columns, found {len(vals)}", path, lineno)
            if is_var:
                variances = vals
            else:
                rows.append(vals)
    if not rows:
        raise ParseError("no feature rows", path)
    try:
        return FeatureMatrix(np.array(rows), variances)
    except DimensionMismatch as exc:
        raise ParseError(str(exc), path) from None


def write_features_csv(f: FeatureMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if f.variances is not None:
            fh.write(",".join([VARIANCE_TOKEN] + [repr(float(v)) for v in f.variances]) + "\n")
        for row in f.values:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
