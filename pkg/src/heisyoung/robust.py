"""Robust fitting primitives: least absolute deviations and inlier statistics.

The solvers in this package assume a small fraction of samples may be
arbitrarily corrupted.  L1 regression tolerates that without needing the
corrupted set identified in advance; afterwards, inliers are declared by the
3x-median-absolute-residual rule and all reported statistics are recomputed
on them from the raw data.
"""

from __future__ import annotations

import numpy as np

__all__ = ["lad_fit", "inlier_mask", "residual_stats"]

_MAX_ITERS = 50
_WEIGHT_FLOOR = 1e-8


def lad_fit(X: np.ndarray, y: np.ndarray, sample_weight=None) -> np.ndarray:
    """Least-absolute-deviations fit of y ~ X @ coef.

    Iteratively reweighted least squares with weights 1/max(|r|, floor),
    capped at 50 iterations.  ``sample_weight`` multiplies the per-row L1
    weight.  Raises on a rank-deficient design.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"design/target shape mismatch: {X.shape} vs {y.shape}")
    n, k = X.shape
    if n < k:
        raise ValueError(f"underdetermined design: {n} rows for {k} parameters")
    if np.linalg.matrix_rank(X) < k:
        raise ValueError("rank-deficient design matrix")
    base = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    w = base.copy()
    coef = np.zeros(k)
    for _ in range(_MAX_ITERS):
        sw = np.sqrt(w)
        new_coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
        if np.max(np.abs(new_coef - coef)) <= 1e-12 * (1.0 + np.max(np.abs(new_coef))):
            coef = new_coef
            break
        coef = new_coef
        r = np.abs(y - X @ coef)
        w = base / np.maximum(r, _WEIGHT_FLOOR)
    return coef


def inlier_mask(residuals: np.ndarray) -> np.ndarray:
    """Inliers are residuals below 3x the median absolute residual.

    An absolute cushion covers the exact-data case where the median is zero.
    """
    r = np.abs(np.asarray(residuals, dtype=float))
    med = float(np.median(r)) if r.size else 0.0
    cushion = 1e-12 * (1.0 + (float(np.max(r)) if r.size else 0.0))
    return r <= 3.0 * med + cushion


def residual_stats(residuals: np.ndarray):
    """(inlier mask, sup residual over inliers, inlier fraction)."""
    r = np.abs(np.asarray(residuals, dtype=float))
    mask = inlier_mask(r)
    sup = float(np.max(r[mask])) if np.any(mask) else 0.0
    frac = float(np.mean(mask)) if r.size else 0.0
    return mask, sup, frac
