"""Least-squares line fits used by the sweep experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FitResult", "fit_linear", "fit_loglog"]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    count: int


def fit_linear(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("fit expects two equal-length 1d arrays")
    if x.size < 2:
        raise ValueError(f"need at least 2 points to fit a line, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), float(r2), int(x.size))


def fit_loglog(x, y) -> FitResult:
    """Power-law fit: slope of ln(y) against ln(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    return fit_linear(np.log(x), np.log(y))
