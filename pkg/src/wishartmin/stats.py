"""Goodness-of-fit machinery: KS test, histograms, derivative identity checks.

The primary verification path compares a sorted Monte Carlo batch against the
analytic CDF F(t) = 1 - E(t) taken directly from the gap probability; no
quadrature of the density is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Histogram",
    "KsReport",
    "ks_statistic",
    "build_histogram",
    "derivative_check",
]

# asymptotic Kolmogorov quantiles c(alpha): threshold = c / sqrt(N)
KS_QUANTILES = {0.01: 1.63, 0.05: 1.36}


@dataclass(frozen=True, slots=True)
class KsReport:
    statistic: float
    n: int
    alpha: float
    threshold: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "n": self.n,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass(frozen=True, slots=True)
class Histogram:
    """Equal-width density histogram; total mass is 1."""

    edges: np.ndarray
    densities: np.ndarray
    count: int


def _apply_cdf(cdf, xs: np.ndarray) -> np.ndarray:
    """Evaluate cdf on all points, preferring one vectorized call."""
    if xs.size > 1:
        try:
            fs = np.asarray(cdf(xs), dtype=float)
            if fs.shape == xs.shape:
                return fs
        except (TypeError, ValueError):
            pass
    return np.array([float(cdf(float(x))) for x in xs])


def ks_statistic(sorted_samples, cdf, alpha: float = 0.01, threshold=None) -> KsReport:
    """One-sample Kolmogorov-Smirnov statistic against a reference CDF.

    D is the sup distance between the empirical step function and F over
    the sample points.  The pass threshold is c(alpha)/sqrt(N) with the
    asymptotic quantiles c(0.01) = 1.63 and c(0.05) = 1.36; an explicit
    ``threshold`` overrides it (used when comparing against a limiting law
    that carries a known finite-size bias).
    """
    xs = np.asarray(sorted_samples, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("need a non-empty 1-d sample array")
    if np.any(np.diff(xs) < 0):
        raise ValueError("samples must be sorted ascending")
    if threshold is None:
        if alpha not in KS_QUANTILES:
            raise ValueError(f"alpha must be one of {sorted(KS_QUANTILES)}, got {alpha}")
        threshold = KS_QUANTILES[alpha] / math.sqrt(xs.size)
    fs = _apply_cdf(cdf, xs)
    if np.any(fs < -1e-12) or np.any(fs > 1 + 1e-12):
        raise ValueError("cdf values must lie in [0, 1]")
    n = xs.size
    i = np.arange(1, n + 1)
    d = max(np.max(np.abs(i / n - fs)), np.max(np.abs((i - 1) / n - fs)))
    d = float(d)
    return KsReport(
        statistic=d, n=n, alpha=alpha, threshold=float(threshold), passed=d < threshold
    )


def build_histogram(samples, bin_count: int) -> Histogram:
    """Equal-width bins spanning [min, max], normalized to unit mass."""
    xs = np.asarray(samples, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least 2 samples to build a histogram")
    if bin_count < 1:
        raise ValueError(f"bin_count must be at least 1, got {bin_count}")
    lo, hi = float(xs.min()), float(xs.max())
    if lo == hi:
        raise ValueError("all samples are equal; histogram range is degenerate")
    edges = np.linspace(lo, hi, bin_count + 1)
    counts, edges = np.histogram(xs, bins=edges)
    widths = np.diff(edges)
    densities = counts / (xs.size * widths)
    return Histogram(edges=edges, densities=densities, count=int(xs.size))


def derivative_check(f, g, grid, rel_step: float, t_scale=None) -> float:
    """Max relative mismatch between g and -df/dt over the grid.

    Central differences with step h = rel_step * max(t, t_scale); t_scale
    defaults to the largest grid point, which keeps h sensible near the
    left end of grids that start close to zero.
    """
    pts = [float(t) for t in grid]
    if not pts:
        raise ValueError("empty grid")
    if not rel_step > 0:
        raise ValueError(f"rel_step must be positive, got {rel_step}")
    if t_scale is None:
        t_scale = max(abs(t) for t in pts)
    gvals = [float(g(t)) for t in pts]
    eps = 1e-12 * max(1.0, max(abs(v) for v in gvals))
    worst = 0.0
    for t, gv in zip(pts, gvals):
        h = rel_step * max(abs(t), t_scale)
        slope = (f(t + h) - f(t - h)) / (2.0 * h)
        err = abs(gv + slope) / max(abs(gv), eps)
        worst = max(worst, err)
    return worst
