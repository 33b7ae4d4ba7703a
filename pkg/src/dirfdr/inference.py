"""Debiased estimator, standardized statistics, and the selection procedures.

The debiased coefficient vector is the penalized estimate plus the
inverse-curvature correction ``theta_hat @ score(beta_hat)``; its
coordinates are standardized to

    T_j = sqrt(n) * beta_debiased_j / sqrt(theta_jj).

Selection thresholds the |T_j| (or the two-sample analogue |M_j|)
either at the smallest t in [0, scan_cap(p)] for which

    p * gaussian_tail(t) / (#{|T_j| >= t} or 1) <= alpha

holds (FDR mode, with fallback sqrt(2 log p) when no such t exists), or
at the fixed quantile gaussian_tail_inverse(u / p) (FDV / FWER mode).

The FDR threshold is computed exactly: the rejection count is a step
function of t, constant between consecutive order statistics of |T|,
so on each such interval the condition reduces to a single quantile
evaluation.  The candidate set below also includes the order statistics
themselves, because the ratio can dip to feasibility exactly at a jump
of the count and nowhere nearby.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .exceptions import DataError, DomainError
from .families import Dataset, GlmFamily, score
from .lasso import LassoFit
from .numerics import gaussian_tail_inverse, scan_cap
from .precision import PrecisionEstimate

__all__ = [
    "DebiasedFit",
    "SelectionResult",
    "TwoSampleStatistics",
    "debias",
    "gmt_threshold",
    "gmt_select",
    "fdv_threshold",
    "fdv_select",
    "two_sample_statistics",
    "gmt2_select",
    "gmt2_fdv_select",
]


@dataclass(frozen=True)
class DebiasedFit:
    """Debiased coefficients with their standardized statistics."""

    beta_debiased: np.ndarray
    theta_diag: np.ndarray
    n: int
    statistics: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    """A threshold, the indices it selects, and their declared signs."""

    threshold: float
    selected: np.ndarray
    signs: dict[int, int]
    fallback_used: bool


@dataclass(frozen=True)
class TwoSampleStatistics:
    """Standardized coordinate-wise differences of two debiased fits."""

    m_statistics: np.ndarray
    n1: int
    n2: int


def debias(
    fit: LassoFit,
    theta: PrecisionEstimate | np.ndarray,
    data: Dataset,
    family: GlmFamily,
) -> DebiasedFit:
    """One-step correction removing the L1 shrinkage bias.

    ``theta`` may be a fitted PrecisionEstimate or a plain matrix (for
    instance the exact inverse curvature in diagnostics).
    """
    theta_mat = theta.theta_hat if isinstance(theta, PrecisionEstimate) else np.asarray(theta, dtype=float)
    p = data.p
    if theta_mat.shape != (p, p):
        raise DataError(f"theta has shape {theta_mat.shape}, expected ({p}, {p})")
    if fit.beta_hat.shape != (p,):
        raise DataError(f"fit has p={fit.beta_hat.shape[0]}, data has p={p}")
    theta_diag = np.diag(theta_mat).copy()
    if np.any(theta_diag <= 0.0):
        raise DataError("theta diagonal must be strictly positive")

    grad = score(data, fit.beta_hat, family)
    if not np.all(np.isfinite(grad)):
        raise DataError("score at beta_hat is non-finite")
    beta_d = fit.beta_hat + theta_mat @ grad
    stats = math.sqrt(data.n) * beta_d / np.sqrt(theta_diag)
    return DebiasedFit(
        beta_debiased=beta_d,
        theta_diag=theta_diag,
        n=data.n,
        statistics=stats,
    )


def _tail_vec(t: np.ndarray) -> np.ndarray:
    return erfc(np.asarray(t) / math.sqrt(2.0))


def gmt_threshold(statistics, alpha: float) -> tuple[float, bool]:
    """Exact FDR-mode threshold over the continuous search range.

    Sort |T| descending as a_1 >= ... >= a_p with a_{p+1} = 0.  On the
    interval (a_{m+1}, a_m] the rejection count is m, so the minimal
    feasible t there is the tail quantile of min(alpha * max(m,1) / p, 1),
    kept only when it lands inside the interval (clipped to the scan
    cap).  Order statistics are additionally tested directly.  The
    threshold is the smallest candidate; if none exists the fallback
    sqrt(2 log p) is returned with fallback_used = True.
    """
    stats = np.asarray(statistics, dtype=np.float64)
    if stats.ndim != 1 or stats.size == 0:
        raise DataError("statistics must be a nonempty vector")
    if not np.all(np.isfinite(stats)):
        raise DataError("statistics contain non-finite values")
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    p = stats.size
    tp = scan_cap(p)

    a = np.sort(np.abs(stats))[::-1]
    best = np.inf
    for m in range(p + 1):
        lower = a[m] if m < p else 0.0
        upper = tp if m == 0 else min(a[m - 1], tp)
        if lower >= upper:
            continue
        cand = gaussian_tail_inverse(min(alpha * max(m, 1) / p, 1.0))
        if lower < cand <= upper and cand < best:
            best = cand

    in_range = (a > 0.0) & (a <= tp)
    if np.any(in_range):
        vals = a[in_range]
        asc = a[::-1]
        counts = p - np.searchsorted(asc, vals, side="left")
        feasible = p * _tail_vec(vals) <= alpha * np.maximum(counts, 1)
        if np.any(feasible):
            best = min(best, float(np.min(vals[feasible])))

    if np.isinf(best):
        return math.sqrt(2.0 * math.log(p)), True
    return float(best), False


def _select(stats: np.ndarray, threshold: float, fallback: bool) -> SelectionResult:
    stats = np.asarray(stats, dtype=np.float64)
    selected = np.flatnonzero(np.abs(stats) >= threshold)
    signs = {}
    for j in selected:
        s = float(np.sign(stats[j]))
        if s == 0.0:
            warnings.warn(f"statistic {j} is exactly 0 at a zero threshold; "
                          "declaring sign +1", RuntimeWarning)
            s = 1.0
        signs[int(j)] = int(s)
    return SelectionResult(
        threshold=float(threshold),
        selected=selected,
        signs=signs,
        fallback_used=fallback,
    )


def gmt_select(debiased: DebiasedFit, alpha: float) -> SelectionResult:
    """FDR-mode selection: reject where |T_j| clears the exact threshold."""
    t0, fallback = gmt_threshold(debiased.statistics, alpha)
    return _select(debiased.statistics, t0, fallback)


def fdv_threshold(u: float, p: int) -> float:
    """Fixed threshold gaussian_tail_inverse(u / p).

    ``u`` is the tolerated count of wrong-sign selections (FDV mode) or
    a probability level in (0, 1) (FWER mode); either way 0 < u < p.
    """
    u = float(u)
    p = int(p)
    if not (0.0 < u < p):
        raise DomainError(f"need 0 < u < p, got u={u}, p={p}")
    return gaussian_tail_inverse(u / p)


def fdv_select(debiased: DebiasedFit, u: float) -> SelectionResult:
    """FDV / FWER-mode selection at the fixed quantile threshold."""
    t = fdv_threshold(u, debiased.statistics.size)
    return _select(debiased.statistics, t, False)


def two_sample_statistics(fit1: DebiasedFit, fit2: DebiasedFit) -> TwoSampleStatistics:
    """Standardized differences of two independently debiased models."""
    if fit1.beta_debiased.shape != fit2.beta_debiased.shape:
        raise DataError(
            f"dimension mismatch: {fit1.beta_debiased.shape} vs {fit2.beta_debiased.shape}"
        )
    if np.any(fit1.theta_diag <= 0.0) or np.any(fit2.theta_diag <= 0.0):
        raise DataError("theta diagonals must be strictly positive")
    denom = np.sqrt(fit1.theta_diag / fit1.n + fit2.theta_diag / fit2.n)
    m = (fit1.beta_debiased - fit2.beta_debiased) / denom
    return TwoSampleStatistics(m_statistics=m, n1=fit1.n, n2=fit2.n)


def gmt2_select(m: TwoSampleStatistics, alpha: float) -> SelectionResult:
    """Two-sample FDR-mode selection; the threshold formula is shared."""
    t0, fallback = gmt_threshold(m.m_statistics, alpha)
    return _select(m.m_statistics, t0, fallback)


def gmt2_fdv_select(m: TwoSampleStatistics, u: float) -> SelectionResult:
    """Two-sample FDV / FWER-mode selection."""
    t = fdv_threshold(u, m.m_statistics.size)
    return _select(m.m_statistics, t, False)
