"""Sign-aware error and power functionals against known ground truth.

A selection makes a sign error at j when it declares a sign different
from sign(beta_true[j]); rejecting a true zero always counts, since the
declared sign is never 0.  Two-sample runs reuse these functionals with
``beta_true`` set to the coefficient difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError
from .inference import SelectionResult

__all__ = [
    "GroundTruth",
    "directional_fdp",
    "directional_fdv_count",
    "directional_power",
]


@dataclass(frozen=True)
class GroundTruth:
    """True coefficients with their support and signs."""

    beta_true: np.ndarray
    support: np.ndarray = field(init=False)
    signs_true: np.ndarray = field(init=False)

    def __post_init__(self):
        beta = np.asarray(self.beta_true, dtype=np.float64)
        if beta.ndim != 1:
            raise DataError("beta_true must be a vector")
        beta.setflags(write=False)
        object.__setattr__(self, "beta_true", beta)
        object.__setattr__(self, "support", np.flatnonzero(beta))
        signs = np.sign(beta).astype(np.int64)
        signs.setflags(write=False)
        object.__setattr__(self, "signs_true", signs)


def _check(sel: SelectionResult, truth: GroundTruth) -> None:
    if sel.selected.size and sel.selected.max() >= truth.beta_true.size:
        raise DataError("selection indexes past the truth vector")


def directional_fdv_count(sel: SelectionResult, truth: GroundTruth) -> int:
    """Number of selected coordinates whose declared sign is wrong."""
    _check(sel, truth)
    return sum(
        1 for j in sel.selected if sel.signs[int(j)] != truth.signs_true[j]
    )


def directional_fdp(sel: SelectionResult, truth: GroundTruth) -> float:
    """Wrong-sign fraction of the selection (0 when nothing is selected)."""
    wrong = directional_fdv_count(sel, truth)
    return wrong / max(sel.selected.size, 1)


def directional_power(sel: SelectionResult, truth: GroundTruth) -> float:
    """Fraction of the true support recovered with the correct sign."""
    _check(sel, truth)
    hits = sum(
        1 for j in sel.selected if sel.signs[int(j)] == truth.signs_true[j] != 0
    )
    return hits / max(truth.support.size, 1)
