"""Canonical GLM families and the likelihood functionals built on them.

A family is identified by its log-partition function ``b``; the mean
and variance of the response given the linear predictor ``t = x @ beta``
are ``b_dot(t)`` and ``b_ddot(t)``.  The average log-likelihood, its
gradient (score), and the negative Hessian are the only functionals the
estimation and inference code needs.

The model carries no intercept.  Users who want one must append an
all-ones column to the design, where it is penalized like any other
coordinate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .exceptions import DataError, DomainError

__all__ = [
    "GlmFamily",
    "Dataset",
    "family_eval",
    "log_likelihood",
    "score",
    "neg_hessian",
    "validate_family_response",
]


class GlmFamily(enum.Enum):
    """The four canonical families, keyed by log-partition function."""

    LINEAR = "linear"        # b(t) = t^2 / 2
    LOGISTIC = "logistic"    # b(t) = log(1 + e^t)
    POISSON = "poisson"      # b(t) = e^t
    EXPONENTIAL = "exponential"  # b(t) = -log(-t), domain t < 0

    @classmethod
    def from_name(cls, name: str) -> "GlmFamily":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise DomainError(f"unknown family {name!r}; expected one of: {valid}")

    # -- domain -------------------------------------------------------------

    def in_domain(self, t: np.ndarray) -> bool:
        t = np.asarray(t)
        if not np.all(np.isfinite(t)):
            return False
        if self is GlmFamily.EXPONENTIAL:
            return bool(np.all(t < 0.0))
        return True

    def check_domain(self, t: np.ndarray) -> None:
        t = np.asarray(t)
        if not np.all(np.isfinite(t)):
            raise DomainError(f"{self.value}: non-finite linear predictor")
        if self is GlmFamily.EXPONENTIAL and not np.all(t < 0.0):
            raise DomainError("exponential family requires all linear predictors < 0")

    # -- log-partition and derivatives ---------------------------------------
    #
    # All three evaluators are vectorized over ndarray input.  Logistic uses
    # logaddexp / expit so that large |t| neither overflows nor destroys the
    # accuracy of b_ddot; Poisson is allowed to overflow to inf, which the
    # solvers treat as an objective of -inf and reject via step halving.

    def b(self, t):
        t = np.asarray(t, dtype=float)
        self.check_domain(t)
        if self is GlmFamily.LINEAR:
            return 0.5 * t * t
        if self is GlmFamily.LOGISTIC:
            return np.logaddexp(0.0, t)
        if self is GlmFamily.POISSON:
            with np.errstate(over="ignore"):
                return np.exp(t)
        return -np.log(-t)

    def b_dot(self, t):
        t = np.asarray(t, dtype=float)
        self.check_domain(t)
        if self is GlmFamily.LINEAR:
            return t.copy()
        if self is GlmFamily.LOGISTIC:
            return expit(t)
        if self is GlmFamily.POISSON:
            with np.errstate(over="ignore"):
                return np.exp(t)
        return -1.0 / t

    def b_ddot(self, t):
        t = np.asarray(t, dtype=float)
        self.check_domain(t)
        if self is GlmFamily.LINEAR:
            return np.ones_like(t)
        if self is GlmFamily.LOGISTIC:
            # expit(t) * expit(-t) keeps full relative accuracy at large |t|.
            return expit(t) * expit(-t)
        if self is GlmFamily.POISSON:
            with np.errstate(over="ignore"):
                return np.exp(t)
        return 1.0 / (t * t)


def family_eval(family: GlmFamily, t: float) -> tuple[float, float, float]:
    """Evaluate (b(t), b_dot(t), b_ddot(t)) at a scalar point."""
    ts = np.asarray(float(t))
    family.check_domain(ts)
    return float(family.b(ts)), float(family.b_dot(ts)), float(family.b_ddot(ts))


@dataclass(frozen=True)
class Dataset:
    """An immutable (design, response) pair.

    The design is an n-by-p float matrix and the response a length-n
    vector; both are validated to be finite at construction and then
    write-protected so the instance can be shared freely.
    """

    design: np.ndarray
    response: np.ndarray
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        design = np.ascontiguousarray(self.design, dtype=np.float64)
        response = np.ascontiguousarray(self.response, dtype=np.float64)
        if design.ndim != 2:
            raise DataError(f"design must be a 2-d matrix, got ndim={design.ndim}")
        if response.ndim != 1:
            raise DataError(f"response must be a 1-d vector, got ndim={response.ndim}")
        if response.shape[0] != design.shape[0]:
            raise DataError(
                f"response length {response.shape[0]} does not match "
                f"design row count {design.shape[0]}"
            )
        if not np.all(np.isfinite(design)):
            raise DataError("design contains non-finite entries")
        if not np.all(np.isfinite(response)):
            raise DataError("response contains non-finite entries")
        design.setflags(write=False)
        response.setflags(write=False)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)
        object.__setattr__(self, "n", design.shape[0])
        object.__setattr__(self, "p", design.shape[1])


def validate_family_response(data: Dataset, family: GlmFamily) -> None:
    """Reject responses outside the family's support."""
    y = data.response
    if family is GlmFamily.LOGISTIC:
        if not np.all((y == 0.0) | (y == 1.0)):
            raise DataError("logistic family requires responses in {0, 1}")
    elif family is GlmFamily.POISSON:
        if not (np.all(y >= 0.0) and np.all(y == np.floor(y))):
            raise DataError("poisson family requires nonnegative integer responses")
    elif family is GlmFamily.EXPONENTIAL:
        if not np.all(y > 0.0):
            raise DataError("exponential family requires strictly positive responses")


def _check_beta(data: Dataset, beta: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (data.p,):
        raise DataError(f"beta has shape {beta.shape}, expected ({data.p},)")
    return beta


def log_likelihood(data: Dataset, beta: np.ndarray, family: GlmFamily) -> float:
    """Average log-likelihood (1/n) * sum_i [y_i * eta_i - b(eta_i)]."""
    beta = _check_beta(data, beta)
    eta = data.design @ beta
    family.check_domain(eta)
    vals = data.response * eta - family.b(eta)
    return float(np.mean(vals))


def score(data: Dataset, beta: np.ndarray, family: GlmFamily) -> np.ndarray:
    """Gradient of the average log-likelihood: (1/n) * X.T @ (y - b_dot(X @ beta))."""
    beta = _check_beta(data, beta)
    eta = data.design @ beta
    family.check_domain(eta)
    resid = data.response - family.b_dot(eta)
    return data.design.T @ resid / data.n


def neg_hessian(data: Dataset, beta: np.ndarray, family: GlmFamily) -> np.ndarray:
    """Sample curvature matrix (1/n) * sum_i x_i x_i^T b_ddot(x_i @ beta).

    Symmetric positive semidefinite by construction; the explicit
    symmetrization removes the last-bit asymmetry of the BLAS product.
    """
    beta = _check_beta(data, beta)
    eta = data.design @ beta
    family.check_domain(eta)
    w = family.b_ddot(eta)
    if not np.all(np.isfinite(w)):
        raise DomainError(f"{family.value}: curvature overflowed at this beta")
    m = (data.design * w[:, None]).T @ data.design / data.n
    return 0.5 * (m + m.T)


def b_dot_at_zero(family: GlmFamily) -> float:
    """Mean response at a zero linear predictor; undefined for exponential."""
    if family is GlmFamily.EXPONENTIAL:
        raise DomainError("exponential family: 0 is outside the domain of b_dot")
    return float(family.b_dot(np.asarray(0.0)))
