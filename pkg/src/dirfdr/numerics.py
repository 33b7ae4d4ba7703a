"""Scalar functions of the standard normal tail.

Every testing procedure in this package thresholds standardized
statistics against the two-sided normal tail

    gaussian_tail(t) = 2 * (1 - Phi(t)) = erfc(t / sqrt(2)),

so this module keeps the tail, its inverse, and the threshold search
cap in one place.  The erfc form stays accurate deep in the tail,
where quantiles like ``gaussian_tail_inverse(u / p)`` are evaluated
for small ``u / p``.
"""

from __future__ import annotations

import math

from .exceptions import DomainError

__all__ = ["gaussian_tail", "gaussian_tail_inverse", "scan_cap"]

_SQRT2 = math.sqrt(2.0)

# Upper end of the bisection bracket for the inverse; gaussian_tail(40)
# is below 1e-300, far past any quantile the procedures request.
_T_MAX = 40.0


def gaussian_tail(t: float) -> float:
    """Two-sided standard normal tail probability 2 * (1 - Phi(t)).

    Strictly decreasing on t >= 0, with gaussian_tail(0) == 1.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"gaussian_tail requires finite t >= 0, got {t!r}")
    return math.erfc(t / _SQRT2)


def gaussian_tail_inverse(q: float) -> float:
    """Solve gaussian_tail(t) == q for t >= 0 by bisection.

    Monotonicity of the tail makes bisection on [0, 40] unconditionally
    robust; the bracket covers q down to ~1e-300.  The returned t
    satisfies |gaussian_tail(t) - q| <= 1e-12.
    """
    q = float(q)
    if not math.isfinite(q) or q <= 0.0 or q > 1.0:
        raise DomainError(f"gaussian_tail_inverse requires 0 < q <= 1, got {q!r}")
    if q == 1.0:
        return 0.0
    lo, hi = 0.0, _T_MAX
    # 100 halvings shrink the bracket to ~3e-29, well past double spacing.
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g = math.erfc(mid / _SQRT2)
        if g > q:
            lo = mid
        elif g < q:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def scan_cap(p: int) -> float:
    """Upper end sqrt(2*log(p) - 2*log(log(p))) of the threshold search range.

    Needs p >= 3 so that log(log(p)) > 0 and the radicand stays positive.
    """
    p = int(p)
    if p < 3:
        raise DomainError(f"scan_cap requires p >= 3, got {p}")
    logp = math.log(p)
    return math.sqrt(2.0 * logp - 2.0 * math.log(logp))
