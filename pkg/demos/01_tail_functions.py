"""Normal-tail machinery behind every selection threshold.

The procedures compare standardized statistics against quantiles of the
two-sided standard normal tail.  This script shows the tail function,
its inverse, and the cap of the threshold search range.
"""

import numpy as np

from dirfdr import gaussian_tail, gaussian_tail_inverse, scan_cap

print("two-sided tail probabilities")
for t in (0.0, 1.0, 1.959964, 2.5758, 5.0, 10.0):
    print(f"  gaussian_tail({t:8.6f}) = {gaussian_tail(t):.6e}")

print("\nquantiles (inverse tail)")
for q in (1.0, 0.5, 0.05, 0.01, 1e-6):
    t = gaussian_tail_inverse(q)
    print(f"  gaussian_tail_inverse({q:7.0e}) = {t:.6f}   "
          f"roundtrip error {abs(gaussian_tail(t) - q):.2e}")

print("\nthreshold search caps: sqrt(2 log p - 2 log log p)")
for p in (10, 100, 600, 10_000):
    print(f"  p = {p:6d}: search in [0, {scan_cap(p):.4f}], "
          f"fallback sqrt(2 log p) = {np.sqrt(2 * np.log(p)):.4f}")
