"""Deterministic random streams built on the Philox counter-based generator.

Every source of randomness in the package draws from a stream keyed by
``(master_seed, trial_index, role)``.  Philox is counter-based, so the
stream a key produces is independent of scheduling and of any other
stream, which is what makes Monte-Carlo runs bit-reproducible under
concurrency.

Roles (the draw order within a trial is: design row-major, then
responses in index order, then derived sub-seeds):
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "derive_seed"]

ROLE_DESIGN = 0
ROLE_RESPONSE = 1
ROLE_LASSO_CV = 2
ROLE_CLIME_CV = 3
ROLE_FOLDS = 4

_ROLE_BITS = 8


def stream(master_seed: int, trial_index: int = 0, role: int = 0) -> np.random.Generator:
    """The generator for one (master_seed, trial_index, role) key."""
    if trial_index < 0 or role < 0 or role >= (1 << _ROLE_BITS):
        raise ValueError(f"bad stream key: trial={trial_index}, role={role}")
    key = np.array(
        [
            np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF),
            np.uint64(((int(trial_index) << _ROLE_BITS) | int(role)) & 0xFFFFFFFFFFFFFFFF),
        ],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(master_seed: int, trial_index: int, role: int) -> int:
    """A 63-bit integer sub-seed drawn from the keyed stream."""
    return int(stream(master_seed, trial_index, role).integers(0, 2**63))
