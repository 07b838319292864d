"""Seeded random streams shared by the instance generator and solvers.

The stream algorithm is pinned to PCG64 so that a given seed reproduces the
same bytes on every platform; regenerating a dataset from its manifest must
yield identical files.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Return the PCG64 generator for ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))
