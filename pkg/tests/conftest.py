"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np

from blockdiff import PmfGrid, normalize


def random_pmf(rng: np.random.Generator, shape) -> PmfGrid:
    """Strictly positive random grid (uniform pixels, normalized)."""
    return normalize(rng.random(shape) + 1e-6)


def random_masses(rng: np.random.Generator, m: int, floor: float = 0.2) -> np.ndarray:
    """Random mass vector summing to 1 with entries bounded away from 0."""
    u = rng.random(m) + floor
    return u / u.sum()


def random_feasible_triple(rng: np.random.Generator, m: int, delta_range=(0.02, 0.15)):
    """(w, w_ref, delta) with w_ref on the simplex, hence a feasible band."""
    w = random_masses(rng, m)
    w_ref = random_masses(rng, m)
    delta = float(rng.uniform(*delta_range))
    return w, w_ref, delta


def grid_with_masses(masses, block_px=(2, 2)) -> tuple[PmfGrid, int]:
    """Grid of uniform blocks (stacked along axis 0) with the given block masses."""
    masses = np.asarray(masses, dtype=float)
    hx, hy = block_px
    values = np.zeros((hx * masses.size, hy))
    for j, w in enumerate(masses):
        values[j * hx : (j + 1) * hx, :] = w / (hx * hy)
    return PmfGrid(values), masses.size
