"""KL projection of a grid onto the leak-tolerant set.

The projection rescales each block to its optimal clipped mass while leaving
the within-block conditional untouched, then renormalizes to absorb
floating-point drift.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .grid import BlockPartition, PmfGrid, block_masses, normalize
from .potentials import ToleranceBand, solve_w_star


def project(p: PmfGrid, part: BlockPartition, band: ToleranceBand) -> PmfGrid:
    """Closest (in KL from p) distribution whose block masses fit the band.

    Each block j with positive mass is scaled by w_star_j / w_j; blocks with
    no mass are left at zero (scaling cannot create mass there) and the final
    normalization absorbs any resulting deficit.
    """
    w = block_masses(p, part)
    sol = solve_w_star(w, band)
    out = np.array(p.values)
    for j, (xs, ys) in enumerate(part.blocks):
        if w[j] <= 0.0:
            continue
        out[xs, ys] *= sol.w_star[j] / w[j]
    return normalize(out)


def is_in_band(p: PmfGrid, part: BlockPartition, band: ToleranceBand) -> bool:
    """True iff every block mass lies in [a_j, b_j] (inclusive, 1e-12 slack)."""
    w = block_masses(p, part)
    if w.size != band.m:
        raise DimensionError(f"partition has {w.size} blocks, band has {band.m}")
    return band.contains(w)
