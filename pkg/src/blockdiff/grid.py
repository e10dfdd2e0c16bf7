"""Probability-grid and block-partition primitives.

A grid is a dense (L_x, L_y) float64 array treated as a probability vector
over pixels (axis 0 is x). A partition tiles it into B_x * B_y equal
rectangles; block order is row-major over (b_x, b_y) and fixed for the
lifetime of the partition, so mass-vector indices stay stable everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidDistribution, InvalidPartition, ZeroMassBlock

# Positivity floor applied before normalization; keeps every later logarithm
# finite without visibly perturbing mass.
EPS_PMF = 1e-12

# Length-m vector of per-block probability masses, in partition block order.
MassVector = np.ndarray


def _frozen_array(values: np.ndarray) -> np.ndarray:
    # Fresh copy so no caller can mutate the stored grid afterwards.
    out = np.array(values, dtype=np.float64, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class PmfGrid:
    """Nonnegative (L_x, L_y) array summing to 1 within 1e-12."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen_array(self.values)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise InvalidDistribution(f"grid must be 2-D, got ndim={v.ndim}")
        if v.size == 0:
            raise InvalidDistribution("grid must be non-empty")
        if np.any(v < 0.0):
            raise InvalidDistribution("grid entries must be nonnegative")
        total = float(v.sum())
        if abs(total - 1.0) > 1e-12:
            raise InvalidDistribution(
                f"grid mass is {total!r}, expected 1 within 1e-12 (use normalize())"
            )

    @property
    def L_x(self) -> int:
        return self.values.shape[0]

    @property
    def L_y(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """Disjoint tiling of an (L_x, L_y) grid into B_x * B_y equal rectangles.

    ``blocks[j]`` is an (x-slice, y-slice) pair; j runs row-major over
    (b_x, b_y), i.e. j = b_x * B_y + b_y.
    """

    L_x: int
    L_y: int
    B_x: int
    B_y: int
    blocks: tuple[tuple[slice, slice], ...]

    @property
    def m(self) -> int:
        return self.B_x * self.B_y

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.L_x // self.B_x, self.L_y // self.B_y

    def block_coords(self, j: int) -> tuple[int, int]:
        """(b_x, b_y) coordinates of flat block index j."""
        return j // self.B_y, j % self.B_y


def normalize(values) -> PmfGrid:
    """Clamp entries below at EPS_PMF, then rescale to total mass 1.

    Raises InvalidDistribution when the input carries no positive mass.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidDistribution(f"expected a 2-D array, got ndim={arr.ndim}")
    if arr.size == 0 or not np.any(arr > 0.0) or float(arr.sum()) <= 0.0:
        raise InvalidDistribution("cannot normalize: input has no positive mass")
    clipped = np.clip(arr, EPS_PMF, None)
    return PmfGrid(clipped / clipped.sum())


def make_partition(L_x: int, L_y: int, B_x: int, B_y: int) -> BlockPartition:
    """Tile an L_x x L_y grid into B_x x B_y rectangles, row-major in (b_x, b_y)."""
    if min(L_x, L_y, B_x, B_y) <= 0:
        raise InvalidPartition("grid and block counts must be positive")
    if L_x % B_x != 0 or L_y % B_y != 0:
        raise InvalidPartition(
            f"{L_x}x{L_y} grid does not divide into {B_x}x{B_y} blocks"
        )
    hx, hy = L_x // B_x, L_y // B_y
    blocks = tuple(
        (slice(bx * hx, (bx + 1) * hx), slice(by * hy, (by + 1) * hy))
        for bx in range(B_x)
        for by in range(B_y)
    )
    return BlockPartition(L_x, L_y, B_x, B_y, blocks)


def _check_shape(p: PmfGrid, part: BlockPartition) -> None:
    if p.shape != (part.L_x, part.L_y):
        raise DimensionError(
            f"grid shape {p.shape} does not match partition {(part.L_x, part.L_y)}"
        )


def block_masses(p: PmfGrid, part: BlockPartition) -> MassVector:
    """w_j = total mass of p inside rectangle j."""
    _check_shape(p, part)
    v = p.values
    return np.array([v[xs, ys].sum() for xs, ys in part.blocks])


def block_conditional(p: PmfGrid, part: BlockPartition, j: int) -> np.ndarray:
    """Distribution of p restricted to block j, as a block-shaped array summing to 1."""
    _check_shape(p, part)
    xs, ys = part.blocks[j]
    block = p.values[xs, ys]
    w_j = block.sum()
    if w_j <= 0.0:
        raise ZeroMassBlock(f"block {j} carries no mass")
    return block / w_j
