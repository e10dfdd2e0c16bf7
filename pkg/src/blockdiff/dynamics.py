"""Forward block-preserving blur and the toy reverse kernel.

Gaussian filtering is a separable pair of 1-D convolutions with sampled,
normalized taps truncated at radius ceil(4 * sigma) and reflecting
boundaries. The forward dynamics blurs each block independently (reflecting
at block edges, so no mass crosses a boundary); the reverse step smooths the
whole grid, which is exactly what leaks mass across blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionError
from .grid import BlockPartition, PmfGrid, normalize
from .potentials import ToleranceBand
from .projection import project


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps truncated at radius ceil(4 * sigma)."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    radius = math.ceil(4.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def _blur2d_reflect(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflecting boundaries on both axes."""
    taps = gaussian_kernel(sigma)
    out = correlate1d(arr, taps, axis=0, mode="reflect")
    return correlate1d(out, taps, axis=1, mode="reflect")


@dataclass(frozen=True)
class ForwardParams:
    """Blockwise-blur schedule: per-step std-dev (pixels) and step count."""

    sigma_fwd: float
    steps: int

    def __post_init__(self):
        if self.sigma_fwd <= 0.0:
            raise ValueError(f"sigma_fwd must be positive, got {self.sigma_fwd!r}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps!r}")


@dataclass(frozen=True)
class ReverseParams:
    """Geometric-mean pull toward the data plus whole-grid smoothing."""

    beta: float
    sigma_smooth: float
    steps: int

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta!r}")
        if self.sigma_smooth < 0.0:
            raise ValueError(f"sigma_smooth must be >= 0, got {self.sigma_smooth!r}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps!r}")


def forward_block_blur(p: PmfGrid, part: BlockPartition, sigma_fwd: float) -> PmfGrid:
    """Blur every block independently; block masses are preserved exactly.

    Each block is rescaled back to its input mass afterwards, which turns
    the (already tiny) truncation error of the kernel into an exact
    per-block conservation law.
    """
    if p.shape != (part.L_x, part.L_y):
        raise DimensionError(
            f"grid shape {p.shape} does not match partition {(part.L_x, part.L_y)}"
        )
    v = p.values
    out = np.empty_like(v)
    for xs, ys in part.blocks:
        block = v[xs, ys]
        w_b = block.sum()
        blurred = _blur2d_reflect(block, sigma_fwd)
        s = blurred.sum()
        if w_b > 0.0 and s > 0.0:
            blurred *= w_b / s
        out[xs, ys] = blurred
    return PmfGrid(out)


def reverse_step(p: PmfGrid, q_data: PmfGrid, params: ReverseParams) -> PmfGrid:
    """One toy reverse update: geometric-mean pull toward q_data, then smoothing.

    Computes exp((1-beta) log p + beta log q_data), normalizes, then (when
    sigma_smooth > 0) applies a whole-grid reflecting Gaussian blur and
    normalizes again. The smoothing stage crosses block boundaries.
    """
    if p.shape != q_data.shape:
        raise DimensionError(f"grid shapes differ: {p.shape} vs {q_data.shape}")
    beta = params.beta
    mix_log = (1.0 - beta) * np.log(p.values) + beta * np.log(q_data.values)
    mixed = normalize(np.exp(mix_log))
    if params.sigma_smooth > 0.0:
        return normalize(_blur2d_reflect(mixed.values, params.sigma_smooth))
    return mixed


def run_forward(p0: PmfGrid, part: BlockPartition, params: ForwardParams) -> list[PmfGrid]:
    """Trajectory [p_0, ..., p_steps] under repeated blockwise blur."""
    traj = [p0]
    for _ in range(params.steps):
        traj.append(forward_block_blur(traj[-1], part, params.sigma_fwd))
    return traj


def run_reverse_pair(
    pT: PmfGrid,
    q_data: PmfGrid,
    part: BlockPartition,
    band: ToleranceBand,
    params: ReverseParams,
) -> tuple[list[PmfGrid], list[PmfGrid]]:
    """Baseline and projected reverse trajectories from the same start.

    Both lists have length params.steps + 1 and are stored in execution
    order: index 0 is the noisy start, index n the state after n updates.
    The baseline applies only reverse_step; the projected run applies
    reverse_step followed by the band projection.
    """
    base = [pT]
    proj = [pT]
    for _ in range(params.steps):
        base.append(reverse_step(base[-1], q_data, params))
        proj.append(project(reverse_step(proj[-1], q_data, params), part, band))
    return base, proj
