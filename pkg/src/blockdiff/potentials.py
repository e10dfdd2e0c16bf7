"""Information-theoretic diagnostics over block partitions.

All divergences and potentials are natural-log quantities (nats). Zero-mass
blocks follow the convention 0 * log 0 = 0 and never contribute.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InfeasibleBand, SolverFailure
from .grid import BlockPartition, MassVector, PmfGrid, block_masses

# Bisection controls for the scaling root tau; see solve_w_star.
TAU_BRACKET = (1e-6, 1e6)
TAU_MAX_ITER = 80
TAU_RESIDUAL_TOL = 1e-10

# Slack for inclusive band-membership comparisons.
BAND_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ToleranceBand:
    """Per-block intervals [a_j, b_j] = [w_ref_j - delta, w_ref_j + delta] ∩ [0, 1].

    Construction validates feasibility: a band that cannot contain any
    probability vector (sum(a) > 1 or sum(b) < 1, or delta < 0) raises
    InfeasibleBand. A reference mass vector summing to 1 always yields a
    feasible band for any delta >= 0.
    """

    w_ref: np.ndarray
    delta: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        w_ref = np.asarray(self.w_ref, dtype=np.float64).copy()
        a = np.asarray(self.a, dtype=np.float64).copy()
        b = np.asarray(self.b, dtype=np.float64).copy()
        for arr in (w_ref, a, b):
            arr.flags.writeable = False
        object.__setattr__(self, "w_ref", w_ref)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (w_ref.ndim == a.ndim == b.ndim == 1 and w_ref.size == a.size == b.size):
            raise DimensionError("w_ref, a, b must be 1-D vectors of equal length")
        if not np.isfinite(self.delta) or self.delta < 0.0:
            raise InfeasibleBand(f"delta={self.delta!r} yields an empty band")
        if np.any(w_ref < -BAND_SLACK) or np.any(w_ref > 1.0 + BAND_SLACK):
            raise InfeasibleBand("reference masses must lie in [0, 1]")
        if float(a.sum()) > 1.0 + BAND_SLACK or float(b.sum()) < 1.0 - BAND_SLACK:
            raise InfeasibleBand(
                f"band cannot hold a probability vector: sum(a)={a.sum()!r}, sum(b)={b.sum()!r}"
            )

    @classmethod
    def from_reference(cls, w_ref: MassVector, delta: float) -> "ToleranceBand":
        """Band of half-width delta around reference block masses, clamped to [0, 1]."""
        w_ref = np.asarray(w_ref, dtype=np.float64)
        a = np.clip(w_ref - delta, 0.0, 1.0)
        b = np.clip(w_ref + delta, 0.0, 1.0)
        return cls(w_ref=w_ref, delta=float(delta), a=a, b=b)

    @property
    def m(self) -> int:
        return self.w_ref.size

    def contains(self, w: MassVector) -> bool:
        """Inclusive membership, with BAND_SLACK slack on both edges."""
        w = np.asarray(w, dtype=np.float64)
        if w.size != self.m:
            raise DimensionError(f"mass vector has {w.size} entries, band has {self.m}")
        return bool(np.all(w >= self.a - BAND_SLACK) and np.all(w <= self.b + BAND_SLACK))


@dataclass(frozen=True, eq=False)
class WStarSolution:
    """Scaling root tau_star and the optimal clipped block masses w_star."""

    tau_star: float
    w_star: np.ndarray


def kl_divergence(p, q) -> float:
    """D_KL(p || q) in nats, summed over entries where both are positive."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.size != q.size:
        raise DimensionError(f"support sizes differ: {p.size} vs {q.size}")
    mask = (p > 0.0) & (q > 0.0)
    pm = p[mask]
    return float(np.sum(pm * (np.log(pm) - np.log(q[mask]))))


def potential_v(p: PmfGrid, part: BlockPartition) -> float:
    """Within-block non-uniformity: sum_b w_b * D_KL(p_b || uniform_b).

    Blocks with no mass contribute 0.
    """
    if p.shape != (part.L_x, part.L_y):
        raise DimensionError(
            f"grid shape {p.shape} does not match partition {(part.L_x, part.L_y)}"
        )
    v = p.values
    total = 0.0
    for xs, ys in part.blocks:
        block = v[xs, ys]
        w_b = block.sum()
        if w_b <= 0.0:
            continue
        p_b = block / w_b
        u_b = np.full(block.size, 1.0 / block.size)
        total += w_b * kl_divergence(p_b, u_b)
    return float(total)


def _band_residual(tau: float, w: np.ndarray, band: ToleranceBand) -> float:
    """sum_j clip(w_j / tau, a_j, b_j) - 1; nonincreasing in tau."""
    return float(np.minimum(np.maximum(w / tau, band.a), band.b).sum()) - 1.0


def solve_w_star(w: MassVector, band: ToleranceBand) -> WStarSolution:
    """Optimal block masses: clip(w_j / tau*, a_j, b_j) with sum_j = 1.

    The root of the nonincreasing residual tau -> sum_j clip(w_j/tau, a_j, b_j) - 1
    is found by bisection from TAU_BRACKET, expanding an endpoint decade-wise
    when its residual sign is wrong. If w already lies in the band it is its
    own projection and (tau*=1, w*=w) is returned exactly, skipping bisection.

    When every coordinate clips, a plateau of roots exists; the returned
    tau_star is whichever point the bisection lands on, but w_star is unique.

    Raises SolverFailure when no bracket with the right signs exists (then no
    scaling root exists, e.g. some w_j = 0 while the band demands positive
    mass elsewhere than w can supply) or the residual cannot be driven down.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.size != band.m:
        raise DimensionError(f"mass vector has {w.size} entries, band has {band.m}")
    if np.any(w < -BAND_SLACK):
        raise ValueError("block masses must be nonnegative")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError(f"block masses must sum to 1 within 1e-9, got {w.sum()!r}")

    if band.contains(w):
        return WStarSolution(tau_star=1.0, w_star=w.copy())

    tau_lo, tau_hi = TAU_BRACKET
    # Want residual(lo) >= 0 >= residual(hi); expand outward on a wrong sign.
    # A residual already inside tolerance counts as a root at the endpoint.
    for _ in range(60):
        if _band_residual(tau_lo, w, band) > -TAU_RESIDUAL_TOL:
            break
        tau_lo /= 10.0
    else:
        raise SolverFailure("no scaling root: residual negative for all tau")
    for _ in range(60):
        if _band_residual(tau_hi, w, band) < TAU_RESIDUAL_TOL:
            break
        tau_hi *= 10.0
    else:
        raise SolverFailure("no scaling root: residual positive for all tau")

    tau_mid = 0.5 * (tau_lo + tau_hi)
    for _ in range(TAU_MAX_ITER):
        tau_mid = 0.5 * (tau_lo + tau_hi)
        val = _band_residual(tau_mid, w, band)
        if abs(val) < TAU_RESIDUAL_TOL:
            break
        if val > 0.0:
            tau_lo = tau_mid
        else:
            tau_hi = tau_mid

    tau_star = _polish_root(tau_mid, w, band)
    w_star = np.minimum(np.maximum(w / tau_star, band.a), band.b)
    if abs(float(w_star.sum()) - 1.0) > 1e-8:
        raise SolverFailure(
            f"bisection did not reach a root: sum(w_star)={w_star.sum()!r}"
        )
    return WStarSolution(tau_star=float(tau_star), w_star=w_star)


def _polish_root(tau: float, w: np.ndarray, band: ToleranceBand) -> float:
    """Snap tau to the exact root for the clip pattern the bisection found.

    With the pattern fixed, the root equation is linear in 1/tau:
    sum_low a + sum_high b + (sum of interior w)/tau = 1, so the unclipped
    coordinates can be placed to make the masses sum to 1 at machine
    precision instead of the bisection's residual tolerance. Falls back to
    the unpolished tau when the pattern disagrees or is fully clipped.
    """
    scaled = w / tau
    low = scaled <= band.a
    high = scaled >= band.b
    interior = ~(low | high)
    s_int = float(w[interior].sum())
    if s_int <= 0.0:
        return tau  # pure plateau: the clipped sum is constant in tau
    target = 1.0 - float(band.a[low].sum()) - float(band.b[high].sum())
    if target <= 0.0:
        return tau
    tau_exact = s_int / target
    polished = w / tau_exact
    same_pattern = (
        np.array_equal(polished <= band.a, low)
        and np.array_equal(polished >= band.b, high)
    )
    if not same_pattern:
        return tau
    return tau_exact


def potential_v_delta(p: PmfGrid, part: BlockPartition, band: ToleranceBand) -> float:
    """Leak-tolerant coarse potential: sum_j w_j * log(w_j / w_star_j)."""
    w = block_masses(p, part)
    sol = solve_w_star(w, band)
    mask = (w > 0.0) & (sol.w_star > 0.0)
    wm = w[mask]
    return float(np.sum(wm * (np.log(wm) - np.log(sol.w_star[mask]))))


def e_block(p: PmfGrid, part: BlockPartition, w_ref: MassVector) -> float:
    """L1 distance between the block masses of p and the reference masses."""
    w = block_masses(p, part)
    w_ref = np.asarray(w_ref, dtype=np.float64)
    if w_ref.size != w.size:
        raise DimensionError(f"reference has {w_ref.size} entries, partition has {w.size}")
    return float(np.abs(w - w_ref).sum())


def e_pix(p: PmfGrid, x_data: PmfGrid) -> float:
    """Mean squared per-pixel difference between two grids."""
    if p.shape != x_data.shape:
        raise DimensionError(f"grid shapes differ: {p.shape} vs {x_data.shape}")
    d = p.values - x_data.values
    return float(np.mean(d * d))
