"""Grid, partition, and block-mass primitives."""
import math

import numpy as np
import pytest

from blockdiff import (
    PmfGrid,
    block_conditional,
    block_masses,
    make_partition,
    normalize,
)
from blockdiff.errors import (
    DimensionError,
    InvalidDistribution,
    InvalidPartition,
    ZeroMassBlock,
)
from conftest import random_pmf


class TestNormalize:
    def test_uniform_input_gives_uniform_pmf(self):
        p = normalize(np.ones((2, 2)))
        assert np.array_equal(p.values, np.full((2, 2), 0.25))

    def test_clamps_zeros_then_rescales(self):
        p = normalize(np.array([[2.0, 0.0], [0.0, 0.0]]))
        assert p.values[0, 0] == pytest.approx(1.0, abs=1e-11)
        rest = np.array([p.values[0, 1], p.values[1, 0], p.values[1, 1]])
        assert np.allclose(rest, 5e-13, rtol=1e-3)
        assert abs(p.values.sum() - 1.0) <= 1e-12

    def test_idempotent_within_1e15_per_entry(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            p = random_pmf(rng, (6, 6))
            again = normalize(p.values)
            assert np.abs(again.values - p.values).max() <= 1e-15

    def test_sum_is_one_within_1e12(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = normalize(rng.random((7, 5)))
            assert abs(p.values.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize(
        "bad",
        [np.zeros((3, 3)), np.array([[1.0, -2.0], [0.5, -1.0]]), np.ones(4)],
    )
    def test_rejects_unnormalizable_input(self, bad):
        with pytest.raises(InvalidDistribution):
            normalize(bad)

    def test_grid_is_read_only(self):
        p = normalize(np.ones((2, 2)))
        with pytest.raises(ValueError):
            p.values[0, 0] = 1.0


class TestPmfGrid:
    def test_rejects_unnormalized_values(self):
        with pytest.raises(InvalidDistribution):
            PmfGrid(np.ones((2, 2)))

    def test_rejects_negative_values(self):
        with pytest.raises(InvalidDistribution):
            PmfGrid(np.array([[1.5, -0.5], [0.0, 0.0]]))

    def test_accepts_exact_point_mass(self):
        v = np.zeros((4, 4))
        v[1, 2] = 1.0
        p = PmfGrid(v)
        assert p.L_x == 4 and p.L_y == 4

    def test_does_not_alias_caller_array(self):
        v = np.full((2, 2), 0.25)
        p = PmfGrid(v)
        v[0, 0] = 99.0
        assert p.values[0, 0] == 0.25


class TestMakePartition:
    def test_paper_scale_partition(self):
        part = make_partition(128, 128, 4, 4)
        assert part.m == 16
        assert part.block_shape == (32, 32)
        assert len(part.blocks) == 16

    def test_degenerate_single_block(self):
        part = make_partition(4, 4, 1, 1)
        assert part.m == 1
        assert part.blocks[0] == (slice(0, 4), slice(0, 4))

    def test_rectangular_blocks_enumerated_by_hand(self):
        part = make_partition(6, 4, 3, 2)
        assert part.m == 6
        assert part.block_shape == (2, 2)
        expected = (
            (slice(0, 2), slice(0, 2)),
            (slice(0, 2), slice(2, 4)),
            (slice(2, 4), slice(0, 2)),
            (slice(2, 4), slice(2, 4)),
            (slice(4, 6), slice(0, 2)),
            (slice(4, 6), slice(2, 4)),
        )
        assert part.blocks == expected

    def test_block_coords_row_major(self):
        part = make_partition(6, 4, 3, 2)
        assert [part.block_coords(j) for j in range(6)] == [
            (0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1),
        ]

    @pytest.mark.parametrize("dims", [(5, 4, 2, 2), (4, 5, 2, 2), (4, 4, 0, 2), (4, 4, 2, 8)])
    def test_rejects_bad_dimensions(self, dims):
        with pytest.raises(InvalidPartition):
            make_partition(*dims)

    @pytest.mark.parametrize("dims", [(6, 4, 3, 2), (8, 8, 2, 4), (12, 9, 4, 3), (4, 4, 4, 4)])
    def test_every_pixel_covered_exactly_once(self, dims):
        part = make_partition(*dims)
        counter = np.zeros((dims[0], dims[1]), dtype=int)
        for xs, ys in part.blocks:
            counter[xs, ys] += 1
        assert np.array_equal(counter, np.ones_like(counter))


class TestBlockMasses:
    def test_uniform_grid_equal_masses(self):
        p = normalize(np.ones((8, 8)))
        part = make_partition(8, 8, 4, 4)
        assert np.abs(block_masses(p, part) - 1.0 / 16).max() <= 1e-15

    def test_point_mass(self):
        v = np.zeros((8, 8))
        v[0, 0] = 1.0
        part = make_partition(8, 8, 2, 2)
        w = block_masses(PmfGrid(v), part)
        assert np.array_equal(w, np.array([1.0, 0.0, 0.0, 0.0]))

    def test_checkerboard_masses_against_direct_summation(self):
        # high/low intensities 0.9 / 0.1 on an 8x8 grid of 2x2 blocks
        part = make_partition(8, 8, 2, 2)
        img = np.zeros((8, 8))
        for j, (xs, ys) in enumerate(part.blocks):
            bx, by = part.block_coords(j)
            img[xs, ys] = 0.9 if (bx + by) % 2 == 0 else 0.1
        p = normalize(img)
        w = block_masses(p, part)
        # independent oracle: per-pixel fsum over each rectangle
        for j, (xs, ys) in enumerate(part.blocks):
            direct = math.fsum(p.values[xs, ys].ravel().tolist())
            assert w[j] == pytest.approx(direct, abs=1e-15)
        expected_high = 0.9 / (2 * 0.9 + 2 * 0.1)
        expected_low = 0.1 / (2 * 0.9 + 2 * 0.1)
        assert w[0] == pytest.approx(expected_high, abs=1e-12)
        assert w[1] == pytest.approx(expected_low, abs=1e-12)

    def test_mass_conservation_100_random_grids(self):
        rng = np.random.default_rng(2)
        part = make_partition(12, 8, 3, 2)
        for _ in range(100):
            p = random_pmf(rng, (12, 8))
            assert abs(block_masses(p, part).sum() - 1.0) <= 1e-12

    def test_dimension_mismatch(self):
        p = normalize(np.ones((8, 8)))
        with pytest.raises(DimensionError):
            block_masses(p, make_partition(4, 4, 2, 2))


class TestBlockConditional:
    def test_uniform_grid_uniform_conditional(self):
        p = normalize(np.ones((8, 8)))
        part = make_partition(8, 8, 2, 2)
        cond = block_conditional(p, part, 0)
        assert cond.shape == (4, 4)
        assert np.abs(cond - 1.0 / 16).max() <= 1e-15

    def test_scale_invariance_within_block(self):
        rng = np.random.default_rng(3)
        part = make_partition(6, 6, 3, 3)
        v = rng.random((6, 6)) + 0.1
        v2 = v.copy()
        v2[part.blocks[4]] *= 3.0
        c1 = block_conditional(normalize(v), part, 4)
        c2 = block_conditional(normalize(v2), part, 4)
        assert np.abs(c1 - c2).max() <= 1e-14

    def test_matches_elementwise_division_oracle(self):
        rng = np.random.default_rng(4)
        p = random_pmf(rng, (4, 6))
        part = make_partition(4, 6, 2, 3)
        for j, (xs, ys) in enumerate(part.blocks):
            block = p.values[xs, ys]
            oracle = np.array(
                [[cell / block.sum() for cell in row] for row in block]
            )
            assert np.abs(block_conditional(p, part, j) - oracle).max() <= 1e-14

    def test_reconstructs_block_when_remultiplied(self):
        rng = np.random.default_rng(5)
        p = random_pmf(rng, (6, 6))
        part = make_partition(6, 6, 2, 2)
        w = block_masses(p, part)
        for j, (xs, ys) in enumerate(part.blocks):
            rebuilt = block_conditional(p, part, j) * w[j]
            assert np.abs(rebuilt - p.values[xs, ys]).max() <= 1e-14

    def test_zero_mass_block_raises(self):
        v = np.zeros((4, 4))
        v[0, 0] = 1.0
        part = make_partition(4, 4, 2, 2)
        with pytest.raises(ZeroMassBlock):
            block_conditional(PmfGrid(v), part, 3)
