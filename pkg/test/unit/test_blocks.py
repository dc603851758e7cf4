"""
Tests for DFT building blocks and the block size / correction factor lemmas.
"""

import logging

import numpy as np
import pytest

from spectral_tetris import (
    Entry,
    GeneralBlockSpec,
    TightBlockSpec,
    correction_range,
    dft_matrix,
    make_general_block,
    make_tight_block,
    optimal_block_sizes,
    step_size,
)
from spectral_tetris.blocks import terminal_block, tight_block_parameters, two_by_two_block
from spectral_tetris.errors import BlockError

from .conftest import F

logger = logging.getLogger(__name__)


def dense(rows) -> np.ndarray:
    return np.array([[entry.value for entry in row] for row in rows], dtype=complex)


def row_orthogonality_residual(rows) -> float:
    matrix = dense(rows)
    gram = matrix @ matrix.conj().T
    return float(np.max(np.abs(gram - np.diag(np.diag(gram)))))


def partitions_into(total: int, parts: int, largest: int = None):
    """Nonincreasing integer partitions of ``total`` into exactly ``parts`` positive parts."""
    largest = total if largest is None else largest
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(largest, total - parts + 1), 0, -1):
        for rest in partitions_into(total - first, parts - 1, first):
            yield (first,) + rest


class TestDftMatrix:
    """Unnormalized DFT matrices."""

    def test_size_one(self):
        assert dft_matrix(1) == ((Entry(1),),)

    def test_size_two(self):
        assert dense(dft_matrix(2)).tolist() == [[1, 1], [1, -1]]

    def test_size_three_rows_orthogonal(self):
        assert row_orthogonality_residual(dft_matrix(3)) <= 1e-15

    def test_rows_orthogonal_up_to_64(self):
        for size in range(1, 65):
            residual = row_orthogonality_residual(dft_matrix(size))
            assert residual <= 1e-12, f"F_{size} rows deviate by {residual}"

    def test_unit_modulus(self):
        assert all(entry.radicand == 1 for row in dft_matrix(5) for entry in row)

    def test_invalid_size(self):
        with pytest.raises(BlockError):
            dft_matrix(0)


class TestOptimalBlockSizes:
    """Composition of M into K parts with minimal sum of squares."""

    @pytest.mark.parametrize(
        "m, k, expected",
        [
            (10, 4, (2, 2, (2, 2, 3, 3))),
            (5, 5, (1, 5, (1, 1, 1, 1, 1))),
            (7, 3, (2, 2, (2, 2, 3))),
        ],
    )
    def test_examples(self, m, k, expected):
        assert optimal_block_sizes(m, k) == expected

    def test_more_blocks_than_columns(self):
        with pytest.raises(BlockError):
            optimal_block_sizes(3, 4)

    def test_matches_exhaustive_minimum(self):
        """Sum of squares is minimal among all compositions for M <= 20."""
        for m in range(1, 21):
            for k in range(1, m + 1):
                _, _, sizes = optimal_block_sizes(m, k)
                assert sum(sizes) == m and len(sizes) == k
                best = min(sum(p * p for p in parts) for parts in partitions_into(m, k))
                assert sum(s * s for s in sizes) == best, f"M={m}, K={k}: {sizes} is not minimal"


class TestCorrectionRange:
    """Admissible first correction factors of D_L and D_L+1."""

    @pytest.mark.parametrize(
        "n, m, size, expected",
        [
            (4, 5, 2, (3, 5)),
            (4, 5, 3, (2, 5)),
            (7, 11, 3, (-1, 3)),
        ],
    )
    def test_examples(self, n, m, size, expected):
        assert correction_range(n, m, size) == expected

    def test_size_must_be_l_or_l_plus_one(self):
        with pytest.raises(BlockError):
            correction_range(4, 5, 4)

    def test_endpoints_achievable(self):
        """Both ends build a block and one step past either end is rejected (M <= 40)."""
        checked = 0
        for m in range(3, 41):
            for n in range(m // 2 + 1, m):
                _, base, _ = tight_block_parameters(n, m)
                for size in (base, base + 1):
                    if size < 2:
                        continue
                    lo, hi = correction_range(n, m, size)
                    if size == base or base * (n - m) + n > 0:
                        for c1 in (lo, hi):
                            make_tight_block(TightBlockSpec(n, m, size, c1))
                        for c1 in (lo - 1, hi + 1):
                            with pytest.raises(BlockError):
                                make_tight_block(TightBlockSpec(n, m, size, c1))
                    else:
                        for c1 in range(max(1, lo), hi + 1):
                            make_tight_block(TightBlockSpec(n, m, size, c1))
                    checked += 1
        logger.info(f"checked {checked} (N, M, size) combinations")


class TestStepSize:
    """Decrease of the first correction factor across one block."""

    def test_examples(self):
        assert step_size(4, 5, 2) == 3
        assert step_size(4, 5, 3) == 2
        assert step_size(4, 5, 2) + step_size(4, 5, 3) == 5

    def test_six_d2_steps_telescope(self):
        assert tight_block_parameters(7, 12) == (6, 2, 6)
        assert step_size(7, 12, 2) == 2
        assert 6 * step_size(7, 12, 2) == 12


class TestTightBlock:
    """Altered D_L blocks with integer correction factors."""

    def test_d2_of_tight_example(self):
        block = make_tight_block(TightBlockSpec(4, 5, 2, 5))
        assert block.rows == (
            (Entry(F(5, 8)), Entry(F(5, 8))),
            (Entry(F(3, 8)), Entry(F(3, 8), 2, 1)),
        )
        assert (block.first_correction, block.last_correction) == (5, 3)

    def test_d3_of_tight_example(self):
        block = make_tight_block(TightBlockSpec(4, 5, 3, 2))
        assert [row[0].radicand for row in block.rows] == [F(1, 6), F(5, 12), F(5, 12)]
        assert block.rows[1][1] == Entry(F(5, 12), 3, 1)
        assert block.rows[2][1] == Entry(F(5, 12), 3, 2)
        assert block.rows[2][2] == Entry(F(5, 12), 3, 1)
        assert block.last_correction == 5

    def test_first_correction_above_m(self):
        with pytest.raises(BlockError):
            make_tight_block(TightBlockSpec(4, 5, 2, 6))

    def test_non_integer_correction(self):
        with pytest.raises(BlockError):
            TightBlockSpec(4, 5, 2, F(9, 2))

    def test_unit_columns_and_interior_rows(self):
        """Columns sum to 1 and interior rows to M/N for every admissible block."""
        for n, m in ((7, 10), (7, 11), (10, 13), (11, 19)):
            _, base, _ = tight_block_parameters(n, m)
            for size in (base, base + 1):
                lo, hi = correction_range(n, m, size)
                for c1 in range(max(1, lo), hi + 1):
                    block = make_tight_block(TightBlockSpec(n, m, size, c1))
                    for col in range(size):
                        assert sum(row[col].radicand for row in block.rows) == 1
                    for row in block.rows[1:-1]:
                        assert sum(entry.radicand for entry in row) == F(m, n)
                    assert row_orthogonality_residual(block.rows) <= 1e-12


class TestGeneralBlock:
    """General D_L blocks over arbitrary positive eigenvalues."""

    def test_two_by_two(self):
        block = make_general_block(GeneralBlockSpec((F(1, 2), F(3, 2)), F(1, 2)))
        assert block.rows == (
            (Entry(F(1, 4)), Entry(F(1, 4))),
            (Entry(F(3, 4)), Entry(F(3, 4), 2, 1)),
        )
        assert block.last_correction == F(3, 2)

    def test_symmetric_case_is_scaled_dft(self):
        block = make_general_block(GeneralBlockSpec((1, 1), 1))
        assert np.allclose(dense(block.rows), dense(dft_matrix(2)) / np.sqrt(2))

    def test_last_correction_too_large(self):
        with pytest.raises(BlockError, match="exceeds"):
            make_general_block(GeneralBlockSpec((F(1, 5), 1, 1, F(4, 5)), F(1, 5)))

    def test_first_correction_above_lambda(self):
        with pytest.raises(BlockError):
            make_general_block(GeneralBlockSpec((F(1, 2), F(3, 2)), 1))

    def test_first_correction_equal_to_non_dyadic_lambda(self):
        """c1 == lambda_1 is admissible even when lambda_1 has no exact float."""
        block = make_general_block(GeneralBlockSpec((F(10, 11), F(12, 11)), F(10, 11)))
        assert block.first_correction == F(10, 11)
        assert block.last_correction == F(12, 11)
        assert block.rows[0][0] == Entry(F(5, 11))
        assert block.rows[1][1] == Entry(F(6, 11), 2, 1)

    def test_float_block(self):
        block = make_general_block(GeneralBlockSpec((0.3, 1.9), 0.3), slack=1e-12)
        assert abs(block.last_correction - 1.7) <= 1e-12
        for col in range(2):
            assert abs(sum(row[col].radicand for row in block.rows) - 1) <= 1e-12


class TestSmallBlocks:
    """The real 2x2 block and the square terminal block."""

    def test_two_by_two_block(self):
        block = two_by_two_block(F(1, 4))
        assert block.rows == ((Entry(F(1, 4)), Entry(F(1, 4))), (Entry(F(3, 4)), Entry(F(3, 4), 2, 1)))

    @pytest.mark.parametrize("x", [0, 1, F(3, 2)])
    def test_two_by_two_weight_range(self, x):
        with pytest.raises(BlockError):
            two_by_two_block(x)

    def test_terminal_block(self):
        block = terminal_block((F(6, 5), F(9, 10), F(9, 10)))
        assert [row[0].radicand for row in block.rows] == [F(2, 5), F(3, 10), F(3, 10)]
        assert block.kind == "terminal3"
        assert row_orthogonality_residual(block.rows) <= 1e-15
