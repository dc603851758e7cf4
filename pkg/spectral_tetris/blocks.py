"""
Building blocks for spectral tetris synthesis matrices.

All blocks are row-rescaled DFT matrices: the 2x2 block of the classic
construction, the altered D_L blocks of tight frames (integer correction
factors on the first and last row) and the general D_L blocks used for
arbitrary spectra. A block is returned standalone; callers place it with a
one-row overlap onto the previous one.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from .core import BlockRecord, Entry, Scalar, as_scalar, format_scalar, is_exact
from .errors import BlockError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Block:
    """A standalone block: ``rows[a][b]`` is the entry in block row a, column b."""

    kind: str
    rows: Tuple[Tuple[Entry, ...], ...]
    first_correction: Scalar
    last_correction: Scalar

    @property
    def size(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    def record(self, row_offset: int, col_offset: int) -> BlockRecord:
        return BlockRecord(self.kind, self.size, self.first_correction, row_offset, col_offset, self.height)


def dft_matrix(size: int) -> Tuple[Tuple[Entry, ...], ...]:
    """The unnormalized DFT matrix F_L with entries omega_L^(jk)."""
    if size < 1:
        raise BlockError(f"DFT size must be positive, got {size}")
    return tuple(tuple(Entry(Fraction(1), size, j * k) for k in range(size)) for j in range(size))


def _scaled_dft(radicands: Sequence[Scalar]) -> Tuple[Tuple[Entry, ...], ...]:
    """F_L with row a scaled by sqrt(radicands[a])."""
    size = len(radicands)
    return tuple(tuple(Entry(radicand, size, a * b) for b in range(size)) for a, radicand in enumerate(radicands))


def optimal_block_sizes(m: int, k: int) -> Tuple[int, int, Tuple[int, ...]]:
    """Composition of M into K parts minimizing the sum of squares.

    Returns (L, r, sizes) with L = M // K, r = K(L+1) - M and sizes made of r
    copies of L followed by K - r copies of L+1.
    """
    if k < 1:
        raise BlockError(f"block count must be positive, got K={k}")
    if k > m:
        raise BlockError(f"cannot split M={m} columns into K={k} nonempty blocks")
    size = m // k
    r = k * (size + 1) - m
    return size, r, (size,) * r + (size + 1,) * (k - r)


def tight_block_parameters(n: int, m: int) -> Tuple[int, int, int]:
    """(K, L, r) for a tight frame of M vectors in dimension N, N < M < 2N."""
    if not n < m < 2 * n:
        raise BlockError(f"altered DFT blocks need N < M < 2N, got N={n}, M={m}")
    k = m - n + 1
    size, r, _ = optimal_block_sizes(m, k)
    return k, size, r


def _check_size(n: int, m: int, size: int) -> int:
    _, base, _ = tight_block_parameters(n, m)
    if size not in (base, base + 1):
        raise BlockError(f"block size {size} is neither L={base} nor L+1={base + 1} for N={n}, M={m}")
    return base


def correction_range(n: int, m: int, size: int) -> Tuple[int, int]:
    """Interval of first correction factors for a D_size block.

    For size L+1 with L(N-M)+N <= 0 the interval is a sufficient range and
    its lower end may be non-positive.
    """
    base = _check_size(n, m, size)
    shift = base * (n - m)
    if size == base:
        return shift + m, m
    if shift + n > 0:
        return shift + n, m
    return shift + n, shift + m


def step_size(n: int, m: int, size: int) -> int:
    """Decrease of the first correction factor across one D_size block."""
    base = _check_size(n, m, size)
    shift = base * (n - m)
    return shift + m if size == base else shift + n


@dataclass(frozen=True)
class TightBlockSpec:
    n: int
    m: int
    size: int
    first_correction: int

    def __post_init__(self):
        _check_size(self.n, self.m, self.size)
        if self.size < 2:
            raise BlockError(f"D_{self.size} has no separate first and last row (M = 2N-1 uses 2x2 blocks)")
        if isinstance(self.first_correction, bool) or not isinstance(self.first_correction, int):
            raise BlockError(f"first correction of a tight block must be an integer, got {self.first_correction!r}")

    @property
    def last_correction(self) -> int:
        """Forced by unit columns: c1 + (size-2)M + c_last = N*size."""
        return self.n * self.size - (self.size - 2) * self.m - self.first_correction


def make_tight_block(spec: TightBlockSpec) -> Block:
    """Altered D_L block: F_L with rows scaled by sqrt(c/(N*L)), c = c1, M, ..., M, c_last."""
    c1, c_last = spec.first_correction, spec.last_correction
    if not 1 <= c1 <= spec.m:
        raise BlockError(f"first correction {c1} outside [1, {spec.m}] for D_{spec.size}")
    if not 1 <= c_last <= spec.m:
        raise BlockError(
            f"first correction {c1} forces last correction {c_last} outside [1, {spec.m}] for D_{spec.size}"
        )
    scale = spec.n * spec.size
    weights = [c1] + [spec.m] * (spec.size - 2) + [c_last]
    rows = _scaled_dft([Fraction(w, scale) for w in weights])
    return Block(f"D{spec.size}", rows, c1, c_last)


@dataclass(frozen=True)
class GeneralBlockSpec:
    """General D_L block over residual eigenvalues lams = (lambda_1, ..., lambda_L)."""

    lams: Tuple[Scalar, ...]
    first_correction: Scalar

    def __post_init__(self):
        lams = tuple(as_scalar(v) for v in self.lams)
        first = as_scalar(self.first_correction)
        if not all(is_exact(v) for v in lams + (first,)):
            lams, first = tuple(float(v) for v in lams), float(first)
        if len(lams) < 2:
            raise BlockError(f"general block needs at least 2 eigenvalues, got {len(lams)}")
        object.__setattr__(self, "lams", lams)
        object.__setattr__(self, "first_correction", first)

    @property
    def size(self) -> int:
        return len(self.lams)

    @property
    def last_correction(self) -> Scalar:
        interior = self.lams[1:-1]
        if is_exact(self.first_correction):
            return self.size - self.first_correction - sum(interior, Fraction(0))
        return self.size - self.first_correction - sum(interior)


def make_general_block(spec: GeneralBlockSpec, slack: float = 0.0) -> Block:
    """F_L with rows scaled by sqrt(c1/L), sqrt(lambda_i/L) (interior), sqrt(c_L/L)."""
    c1, c_last = spec.first_correction, spec.last_correction
    if not c1 > 0 or c1 - spec.lams[0] > slack:
        raise BlockError(f"first correction {format_scalar(c1)} outside (0, {format_scalar(spec.lams[0])}]")
    if not c_last > slack:
        raise BlockError(f"last correction {format_scalar(c_last)} is not positive")
    if c_last - spec.lams[-1] > slack:
        raise BlockError(
            f"last correction {format_scalar(c_last)} exceeds lambda_L = {format_scalar(spec.lams[-1])}"
        )
    size = spec.size
    rows = _scaled_dft([c1 / size] + [v / size for v in spec.lams[1:-1]] + [c_last / size])
    return Block(f"general{size}", rows, c1, c_last)


def two_by_two_block(x: Scalar) -> Block:
    """The classic real block [[sqrt(x), sqrt(x)], [sqrt(1-x), -sqrt(1-x)]], 0 < x < 1."""
    if not 0 < x < 1:
        raise BlockError(f"2x2 block weight must lie in (0, 1), got {format_scalar(x)}")
    rest = 1 - x
    rows = ((Entry(x), Entry(x)), (Entry(rest), Entry(rest, 2, 1)))
    return Block("doubleton", rows, 2 * x, 2 * rest)


def terminal_block(lams: Sequence[Scalar]) -> Block:
    """Square F_L over L rows with row a scaled by sqrt(lams[a]/L); sum(lams) must be L."""
    size = len(lams)
    if size < 1:
        raise BlockError("terminal block needs at least one row")
    if any(not v > 0 for v in lams):
        raise BlockError(f"terminal block rows must have positive mass, got {[format_scalar(v) for v in lams]}")
    rows = _scaled_dft([v / size for v in lams])
    return Block(f"terminal{size}", rows, lams[0], lams[-1])
