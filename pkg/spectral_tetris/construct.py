"""
Frame constructors: STC, TDFTST (tight, redundancy below 2) and DFTST
(arbitrary spectra), plus a dispatcher and eigenvalue orderings.

Every constructor scans rows left to right, placing blocks that overlap the
previous block in exactly one row, and returns a SynthesisMatrix whose block
log records the decomposition.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .blocks import (
    GeneralBlockSpec,
    TightBlockSpec,
    make_general_block,
    make_tight_block,
    optimal_block_sizes,
    step_size,
    terminal_block,
    tight_block_parameters,
    two_by_two_block,
)
from .core import (
    MatrixBuilder,
    Scalar,
    Spectrum,
    SpectrumOrder,
    SynthesisMatrix,
    format_scalar,
    is_integral,
    is_zero,
    log_state,
    snap,
)
from .errors import BlockError, ConstructionError, InvariantViolation, SpectrumError

logger = logging.getLogger(__name__)

# Spectra up to this length get an exact blockwise ordering search.
EXACT_ORDER_LIMIT = 20
# ... and only while the residue multiset has at most this many sub-multisets.
EXACT_ORDER_STATES = 20_000


class Method(str, Enum):
    AUTO = "auto"
    STC = "stc"
    TDFTST = "tdftst"
    DFTST = "dftst"


####################################################################################################
# STC
#


def stc(lam: Spectrum, allow_small: bool = False) -> SynthesisMatrix:
    """Spectral tetris with singletons and real 2x2 blocks.

    Correct for eigenvalues >= 2. With ``allow_small`` smaller eigenvalues are
    attempted anyway; a row that cannot be completed raises ConstructionError.
    """
    label = f"stc {lam.n}x{lam.m}"
    if not allow_small:
        for index, value in enumerate(lam):
            if value < 2:
                raise SpectrumError(
                    f"[{label}] eigenvalue {index} is {format_scalar(value)} < 2; "
                    f"pass allow_small to attempt it anyway"
                )
    slack = lam.slack
    rest: List[Scalar] = list(lam.values)
    builder = MatrixBuilder(lam.n, lam.m, "stc")
    col = 0
    for j in range(lam.n):
        while rest[j] > slack:
            if 1 - rest[j] <= slack:
                builder.unit(j, col)
                col += 1
                rest[j] = snap(rest[j] - 1, slack)
                continue
            if j == lam.n - 1:
                raise ConstructionError(
                    f"[{label}] row {j} is left with {format_scalar(rest[j])} < 1 and no row below it"
                )
            following = snap(rest[j + 1] - (2 - rest[j]), slack)
            if following < 0:
                raise ConstructionError(
                    f"[{label}] row {j + 1} would go negative ({format_scalar(following)}) "
                    f"absorbing the 2x2 block of row {j}"
                )
            block = two_by_two_block(rest[j] / 2)
            builder.place(block.rows, block.record(j, col))
            col += 2
            rest[j], rest[j + 1] = 0 * rest[j], following
    if col != lam.m:
        raise InvariantViolation(f"[{label}] placed {col} columns, expected {lam.m}")
    return builder.build("stc")


####################################################################################################
# TDFTST
#


def _tight_walk(n: int, m: int, next_size: Callable[[int], Optional[int]], label: str, strict: bool) -> SynthesisMatrix:
    """Place D_L / D_L+1 blocks starting at x = M until all M columns are used.

    ``next_size`` picks the next block size from the current first correction
    x. With ``strict`` a failed walk is a broken invariant, otherwise it is
    the caller's block order that is infeasible.
    """
    failure = InvariantViolation if strict else ConstructionError
    builder = MatrixBuilder(n, m, "tdftst")
    x, row, col = m, 0, 0
    while col < m:
        size = next_size(x)
        if size is None:
            raise failure(f"[{label}] block order ended after {col} of {m} columns (x={x})")
        try:
            block = make_tight_block(TightBlockSpec(n, m, size, x))
        except BlockError as e:
            raise failure(f"[{label}] cannot place D_{size} at column {col}: {e}") from e
        builder.place(block.rows, block.record(row, col))
        following = m - block.last_correction
        if x - following != step_size(n, m, size):
            raise InvariantViolation(
                f"[{label}] D_{size} moved x from {x} to {following}, "
                f"expected step {step_size(n, m, size)}"
            )
        x, row, col = following, row + size - 1, col + size
    if x != 0 or row != n - 1:
        raise failure(f"[{label}] walk ended at x={x}, row {row}; expected x=0 on row {n - 1}")
    return builder.build("tdftst")


def tdftst(n: int, m: int) -> SynthesisMatrix:
    """Unit norm tight frame of M vectors in C^N, N < M < 2N, from altered DFT blocks."""
    label = f"tdftst {n}x{m}"
    if not n < m < 2 * n:
        raise SpectrumError(f"[{label}] needs N < M < 2N; use stc or dftst otherwise")
    g = math.gcd(n, m)
    if g > 1:
        logger.info(f"[{label}] gcd {g}: stacking {g} copies of the {n // g}x{m // g} frame")
        return tdftst(n // g, m // g).block_diagonal(g)
    k, size, r = tight_block_parameters(n, m)
    if size == 1:
        logger.info(f"[{label}] M = 2N-1: running stc on the tight spectrum")
        return stc(Spectrum.tight(n, m), allow_small=True).relabeled("tdftst")
    shift = size * (n - m)
    if shift + n <= 0:
        threshold = shift + m

        def next_size(x: int) -> int:
            return size if x >= threshold else size + 1

        logger.info(f"[{label}] greedy block order (K={k}, L={size}, r={r})")
        matrix = _tight_walk(n, m, next_size, label, strict=True)
    else:
        logger.info(f"[{label}] {r} blocks D_{size} then {k - r} blocks D_{size + 1}")
        matrix = _tight_walk(n, m, _sizes_from(optimal_block_sizes(m, k)[2]), label, strict=True)
    counts = [record.size for record in matrix.block_log]
    if len(counts) != k or counts.count(size) != r:
        raise InvariantViolation(f"[{label}] block sizes {counts}, expected {r} of {size} and {k - r} of {size + 1}")
    return matrix


def _sizes_from(sizes: Iterable[int]) -> Callable[[int], Optional[int]]:
    remaining = iter(sizes)
    return lambda _x: next(remaining, None)


def tight_block_sequence(n: int, m: int, sizes: Sequence[int]) -> SynthesisMatrix:
    """Tight frame from a caller-chosen sequence of block sizes (each L or L+1)."""
    label = f"tdftst {n}x{m} order {','.join(map(str, sizes))}"
    if not n < m < 2 * n:
        raise SpectrumError(f"[{label}] needs N < M < 2N")
    _, size, _ = tight_block_parameters(n, m)
    if size == 1:
        raise ConstructionError(f"[{label}] M = 2N-1 has L = 1; there is no block order to choose")
    if sum(sizes) != m:
        raise ConstructionError(f"[{label}] block sizes sum to {sum(sizes)}, not M={m}")
    bad = [s for s in sizes if s not in (size, size + 1)]
    if bad:
        raise ConstructionError(f"[{label}] sizes {bad} are neither L={size} nor L+1={size + 1}")
    return _tight_walk(n, m, _sizes_from(sizes), label, strict=False)


####################################################################################################
# DFTST
#


def dftst(lam: Spectrum) -> SynthesisMatrix:
    """Spectral tetris with general DFT blocks for any positive spectrum with M >= N.

    Rows are scanned on residual eigenvalues. Each step places a singleton, a
    general D_L block with L the smallest admissible size, or, once the
    remaining columns equal the remaining rows and the next step would not
    finish its landing row, one square terminal block over everything left.
    """
    n, m = lam.n, lam.m
    label = f"dftst {n}x{m}"
    if m < n:
        raise SpectrumError(f"[{label}] needs M >= N")
    slack = lam.slack
    zero = lam[0] * 0
    rest: List[Scalar] = list(lam.values)
    original_prefix = [zero]
    for value in lam:
        original_prefix.append(original_prefix[-1] + value)
    warnings = []
    if not lam.is_decreasing:
        warnings.append("spectrum is not in decreasing order; the frame may be less sparse")
        logger.warning(f"[{label}] {warnings[-1]}")

    builder = MatrixBuilder(n, m, "dftst")
    j, col = 0, 0
    while col < m:
        while j < n and is_zero(rest[j], slack):
            j += 1
        if j == n:
            raise InvariantViolation(f"[{label}] {m - col} columns left but no mass")
        cols_left, rows_left = m - col, n - j

        smallest, prefix = None, zero
        for size in range(1, rows_left + 1):
            prefix += rest[j + size - 1]
            if size - prefix <= slack:
                smallest = size
                break

        finish = smallest is None
        if not finish and cols_left == rows_left:
            integral = is_integral(prefix, slack)
            if integral != is_integral(original_prefix[j + smallest], slack):
                raise InvariantViolation(f"[{label}] prefix integrality differs on residual values at row {j}")
            landing = snap(prefix - smallest, slack)
            finish = not integral or landing != 0
        if finish:
            if cols_left != rows_left:
                raise InvariantViolation(f"[{label}] terminal block needs {cols_left} columns over {rows_left} rows")
            block = terminal_block(rest[j:])
            builder.place(block.rows, block.record(j, col))
            log_state(logger, "terminal", row=j, col=col, size=cols_left)
            col += cols_left
            rest[j:] = [zero] * rows_left
            break

        if smallest == 1:
            builder.unit(j, col)
            rest[j] = snap(rest[j] - 1, slack)
            col += 1
            continue

        block = make_general_block(GeneralBlockSpec(tuple(rest[j : j + smallest]), rest[j]), slack)
        builder.place(block.rows, block.record(j, col))
        landing_row = j + smallest - 1
        for i in range(j, landing_row):
            rest[i] = zero
        rest[landing_row] = snap(prefix - smallest, slack)
        col += smallest

    leftover = [i for i, value in enumerate(rest) if not is_zero(value, slack)]
    if leftover:
        raise InvariantViolation(f"[{label}] rows {leftover} keep residual mass after all columns are placed")
    return builder.build("dftst", warnings)


####################################################################################################
# Dispatch
#


@dataclass(frozen=True)
class ConstructRequest:
    """What to build: N, M and either an explicit spectrum or the tight one.

    ``block_order`` (tight only) forces a sequence of D_L / D_L+1 sizes.
    """

    n: int
    m: int
    spectrum: Optional[Spectrum] = None
    tight: bool = False
    method: Method = Method.AUTO
    allow_small: bool = False
    block_order: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.tight == (self.spectrum is not None):
            raise ConstructionError("request needs exactly one of an explicit spectrum or the tight marker")
        if self.m < self.n:
            raise SpectrumError(f"M={self.m} vectors cannot span C^{self.n}; need M >= N")
        if self.spectrum is not None and (self.spectrum.n, self.spectrum.m) != (self.n, self.m):
            raise SpectrumError(
                f"spectrum has N={self.spectrum.n}, M={self.spectrum.m}; request says N={self.n}, M={self.m}"
            )
        if self.block_order is not None and not self.tight:
            raise ConstructionError("a block order only applies to tight frames")
        if self.block_order is not None and self.method not in (Method.AUTO, Method.TDFTST):
            raise ConstructionError(f"a block order cannot be combined with method {self.method.value}")

    @property
    def resolved_spectrum(self) -> Spectrum:
        return Spectrum.tight(self.n, self.m) if self.tight else self.spectrum

    def routed_method(self) -> Method:
        if self.method is not Method.AUTO:
            return self.method
        lam = self.resolved_spectrum
        if self.block_order is not None:
            return Method.TDFTST
        if all(value >= 2 for value in lam):
            return Method.STC
        if self.tight and self.n < self.m < 2 * self.n:
            return Method.TDFTST
        return Method.DFTST


def construct(req: ConstructRequest) -> SynthesisMatrix:
    lam = req.resolved_spectrum
    method = req.routed_method()
    logger.info(f"[construct {req.n}x{req.m}] method {method.value}")
    if method is Method.STC:
        return stc(lam, allow_small=req.allow_small)
    if method is Method.TDFTST:
        if not lam.is_tight:
            raise ConstructionError(f"[construct {req.n}x{req.m}] tdftst only builds tight frames")
        if req.block_order is not None:
            return tight_block_sequence(req.n, req.m, req.block_order)
        return tdftst(req.n, req.m)
    return dftst(lam)


####################################################################################################
# Orderings
#


@dataclass(frozen=True)
class BlockwiseOrder:
    permutation: Tuple[int, ...]
    spectrum: Spectrum
    integral_prefixes: int
    certified: bool


def integral_prefix_count(values: Sequence[Scalar], slack: float = 0.0) -> int:
    count, total = 0, values[0] * 0 if values else 0
    for value in values:
        total += value
        count += is_integral(total, slack)
    return count


def _residues(lam: Spectrum) -> Tuple[int, List[int]]:
    """Fractional parts as integers modulo a common denominator."""
    fractions = [Fraction(v) if lam.exact else Fraction(v).limit_denominator() for v in lam]
    denominator = 1
    for f in fractions:
        denominator = denominator * f.denominator // math.gcd(denominator, f.denominator)
    return denominator, [(f.numerator * (denominator // f.denominator)) % denominator for f in fractions]


def _search_states(residues: List[int]) -> int:
    return math.prod(residues.count(v) + 1 for v in set(residues))


def _exact_order(denominator: int, residues: List[int]) -> List[int]:
    values = sorted(set(residues))

    @lru_cache(maxsize=None)
    def best(counts: Tuple[int, ...]) -> int:
        if not any(counts):
            return 0
        total = sum(c * v for c, v in zip(counts, values)) % denominator
        gain = int(total == 0)
        options = [
            best(counts[:i] + (c - 1,) + counts[i + 1 :]) for i, c in enumerate(counts) if c > 0
        ]
        return gain + max(options)

    counts = tuple(residues.count(v) for v in values)
    order: List[int] = []
    pools = {v: [i for i, r in enumerate(residues) if r == v] for v in values}
    while any(counts):
        target = best(counts)
        gain = int(sum(c * v for c, v in zip(counts, values)) % denominator == 0)
        for i in sorted((i for i, c in enumerate(counts) if c > 0), key=lambda i: -pools[values[i]][-1]):
            reduced = counts[:i] + (counts[i] - 1,) + counts[i + 1 :]
            if best(reduced) + gain == target:
                order.append(pools[values[i]].pop())
                counts = reduced
                break
    best.cache_clear()
    return order[::-1]


def _greedy_order(denominator: int, residues: List[int]) -> List[int]:
    """Integers first, then complementary pairs, then whatever is left."""
    order = [i for i, r in enumerate(residues) if r == 0]
    waiting = {}
    leftover = []
    for i, r in enumerate(residues):
        if r == 0:
            continue
        partner = waiting.get(denominator - r)
        if partner:
            order.extend((partner.pop(), i))
        else:
            waiting.setdefault(r, []).append(i)
    for indices in waiting.values():
        leftover.extend(indices)
    return order + sorted(leftover)


def blockwise_order(lam: Spectrum) -> BlockwiseOrder:
    """Ordering of the eigenvalues with as many integral partial sums as possible.

    Exact (certified) search up to EXACT_ORDER_LIMIT eigenvalues and
    EXACT_ORDER_STATES residue sub-multisets, a greedy
    grouping beyond. The identity is kept whenever it is already optimal.
    """
    denominator, residues = _residues(lam)
    identity = tuple(range(lam.n))
    if lam.n <= EXACT_ORDER_LIMIT and _search_states(residues) <= EXACT_ORDER_STATES:
        permutation = tuple(_exact_order(denominator, residues))
        certified = True
    else:
        permutation = tuple(_greedy_order(denominator, residues))
        certified = False
    found = integral_prefix_count([lam[i] for i in permutation], lam.slack)
    if integral_prefix_count(lam.values, lam.slack) >= found:
        permutation = identity
    ordered = lam.reordered(permutation, SpectrumOrder.BLOCKWISE)
    count = integral_prefix_count(ordered.values, lam.slack)
    logger.info(f"[order {lam.n}] {count} integral prefixes ({'exact' if certified else 'greedy'})")
    return BlockwiseOrder(permutation, ordered, count, certified)


def order_spectrum(lam: Spectrum, order: SpectrumOrder) -> Tuple[Spectrum, Tuple[int, ...]]:
    """Reorder a spectrum before construction; returns it with the permutation used."""
    order = SpectrumOrder(order)
    if order is SpectrumOrder.DECREASING:
        return lam.decreasing()
    if order is SpectrumOrder.BLOCKWISE:
        result = blockwise_order(lam)
        return result.spectrum, result.permutation
    return lam, tuple(range(lam.n))
