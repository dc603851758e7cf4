"""
Exact scalar and sparse-matrix model shared by every construction.

Entries of a spectral tetris synthesis matrix all have the form
sqrt(radicand) * exp(2*pi*i*p/q) with a rational radicand, so they are stored
symbolically and only turned into complex floats on demand. Spectra given as
floats fall back to float radicands; the rest of the model does not care which
kind of number it is holding.
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvariantViolation, PartitionError, SpectrumError

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]

# Verification tolerance: cross terms such as sqrt(r1*r2) are irrational even
# for rational input, so float comparisons need some room.
DEFAULT_TOLERANCE = 1e-9

# Float spectra: values within FLOAT_SLACK * M of an integer (or of zero) are
# snapped to it.
FLOAT_SLACK = 1e-12

# Quarter turns of the unit circle, exact.
_QUARTER_TURNS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def log_state(log: logging.Logger, event: str, **fields) -> None:
    """Emit a structured ``STATE:<event>,key=value,...`` line at DEBUG level."""
    if not log.isEnabledFor(logging.DEBUG):
        return
    body = ",".join(f"{key}={value}" for key, value in fields.items())
    log.debug(f"STATE:{event},{body}")


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def as_scalar(value) -> Scalar:
    """Coerce ints to Fraction, keep Fractions and floats, reject the rest."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return value
    raise TypeError(f"unsupported scalar type {type(value).__name__}")


def is_zero(value: Scalar, slack: float = 0.0) -> bool:
    if is_exact(value):
        return value == 0
    return abs(value) <= slack


def is_integral(value: Scalar, slack: float = 0.0) -> bool:
    if is_exact(value):
        return Fraction(value).denominator == 1
    return abs(value - round(value)) <= slack


def snap(value: Scalar, slack: float) -> Scalar:
    """Round a float that sits within ``slack`` of an integer onto it."""
    if is_exact(value):
        return value
    nearest = round(value)
    if abs(value - nearest) <= slack:
        return float(nearest)
    return value


def format_scalar(value: Scalar) -> str:
    """Render a scalar the way documents and the CLI write it ("5/2", "3", "0.1")."""
    if is_exact(value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


####################################################################################################
# Entries
#


@dataclass(frozen=True)
class Entry:
    """A structurally nonzero matrix entry sqrt(radicand) * omega_q^p.

    The root is kept in lowest terms: p is reduced mod q and (q, p) divided by
    their gcd, so equal values compare equal.
    """

    radicand: Scalar
    root_order: int = 1
    root_power: int = 0

    def __post_init__(self):
        radicand = as_scalar(self.radicand)
        if not radicand > 0:
            raise ValueError(f"entry radicand must be positive, got {radicand}")
        q, p = self.root_order, self.root_power
        if not isinstance(q, int) or q < 1:
            raise ValueError(f"root order must be a positive integer, got {q!r}")
        p %= q
        g = math.gcd(p, q)
        object.__setattr__(self, "radicand", radicand)
        object.__setattr__(self, "root_order", q // g)
        object.__setattr__(self, "root_power", p // g)

    @property
    def value(self) -> complex:
        return entry_value(self)

    @property
    def exact(self) -> bool:
        return is_exact(self.radicand)

    def __str__(self):
        root = "" if self.root_order == 1 else f"*w{self.root_order}^{self.root_power}"
        return f"sqrt({format_scalar(self.radicand)}){root}"


def entry_value(entry: Entry) -> complex:
    """Materialize an entry as a complex float."""
    magnitude = math.sqrt(entry.radicand)
    q, p = entry.root_order, entry.root_power
    if 4 % q == 0:
        re, im = _QUARTER_TURNS[p * (4 // q)]
        return complex(magnitude * re, magnitude * im)
    return magnitude * cmath.exp(2j * math.pi * p / q)


ONE = Entry(Fraction(1))


####################################################################################################
# Spectra
#


class SpectrumOrder(str, Enum):
    GIVEN = "given"
    DECREASING = "decreasing"
    BLOCKWISE = "blockwise"


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (lambda_1, ..., lambda_N) of a frame operator.

    Values are all Fractions when every input is exact, otherwise all floats.
    The trace must be a positive integer M (the number of unit vectors).
    """

    values: Tuple[Scalar, ...]
    order: SpectrumOrder = SpectrumOrder.GIVEN

    def __post_init__(self):
        try:
            values = tuple(as_scalar(v) for v in self.values)
        except (TypeError, ValueError) as e:
            raise SpectrumError(f"invalid eigenvalue: {e}") from e
        if not values:
            raise SpectrumError("spectrum must contain at least one eigenvalue")
        if not all(is_exact(v) for v in values):
            values = tuple(float(v) for v in values)
        for index, value in enumerate(values):
            if not value > 0:
                raise SpectrumError(f"eigenvalue {index} is {format_scalar(value)}; all must be positive")
        total = sum(values, Fraction(0)) if is_exact(values[0]) else math.fsum(values)
        if not is_integral(total, FLOAT_SLACK * max(1.0, abs(float(total)))):
            raise SpectrumError(
                f"trace {format_scalar(total)} is not an integer; a unit norm frame needs "
                f"sum(lambda) = M"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "order", SpectrumOrder(self.order))
        object.__setattr__(self, "_trace", int(round(total)))

    @classmethod
    def tight(cls, n: int, m: int) -> "Spectrum":
        if n < 1 or m < 1:
            raise SpectrumError(f"tight spectrum needs positive N and M, got N={n}, M={m}")
        return cls(tuple(Fraction(m, n) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return self._trace

    @property
    def exact(self) -> bool:
        return is_exact(self.values[0])

    @property
    def slack(self) -> float:
        """Zero/integer snapping slack for this spectrum (0 when exact)."""
        return 0.0 if self.exact else FLOAT_SLACK * self.m

    @property
    def is_tight(self) -> bool:
        first = self.values[0]
        return all(abs(v - first) <= self.slack for v in self.values)

    @property
    def is_decreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    def reordered(self, permutation: Sequence[int], order: SpectrumOrder = SpectrumOrder.GIVEN) -> "Spectrum":
        if sorted(permutation) != list(range(self.n)):
            raise SpectrumError(f"{list(permutation)} is not a permutation of 0..{self.n - 1}")
        return Spectrum(tuple(self.values[i] for i in permutation), order)

    def decreasing(self) -> Tuple["Spectrum", Tuple[int, ...]]:
        """Stable nonincreasing reordering and the permutation that produced it."""
        permutation = tuple(sorted(range(self.n), key=lambda i: -self.values[i]))
        return self.reordered(permutation, SpectrumOrder.DECREASING), permutation

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    def __str__(self):
        return ",".join(format_scalar(v) for v in self.values)


####################################################################################################
# Synthesis matrices
#


@dataclass(frozen=True)
class BlockRecord:
    """Provenance of one block placed into a synthesis matrix.

    ``size`` is the number of columns the block contributes, ``height`` the
    number of rows it spans.
    """

    kind: str
    size: int
    first_correction: Scalar
    row_offset: int
    col_offset: int
    height: int

    def shifted(self, rows: int, cols: int) -> "BlockRecord":
        return replace(self, row_offset=self.row_offset + rows, col_offset=self.col_offset + cols)


@dataclass(frozen=True, eq=False)
class SynthesisMatrix:
    """N x M synthesis matrix with symbolic entries and block provenance."""

    n_rows: int
    n_cols: int
    entries: Mapping[Tuple[int, int], Entry]
    block_log: Tuple[BlockRecord, ...] = ()
    method: str = ""
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(f"matrix must be at least 1x1, got {self.n_rows}x{self.n_cols}")
        columns: List[List[Tuple[int, Entry]]] = [[] for _ in range(self.n_cols)]
        for (row, col), entry in self.entries.items():
            if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
                raise ValueError(f"entry ({row}, {col}) outside a {self.n_rows}x{self.n_cols} matrix")
            if not isinstance(entry, Entry):
                raise TypeError(f"entry ({row}, {col}) is {type(entry).__name__}, not Entry")
            columns[col].append((row, entry))
        for col, cells in enumerate(columns):
            cells.sort(key=lambda cell: cell[0])
            rows = [row for row, _ in cells]
            if rows and rows[-1] - rows[0] + 1 != len(rows):
                raise ValueError(f"column {col} has non-contiguous support {rows}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "block_log", tuple(self.block_log))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        object.__setattr__(self, "_columns", tuple(tuple(cells) for cells in columns))

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return all(entry.exact for entry in self.entries.values())

    def column(self, col: int) -> Tuple[Tuple[int, Entry], ...]:
        """(row, entry) pairs of one column, by increasing row."""
        return self._columns[col]

    def support(self, col: int) -> Optional[Tuple[int, int]]:
        """First and last row of a column's structural support."""
        cells = self._columns[col]
        if not cells:
            return None
        return cells[0][0], cells[-1][0]

    def supports_overlap(self, a: int, b: int) -> bool:
        sa, sb = self.support(a), self.support(b)
        if sa is None or sb is None:
            return False
        return sa[0] <= sb[1] and sb[0] <= sa[1]

    def row_support_sizes(self) -> List[int]:
        sizes = [0] * self.n_rows
        for row, _ in self.entries:
            sizes[row] += 1
        return sizes

    def column_mass(self, col: int) -> Scalar:
        """Sum of radicands of a column (its squared norm)."""
        return _radicand_sum(entry for _, entry in self._columns[col])

    def row_masses(self) -> List[Scalar]:
        buckets: List[List[Entry]] = [[] for _ in range(self.n_rows)]
        for (row, _), entry in self.entries.items():
            buckets[row].append(entry)
        return [_radicand_sum(bucket) for bucket in buckets]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols), dtype=complex)
        for (row, col), entry in self.entries.items():
            dense[row, col] = entry.value
        return dense

    def same_entries(self, other: "SynthesisMatrix") -> bool:
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and dict(self.entries) == dict(other.entries)
        )

    def relabeled(self, method: str, warnings: Iterable[str] = ()) -> "SynthesisMatrix":
        return replace(self, method=method, warnings=tuple(self.warnings) + tuple(warnings))

    def block_diagonal(self, copies: int) -> "SynthesisMatrix":
        """The matrix with ``copies`` copies of this one along its diagonal."""
        entries: Dict[Tuple[int, int], Entry] = {}
        log: List[BlockRecord] = []
        for copy in range(copies):
            dr, dc = copy * self.n_rows, copy * self.n_cols
            for (row, col), entry in self.entries.items():
                entries[row + dr, col + dc] = entry
            log.extend(record.shifted(dr, dc) for record in self.block_log)
        return SynthesisMatrix(
            self.n_rows * copies, self.n_cols * copies, entries, tuple(log), self.method, self.warnings
        )


def _radicand_sum(entries: Iterable[Entry]) -> Scalar:
    radicands = [entry.radicand for entry in entries]
    if all(is_exact(r) for r in radicands):
        return sum(radicands, Fraction(0))
    return math.fsum(float(r) for r in radicands)


class MatrixBuilder:
    """Accumulates blocks into a synthesis matrix, left to right.

    Consecutive blocks share a row but never a column, so any attempt to write
    the same cell twice is a bug in the calling constructor.
    """

    def __init__(self, n_rows: int, n_cols: int, label: str):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.label = label
        self._entries: Dict[Tuple[int, int], Entry] = {}
        self._log: List[BlockRecord] = []

    def place(self, rows: Sequence[Sequence[Optional[Entry]]], record: BlockRecord) -> None:
        for a, row_entries in enumerate(rows):
            for b, entry in enumerate(row_entries):
                if entry is None:
                    continue
                key = (record.row_offset + a, record.col_offset + b)
                if key in self._entries:
                    raise InvariantViolation(f"[{self.label}] cell {key} written twice")
                if not (key[0] < self.n_rows and key[1] < self.n_cols):
                    raise InvariantViolation(
                        f"[{self.label}] block {record.kind} at {key} leaves the "
                        f"{self.n_rows}x{self.n_cols} matrix"
                    )
                self._entries[key] = entry
        self._log.append(record)
        log_state(
            logger,
            "block",
            method=self.label,
            kind=record.kind,
            size=record.size,
            c1=format_scalar(record.first_correction),
            row=record.row_offset,
            col=record.col_offset,
        )

    def unit(self, row: int, col: int) -> None:
        """Place a standard unit vector e_row as column ``col``."""
        self.place(((ONE,),), BlockRecord("unit", 1, Fraction(1), row, col, 1))

    def build(self, method: str, warnings: Iterable[str] = ()) -> SynthesisMatrix:
        return SynthesisMatrix(self.n_rows, self.n_cols, self._entries, tuple(self._log), method, tuple(warnings))


def frame_operator_entries(matrix: SynthesisMatrix) -> Dict[Tuple[int, int], complex]:
    """Upper triangle (a <= b) of FF*, accumulated column by column.

    Column supports are intervals, so the work is proportional to
    nnz * (longest column support).
    """
    operator: Dict[Tuple[int, int], complex] = {}
    for col in range(matrix.n_cols):
        cells = [(row, entry.value) for row, entry in matrix.column(col)]
        for i, (a, va) in enumerate(cells):
            for b, vb in cells[i:]:
                operator[a, b] = operator.get((a, b), 0j) + va * vb.conjugate()
    return operator


def gram_diag_residual(matrix: SynthesisMatrix, lam: Spectrum) -> float:
    """max |FF* - diag(lambda)| over all entries, in floats."""
    if lam.n != matrix.n_rows:
        raise SpectrumError(f"spectrum has {lam.n} values but the matrix has {matrix.n_rows} rows")
    operator = frame_operator_entries(matrix)
    residual = 0.0
    for row in range(matrix.n_rows):
        residual = max(residual, abs(operator.get((row, row), 0j) - float(lam[row])))
    for (a, b), value in operator.items():
        if a != b:
            residual = max(residual, abs(value))
    return residual


####################################################################################################
# Fusion partitions and reports
#


@dataclass(frozen=True)
class FusionPartition:
    """Column indices grouped into the spanning sets of a fusion frame."""

    groups: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted(group)) for group in self.groups)
        seen = set()
        for index, group in enumerate(groups):
            if not group:
                raise PartitionError(f"group {index} is empty")
            for col in group:
                if col in seen:
                    raise PartitionError(f"column {col} appears in more than one group")
                seen.add(col)
        object.__setattr__(self, "groups", groups)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(group) for group in self.groups)

    def check_covers(self, n_cols: int) -> None:
        covered = {col for group in self.groups for col in group}
        if covered != set(range(n_cols)):
            missing = sorted(set(range(n_cols)) - covered)
            extra = sorted(covered - set(range(n_cols)))
            raise PartitionError(f"groups do not partition 0..{n_cols - 1} (missing {missing}, extra {extra})")

    def check_disjoint_supports(self, matrix: SynthesisMatrix) -> None:
        for index, group in enumerate(self.groups):
            clash = first_overlap(matrix, group)
            if clash is not None:
                raise PartitionError(f"group {index}: columns {clash[0]} and {clash[1]} share support rows")


def first_overlap(matrix: SynthesisMatrix, columns: Iterable[int]) -> Optional[Tuple[int, int]]:
    """A pair of columns with intersecting supports, or None."""
    spans = sorted((matrix.support(col), col) for col in columns if matrix.support(col) is not None)
    for (span_a, col_a), (span_b, col_b) in zip(spans, spans[1:]):
        if span_b[0] <= span_a[1]:
            return col_a, col_b
    return None


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    exact: bool = False

    @classmethod
    def measure(cls, name: str, residual: float, tolerance: float, exact: bool = False) -> "CheckResult":
        return cls(name, residual <= tolerance, float(residual), exact)


@dataclass(frozen=True)
class VerificationReport:
    """Pass/fail per property, with max residuals and the tolerance used.

    For frames, ``lower_bound``/``upper_bound`` are the smallest and largest
    diagonal entries of FF* (the frame bounds once rows are orthogonal).
    """

    checks: Tuple[CheckResult, ...]
    tolerance: float
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def summary_lines(self) -> List[str]:
        lines = []
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            mode = "exact" if check.exact else f"tol {self.tolerance:g}"
            lines.append(f"{status}  {check.name:<22} max residual {check.max_residual:.3e} ({mode})")
        if self.lower_bound is not None:
            lines.append(f"frame bounds A={self.lower_bound:.12g} B={self.upper_bound:.12g}")
        return lines
