"""
Verification of frames and fusion frames, and structural sparsity counts.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .blocks import tight_block_parameters
from .core import (
    DEFAULT_TOLERANCE,
    CheckResult,
    FusionPartition,
    Spectrum,
    SynthesisMatrix,
    VerificationReport,
    frame_operator_entries,
)
from .errors import SpectrumError
from .fusion import DimensionProfile

logger = logging.getLogger(__name__)


def _exact_gap(value, target) -> float:
    return float(abs(Fraction(value) - Fraction(target)))


def verify_frame(frame: SynthesisMatrix, lam: Spectrum, tol: float = DEFAULT_TOLERANCE) -> VerificationReport:
    """Check unit columns, orthogonal rows, FF* diagonal against lambda and the trace.

    Column norms and the diagonal are compared exactly on radicands when
    every entry and eigenvalue is rational.
    """
    if lam.n != frame.n_rows:
        raise SpectrumError(f"spectrum has {lam.n} values but the frame has {frame.n_rows} rows")
    exact = frame.exact and lam.exact
    operator = frame_operator_entries(frame)
    diagonal = [operator.get((row, row), 0j).real for row in range(frame.n_rows)]

    if exact:
        norm_residual = max(_exact_gap(frame.column_mass(col), 1) for col in range(frame.n_cols))
        masses = frame.row_masses()
        diag_residual = max(_exact_gap(mass, value) for mass, value in zip(masses, lam))
        trace_residual = max(_exact_gap(sum(masses, Fraction(0)), frame.n_cols), abs(lam.m - frame.n_cols))
    else:
        norm_residual = max(abs(float(frame.column_mass(col)) - 1.0) for col in range(frame.n_cols))
        diag_residual = max(
            abs(operator.get((row, row), 0j) - float(value)) for row, value in enumerate(lam)
        )
        trace_residual = max(abs(math.fsum(diagonal) - frame.n_cols), abs(lam.m - frame.n_cols))
    off_residual = max((abs(value) for (a, b), value in operator.items() if a != b), default=0.0)

    lower, upper = min(diagonal), max(diagonal)
    checks = (
        CheckResult.measure("column_norm", norm_residual, tol, exact),
        CheckResult.measure("off_diagonal", off_residual, tol),
        CheckResult.measure("diagonal", diag_residual, tol, exact),
        CheckResult.measure("trace", trace_residual, tol, exact),
        CheckResult.measure("frame_bounds", 0.0 if lower > tol else math.inf, tol),
    )
    report = VerificationReport(checks, tol, lower, upper)
    if not report.passed:
        logger.info(f"[verify {frame.n_rows}x{frame.n_cols}] failed: {[c.name for c in report.failures()]}")
    return report


def verify_fusion(
    frame: SynthesisMatrix,
    partition: FusionPartition,
    dims: Union[DimensionProfile, Sequence[int]],
    lam: Spectrum,
    tol: float = DEFAULT_TOLERANCE,
) -> VerificationReport:
    """Check group sizes, orthonormality inside each group and the fusion frame operator."""
    if lam.n != frame.n_rows:
        raise SpectrumError(f"spectrum has {lam.n} values but the frame has {frame.n_rows} rows")
    partition.check_covers(frame.n_cols)
    requested = dims.requested if isinstance(dims, DimensionProfile) else tuple(dims)
    sizes = partition.sizes
    length = max(len(sizes), len(requested))
    padded_sizes = sizes + (0,) * (length - len(sizes))
    padded_dims = requested + (0,) * (length - len(requested))
    size_residual = max(abs(s - d) for s, d in zip(padded_sizes, padded_dims))

    dense = frame.to_dense()
    gram_residual = 0.0
    operator = np.zeros((frame.n_rows, frame.n_rows), dtype=complex)
    for group in partition.groups:
        vectors = dense[:, list(group)]
        gram = vectors.conj().T @ vectors
        gram_residual = max(gram_residual, float(np.max(np.abs(gram - np.eye(len(group))))))
        operator += vectors @ vectors.conj().T
    target = np.diag(np.array([float(v) for v in lam], dtype=complex))
    operator_residual = float(np.max(np.abs(operator - target)))

    checks = (
        CheckResult.measure("group_sizes", float(size_residual), tol, exact=True),
        CheckResult.measure("group_gram", gram_residual, tol),
        CheckResult.measure("fusion_operator", operator_residual, tol),
    )
    return VerificationReport(checks, tol)


@dataclass(frozen=True)
class SparsityReport:
    structural_nonzeros: int
    formula_value: Optional[int] = None
    optimal: Optional[bool] = None


def tight_sparsity_formula(n: int, m: int) -> int:
    """Nonzeros of the tight DFT construction: g * (r L^2 + (K-r)(L+1)^2) on the coprime reduction."""
    g = math.gcd(n, m)
    k, size, r = tight_block_parameters(n // g, m // g)
    return g * (r * size**2 + (k - r) * (size + 1) ** 2)


def sparsity(frame: SynthesisMatrix) -> SparsityReport:
    nnz = frame.nnz
    if frame.method != "tdftst":
        return SparsityReport(nnz)
    formula = tight_sparsity_formula(frame.n_rows, frame.n_cols)
    coprime = math.gcd(frame.n_rows, frame.n_cols) == 1
    return SparsityReport(nnz, formula, (nnz == formula) if coprime else None)
