"""
Reading and writing frames: the FrameDocument JSON format, MatrixMarket
coordinate files and dense CSV.

Indices are 0-based in FrameDocuments and 1-based in MatrixMarket files.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    BlockRecord,
    Entry,
    FusionPartition,
    Scalar,
    Spectrum,
    SynthesisMatrix,
    format_scalar,
)
from .errors import DocumentError, SpectrumError
from .verify import sparsity

logger = logging.getLogger(__name__)

FORMAT_TAG = "spectral-tetris-frame/1"
MATRIX_MARKET_HEADER = "%%MatrixMarket matrix coordinate complex general"


def parse_scalar(text: str) -> Scalar:
    """Inverse of format_scalar: "5/2" and "3" give Fractions, "0.1" and "1e-05" give floats."""
    text = text.strip()
    try:
        if any(c in text for c in ".eEn"):
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise SpectrumError(f"malformed number {text!r}") from e


def parse_spectrum(text: str) -> Spectrum:
    """Parse "5/2,10/3,13/6" or "1.5,2.5,2" into a Spectrum.

    Decimals that are exactly representable as binary floats become exact
    rationals; any other decimal turns the whole spectrum into floats.
    """
    tokens = [token.strip() for token in text.split(",")]
    if not tokens or any(not token for token in tokens):
        raise SpectrumError(f"malformed eigenvalue list {text!r}")
    values: List[Scalar] = []
    for token in tokens:
        value = parse_scalar(token)
        if isinstance(value, float) and Fraction(value) == Fraction(token):
            value = Fraction(value)
        values.append(value)
    return Spectrum(tuple(values))


def parse_int_list(text: str, what: str) -> Tuple[int, ...]:
    try:
        return tuple(int(token) for token in text.split(","))
    except ValueError as e:
        raise SpectrumError(f"malformed {what} list {text!r}") from e


@dataclass(frozen=True)
class FrameDocument:
    """A frame together with its spectrum, optional fusion partition and provenance."""

    frame: SynthesisMatrix
    spectrum: Spectrum
    partition: Optional[FusionPartition] = None
    permutation: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> dict:
        frame = self.frame
        cells = sorted(frame.entries.items(), key=lambda item: (item[0][1], item[0][0]))
        report = sparsity(frame)
        return {
            "format": FORMAT_TAG,
            "n": frame.n_rows,
            "m": frame.n_cols,
            "eigenvalues": [format_scalar(v) for v in self.spectrum],
            "exact": self.spectrum.exact,
            "entries": [[row, col, entry.value.real, entry.value.imag] for (row, col), entry in cells],
            "symbolic": [
                [row, col, format_scalar(entry.radicand), entry.root_order, entry.root_power]
                for (row, col), entry in cells
            ],
            "partition": None if self.partition is None else [list(group) for group in self.partition.groups],
            "metadata": {
                "constructor": frame.method,
                "sparsity": {
                    "nonzeros": report.structural_nonzeros,
                    "formula": report.formula_value,
                    "optimal": report.optimal,
                },
                "block_log": [
                    [r.kind, r.size, format_scalar(r.first_correction), r.row_offset, r.col_offset, r.height]
                    for r in frame.block_log
                ],
                "warnings": list(frame.warnings),
                "permutation": None if self.permutation is None else list(self.permutation),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FrameDocument":
        if not isinstance(data, dict) or data.get("format") != FORMAT_TAG:
            raise DocumentError(f"not a {FORMAT_TAG} document")
        try:
            spectrum = Spectrum(tuple(parse_scalar(v) for v in data["eigenvalues"]))
            if bool(data["exact"]) != spectrum.exact:
                raise DocumentError("eigenvalue exactness flag does not match the eigenvalues")
            entries = {}
            for row, col, radicand, order, power in data["symbolic"]:
                entries[int(row), int(col)] = Entry(parse_scalar(radicand), int(order), int(power))
            for row, col, re, im in data["entries"]:
                entry = entries.get((row, col))
                if entry is None or abs(entry.value - complex(re, im)) > 1e-12:
                    raise DocumentError(f"numeric entry ({row}, {col}) disagrees with its symbolic form")
            meta = data["metadata"]
            log = tuple(
                BlockRecord(kind, int(size), parse_scalar(c1), int(row), int(col), int(height))
                for kind, size, c1, row, col, height in meta["block_log"]
            )
            frame = SynthesisMatrix(
                int(data["n"]), int(data["m"]), entries, log, meta["constructor"], tuple(meta["warnings"])
            )
            partition = None
            if data["partition"] is not None:
                partition = FusionPartition(tuple(tuple(group) for group in data["partition"]))
                partition.check_covers(frame.n_cols)
            permutation = None if meta["permutation"] is None else tuple(meta["permutation"])
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, DocumentError):
                raise
            raise DocumentError(f"malformed frame document: {e}") from e
        return cls(frame, spectrum, partition, permutation)


def dumps(document: FrameDocument) -> str:
    return json.dumps(document.to_dict(), indent=2) + "\n"


def loads(text: str) -> FrameDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e}") from e
    return FrameDocument.from_dict(data)


def write_document(document: FrameDocument, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(document))
    logger.info(f"[document] wrote {document.frame.n_rows}x{document.frame.n_cols} frame to {path}")


def read_document(path: Union[str, Path]) -> FrameDocument:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e
    return loads(text)


####################################################################################################
# Exports
#


def to_matrix_market(frame: SynthesisMatrix) -> str:
    """Coordinate complex MatrixMarket text, 1-based, one line per nonzero sorted by (col, row)."""
    lines = [MATRIX_MARKET_HEADER, f"{frame.n_rows} {frame.n_cols} {frame.nnz}"]
    for (row, col), entry in sorted(frame.entries.items(), key=lambda item: (item[0][1], item[0][0])):
        value = entry.value
        lines.append("%d %d %.17g %.17g" % (row + 1, col + 1, value.real, value.imag))
    return "\n".join(lines) + "\n"


def _format_cell(value: complex) -> str:
    imag = repr(value.imag)
    return f"{value.real!r}{'' if imag.startswith('-') else '+'}{imag}i"


def to_csv(frame: SynthesisMatrix) -> str:
    """Dense N x M matrix, one row per line, cells written as "re+imi"."""
    dense = frame.to_dense()
    return "".join(",".join(_format_cell(complex(v)) for v in row) + "\n" for row in dense)


def read_csv(text: str) -> np.ndarray:
    rows: List[Sequence[complex]] = []
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([complex(cell.strip()[:-1] + "j") for cell in line.split(",")])
        except ValueError as e:
            raise DocumentError(f"line {number}: malformed cell ({e})") from e
    if len({len(row) for row in rows}) > 1:
        raise DocumentError("rows have different lengths")
    return np.array(rows, dtype=complex)
