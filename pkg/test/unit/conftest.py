"""
Shared fixtures for unit tests.

Provides seeded random spectra, the worked example frames, a parser for the
structured STATE log lines and assertion helpers with readable messages.
"""

import logging
import random
import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
import pytest

from spectral_tetris import Spectrum, SynthesisMatrix, stc, tdftst
from spectral_tetris.core import FusionPartition, VerificationReport, frame_operator_entries

# Configure module logger
logger = logging.getLogger(__name__)

DEFAULT_SEED = 2011

F = Fraction

# Eigenvalues of the two 3x8 worked examples.
EXAMPLE_EIGENVALUES = (F(5, 2), F(10, 3), F(13, 6))
SWAPPED_EIGENVALUES = (F(10, 3), F(5, 2), F(13, 6))
INTEGER_EIGENVALUES = (4, 4, 3, 3, 2, 2)


def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--seed",
        action="store",
        type=int,
        default=DEFAULT_SEED,
        help="Seed for the random instances of the property tests",
    )
    parser.addoption(
        "--property-scale",
        action="store",
        type=float,
        default=1.0,
        help="Multiplier on the number of random instances (0.1 for a quick run)",
    )


@pytest.fixture
def rng(request) -> random.Random:
    seed = request.config.getoption("--seed")
    logger.info(f"[rng] seed {seed}")
    return random.Random(seed)


@pytest.fixture
def scaled(request):
    """Scale an instance count by --property-scale (never below 1)."""
    factor = request.config.getoption("--property-scale")
    return lambda count: max(1, int(count * factor))


@pytest.fixture
def example_spectrum() -> Spectrum:
    return Spectrum(EXAMPLE_EIGENVALUES)


@pytest.fixture
def example_frame(example_spectrum) -> SynthesisMatrix:
    """The 3x8 STC frame of (5/2, 10/3, 13/6)."""
    return stc(example_spectrum)


@pytest.fixture
def tight_4x5() -> SynthesisMatrix:
    return tdftst(4, 5)


####################################################################################################
# Random instances
#


def _composition(rng: random.Random, total: int, parts: int) -> List[int]:
    """Random composition of ``total`` into ``parts`` positive integers."""
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [total])]


def random_rational_spectrum(
    rng: random.Random, max_n: int = 40, max_ratio: int = 4, max_denominator: int = 12, min_ratio: int = 1
) -> Spectrum:
    """Positive rationals with denominators <= max_denominator and an integer trace M, N <= M <= max_ratio*N."""
    n = rng.randint(1, max_n)
    m = rng.randint(min_ratio * n, max_ratio * n)
    d = rng.randint(1, max_denominator)
    return Spectrum(tuple(F(a, d) for a in _composition(rng, m * d, n)))


def random_large_spectrum(rng: random.Random, max_n: int = 20, max_denominator: int = 12) -> Spectrum:
    """Decreasing spectrum with every eigenvalue >= 2."""
    n = rng.randint(1, max_n)
    m = rng.randint(2 * n, 4 * n)
    d = rng.randint(1, max_denominator)
    extra = (m - 2 * n) * d
    if extra == 0:
        parts = [0] * n
    else:
        # stars and bars: n nonnegative parts summing to extra
        cuts = sorted(rng.randint(0, extra) for _ in range(n - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [extra])]
    return Spectrum(tuple(sorted((F(2 * d + p, d) for p in parts), reverse=True)))


####################################################################################################
# Structured log capture
#


class StateCapture:
    """
    Collects the STATE:<event>,key=value lines the package logs at DEBUG level.

    Usage:
        capture = StateCapture(caplog)
        capture.start()
        tdftst(7, 11)
        blocks = capture.get_state_logs("block")
        assert blocks[0]['c1'] == '11'
    """

    STATE_PATTERN = re.compile(r'STATE:(\w+),(.*)')

    def __init__(self, caplog):
        self._caplog = caplog

    def start(self):
        self._caplog.set_level(logging.DEBUG, logger="spectral_tetris")
        self._caplog.clear()

    def _parse_state_line(self, line: str) -> Optional[dict]:
        idx = line.find('STATE:')
        if idx == -1:
            return None
        match = self.STATE_PATTERN.match(line[idx:])
        if not match:
            logger.warning(f"Could not parse state line: {line}")
            return None
        state = {'event': match.group(1)}
        for field in match.group(2).split(','):
            if '=' in field:
                key, value = field.split('=', 1)
                state[key] = value
        return state

    def get_state_logs(self, event: Optional[str] = None) -> List[dict]:
        states = []
        for record in self._caplog.records:
            state = self._parse_state_line(record.getMessage())
            if state and (event is None or state['event'] == event):
                states.append(state)
        return states

    def clear(self):
        self._caplog.clear()


@pytest.fixture
def state_capture(caplog) -> StateCapture:
    """Unstarted capture; call start() in the test body, where caplog's call-phase handler is live."""
    return StateCapture(caplog)


####################################################################################################
# Assertion helpers
#


def symbolic(frame: SynthesisMatrix) -> Dict[Tuple[int, int], Tuple[Fraction, int, int]]:
    """(row, col) -> (radicand, root order, root power)."""
    return {key: (e.radicand, e.root_order, e.root_power) for key, e in frame.entries.items()}


def assert_unit_columns(frame: SynthesisMatrix, tol: float = 1e-9):
    """Every column has squared norm 1 (exactly when the frame is exact)."""
    for col in range(frame.n_cols):
        mass = frame.column_mass(col)
        if frame.exact:
            assert mass == 1, f"Column {col} has squared norm {mass}, expected exactly 1"
        else:
            assert abs(mass - 1) <= tol, f"Column {col} has squared norm {mass}, expected 1"


def assert_row_masses(frame: SynthesisMatrix, lam: Spectrum, tol: float = 1e-9):
    """Row square sums equal the eigenvalues."""
    for row, (mass, value) in enumerate(zip(frame.row_masses(), lam)):
        if frame.exact and lam.exact:
            assert mass == value, f"Row {row} has square sum {mass}, expected exactly {value}"
        else:
            assert abs(mass - value) <= tol, f"Row {row} has square sum {mass}, expected {value}"


def assert_rows_orthogonal(frame: SynthesisMatrix, tol: float = 1e-9):
    for (a, b), value in frame_operator_entries(frame).items():
        if a != b:
            assert abs(value) <= tol, f"Rows {a} and {b} have inner product {value}"


def assert_report_passes(report: VerificationReport):
    failed = [f"{c.name}={c.max_residual:.3e}" for c in report.failures()]
    assert report.passed, f"Verification failed (tol {report.tolerance}): {', '.join(failed)}"


def assert_columns_identical(a: SynthesisMatrix, b: SynthesisMatrix):
    assert (a.n_rows, a.n_cols) == (b.n_rows, b.n_cols), (
        f"Shapes differ: {a.n_rows}x{a.n_cols} vs {b.n_rows}x{b.n_cols}"
    )
    for col in range(a.n_cols):
        assert a.column(col) == b.column(col), f"Column {col} differs: {a.column(col)} vs {b.column(col)}"


def assert_groups_orthonormal(frame: SynthesisMatrix, partition: FusionPartition, tol: float = 1e-9):
    """Numeric Gram matrix of every group is the identity."""
    dense = frame.to_dense()
    for index, group in enumerate(partition.groups):
        vectors = dense[:, list(group)]
        gram = vectors.conj().T @ vectors
        residual = float(np.max(np.abs(gram - np.eye(len(group)))))
        assert residual <= tol, f"Group {index} {list(group)} is not orthonormal (residual {residual:.3e})"
