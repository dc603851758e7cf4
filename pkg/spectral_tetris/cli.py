"""
Command line interface.

    spectral-tetris construct --n 4 --m 5 --tight --out frame.json
    spectral-tetris rff --eigenvalues 5/2,10/3,13/6
    spectral-tetris fusion --eigenvalues 4,4,3,3,2,2 --dims 6,5,4,3
    spectral-tetris verify frame.json
    spectral-tetris export frame.json --format mtx
    spectral-tetris order --eigenvalues 3/2,2,5/2

Exit codes: 0 success, 1 validation error (including failed verification),
2 when the requested fusion frame dimensions are not majorized, 64 usage.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import click

from . import __version__
from .construct import ConstructRequest, Method, blockwise_order, construct, order_spectrum
from .core import DEFAULT_TOLERANCE, Spectrum, SpectrumOrder, SynthesisMatrix, format_scalar
from .documents import (
    FrameDocument,
    dumps,
    parse_int_list,
    parse_spectrum,
    read_document,
    to_csv,
    to_matrix_market,
    write_document,
)
from .errors import MajorizationFailed, SpectralTetrisError, SpectrumError
from .fusion import DimensionProfile, build_fusion_frame, reference_fusion_frame, spectral_tetris_frame
from .verify import sparsity, verify_frame, verify_fusion

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MAJORIZATION = 2
EXIT_USAGE = 64

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def _configure_logging(verbose: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(format=LOG_FORMAT, datefmt="%H:%M:%S")
    logging.getLogger("spectral_tetris").setLevel(level)


def _echo_frame_summary(frame: SynthesisMatrix) -> None:
    report = sparsity(frame)
    click.echo(f"frame {frame.n_rows}x{frame.n_cols} built by {frame.method}")
    line = f"nonzeros {report.structural_nonzeros}"
    if report.formula_value is not None:
        line += f" (formula {report.formula_value}"
        line += "" if report.optimal is None else f", {'optimal' if report.optimal else 'not optimal'}"
        line += ")"
    click.echo(line)
    if frame.block_log:
        click.echo("blocks " + " ".join(f"{r.kind}@{r.row_offset},{r.col_offset}" for r in frame.block_log))
    for warning in frame.warnings:
        click.echo(f"warning: {warning}")


def _echo_groups(groups: Sequence[Sequence[int]]) -> None:
    for index, group in enumerate(groups, 1):
        click.echo(f"W{index}: {','.join(str(col) for col in group)}")


def _frame_for(lam: Spectrum, method: str, allow_small: bool) -> SynthesisMatrix:
    if Method(method) is Method.AUTO and not allow_small:
        return spectral_tetris_frame(lam)
    return construct(ConstructRequest(lam.n, lam.m, spectrum=lam, method=Method(method), allow_small=allow_small))


_METHODS = click.Choice([m.value for m in Method])
_ORDERS = click.Choice([o.value for o in SpectrumOrder])


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for structured step lines.")
@click.version_option(version=__version__)
def cli(verbose: int):
    """Spectral tetris frames and fusion frames."""
    _configure_logging(verbose)


@cli.command("construct")
@click.option("--n", "n", type=int, help="Dimension N.")
@click.option("--m", "m", type=int, help="Number of vectors M.")
@click.option("--tight", is_flag=True, help="Use the tight spectrum M/N.")
@click.option("--eigenvalues", help='Comma separated, e.g. "5/2,10/3,13/6".')
@click.option("--method", type=_METHODS, default=Method.AUTO.value, show_default=True)
@click.option("--order", type=_ORDERS, default=SpectrumOrder.GIVEN.value, show_default=True,
              help="Reorder the eigenvalues before construction.")
@click.option("--allow-small-eigenvalues", is_flag=True, help="Let stc attempt eigenvalues below 2.")
@click.option("--block-order", help='Tight only: block sizes, e.g. "2,3,2,3".')
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write a FrameDocument here.")
def construct_command(n, m, tight, eigenvalues, method, order, allow_small_eigenvalues, block_order, out):
    """Build a synthesis matrix."""
    if tight == (eigenvalues is not None):
        raise click.UsageError("give exactly one of --tight or --eigenvalues")
    permutation = None
    if tight:
        if n is None or m is None:
            raise click.UsageError("--tight needs --n and --m")
        lam = Spectrum.tight(n, m)
        request = ConstructRequest(
            n, m, tight=True, method=Method(method), allow_small=allow_small_eigenvalues,
            block_order=None if block_order is None else parse_int_list(block_order, "block size"),
        )
    else:
        if block_order is not None:
            raise click.UsageError("--block-order needs --tight")
        lam = parse_spectrum(eigenvalues)
        if (n is not None and n != lam.n) or (m is not None and m != lam.m):
            raise SpectrumError(f"eigenvalues give N={lam.n}, M={lam.m}; flags say N={n}, M={m}")
        lam, permutation = order_spectrum(lam, SpectrumOrder(order))
        request = ConstructRequest(lam.n, lam.m, spectrum=lam, method=Method(method),
                                   allow_small=allow_small_eigenvalues)
    frame = construct(request)
    _echo_frame_summary(frame)
    if permutation is not None and permutation != tuple(range(lam.n)):
        click.echo(f"order {','.join(map(str, permutation))} -> {lam}")
    if out is not None:
        write_document(FrameDocument(frame, lam, permutation=permutation), out)
        click.echo(f"wrote {out}")


@cli.command("rff")
@click.option("--eigenvalues", required=True)
@click.option("--method", type=_METHODS, default=Method.AUTO.value, show_default=True)
@click.option("--allow-small-eigenvalues", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
def rff_command(eigenvalues, method, allow_small_eigenvalues, out):
    """Reference fusion frame of a spectrum."""
    lam = parse_spectrum(eigenvalues)
    reference = reference_fusion_frame(lam, _frame_for(lam, method, allow_small_eigenvalues))
    click.echo(f"dims {','.join(map(str, reference.dims))}")
    _echo_groups(reference.partition.groups)
    if out is not None:
        write_document(FrameDocument(reference.frame, lam, reference.partition), out)
        click.echo(f"wrote {out}")


@cli.command("fusion")
@click.option("--eigenvalues", required=True)
@click.option("--dims", required=True, help='Subspace dimensions, e.g. "6,5,4,3".')
@click.option("--method", type=_METHODS, default=Method.AUTO.value, show_default=True)
@click.option("--allow-small-eigenvalues", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
def fusion_command(eigenvalues, dims, method, allow_small_eigenvalues, out):
    """Spectral tetris fusion frame with prescribed subspace dimensions."""
    lam = parse_spectrum(eigenvalues)
    profile = DimensionProfile(parse_int_list(dims, "dimension"))
    frame = _frame_for(lam, method, allow_small_eigenvalues)
    partition = build_fusion_frame(lam, profile, frame)
    _echo_groups(partition.groups)
    report = verify_fusion(frame, partition, profile, lam)
    for line in report.summary_lines():
        click.echo(line)
    if out is not None:
        write_document(FrameDocument(frame, lam, partition), out)
        click.echo(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


@cli.command("verify")
@click.argument("document", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--tol", type=float, default=DEFAULT_TOLERANCE, show_default=True)
def verify_command(document, tol):
    """Check a FrameDocument: unit columns, orthogonal rows, spectrum (and partition)."""
    doc = read_document(document)
    report = verify_frame(doc.frame, doc.spectrum, tol)
    for line in report.summary_lines():
        click.echo(line)
    passed = report.passed
    if doc.partition is not None:
        fusion = verify_fusion(doc.frame, doc.partition, doc.partition.sizes, doc.spectrum, tol)
        for line in fusion.summary_lines():
            click.echo(line)
        passed = passed and fusion.passed
    click.echo("OK" if passed else "FAILED")
    return EXIT_OK if passed else EXIT_VALIDATION


@cli.command("export")
@click.argument("document", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "mtx", "csv"]), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Defaults to standard output.")
def export_command(document, fmt, out):
    """Convert a FrameDocument to JSON, MatrixMarket or CSV."""
    doc = read_document(document)
    text = {"json": dumps, "mtx": lambda d: to_matrix_market(d.frame), "csv": lambda d: to_csv(d.frame)}[fmt](doc)
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text)
        logger.info(f"[export] wrote {fmt} to {out}")


@cli.command("order")
@click.option("--eigenvalues", required=True)
def order_command(eigenvalues):
    """Blockwise ordering: as many integral partial sums as possible."""
    lam = parse_spectrum(eigenvalues)
    result = blockwise_order(lam)
    click.echo(f"permutation {','.join(map(str, result.permutation))}")
    click.echo(f"eigenvalues {','.join(format_scalar(v) for v in result.spectrum)}")
    click.echo(f"integral prefixes {result.integral_prefixes} ({'exact' if result.certified else 'heuristic'})")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="spectral-tetris",
                          standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except MajorizationFailed as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_MAJORIZATION
    except SpectralTetrisError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_VALIDATION
    except click.ClickException as e:
        e.show()
        return EXIT_VALIDATION
    except click.Abort:
        return EXIT_VALIDATION
    return result if isinstance(result, int) else EXIT_OK
