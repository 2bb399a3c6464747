"""
Command-line front end.

Every experiment command writes report rows (JSON lines or CSV) to stdout or
--out; logs go to stderr. Exit codes: 0 success, 1 failed invariant or check,
2 usage error.
"""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from dotenv import load_dotenv
from mcp.server.fastmcp.utilities.logging import configure_logging, get_logger

from cyclomoment import experiments
from cyclomoment.config import RunConfig, default_golden_dir
from cyclomoment.errors import CyclomomentError, LatticeConditionError
from cyclomoment.lattice.loglattice import build_lattice, export_text
from cyclomoment.numtheory.characters import Parity
from cyclomoment.reports import OutputFormat, render
from cyclomoment.selftest import run_selftest, write_golden

logger = get_logger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

app = typer.Typer(
    name="cyclomoment",
    help="Negative moments of L(1, chi), the log-cyclotomic-unit lattice and short generator recovery.",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def main_callback(
    log_level: str = typer.Option("WARNING", "--log-level", envvar="CYCLOMOMENT_LOG_LEVEL", help="Logging level"),
):
    level = log_level.upper()
    if level not in LOG_LEVELS:
        raise typer.BadParameter(f"Choose one of {', '.join(LOG_LEVELS)}.", param_hint="--log-level")
    configure_logging(level)
    logging.getLogger("cyclomoment").setLevel(level)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")


def _execute(subcommand: str, **options) -> list:
    try:
        config = RunConfig(subcommand=subcommand, **options)
        rows = experiments.run(config)
    except LatticeConditionError as error:
        typer.echo(f"Error: {error}", err=True)
        raise typer.Exit(code=1)
    except (CyclomomentError, ValueError) as error:
        raise typer.BadParameter(str(error))
    _emit(render(rows, config.format), config.out)
    return rows


# shared option declarations
Q = typer.Option(None, "--q", help="Modulus")
P = typer.Option(None, "--p", help="Prime p of q = p^k")
K = typer.Option(None, "--k", help="Exponent k of q = p^k")
PRIMES_FROM = typer.Option(None, "--primes-from", help="Run every prime in [from, to]")
PRIMES_TO = typer.Option(None, "--primes-to")
THREADS = typer.Option(1, "--threads", envvar="CYCLOMOMENT_THREADS", min=1, help="Worker threads")
FORMAT = typer.Option(OutputFormat.JSON, "--format", case_sensitive=False, help="Output format")
OUT = typer.Option(None, "--out", help="Write rows to this file instead of stdout")
TRIALS = typer.Option(1000, "--trials", min=1)
SEED = typer.Option(0, "--seed", min=0)
R = typer.Option(1.0, "--r", help="Standard deviation of the Gaussian coordinates")
GOLDEN_DIR = typer.Option(None, "--golden-dir", envvar="CYCLOMOMENT_GOLDEN_DIR", help="Directory of golden files")


@app.command()
def moments(
    q: Optional[int] = Q,
    p: Optional[int] = P,
    k: Optional[int] = K,
    primes_from: Optional[int] = PRIMES_FROM,
    primes_to: Optional[int] = PRIMES_TO,
    parity: Parity = typer.Option(Parity.EVEN, "--parity", case_sensitive=False),
    weighted: bool = typer.Option(False, "--weighted", help="Weight each character by 1/conductor"),
    threads: int = THREADS,
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Negative square moment of L(1, chi) against its main term."""
    _execute(
        "moments",
        q=q,
        p=p,
        k=k,
        primes_from=primes_from,
        primes_to=primes_to,
        parity=parity,
        weighted=weighted,
        threads=threads,
        format=format,
        out=out,
    )


@app.command("weighted-sum")
def weighted_sum(
    q: Optional[int] = Q,
    l: int = typer.Option(1, "--l", min=1, help="Congruence modulus for m = +-n"),
    X: float = typer.Option(1e4, "--X", help="Scale of the exponential weight"),
    eps_trunc: float = typer.Option(1e-12, "--eps-trunc", help="Drop pairs whose weight is below this"),
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Weighted Moebius double sum, split into diagonal and off-diagonal parts."""
    _execute("weighted-sum", q=q, l=l, X=X, eps_trunc=eps_trunc, format=format, out=out)


@app.command("dual-norms")
def dual_norms(
    q: Optional[int] = Q,
    p: Optional[int] = P,
    k: Optional[int] = K,
    primes_from: Optional[int] = PRIMES_FROM,
    primes_to: Optional[int] = PRIMES_TO,
    C: float = typer.Option(1.0, "--C", help="Constant of the generic upper bound"),
    delta: float = typer.Option(0.0, "--delta", help="Slack applied to the asymptotic decoding radius"),
    skip_algebra: bool = typer.Option(False, "--skip-algebra", help="Character route only"),
    threads: int = THREADS,
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Dual basis norms by linear algebra and by characters, with the asymptotic comparisons."""
    _execute(
        "dual-norms",
        q=q,
        p=p,
        k=k,
        primes_from=primes_from,
        primes_to=primes_to,
        C=C,
        delta=delta,
        skip_algebra=skip_algebra,
        threads=threads,
        format=format,
        out=out,
    )


@app.command()
def sgp(
    q: Optional[int] = Q,
    p: Optional[int] = P,
    k: Optional[int] = K,
    trials: int = TRIALS,
    seed: int = SEED,
    r: float = R,
    E: int = typer.Option(10, "--E", min=0, help="Unit exponents are drawn from [-E, E]"),
    lattice: Optional[Path] = typer.Option(None, "--lattice", help="Lattice file written by export-lattice"),
    threads: int = THREADS,
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Monte-Carlo short generator recovery against the success-probability bound."""
    _execute(
        "sgp",
        q=q,
        p=p,
        k=k,
        trials=trials,
        seed=seed,
        r=r,
        E=E,
        lattice=lattice,
        threads=threads,
        format=format,
        out=out,
    )


@app.command("tail-profile")
def tail_profile(
    q: Optional[int] = Q,
    p: Optional[int] = P,
    k: Optional[int] = K,
    trials: int = TRIALS,
    seed: int = SEED,
    r: float = R,
    t: Optional[List[float]] = typer.Option(None, "--t", help="Threshold; repeat for a grid"),
    threads: int = THREADS,
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Empirical tail of the normalized dual projections against the exponential bound."""
    options = dict(q=q, p=p, k=k, trials=trials, seed=seed, r=r, threads=threads, format=format, out=out)
    if t:
        options["t_grid"] = t
    _execute("tail-profile", **options)


@app.command("orthogonality-check")
def orthogonality_check(
    q: Optional[int] = Q,
    primes_from: Optional[int] = PRIMES_FROM,
    primes_to: Optional[int] = PRIMES_TO,
    weighted: bool = typer.Option(False, "--weighted", help="Only the 1/conductor weighted identity"),
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Character-sum side against divisor-sum side of the orthogonality identity."""
    rows = _execute(
        "orthogonality-check",
        q=q,
        primes_from=primes_from,
        primes_to=primes_to,
        weighted=weighted,
        format=format,
        out=out,
    )
    if not all(row.passed for row in rows):
        raise typer.Exit(code=1)


@app.command("export-lattice")
def export_lattice(
    q: int = typer.Option(..., "--q", help="Prime-power modulus"),
    out: Path = typer.Option(..., "--out", help="Destination file"),
):
    """Write basis and dual basis in the textual matrix format."""
    try:
        lattice = build_lattice(q)
    except LatticeConditionError as error:
        typer.echo(f"Error: {error}", err=True)
        raise typer.Exit(code=1)
    except CyclomomentError as error:
        raise typer.BadParameter(str(error), param_hint="--q")
    export_text(lattice, out)


@app.command()
def selftest(
    quick: bool = typer.Option(False, "--quick", help="Small moduli only"),
    golden_dir: Optional[Path] = GOLDEN_DIR,
    format: OutputFormat = FORMAT,
    out: Optional[Path] = OUT,
):
    """Run the invariant suites and the golden regression checks."""
    results = run_selftest(golden_dir or default_golden_dir(), quick=quick)
    _emit(render([result.to_row() for result in results], format), out)
    failed = [result.name for result in results if not result.passed]
    if failed:
        typer.echo(f"FAILED: {', '.join(failed)}", err=True)
        raise typer.Exit(code=1)


@app.command()
def golden(
    golden_dir: Optional[Path] = GOLDEN_DIR,
    name: Optional[List[str]] = typer.Option(None, "--name", help="Recompute only these golden sets"),
):
    """Recompute the golden regression values and write them."""
    for path in write_golden(golden_dir or default_golden_dir(), name or None):
        typer.echo(str(path))


def main():
    load_dotenv()
    app()


if __name__ == "__main__":
    main()
