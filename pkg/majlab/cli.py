"""Command line interface."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Tuple

import click

from majlab import ncpoly, search, suite
from majlab.ensemble import Ensemble
from majlab.exceptions import MajlabError
from majlab.report import RunReport
from majlab.util import parse_slurm_args, thread_cap, write_json

L = logging.getLogger(__name__)

VERIFY_ORDERS = {"3": (3,), "4": (4,), "all": (3, 4, 5)}


@contextmanager
def _as_click_errors():
    """Library errors become a one-line message with exit code 1."""
    try:
        yield
    except MajlabError as e:
        raise click.ClickException(str(e)) from e


def _parse_dims(ctx, param, value: str) -> Tuple[int, ...]:
    # pylint: disable=unused-argument
    try:
        dims = tuple(int(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None
    if any(n < 1 for n in dims):
        raise click.BadParameter(f"dimensions must be positive, got {value!r}")
    return dims


def _parse_nmax(ctx, param, value: int) -> int:
    # pylint: disable=unused-argument
    if value < 2 or value & (value - 1):
        raise click.BadParameter(f"must be a power of two >= 2, got {value}")
    return value


def _inherit(ctx: click.Context, name: str, value, default=None):
    """Subcommand value, else the group-level one, else ``default``."""
    if value is not None:
        return value
    inherited = ctx.obj.get(name)
    return default if inherited is None else inherited


def _finish(ctx: click.Context, report: RunReport, out: Optional[str]):
    if out is not None:
        report.write(Path(out))
        L.info("Report written to %s", out)
    if not ctx.obj["quiet"]:
        click.echo(report.summary())
    ctx.exit(report.exit_code)


@click.group()
@click.option(
    "-v", "--verbose", count=True, default=0, help="-v for WARNING, -vv for INFO, -vvv for DEBUG"
)
@click.option("--quiet", is_flag=True, default=False, help="Suppress the human summary")
@click.option(
    "-s", "--seed", type=click.IntRange(min=0), default=None, help="Default seed of all subcommands"
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    default=None,
    help="Default output path of subcommands",
)
@click.pass_context
def cli(ctx, verbose, quiet, seed, out):
    """Verify majorization inequalities for Taylor coefficients of matrix exponentials."""
    level = (logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 3)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet
    ctx.obj["seed"] = seed
    ctx.obj["out"] = out


@cli.command(short_help="Randomized verification of the k=3 and k=4 comparisons.")
@click.option(
    "--k", "order", type=click.Choice(sorted(VERIFY_ORDERS)), default="all", show_default=True
)
@click.option(
    "--dims",
    type=str,
    default="2,3,4,5,6,7,8",
    show_default=True,
    callback=_parse_dims,
    help="Comma-separated matrix sizes",
)
@click.option("--trials", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("-s", "--seed", type=click.IntRange(min=0), default=None, help="Default 0")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON report path")
@click.pass_context
def verify(
    ctx,
    order: str,
    dims: Tuple[int, ...],
    trials: int,
    seed: Optional[int],
    out: Optional[str],
):
    # pylint: disable=too-many-arguments
    """Run identity residuals, theorem margins, certificates and the baseline inequalities.

    Exits with 1 if any check fails.
    """
    seed = _inherit(ctx, "seed", seed, 0)
    out = _inherit(ctx, "out", out)
    with _as_click_errors():
        report = suite.run_verify(
            VERIFY_ORDERS[order], dims, trials, seed, progress=not ctx.obj["quiet"]
        )
    _finish(ctx, report, out)


@cli.command(short_help="Exact word-by-word proof of the D_k commutator identities.")
@click.option("--k", "order", type=click.Choice(["3", "4", "5"]), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON report path")
@click.pass_context
def prove(ctx, order: str, out: Optional[str]):
    """Expand ``R_k - H^k`` over {H, X} and compare it with its commutator form.

    Prints the canonical expansions and the difference; exits with 1 if it is nonzero.
    """
    k = int(order)
    out = _inherit(ctx, "out", out)
    with _as_click_errors():
        check = ncpoly.verify_identity(k)
    click.echo(f"R_{k} = {ncpoly.nc_rk(k)}")
    click.echo(f"D_{k} = {ncpoly.nc_dk(k)}")
    click.echo(f"D_{k} (H, X) = {check.lhs}")
    click.echo(f"expansion = {check.rhs}")
    click.echo(f"diff = {check.diff}")
    for word, coefficient in check.diff_terms():
        click.echo(f"  {word}: {coefficient}")
    report = RunReport("prove", {"k": k})
    report.record(f"identity_d{k}", -float(len(check.diff.terms)), 0.0, {"k": k})
    _finish(ctx, report, out)


@cli.command(short_help="Search for pairs violating lambda(H^k) <_w lambda(R_k).")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="YAML search configuration; flags override its values",
)
@click.option("--k", "order", type=click.IntRange(min=3), default=None)
@click.option("--dim", type=click.IntRange(min=1), default=None)
@click.option("--restarts", "num_restarts", type=click.IntRange(min=1), default=None)
@click.option("--steps", "steps_per_restart", type=click.IntRange(min=1), default=None)
@click.option("--step-size", type=float, default=None)
@click.option("-s", "--seed", "rng_seed", type=click.IntRange(min=0), default=None)
@click.option("--ensemble", type=click.Choice([e.value for e in Ensemble]), default=None)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    default=None,
    help="Report path  [default: violation_report.json]",
)
@click.option("--trace-csv", type=click.Path(dir_okay=False), default=None)
@click.option(
    "--log-dir",
    type=str,
    default="logs",
    show_default=True,
    help="Name of a directory to save logs to; on a shared file system",
)
@click.option(
    "--timeout-s",
    type=int,
    default=3600,
    show_default=True,
    help="Time to live for SLURM workers in seconds",
)
@click.option(
    "--slurm",
    multiple=True,
    type=(str, str),
    help="""
SLURM configuration values passed to submitit, e.g. `--slurm partition prod`.
DO NOT include the `slurm` prefix. Without this option restarts run locally,
in MAJLAB_THREADS processes.
    """,
)
@click.pass_context
def hunt(
    ctx,
    config_file: Optional[str],
    order: Optional[int],
    dim: Optional[int],
    num_restarts: Optional[int],
    steps_per_restart: Optional[int],
    step_size: Optional[float],
    rng_seed: Optional[int],
    ensemble: Optional[str],
    out: str,
    trace_csv: Optional[str],
    log_dir: str,
    timeout_s: int,
    slurm: Tuple[Tuple[str, str], ...],
):
    # pylint: disable=too-many-arguments, too-many-locals
    """Multi-restart descent of the smallest Ky Fan margin of ``R_k`` against ``H^k``.

    Writes a ViolationReport to OUT. Exits with 1 if a control order (k = 3 or 4) reports a
    counterexample.
    """
    overrides = {
        "k": order,
        "dim": dim,
        "num_restarts": num_restarts,
        "steps_per_restart": steps_per_restart,
        "step_size": step_size,
        "rng_seed": _inherit(ctx, "seed", rng_seed),
        "ensemble": ensemble,
    }
    try:
        threads = thread_cap()
    except ValueError as e:
        raise click.UsageError(str(e)) from e
    out = _inherit(ctx, "out", out, "violation_report.json")
    restarts = []
    with _as_click_errors():
        if config_file is not None:
            config = search.SearchConfig.from_yaml(config_file, **overrides)
        elif order is None or dim is None:
            raise click.UsageError("--k and --dim are required without --config")
        else:
            config = search.SearchConfig(
                **{key: value for key, value in overrides.items() if value is not None}
            )
        report = search.hunt(
            config,
            threads=threads,
            slurm_args=parse_slurm_args(slurm),
            log_dir=log_dir,
            timeout_s=timeout_s,
            restarts=restarts,
        )
    report.write(Path(out))
    if trace_csv is not None:
        search.write_margin_trace_csv(restarts, trace_csv)
    status = report.status
    if not ctx.obj["quiet"]:
        click.echo(
            f"k={config.k} dim={config.dim}: best margin {report.best_margin:.6e} "
            f"(restart {report.best_restart}), {status}"
        )
    if status == search.MarginStatus.COUNTEREXAMPLE:
        outcome = search.reverify(report)
        if not ctx.obj["quiet"]:
            click.echo(f"reverify: {outcome.status}")
        if config.k in (3, 4):
            ctx.exit(1)


@cli.command(short_help="Lie-Trotter error sweep over n = 1, 2, 4, ..., nmax.")
@click.option("--t", "t", type=float, default=1.0, show_default=True)
@click.option("--nmax", type=int, default=128, show_default=True, callback=_parse_nmax)
@click.option("-s", "--seed", type=click.IntRange(min=0), default=None, help="Default 0")
@click.option("--dim", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--commuting", is_flag=True, default=False, help="Use a commuting pair")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path")
@click.option("--report", "report_out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def trotter(
    ctx,
    t: float,
    nmax: int,
    seed: Optional[int],
    dim: int,
    commuting: bool,
    out: Optional[str],
    report_out: Optional[str],
):
    # pylint: disable=too-many-arguments
    """Write ``n, error, ratio`` and check monotone O(1/n) decay.

    Exits with 1 if the decay or the commuting control fails.
    """
    seed = _inherit(ctx, "seed", seed, 0)
    out = _inherit(ctx, "out", out)
    with _as_click_errors():
        frame, report = suite.run_trotter(t, nmax, seed, dim, commuting)
    if out is not None:
        Path(out).parent.mkdir(exist_ok=True, parents=True)
        frame.to_csv(out, index=False)
    elif not ctx.obj["quiet"]:
        click.echo(frame.to_string(index=False))
    _finish(ctx, report, report_out)


@cli.command(short_help="Recompute a violation report from its stored matrices.")
@click.argument("report_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON result path")
@click.pass_context
def reverify(ctx, report_file: str, out: Optional[str]):
    """Exits with 0 when REPORT_FILE is reproduced (confirmed or inconclusive), 1 otherwise."""
    out = _inherit(ctx, "out", out)
    with _as_click_errors():
        outcome = search.reverify(Path(report_file))
    if out is not None:
        write_json(
            Path(out),
            {
                "status": outcome.status,
                "recomputed_margin": outcome.recomputed_margin,
                "tightened_margin": outcome.tightened_margin,
                "detail": outcome.detail,
            },
        )
    if not ctx.obj["quiet"]:
        click.echo(f"{outcome.status}: recomputed margin {outcome.recomputed_margin:.6e}")
    ctx.exit(0 if outcome else 1)
