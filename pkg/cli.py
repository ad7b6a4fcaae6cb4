"""Command-line front end: one subcommand per operation, JSON (and CSV) out."""
import logging
import sys
from pathlib import Path
from typing import Annotated, Literal, Optional

import click
import jsonschema
import pandas as pd
import typer
from pydantic import BaseModel, Field, ValidationError

from config.settings import settings
from modules import commands
from modules.dataValidation import Couplings, LabOverrides
from modules.errors import ReductionError
from modules.gadget import GadgetParams
from modules.graph import Graph, parse_graph
from modules.landscape import qb_sweep
from modules.reduction import ReductionCertificate, resolve_params, verify_small
from modules.report import QB_SWEEP_COLUMNS, TRAJECTORY_COLUMNS, emit_report, load_document, strip_envelope, write_frame

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True, help="MAX-CUT to critical Ising reduction toolkit.")


class RunConfig(BaseModel):
    subcommand: Literal["reduce", "decide", "partition", "landscape", "spectrum", "glauber", "verify", "maxcut"]
    inputs: dict[str, Path] = {}
    overrides: dict = {}
    output: Optional[Path] = None
    seed: int = 0
    threads: int = Field(default_factory=lambda: settings.runtime.threads, ge=1)
    verbose: bool = False


# ============================================
# Shared options
# ============================================

GraphOpt = Annotated[Path, typer.Option("--graph", exists=True, dir_okay=False, help="Edge-list file")]
OutputOpt = Annotated[Optional[Path], typer.Option("--output", "-o", help="JSON output path (default stdout)")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Random seed")]
ThreadsOpt = Annotated[Optional[int], typer.Option("--threads", min=1, help="Worker threads")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")]

ModeOpt = Annotated[str, typer.Option("--mode", help="paper or lab")]
EpsilonOpt = Annotated[Optional[float], typer.Option("--epsilon")]
TauOpt = Annotated[Optional[float], typer.Option("--tau")]
TOpt = Annotated[Optional[int], typer.Option("--t", help="Cloud size")]
BhatOpt = Annotated[Optional[float], typer.Option("--bhat")]
UhatOpt = Annotated[Optional[float], typer.Option("--uhat")]
DeltaOpt = Annotated[Optional[float], typer.Option("--delta")]
DeltaPrimeOpt = Annotated[Optional[float], typer.Option("--delta-prime")]
MaxDegreeOpt = Annotated[Optional[int], typer.Option("--max-degree")]


def _configure(cfg: RunConfig) -> RunConfig:
    level = logging.DEBUG if cfg.verbose else settings.runtime.log_level
    logging.basicConfig(level=level, stream=sys.stderr, force=True)
    logger.debug(f"Run config: {cfg.model_dump()}")
    return cfg


def _read_graph(path: Path) -> Graph:
    return parse_graph(path.read_text())


def _mode(mode: str) -> str:
    if mode not in ("paper", "lab"):
        raise click.BadParameter(f"mode must be 'paper' or 'lab', got {mode!r}", param_hint="--mode")
    return mode


def _params(g: Graph, mode: str, epsilon, tau, t, bhat, uhat, delta, delta_prime, max_degree) -> GadgetParams:
    overrides = None
    if mode == "lab":
        if t is None:
            raise click.BadParameter("lab mode needs --t", param_hint="--t")
        overrides = LabOverrides(t=t, bhat=bhat, uhat=uhat, delta=delta, delta_prime=delta_prime, max_degree=max_degree)
    return resolve_params(g, epsilon, tau, mode, overrides)


# ============================================
# Subcommands
# ============================================

@app.command()
def maxcut(graph: GraphOpt, output: OutputOpt = None, threads: ThreadsOpt = None, verbose: VerboseOpt = False):
    """Exact maximum cut of a small graph."""
    cfg = _configure(RunConfig(subcommand="maxcut", inputs={"graph": graph}, output=output,
                               threads=threads or settings.runtime.threads, verbose=verbose))
    emit_report(commands.run_maxcut(_read_graph(graph), threads=cfg.threads), "maxcut", cfg.output)


@app.command()
def partition(
    graph: GraphOpt,
    t: Annotated[int, typer.Option("--t", help="Cloud size")],
    beta: Annotated[float, typer.Option("--beta")],
    gamma: Annotated[float, typer.Option("--gamma")] = 0.0,
    method: Annotated[str, typer.Option("--method", help="brute, mag or orthant")] = "mag",
    signs: Annotated[Optional[str], typer.Option("--signs", help="Sign pattern for --method orthant")] = None,
    output: OutputOpt = None,
    threads: ThreadsOpt = None,
    verbose: VerboseOpt = False,
):
    """log Z of a cloud instance by brute force, magnetization vectors or one orthant."""
    if method not in ("brute", "mag", "orthant"):
        raise click.BadParameter(f"unknown method {method!r}", param_hint="--method")
    cfg = _configure(RunConfig(subcommand="partition", inputs={"graph": graph}, output=output,
                               overrides={"t": t, "beta": beta, "gamma": gamma, "method": method, "signs": signs},
                               threads=threads or settings.runtime.threads, verbose=verbose))
    couplings = Couplings(t=t, beta=beta, gamma=gamma)
    result = commands.run_partition(_read_graph(graph), couplings, method, signs, threads=cfg.threads)
    emit_report(result, "partition", cfg.output)


@app.command()
def spectrum(
    graph: GraphOpt,
    t: Annotated[int, typer.Option("--t", help="Cloud size")],
    beta: Annotated[float, typer.Option("--beta")],
    gamma: Annotated[float, typer.Option("--gamma")] = 0.0,
    delta: Annotated[Optional[float], typer.Option("--delta", help="Schedule exponent for the 1 + 8 t^(-1/2+2 delta) reference")] = None,
    output: OutputOpt = None,
    verbose: VerboseOpt = False,
):
    """Exact grouped spectrum, diameter bound and psd shift."""
    cfg = _configure(RunConfig(subcommand="spectrum", inputs={"graph": graph}, output=output,
                               overrides={"t": t, "beta": beta, "gamma": gamma, "delta": delta}, verbose=verbose))
    result = commands.run_spectrum(_read_graph(graph), Couplings(t=t, beta=beta, gamma=gamma), delta=delta)
    emit_report(result, "spectrum", cfg.output)


@app.command()
def landscape(
    graph: Annotated[Optional[Path], typer.Option("--graph", exists=True, dir_okay=False)] = None,
    mode: ModeOpt = "lab",
    epsilon: EpsilonOpt = None,
    tau: TauOpt = None,
    t: TOpt = None,
    bhat: BhatOpt = None,
    uhat: UhatOpt = None,
    delta: DeltaOpt = None,
    delta_prime: DeltaPrimeOpt = None,
    max_degree: MaxDegreeOpt = None,
    scan_q: Annotated[bool, typer.Option("--scan-q", help="Scan dQ/db for the maximizer of Q")] = False,
    maximize: Annotated[bool, typer.Option("--maximize", help="Maximize Phi over the orthant of --signs")] = False,
    signs: Annotated[Optional[str], typer.Option("--signs")] = None,
    qb_sweep_flag: Annotated[bool, typer.Option("--qb-sweep", help="Q(bhat)-Q(0) expansion sweep over t=2^10..2^24")] = False,
    csv: Annotated[Optional[Path], typer.Option("--csv", help="CSV output for --qb-sweep")] = None,
    output: OutputOpt = None,
    verbose: VerboseOpt = False,
):
    """Q maximizer scan, orthant maximization of Phi, or the quartic expansion sweep."""
    cfg = _configure(RunConfig(subcommand="landscape", output=output, verbose=verbose,
                               inputs={"graph": graph} if graph else {}))
    if qb_sweep_flag:
        if delta is None:
            raise click.BadParameter("--qb-sweep needs --delta", param_hint="--delta")
        frame = qb_sweep([2**k for k in range(10, 25)], delta)
        write_frame(frame, csv or sys.stdout, QB_SWEEP_COLUMNS)
        return
    if graph is None:
        raise click.UsageError("landscape needs --graph unless --qb-sweep is given")
    if maximize and not signs:
        raise click.BadParameter("--maximize needs --signs", param_hint="--signs")

    g = _read_graph(graph)
    p = _params(g, _mode(mode), epsilon, tau, t, bhat, uhat, delta, delta_prime, max_degree)
    result = commands.run_landscape(g, p, scan_q=scan_q, signs=signs if maximize else None)
    emit_report(result, "landscape", cfg.output)


@app.command()
def reduce(
    graph: GraphOpt,
    A: Annotated[int, typer.Option("--A", help="Cut threshold")],
    tau: Annotated[float, typer.Option("--tau", help="Gap factor")],
    mode: ModeOpt = "lab",
    epsilon: EpsilonOpt = None,
    t: TOpt = None,
    bhat: BhatOpt = None,
    uhat: UhatOpt = None,
    delta: DeltaOpt = None,
    delta_prime: DeltaPrimeOpt = None,
    max_degree: MaxDegreeOpt = None,
    output: OutputOpt = None,
    verbose: VerboseOpt = False,
):
    """Build the reduction certificate (log T1, log T2, psd shift, diameter)."""
    cfg = _configure(RunConfig(subcommand="reduce", inputs={"graph": graph}, output=output, verbose=verbose))
    g = _read_graph(graph)
    overrides = None
    if _mode(mode) == "lab":
        if t is None:
            raise click.BadParameter("lab mode needs --t", param_hint="--t")
        overrides = LabOverrides(t=t, bhat=bhat, uhat=uhat, delta=delta, delta_prime=delta_prime, max_degree=max_degree)
    cert = commands.run_reduce(g, tau, A, mode=mode, epsilon=epsilon, overrides=overrides)
    emit_report(cert, "certificate", cfg.output)


@app.command()
def decide(
    certificate: Annotated[Path, typer.Option("--certificate", exists=True, dir_okay=False)],
    log_z_hat: Annotated[float, typer.Option("--log-z-hat", help="Estimate of log Z(J - lambda_min I)")],
    ln_r: Annotated[float, typer.Option("--ln-r", help="Approximation factor, natural log")] = 0.0,
    output: OutputOpt = None,
    verbose: VerboseOpt = False,
):
    """Read an approximate log partition function against a certificate."""
    cfg = _configure(RunConfig(subcommand="decide", inputs={"certificate": certificate}, output=output, verbose=verbose))
    cert = ReductionCertificate.model_validate(strip_envelope(load_document(certificate)))
    emit_report(commands.run_decide(cert, log_z_hat, ln_r), "decide", cfg.output)


@app.command()
def verify(
    graph: GraphOpt,
    A: Annotated[int, typer.Option("--A")],
    tau: Annotated[float, typer.Option("--tau")],
    t: Annotated[int, typer.Option("--t")],
    bhat: BhatOpt = None,
    uhat: UhatOpt = None,
    delta: DeltaOpt = None,
    delta_prime: DeltaPrimeOpt = None,
    max_degree: MaxDegreeOpt = None,
    output: OutputOpt = None,
    threads: ThreadsOpt = None,
    verbose: VerboseOpt = False,
):
    """Exact log Z against T1 and T2 on a desk-scale lab instance."""
    cfg = _configure(RunConfig(subcommand="verify", inputs={"graph": graph}, output=output,
                               threads=threads or settings.runtime.threads, verbose=verbose))
    g = _read_graph(graph)
    p = _params(g, "lab", None, tau, t, bhat, uhat, delta, delta_prime, max_degree)
    emit_report(verify_small(g, p, A, threads=cfg.threads), "verify", cfg.output)


@app.command()
def glauber(
    beta: Annotated[float, typer.Option("--beta", min=0.0)],
    N: Annotated[int, typer.Option("--N", min=1)],
    steps: Annotated[int, typer.Option("--steps", min=1)],
    stride: Annotated[Optional[int], typer.Option("--stride", min=1, help="Record every k steps (default N)")] = None,
    replicas: Annotated[int, typer.Option("--replicas", min=1)] = 1,
    seed: SeedOpt = 0,
    csv: Annotated[Optional[Path], typer.Option("--csv", help="Trajectory CSV (replica, step, m)")] = None,
    output: OutputOpt = None,
    threads: ThreadsOpt = None,
    verbose: VerboseOpt = False,
):
    """Heat-bath dynamics on the complete graph (Curie-Weiss)."""
    cfg = _configure(RunConfig(subcommand="glauber", output=output, seed=seed, verbose=verbose,
                               threads=threads or settings.runtime.threads))
    summary, runs = commands.run_glauber(N, beta, steps, stride or N, replicas, seed=cfg.seed, threads=cfg.threads)
    if csv is not None:
        write_frame(pd.concat([run.to_frame() for run in runs], ignore_index=True), csv, TRAJECTORY_COLUMNS)
    emit_report(summary, "glauber", cfg.output)


# ============================================
# Entry point
# ============================================

def main(argv: Optional[list[str]] = None) -> int:
    """Run one subcommand; 0 on success, 1 on a domain error, 2 on a usage error."""
    try:
        result = app(args=argv, prog_name="critical-ising", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except (ReductionError, ValidationError, jsonschema.ValidationError, OSError) as e:
        typer.echo(f"error: {e}", err=True)
        return 1
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
