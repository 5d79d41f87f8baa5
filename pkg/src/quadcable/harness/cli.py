"""Command line: ``quadcable simulate | verify | scenarios list``.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 verification failure.
"""
from __future__ import annotations

import dataclasses
import sys

import click

from ..ctrl import GraphError
from ..plant import NumericalFailure
from .config import ConfigError, bundled_scenarios, load_scenario, read_document
from .sim import ControlFailure, run_simulation, write_trace
from .verify import MODES, verify

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


@click.group()
def main():
    """Multi-quadrotor cable-suspended load simulator."""


@main.command()
@click.argument("config")
@click.option("--out", "out", required=True, type=click.Path(dir_okay=False), help="trace CSV path")
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False), help="metrics JSON path")
@click.option("--duration", type=float, help="override the simulated duration (s)")
@click.option("--dt", type=float, help="override the plant step (s)")
def simulate(config, out, metrics_path, duration, dt):
    """Run CONFIG (a JSON file or a bundled scenario name)."""
    try:
        cfg = load_scenario(config)
        if duration is not None:
            if not duration > 0:
                raise ConfigError("--duration", "must be positive")
            cfg = dataclasses.replace(cfg, duration=duration)
        if dt is not None:
            ratio = cfg.control_period / dt if dt > 0 else 0.0
            if not dt > 0 or abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
                raise ConfigError("--dt", "must be positive and divide the control period")
            cfg = dataclasses.replace(cfg, dt=dt)
    except (ConfigError, GraphError, ValueError, FileNotFoundError) as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    try:
        trace, metrics = run_simulation(cfg)
    except (NumericalFailure, ControlFailure) as exc:
        cond = getattr(exc, "condition", float("nan"))
        click.echo(f"numerical failure: {exc} (condition number {cond:.3g})", err=True)
        sys.exit(EXIT_NUMERICAL)
    write_trace(trace, out)
    doc = metrics.to_json()
    if metrics_path:
        with open(metrics_path, "w") as fh:
            fh.write(doc + "\n")
    click.echo(doc)


@main.command("verify")
@click.argument("mode", type=click.Choice(MODES))
def verify_cmd(mode):
    """Run a verification suite and report worst-case residuals."""
    report = verify(mode)
    click.echo(report.summary())
    for line in report.details:
        click.echo(f"  {line}")
    sys.exit(EXIT_OK if report.passed else EXIT_VERIFY)


@main.group()
def scenarios():
    """Bundled scenario files."""


@scenarios.command("list")
def scenarios_list():
    for name in bundled_scenarios():
        doc, _ = read_document(name)
        sim = doc.get("simulation", {})
        click.echo(f"{name}\t{len(doc['load']['attachments'])} quadrotors, {sim.get('duration')} s")


if __name__ == "__main__":
    main()
