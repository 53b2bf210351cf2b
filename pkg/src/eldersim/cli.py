"""Command-line front end: run a replay, generate traces, render reports.

Each subcommand is a thin wrapper over the core package; the ``serve``
command starts the HTTP service that exposes the same operations to
multiple clients.  Validation failures exit nonzero with a one-line
diagnostic.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import SimConfig
from .errors import ElderSimError
from .report import render_report
from .scenarios import SCENARIO_KINDS, generate_scenario, scenario_overrides
from .simulator import run as run_simulation
from .simulator import write_outputs
from .traces import load_trace, write_trace


@click.group()
@click.version_option(package_name="eldersim", prog_name="eldersim")
def main() -> None:
    """Elderly-care monitoring pipeline simulator."""


@main.command("run")
@click.option("--trace", "trace_path", required=True, type=click.Path(), help="Trace file to replay.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config; defaults apply when omitted.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
def run_command(trace_path: str, config_path: str | None, seed: int | None, out_dir: str) -> None:
    """Replay TRACE through the pipeline and write logs, metrics, and report."""
    try:
        config = SimConfig.load(config_path) if config_path else SimConfig()
        if seed is not None:
            config.seed = seed
        loaded = load_trace(trace_path)
        result = run_simulation(config, loaded.readings)
        written = write_outputs(result, out_dir)
    except ElderSimError as exc:
        raise click.ClickException(str(exc)) from exc
    metrics = result.metrics
    click.echo(
        f"replayed {metrics.windows} windows, "
        f"{sum(metrics.alerts_by_level.values()) + metrics.manual_alerts} alerts, "
        f"digest {metrics.digest[:12]}... "
        f"({result.wall_seconds:.2f}s wall clock)"
    )
    if loaded.rejected_lines:
        click.echo(f"skipped {loaded.rejected_lines} trace lines with unknown sensor types")
    click.echo(f"wrote {len(written)} files to {out_dir}")


@main.command("gen")
@click.option("--scenario", required=True, type=click.Choice(SCENARIO_KINDS),
              help="Scenario shape to generate.")
@click.option("--duration", "duration_s", required=True, type=int, help="Trace length in seconds.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(), help="Trace file to write.")
def gen_command(scenario: str, duration_s: int, seed: int, out_path: str) -> None:
    """Generate a deterministic synthetic trace."""
    try:
        readings = generate_scenario(scenario, duration_s, seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    write_trace(readings, out_path)
    click.echo(f"wrote {len(readings)} readings to {out_path}")
    overrides = scenario_overrides(scenario, duration_s)
    if overrides:
        click.echo(f"pair with config overrides: {json.dumps(overrides)}")


@main.command("report")
@click.option("--metrics", "metrics_path", required=True, type=click.Path(),
              help="metrics.json from a previous run.")
def report_command(metrics_path: str) -> None:
    """Render the latency/alert/delivery report for saved metrics."""
    path = Path(metrics_path)
    try:
        metrics = json.loads(path.read_text())
    except OSError as exc:
        raise click.ClickException(f"cannot read metrics {metrics_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"metrics {metrics_path} is not valid JSON: {exc}") from exc
    click.echo(render_report(metrics), nl=False)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve_command(host: str, port: int) -> None:
    """Start the HTTP service wrapping the pipeline and simulator."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
