"""Command-line entry points: benchmark driver and tutor service runner."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .harness import (
    ENV_NAMES,
    BenchmarkSpec,
    click_agreement,
    repeat_agreement,
    run_benchmark,
    termination_agreement,
    traces_from_jsonl,
)
from .mgpo import MgpoPolicy, VocConfig


@click.group()
def main() -> None:
    """Benchmark and analysis tools for planning-strategy discovery."""


@main.command("run")
@click.option("--env", "envs", type=click.Choice(ENV_NAMES), multiple=True, required=True)
@click.option("--algo", "algos", multiple=True, required=True,
              help="mgpo | metagreedy | pouct:<steps>")
@click.option("--cost", "costs", type=float, multiple=True, required=True)
@click.option("--precision", "tau_obs", type=float, default=0.005, show_default=True)
@click.option("--instances", "n_instances", type=int, required=True)
@click.option("--seed", "base_seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--w-cost", type=float, default=0.5, show_default=True,
              help="MGPO cost weight")
@click.option("--timing/--no-timing", default=False, show_default=True,
              help="Measure wall time per episode (non-deterministic output)")
def run_cmd(envs, algos, costs, tau_obs, n_instances, base_seed, out_dir, w_cost, timing):
    """Run benchmark cells and write results.csv / summary.csv."""
    spec = BenchmarkSpec(
        algorithms=tuple(algos),
        goal_counts=(),
        costs=tuple(costs),
        tau_obs=tau_obs,
        n_instances=n_instances,
        base_seed=base_seed,
        out_dir=out_dir,
        measure_time=timing,
        w_cost=w_cost,
        envs=tuple(envs),
    )
    result = run_benchmark(spec)
    for cell in result.cells:
        click.echo(
            f"{cell.algo} {cell.env} cost={cell.cost:g}: "
            f"mean rr {cell.mean_rr:.2f}, median {cell.median_rr:.2f}, "
            f"iqr {cell.iqr_rr:.2f} ({cell.episodes} episodes)"
        )
    click.echo(f"wrote {out_dir}/results.csv and {out_dir}/summary.csv")


@main.command("metrics")
@click.option("--traces", type=click.Path(exists=True), required=True,
              help="JSONL file, one episode trace per line")
@click.option("--policy", "policy_name", type=click.Choice(["mgpo"]), default="mgpo",
              show_default=True)
@click.option("--profile", type=click.Choice(["legacy", "standard"]), default="legacy",
              show_default=True)
@click.option("--w-cost", type=float, default=0.5, show_default=True)
def metrics_cmd(traces, policy_name, profile, w_cost):
    """Agreement metrics of each trace against the reference policy."""
    text = Path(traces).read_text()
    click.echo("trace,click_agreement,termination_agreement,repeat_agreement")
    for idx, trace in enumerate(traces_from_jsonl(text)):
        reference = MgpoPolicy(
            VocConfig(
                cost=trace.config.cost,
                tau_obs=trace.config.tau_obs,
                w_cost=w_cost,
                legacy_mode=(profile == "legacy"),
            )
        )
        ca = click_agreement(trace, reference)
        ta = termination_agreement(trace, reference)
        ra = repeat_agreement(trace, reference)
        click.echo(f"{idx},{ca:.6f},{ta:.6f},{ra:.6f}")


@main.command("verify-export")
@click.argument("export_file", type=click.Path(exists=True))
def verify_export_cmd(export_file):
    """Replay an exported tutor session; fail unless posterior means
    reproduce bit-exactly."""
    from .service import verify_export_replay

    doc = json.loads(Path(export_file).read_text())
    problems = verify_export_replay(doc)
    if problems:
        for p in problems:
            click.echo(f"MISMATCH: {p}", err=True)
        sys.exit(1)
    click.echo("export replay ok: all posterior means bit-exact")


@click.command()
@click.option("--data-dir", type=click.Path(), default="./tutor_data", show_default=True,
              envvar="TUTOR_DATA_DIR")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="TUTOR_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="TUTOR_PORT")
@click.option("--param-seed", type=int, default=0, show_default=True,
              envvar="TUTOR_PARAM_SEED")
@click.option("--profile", type=click.Choice(["legacy", "standard"]), default="legacy",
              show_default=True, envvar="TUTOR_PROFILE")
def serve(data_dir, host, port, param_seed, profile) -> None:
    """Run the tutor session service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    app = create_app(
        ServiceConfig(data_dir=data_dir, param_seed=param_seed, profile=profile)
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
