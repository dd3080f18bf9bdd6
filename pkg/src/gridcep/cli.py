"""gridcep command line: run experiments, serve the API, parse-check
pattern files, and replay exported event logs."""

from __future__ import annotations

import json

import click

from .errors import GridCepError
from .harness.experiment import ExperimentSpec, replay_events, run_experiment
from .pattern.files import load_pattern_file
from .pattern.printer import format_pattern
from .pattern.validate import validate
from .sim.scenario import load_scenario_file


@click.group()
def main():
    """Semantic CEP for dynamic demand response in a simulated microgrid."""


@main.command()
@click.option("--scenario", "-s", required=True, type=click.Path(exists=True))
@click.option("--patterns", "-p", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--rules", "-r", type=click.Path(exists=True))
@click.option("--duration", "-d", required=True, type=int, help="simulated seconds")
@click.option("--ab", is_flag=True, help="run baseline (rules off) vs actuated (rules on)")
@click.option("--out", "out_dir", default="out", type=click.Path())
@click.option("--gap", type=int, default=None, help="coalesce gap seconds (default 2x cadence)")
def run(scenario, patterns, rules, duration, ab, out_dir, gap):
    """Run a headless experiment and write artifacts to --out."""
    if duration <= 0:
        raise click.ClickException("--duration must be > 0")
    spec = ExperimentSpec(scenario=scenario, patterns=list(patterns), rules=rules,
                          duration=duration, out_dir=out_dir, gap=gap, ab=ab)
    try:
        report = run_experiment(spec)
    except GridCepError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    click.echo(json.dumps(report, indent=2, sort_keys=True))


@main.command()
@click.option("--scenario", "-s", required=True, type=click.Path(exists=True))
@click.option("--patterns", "-p", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--rules", "-r", type=click.Path(exists=True))
@click.option("--bind", default="127.0.0.1:8000", help="HOST:PORT")
@click.option("--speed", default="1", help="sim-seconds per real-second, or 'max'")
@click.option("--gap", type=int, default=None)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="serve a built operator console from this directory")
def serve(scenario, patterns, rules, bind, speed, gap, ui_dir):
    """Serve the HTTP+SSE control/observation API (simulation starts paused)."""
    import uvicorn

    from .harness.service import build_app

    factor = 0.0 if speed == "max" else float(speed)
    spec = ExperimentSpec(scenario=scenario, patterns=list(patterns), rules=rules,
                          gap=gap)
    try:
        app = build_app(spec, speed=factor, ui_dir=ui_dir)
    except GridCepError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host, port=int(port or 8000), log_level="warning")


@main.command()
@click.option("--check", "path", required=True, type=click.Path(exists=True))
@click.option("--scenario", "-s", type=click.Path(exists=True), default=None,
              help="also validate against this scenario's ontology and schemas")
def parse(path, scenario):
    """Parse (and optionally validate) a pattern file."""
    try:
        blocks = load_pattern_file(path)
    except GridCepError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    world = load_scenario_file(scenario) if scenario else None
    for block in blocks:
        line = f"{block.pattern_id}: OK  {format_pattern(block.ast)}"
        if world is not None:
            try:
                checked = validate(block.ast, world.ontology, world.schemas,
                                   pattern_id=block.pattern_id, end_use=block.end_use,
                                   lifecycle=block.lifecycle, schedule=block.schedule,
                                   spatial=block.spatial)
                line += f"  [{', '.join(f'{k}={v}' for k, v in checked.tags.to_dict().items())}]"
            except GridCepError as exc:
                raise click.ClickException(f"{block.pattern_id}: {type(exc).__name__}: {exc}")
        click.echo(line)
    click.echo(f"{len(blocks)} pattern(s) OK")


@main.command()
@click.option("--events", "-e", required=True, type=click.Path(exists=True))
@click.option("--patterns", "-p", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--scenario", "-s", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="write replayed detections.jsonl here")
def replay(events, patterns, scenario, out_path):
    """Re-run the engine over an exported events.jsonl (bypassing the simulator)."""
    try:
        detections = replay_events(events, list(patterns), scenario_path=scenario,
                                   out_path=out_path)
    except GridCepError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    if out_path is None:
        for d in detections:
            click.echo(d.to_json())
    click.echo(f"replayed {len(detections)} detection(s)", err=True)


if __name__ == "__main__":
    main()
