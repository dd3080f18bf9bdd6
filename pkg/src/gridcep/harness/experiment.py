"""Headless experiment runner: wire simulator -> engine -> action engine ->
simulator, tick by tick, and export the run artifacts.

Artifacts in the output directory:
    events.jsonl      every event in ingest order (incl. injected actionstream)
    detections.jsonl  the engine's append-only detection log
    intervals.csv     coalesced per-pattern detection bands
    actions.jsonl     the action log (applied / suppressed / target-error)
    report.json       RunReport
    ontology.nt       generated world (for replay without the scenario)
    schemas.json      stream schemas

A/B mode runs the identical seed twice — rules disabled vs enabled — and
reports the peak-demand delta per building.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from ..actions import ActionEngine, load_rules_file
from ..events import Event, event_from_json, event_to_json, schemas_to_json
from ..ontology import serialize_ontology
from ..pattern.files import load_pattern_file
from ..pattern.validate import validate
from ..runtime.detections import coalesce, intervals_to_csv
from ..runtime.engine import Engine
from ..sim.scenario import Scenario, load_scenario_file, meter_source
from ..sim.simulator import Simulator


@dataclass
class ExperimentSpec:
    scenario: str
    patterns: list
    rules: str | None = None
    duration: int = 86400
    out_dir: str = "out"
    gap: int | None = None       # default: 2x cadence
    ab: bool = False
    seed_override: int | None = None


class D2RLoop:
    """One serialized loop: events, detections, and actions in total order."""

    def __init__(self, scenario: Scenario, pattern_blocks, rules=(), *,
                 rules_enabled: bool = True):
        self.scenario = scenario
        self.simulator = Simulator(scenario)
        self.engine = Engine(scenario.ontology, scenario.schemas,
                             start_time=scenario.start_time)
        for block in pattern_blocks:
            checked = validate(block.ast, scenario.ontology, scenario.schemas,
                               pattern_id=block.pattern_id, end_use=block.end_use,
                               lifecycle=block.lifecycle, schedule=block.schedule,
                               spatial=block.spatial)
            self.engine.register_pattern(checked)
        self.actions = ActionEngine(scenario.ontology, self.engine, self.simulator,
                                    action_schema=scenario.schemas.get("actionstream"))
        self.rules_enabled = rules_enabled
        for rule in rules:
            self.actions.register_rule(rule)
        self.events_log: list[Event] = []

    def process_event(self, event: Event) -> None:
        """Ingest one event; route detections through the rules and feed any
        injected actionstream events straight back through the loop."""
        self.events_log.append(event)
        detections = self.engine.ingest(event)
        if not self.rules_enabled:
            return
        for detection in detections:
            for injected in self.actions.on_detection(detection):
                self.process_event(injected)

    def advance(self, until: int) -> None:
        """Advance simulation tick by tick so actions affect the next tick."""
        cadence = self.scenario.cadence
        while self.simulator.clock < until:
            step_to = min(self.simulator.clock + cadence, until)
            for event in self.simulator.step(step_to):
                self.process_event(event)
            self.engine.tick(step_to)

    # --- summaries ---

    def building_peaks(self) -> dict[str, float]:
        peaks: dict[str, float] = {}
        meters = {str(meter_source(b)): b for b in self.scenario.buildings}
        for ev in self.events_log:
            if ev.stream_id != "meterstream":
                continue
            bid = meters.get(str(ev.source_id))
            if bid is not None:
                peaks[bid] = max(peaks.get(bid, 0.0), ev.attributes["reading"])
        return peaks

    def building_kwh(self) -> dict[str, float]:
        kwh: dict[str, float] = {}
        meters = {str(meter_source(b)): b for b in self.scenario.buildings}
        dt = self.scenario.cadence / 3600.0
        for ev in self.events_log:
            if ev.stream_id != "meterstream":
                continue
            bid = meters.get(str(ev.source_id))
            if bid is not None:
                kwh[bid] = kwh.get(bid, 0.0) + ev.attributes["reading"] * dt
        return kwh

    def report(self, gap: int) -> dict:
        intervals = coalesce(self.engine.detections, gap)
        per_pattern = {}
        for st in self.engine.patterns():
            pid = st.checked.pattern_id
            dets = [d for d in self.engine.detections if d.pattern_id == pid]
            per_pattern[pid] = {
                "detections": len(dets),
                "intervals": [[iv.start_time, iv.end_time, iv.count]
                              for iv in intervals.get(pid, [])],
            }
        outcome_counts: dict[str, int] = {}
        for entry in self.actions.log:
            outcome_counts[entry.outcome] = outcome_counts.get(entry.outcome, 0) + 1
        return {
            "patterns": per_pattern,
            "buildings": {b: {"peak_kw": self.building_peaks().get(b, 0.0),
                              "total_kwh": self.building_kwh().get(b, 0.0)}
                          for b in sorted(self.scenario.buildings)},
            "actions": outcome_counts,
            "detections_total": len(self.engine.detections),
        }


def build_loop(spec: ExperimentSpec, *, rules_enabled: bool = True) -> D2RLoop:
    scenario = load_scenario_file(spec.scenario)
    if spec.seed_override is not None:
        scenario.seed = spec.seed_override
    blocks = []
    for path in spec.patterns:
        blocks.extend(load_pattern_file(path))
    rules = load_rules_file(spec.rules) if spec.rules else []
    return D2RLoop(scenario, blocks, rules, rules_enabled=rules_enabled)


def _write_artifacts(loop: D2RLoop, out_dir: str, gap: int) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "events.jsonl"), "w", encoding="utf-8") as fh:
        for ev in loop.events_log:
            fh.write(event_to_json(ev) + "\n")
    with open(os.path.join(out_dir, "detections.jsonl"), "w", encoding="utf-8") as fh:
        for d in loop.engine.detections:
            fh.write(d.to_json() + "\n")
    with open(os.path.join(out_dir, "intervals.csv"), "w", encoding="utf-8") as fh:
        fh.write(intervals_to_csv(coalesce(loop.engine.detections, gap)))
    with open(os.path.join(out_dir, "actions.jsonl"), "w", encoding="utf-8") as fh:
        for entry in loop.actions.log:
            fh.write(entry.to_json() + "\n")
    with open(os.path.join(out_dir, "ontology.nt"), "w", encoding="utf-8") as fh:
        fh.write(serialize_ontology(loop.scenario.ontology))
    with open(os.path.join(out_dir, "schemas.json"), "w", encoding="utf-8") as fh:
        fh.write(schemas_to_json(loop.scenario.schemas, loop.scenario.ontology.namespaces))
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump({"start_time": loop.scenario.start_time,
                   "cadence": loop.scenario.cadence, "gap": gap}, fh, sort_keys=True)
        fh.write("\n")
    report = loop.report(gap)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run headless; returns the report dict (written to report.json)."""
    gap = spec.gap
    if gap is None:
        scenario_probe = load_scenario_file(spec.scenario)
        gap = 2 * scenario_probe.cadence

    if not spec.ab:
        loop = build_loop(spec)
        loop.advance(loop.scenario.start_time + spec.duration)
        return _write_artifacts(loop, spec.out_dir, gap)

    baseline = build_loop(spec, rules_enabled=False)
    baseline.advance(baseline.scenario.start_time + spec.duration)
    base_report = _write_artifacts(baseline, os.path.join(spec.out_dir, "baseline"), gap)

    actuated = build_loop(spec, rules_enabled=True)
    actuated.advance(actuated.scenario.start_time + spec.duration)
    act_report = _write_artifacts(actuated, os.path.join(spec.out_dir, "actuated"), gap)

    base_peaks = baseline.building_peaks()
    act_peaks = actuated.building_peaks()
    reduction = {}
    for b in sorted(base_peaks):
        if base_peaks[b] > 0:
            reduction[b] = 100.0 * (base_peaks[b] - act_peaks.get(b, 0.0)) / base_peaks[b]
    report = {
        "mode": "ab",
        "baseline": base_report,
        "actuated": act_report,
        "baseline_peak_kw": base_peaks,
        "actuated_peak_kw": act_peaks,
        "peak_reduction_pct": reduction,
    }
    os.makedirs(spec.out_dir, exist_ok=True)
    with open(os.path.join(spec.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def replay_events(events_path: str, pattern_paths, *, scenario_path: str | None = None,
                  out_path: str | None = None) -> list:
    """Re-run the engine over an exported event log (no simulator, no rules).

    The world comes from --scenario when given, else from the ontology.nt /
    schemas.json sidecar files the exporter wrote next to events.jsonl.
    """
    from ..events import schemas_from_json
    from ..ontology import parse_ontology_text

    if scenario_path:
        scenario = load_scenario_file(scenario_path)
        ontology, schemas = scenario.ontology, scenario.schemas
        start = scenario.start_time
    else:
        base = os.path.dirname(os.path.abspath(events_path))
        with open(os.path.join(base, "ontology.nt"), encoding="utf-8") as fh:
            ontology = parse_ontology_text(fh.read())
        with open(os.path.join(base, "schemas.json"), encoding="utf-8") as fh:
            schemas = schemas_from_json(fh.read(), ontology.namespaces)
        start = 0
        meta_path = os.path.join(base, "meta.json")
        if os.path.exists(meta_path):
            with open(meta_path, encoding="utf-8") as fh:
                start = json.load(fh).get("start_time", 0)

    engine = Engine(ontology, schemas, start_time=start)
    blocks = []
    for path in pattern_paths:
        blocks.extend(load_pattern_file(path))
    for block in blocks:
        checked = validate(block.ast, ontology, schemas, pattern_id=block.pattern_id,
                           end_use=block.end_use, lifecycle=block.lifecycle,
                           schedule=block.schedule, spatial=block.spatial)
        engine.register_pattern(checked)

    with open(events_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                engine.ingest(event_from_json(line))

    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            for d in engine.detections:
                fh.write(d.to_json() + "\n")
    return engine.detections
