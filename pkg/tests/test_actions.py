import json

import pytest

from gridcep.actions import (ActionEngine, ActionRule, APPLIED, SUPPRESSED,
                             TARGET_ERROR, load_rules_file, rules_from_json)
from gridcep.commands import ActivatePattern, DutyCycle, Gtr, Notify
from gridcep.errors import DuplicateRule, UnknownPattern
from gridcep.harness.experiment import D2RLoop
from gridcep.pattern.files import parse_pattern_blocks
from gridcep.pattern.parser import parse_pattern
from gridcep.pattern.validate import validate
from gridcep.runtime.detections import Detection
from gridcep.runtime.engine import Engine
from gridcep.sim.scenario import load_scenario, load_scenario_file
from gridcep.sim.simulator import Simulator

from conftest import fixture_path


@pytest.fixture()
def stack():
    sc = load_scenario_file(fixture_path("scenarios", "mhp_weekday.json"))
    sim = Simulator(sc)
    engine = Engine(sc.ontology, sc.schemas)
    for pid, text in [
        ("p1", "SELECT(avg) FROM(?m,meterstream) WHERE {?m evt:hasSource ?src . "
               "?src bd:hasLocation bd:MHP} | AVG(?m) AS avg "
               "WINDOW(?m,sliding,5min) HAVING(avg>27)"),
        ("px", "SELECT(?m) FROM(?m,meterstream) WHERE {?m evt:hasSource ?src . "
               "?src bd:hasLocation ?b . ?b rdf:type bd:Building}"),
        ("pod", "SELECT(?m) FROM(?m,meterstream)"),
    ]:
        lifecycle = "on_demand" if pid == "pod" else "persistent"
        engine.register_pattern(validate(parse_pattern(text), sc.ontology, sc.schemas,
                                         pattern_id=pid, end_use="monitoring",
                                         lifecycle=lifecycle))
    actions = ActionEngine(sc.ontology, engine, sim,
                           action_schema=sc.schemas["actionstream"])
    return sc, sim, engine, actions


def _detection(pid, t, bindings=None):
    return Detection(pattern_id=pid, detection_time=t, consequence_time=t,
                     outputs={}, bindings=bindings or {})


def test_register_rule_unknown_pattern(stack):
    _sc, _sim, _engine, actions = stack
    with pytest.raises(UnknownPattern):
        actions.register_rule(ActionRule("r", "nope", Gtr("MHP", 2.0, 60)))


def test_duplicate_rule_rejected(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 2.0, 60)))
    with pytest.raises(DuplicateRule):
        actions.register_rule(ActionRule("r2", "p1", Gtr("MHP", 2.0, 60)))
    with pytest.raises(DuplicateRule):
        actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 3.0, 60)))


def test_applied_command_has_simulator_ack_and_injection(stack):
    _sc, sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 2.0, 3600)))
    injected = actions.on_detection(_detection("p1", 600))
    assert len(injected) == 1
    assert injected[0].stream_id == "actionstream"
    assert injected[0].timestamp == 600
    assert injected[0].attributes == {"action": "gtr", "magnitude": 2.0}
    entry = actions.log[-1]
    assert entry.outcome == APPLIED
    assert entry.detail.startswith("ack:")  # simulator acknowledged


def test_cooldown_suppression(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 2.0, 3600), cooldown=900))
    assert len(actions.on_detection(_detection("p1", 0))) == 1
    assert actions.on_detection(_detection("p1", 600)) == []      # suppressed
    assert actions.log[-1].outcome == SUPPRESSED
    assert len(actions.on_detection(_detection("p1", 900))) == 1  # cooldown over
    applied = [e for e in actions.log if e.outcome == APPLIED]
    assert all(b.time - a.time >= 900 for a, b in zip(applied, applied[1:]))


def test_target_resolved_from_binding_location(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "px", Notify("facilities", "high load",
                                                        target=None)))
    # binding source: the RTH building meter -> resolves to RTH
    rth = {"m": {"stream_id": "meterstream", "seq": 1, "timestamp": 60,
                 "source_id": "http://gridcep.dev/equipment#RTHMETER"}}
    actions.on_detection(_detection("px", 60, rth))
    assert actions.log[-1].outcome == APPLIED
    assert actions.log[-1].command["target"] == "RTH"


def test_target_resolved_through_room_to_building(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "px", DutyCycle(None, 4, 600)))
    # a fan coil sits in a room; partOf resolves the building
    bindings = {"m": {"stream_id": "fancoilstream", "seq": 2, "timestamp": 60,
                      "source_id": "http://gridcep.dev/equipment#RTH201FC0"}}
    actions.on_detection(_detection("px", 60, bindings))
    entry = actions.log[-1]
    assert entry.outcome == APPLIED and entry.command["target"] == "RTH"


def test_unresolvable_target_logged_not_raised(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", DutyCycle(None, 4, 600)))
    injected = actions.on_detection(_detection("p1", 60))  # aggregate: no bindings
    assert injected == []
    assert actions.log[-1].outcome == TARGET_ERROR


def test_activate_pattern_command(stack):
    _sc, _sim, engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", ActivatePattern("pod")))
    assert engine.status_of("pod") == "inactive"
    injected = actions.on_detection(_detection("p1", 60))
    assert injected == []  # engine-internal command: no actionstream event
    assert engine.status_of("pod") == "active"
    assert actions.log[-1].outcome == APPLIED


def test_one_detection_may_fire_multiple_rules(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 2.0, 600)))
    actions.register_rule(ActionRule("r2", "p1", Notify("ops", "check", "MHP")))
    injected = actions.on_detection(_detection("p1", 60))
    assert [e.rule_id for e in actions.log] == ["r1", "r2"]
    assert len(injected) == 2


def test_rules_file_roundtrip(tmp_path):
    rules = rules_from_json(json.dumps([
        {"rule_id": "a", "trigger": "p1", "cooldown": 300,
         "action": {"kind": "gtr", "target": "MHP", "delta_f": 1.5, "duration": 600}},
        {"rule_id": "b", "trigger": "p1", "enabled": False,
         "action": {"kind": "notify", "audience": "ops", "template": "hi"}},
    ]))
    assert rules[0].action == Gtr("MHP", 1.5, 600)
    assert rules[0].cooldown == 300
    assert rules[1].enabled is False
    path = tmp_path / "rules.json"
    path.write_text(json.dumps([{"rule_id": "a", "trigger": "p1", "action":
                                 {"kind": "duty_cycle", "target": "X", "cap": 3,
                                  "duration": 60}}]))
    assert load_rules_file(path)[0].action == DutyCycle("X", 3, 60)


def test_disabled_rule_is_skipped(stack):
    _sc, _sim, _engine, actions = stack
    actions.register_rule(ActionRule("r1", "p1", Gtr("MHP", 2.0, 600), enabled=False))
    assert actions.on_detection(_detection("p1", 60)) == []
    assert actions.log == []


def test_causality_applied_commands_follow_detections():
    """End-to-end: every applied command's triggering detection precedes it."""
    sc = load_scenario_file(fixture_path("scenarios", "ab_small.json"))
    blocks = []
    for path in ("paper.gcep", "response.gcep"):
        with open(fixture_path("patterns", path)) as fh:
            blocks.extend(parse_pattern_blocks(fh.read()))
    rules = load_rules_file(fixture_path("rules", "escalation.json"))
    loop = D2RLoop(sc, blocks, rules)
    loop.advance(3600)
    applied = [e for e in loop.actions.log if e.outcome == APPLIED]
    assert applied, "no commands applied"
    detections = loop.engine.detections
    for entry in applied:
        trigger = [d for d in detections
                   if d.pattern_id == entry.pattern_id and
                   d.detection_time == entry.detection_time]
        assert trigger, f"no detection for {entry}"
        assert entry.time >= entry.detection_time
