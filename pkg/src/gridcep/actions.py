"""Action rule engine: maps detections to curtailment responses.

Rules fire in registration order; a rule in cooldown logs a suppressed
entry instead of a command, and unresolvable targets are logged as
target-errors, never raised — the event loop must not stall. Every applied
physical command also injects a synthetic `actionstream` event so that
response-monitoring patterns (15-minutes-after-GTR style) run on the same
CEP machinery as everything else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .commands import (ActivatePattern, DeactivatePattern, DutyCycle, Gtr,
                       Notify, command_from_dict, command_to_dict)
from .errors import DuplicateRule, UnknownPattern, UnknownTarget
from .events import Event
from .ontology import Iri, Ontology

APPLIED = "applied"
SUPPRESSED = "suppressed-by-cooldown"
TARGET_ERROR = "target-error"

DEFAULT_COOLDOWN = 900  # the 15-minute response-evaluation horizon


@dataclass
class ActionRule:
    rule_id: str
    trigger: str                      # pattern_id
    action: object                    # command; control commands may carry target=None
    cooldown: int = DEFAULT_COOLDOWN
    enabled: bool = True

    def __post_init__(self):
        if self.cooldown < 0:
            raise ValueError("cooldown must be >= 0")


@dataclass(frozen=True)
class ActionLogEntry:
    time: int
    rule_id: str
    pattern_id: str
    detection_time: int
    command: dict | None
    outcome: str
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "time": self.time, "rule_id": self.rule_id, "pattern_id": self.pattern_id,
            "detection_time": self.detection_time, "command": self.command,
            "outcome": self.outcome, "detail": self.detail,
        }, sort_keys=True, separators=(",", ":"))


class ActionEngine:
    """Holds the rule set and routes resolved commands to the simulator and
    the CEP engine. `on_detection` returns the synthetic actionstream events
    the caller must feed back through the loop."""

    def __init__(self, ontology: Ontology, engine, simulator=None, *,
                 action_schema=None):
        self.ontology = ontology
        self.engine = engine
        self.simulator = simulator
        self.rules: list[ActionRule] = []
        self.log: list[ActionLogEntry] = []
        self._last_applied: dict[str, int] = {}
        self._action_seq = 0
        self._action_schema = action_schema

    # --- rules ---

    def register_rule(self, rule: ActionRule) -> str:
        if rule.trigger not in {st.checked.pattern_id for st in self.engine.patterns()}:
            raise UnknownPattern(rule.trigger)
        for existing in self.rules:
            if existing.trigger == rule.trigger and existing.action == rule.action:
                raise DuplicateRule(f"{rule.trigger} -> {rule.action}")
            if existing.rule_id == rule.rule_id:
                raise DuplicateRule(f"rule id {rule.rule_id!r} already registered")
        self.rules.append(rule)
        return rule.rule_id

    # --- detection handling ---

    def on_detection(self, detection) -> list[Event]:
        now = detection.detection_time
        injected: list[Event] = []
        for rule in self.rules:
            if not rule.enabled or rule.trigger != detection.pattern_id:
                continue
            last = self._last_applied.get(rule.rule_id)
            if last is not None and now - last < rule.cooldown:
                self.log.append(ActionLogEntry(
                    time=now, rule_id=rule.rule_id, pattern_id=detection.pattern_id,
                    detection_time=detection.detection_time, command=None,
                    outcome=SUPPRESSED))
                continue
            try:
                command = self._resolve(rule.action, detection)
            except UnknownTarget as exc:
                self.log.append(ActionLogEntry(
                    time=now, rule_id=rule.rule_id, pattern_id=detection.pattern_id,
                    detection_time=detection.detection_time, command=None,
                    outcome=TARGET_ERROR, detail=str(exc)))
                continue
            detail = self._apply(command, now)
            self._last_applied[rule.rule_id] = now
            self.log.append(ActionLogEntry(
                time=now, rule_id=rule.rule_id, pattern_id=detection.pattern_id,
                detection_time=detection.detection_time,
                command=command_to_dict(command), outcome=APPLIED, detail=detail))
            ev = self._synthesize_event(command, now)
            if ev is not None:
                injected.append(ev)
        return injected

    def apply_manual(self, command, now: int) -> tuple[ActionLogEntry, Event | None]:
        """Operator-issued command outside any rule (console / CLI path)."""
        try:
            detail = self._apply(command, now)
        except UnknownTarget as exc:
            entry = ActionLogEntry(time=now, rule_id="manual", pattern_id="",
                                   detection_time=now, command=command_to_dict(command),
                                   outcome=TARGET_ERROR, detail=str(exc))
            self.log.append(entry)
            return entry, None
        entry = ActionLogEntry(time=now, rule_id="manual", pattern_id="",
                               detection_time=now, command=command_to_dict(command),
                               outcome=APPLIED, detail=detail)
        self.log.append(entry)
        return entry, self._synthesize_event(command, now)

    # --- helpers ---

    def _resolve(self, action, detection):
        """Fill a templated target from the detection's bound events."""
        if isinstance(action, (Gtr, DutyCycle)) and action.target is None:
            return replace(action, target=self._building_of(detection))
        if isinstance(action, Notify) and action.target is None:
            building = self._building_of_or_none(detection)
            return replace(action, target=building)
        return action

    def _building_of(self, detection) -> str:
        building = self._building_of_or_none(detection)
        if building is None:
            raise UnknownTarget(
                f"no binding of detection {detection.pattern_id!r} resolves to a building")
        return building

    def _building_of_or_none(self, detection) -> str | None:
        has_location = self.ontology.expand("bd:hasLocation")
        part_of = self.ontology.expand("bd:partOf")
        rdf_type = self.ontology.expand("rdf:type")
        building_cls = self.ontology.expand("bd:Building")
        bd_base = self.ontology.namespaces["bd"]
        for var in sorted(detection.bindings):
            source = Iri(detection.bindings[var]["source_id"])
            for loc in self.ontology.objects(source, has_location):
                if self.ontology.has(loc, rdf_type, building_cls):
                    return loc[len(bd_base):]
                for bld in self.ontology.objects(loc, part_of):
                    if self.ontology.has(bld, rdf_type, building_cls):
                        return bld[len(bd_base):]
        return None

    def _apply(self, command, now: int) -> str:
        if isinstance(command, (Gtr, DutyCycle, Notify)):
            if self.simulator is None:
                return "no-simulator"
            ack = self.simulator.apply_action(command)
            return f"ack:{ack['effective_at']}"
        if isinstance(command, ActivatePattern):
            return "status:" + self.engine.activate(command.pattern_id)
        if isinstance(command, DeactivatePattern):
            return "status:" + self.engine.deactivate(command.pattern_id)
        raise UnknownTarget(f"unsupported command {command!r}")

    def _synthesize_event(self, command, now: int) -> Event | None:
        """actionstream event for physical commands with a building target."""
        target = getattr(command, "target", None)
        if target is None or self._action_schema is None:
            return None
        from .sim.scenario import action_source
        source = action_source(target)
        if source not in self._action_schema.sources:
            return None
        magnitude = 0.0
        if isinstance(command, Gtr):
            magnitude = float(command.delta_f)
        elif isinstance(command, DutyCycle):
            magnitude = float(command.cap)
        self._action_seq += 1
        return Event(stream_id="actionstream", source_id=source, seq=self._action_seq,
                     timestamp=now, attributes={"action": command.kind, "magnitude": magnitude})


# --- rules file ---

def rules_from_json(text: str) -> list[ActionRule]:
    rules = []
    for obj in json.loads(text):
        action = command_from_dict(obj["action"])
        rules.append(ActionRule(
            rule_id=obj["rule_id"], trigger=obj["trigger"], action=action,
            cooldown=int(obj.get("cooldown", DEFAULT_COOLDOWN)),
            enabled=bool(obj.get("enabled", True))))
    return rules


def load_rules_file(path) -> list[ActionRule]:
    with open(path, encoding="utf-8") as fh:
        return rules_from_json(fh.read())
