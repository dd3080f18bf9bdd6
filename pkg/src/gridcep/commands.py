"""Curtailment command types shared by the simulator and the action engine."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Gtr:
    """Global Temperature Reset: raise a building's effective setpoints."""

    target: str          # building id
    delta_f: float
    duration: int        # seconds

    kind = "gtr"


@dataclass(frozen=True)
class DutyCycle:
    """Cap how many fan coils may run concurrently in a building."""

    target: str
    cap: int
    duration: int

    kind = "duty_cycle"

    def __post_init__(self):
        if self.cap < 0:
            raise ValueError("duty-cycle cap must be >= 0")


@dataclass(frozen=True)
class Notify:
    audience: str
    template: str
    target: str | None = None

    kind = "notify"


@dataclass(frozen=True)
class ActivatePattern:
    pattern_id: str

    kind = "activate_pattern"


@dataclass(frozen=True)
class DeactivatePattern:
    pattern_id: str

    kind = "deactivate_pattern"


def command_to_dict(cmd) -> dict:
    if isinstance(cmd, Gtr):
        return {"kind": cmd.kind, "target": cmd.target, "delta_f": cmd.delta_f,
                "duration": cmd.duration}
    if isinstance(cmd, DutyCycle):
        return {"kind": cmd.kind, "target": cmd.target, "cap": cmd.cap,
                "duration": cmd.duration}
    if isinstance(cmd, Notify):
        return {"kind": cmd.kind, "audience": cmd.audience, "template": cmd.template,
                "target": cmd.target}
    if isinstance(cmd, ActivatePattern):
        return {"kind": cmd.kind, "pattern_id": cmd.pattern_id}
    if isinstance(cmd, DeactivatePattern):
        return {"kind": cmd.kind, "pattern_id": cmd.pattern_id}
    raise TypeError(f"not a command: {cmd!r}")


def command_from_dict(obj: dict):
    kind = obj.get("kind")
    if kind == "gtr":
        return Gtr(target=obj["target"], delta_f=float(obj["delta_f"]),
                   duration=int(obj["duration"]))
    if kind == "duty_cycle":
        return DutyCycle(target=obj["target"], cap=int(obj["cap"]),
                         duration=int(obj["duration"]))
    if kind == "notify":
        return Notify(audience=obj["audience"], template=obj.get("template", ""),
                      target=obj.get("target"))
    if kind == "activate_pattern":
        return ActivatePattern(pattern_id=obj["pattern_id"])
    if kind == "deactivate_pattern":
        return DeactivatePattern(pattern_id=obj["pattern_id"])
    raise ValueError(f"unknown command kind {kind!r}")
