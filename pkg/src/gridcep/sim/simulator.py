"""Deterministic microgrid dynamics and curtailment actuation.

Per cadence tick, in a fixed order: apply queued actuations, expire old
ones, update occupancy from the class schedule (plus seeded walk-ins),
decide fan-coil statuses (thermostat demand capped by duty cycling with
round-robin rotation), integrate room temperatures, then emit one event
per sensor. Meter KW = base + kw_per_occupant*occupants +
kw_per_fancoil*ON + Gaussian noise; noise applies to building meters only
and every component is logged, so readings reconstruct exactly.

The whole trace is a pure function of (config, seed, action sequence).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..commands import DutyCycle, Gtr, Notify
from ..errors import UnknownTarget
from ..events import Event, merge_ordered
from ..ontology import Iri
from . import scenario as world
from .scenario import Scenario


@dataclass
class ActuationState:
    gtr_delta: float = 0.0
    gtr_expiry: int = -1
    duty_cap: int | None = None
    duty_expiry: int = -1
    rotation: int = 0


@dataclass
class MeterComponents:
    """Debug decomposition of one meter reading (conservation oracle)."""

    source_id: str
    timestamp: int
    base: float
    occupant_kw: float
    fancoil_kw: float
    noise: float
    reading: float


@dataclass
class RoomState:
    temp_f: float
    occupants: int = 0
    coil_on: list = field(default_factory=list)


class Simulator:
    """Single-stepped world; `apply_action` queues and effects land at the
    next tick boundary, preserving determinism under interactive use."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.clock = scenario.start_time
        self.rng = random.Random(scenario.seed)
        self.rooms: dict[str, RoomState] = {
            rid: RoomState(temp_f=r.init_temp_f, coil_on=[0] * r.fan_coils)
            for rid, r in sorted(scenario.rooms.items())}
        self.actuation: dict[str, ActuationState] = {
            bid: ActuationState() for bid in sorted(scenario.buildings)}
        self.notifications: list[dict] = []
        self.debug_components: list[MeterComponents] = []
        self._pending: list = []
        self._seq: dict[str, int] = {}
        self._sched_emitted: set[int] = set()

    # --- actions ---

    def apply_action(self, command) -> dict:
        """Queue a command; it takes effect at the next tick boundary."""
        if isinstance(command, (Gtr, DutyCycle)):
            if command.target not in self.scenario.buildings:
                raise UnknownTarget(command.target)
        elif isinstance(command, Notify):
            pass
        else:
            raise UnknownTarget(f"simulator cannot apply {command!r}")
        self._pending.append(command)
        return {"queued": True, "effective_at": self.clock + self.scenario.cadence,
                "kind": command.kind}

    def _apply_pending(self, now: int) -> None:
        for cmd in self._pending:
            if isinstance(cmd, Gtr):
                st = self.actuation[cmd.target]
                st.gtr_delta = cmd.delta_f
                st.gtr_expiry = now + cmd.duration
            elif isinstance(cmd, DutyCycle):
                st = self.actuation[cmd.target]
                st.duty_cap = cmd.cap
                st.duty_expiry = now + cmd.duration
            elif isinstance(cmd, Notify):
                self.notifications.append({"time": now, "audience": cmd.audience,
                                           "template": cmd.template, "target": cmd.target})
        self._pending.clear()
        for st in self.actuation.values():
            if st.gtr_expiry >= 0 and now > st.gtr_expiry:
                st.gtr_delta, st.gtr_expiry = 0.0, -1
            if st.duty_expiry >= 0 and now > st.duty_expiry:
                st.duty_cap, st.duty_expiry = None, -1

    def effective_setpoint(self, room: world.RoomSpec) -> float:
        return room.setpoint_f + self.actuation[room.building].gtr_delta

    # --- stepping ---

    def _next_seq(self, stream: str) -> int:
        self._seq[stream] = self._seq.get(stream, 0) + 1
        return self._seq[stream]

    def _emit(self, buckets, stream: str, source: Iri, ts: int, attrs: dict) -> None:
        buckets.setdefault(stream, []).append(
            Event(stream_id=stream, source_id=source, seq=self._next_seq(stream),
                  timestamp=ts, attributes=attrs))

    def step(self, until: int) -> list[Event]:
        """Advance the clock to `until`, returning all events in merged order."""
        if until < self.clock:
            raise ValueError(f"cannot step backwards to {until} (clock {self.clock})")
        sc = self.scenario
        buckets: dict[str, list[Event]] = {}

        # class-schedule announcements fire exactly 3600 s before start,
        # independent of the sensor cadence
        for idx, entry in enumerate(sc.schedule):
            announce = entry.start - 3600
            if self.clock < announce <= until and idx not in self._sched_emitted:
                self._emit(buckets, "schstream", world.sch_source(entry.room), announce,
                           {"schedule": entry.start, "occupancy": entry.occupancy})
                self._sched_emitted.add(idx)

        t = self.clock
        while t + sc.cadence <= until:
            t += sc.cadence
            self._tick(t, buckets)
        self.clock = until
        streams = [buckets[k] for k in sorted(buckets)]
        return list(merge_ordered(*streams))

    def _tick(self, t: int, buckets) -> None:
        sc = self.scenario
        lm = sc.load_model
        self._apply_pending(t)
        outdoor = sc.outdoor.at(t)

        # occupancy (schedule + seeded walk-ins), room order fixed
        active = {}
        for entry in sc.schedule:
            if entry.start <= t < entry.end:
                active[entry.room] = active.get(entry.room, 0) + entry.occupancy
        for rid in sorted(self.rooms):
            occ = active.get(rid, 0)
            if lm.walk_in_rate > 0 and self.rng.random() < lm.walk_in_rate:
                occ += 1
            self.rooms[rid].occupants = occ

        # thermostat demand, then per-building duty-cycle cap (round-robin)
        demand: dict[str, list[tuple[str, int]]] = {b: [] for b in sc.buildings}
        for rid, room in sorted(sc.rooms.items()):
            state = self.rooms[rid]
            wants = state.temp_f > self.effective_setpoint(room)
            for i in range(room.fan_coils):
                state.coil_on[i] = 0
                if wants:
                    demand[room.building].append((rid, i))
        for bid in sorted(sc.buildings):
            act = self.actuation[bid]
            eligible = demand[bid]
            cap = act.duty_cap if act.duty_cap is not None else len(eligible)
            if eligible:
                if len(eligible) > cap:
                    chosen = [eligible[(act.rotation + i) % len(eligible)] for i in range(cap)]
                else:
                    chosen = eligible
                act.rotation += 1
                for rid, i in chosen:
                    self.rooms[rid].coil_on[i] = 1

        # temperature integration: drift to outdoor, cooled toward the
        # effective setpoint while any of the room's coils runs
        for rid, room in sorted(sc.rooms.items()):
            state = self.rooms[rid]
            temp = state.temp_f
            temp += room.drift * (outdoor - temp)
            if any(state.coil_on):
                temp += room.cool * (self.effective_setpoint(room) - temp)
            state.temp_f = temp

        # sensor emissions
        for rid, room in sorted(sc.rooms.items()):
            state = self.rooms[rid]
            if room.sensors.get("sts"):
                self._emit(buckets, "stsstream", world.sts_source(room), t,
                           {"reading": round(state.temp_f, 2)})
            if room.sensors.get("rtemp"):
                self._emit(buckets, "rtempstream", world.rtemp_source(room), t,
                           {"reading": round(state.temp_f, 2)})
            if room.sensors.get("occ"):
                self._emit(buckets, "occstream", world.occ_source(room), t,
                           {"reading": 1 if state.occupants > 0 else 0})
            for i in range(room.fan_coils):
                self._emit(buckets, "fancoilstream", world.coil_source(rid, i), t,
                           {"reading": state.coil_on[i]})

        # meters: buildings (with noise) then room sub-meters (noise-free)
        for bid, bld in sorted(sc.buildings.items()):
            occupants = sum(self.rooms[rid].occupants
                            for rid, r in sc.rooms.items() if r.building == bid)
            on_coils = sum(sum(self.rooms[rid].coil_on)
                           for rid, r in sc.rooms.items() if r.building == bid)
            occupant_kw = lm.kw_per_occupant * occupants
            fancoil_kw = lm.kw_per_fancoil * on_coils
            noise = self.rng.gauss(0.0, lm.noise_sd)
            reading = bld.base_kw + occupant_kw + fancoil_kw + noise
            src = world.meter_source(bid)
            self.debug_components.append(MeterComponents(
                source_id=str(src), timestamp=t, base=bld.base_kw,
                occupant_kw=occupant_kw, fancoil_kw=fancoil_kw, noise=noise,
                reading=reading))
            self._emit(buckets, "meterstream", src, t, {"reading": reading})
        for rid, room in sorted(sc.rooms.items()):
            if not room.sensors.get("meter"):
                continue
            state = self.rooms[rid]
            occupant_kw = lm.kw_per_occupant * state.occupants
            fancoil_kw = lm.kw_per_fancoil * sum(state.coil_on)
            reading = room.base_kw + occupant_kw + fancoil_kw
            src = world.meter_source(rid)
            self.debug_components.append(MeterComponents(
                source_id=str(src), timestamp=t, base=room.base_kw,
                occupant_kw=occupant_kw, fancoil_kw=fancoil_kw, noise=0.0,
                reading=reading))
            self._emit(buckets, "meterstream", src, t, {"reading": reading})

    # --- whole-run helper ---

    def run(self, duration: int, sinks=()) -> dict:
        """Stream `duration` seconds of events to sinks; returns a summary
        (per-stream counts, per-building peak KW and total KWh)."""
        events = self.step(self.clock + duration)
        counts: dict[str, int] = {}
        peak: dict[str, float] = {}
        kwh: dict[str, float] = {}
        building_meters = {str(world.meter_source(b)): b for b in self.scenario.buildings}
        for ev in events:
            counts[ev.stream_id] = counts.get(ev.stream_id, 0) + 1
            if ev.stream_id == "meterstream":
                bid = building_meters.get(str(ev.source_id))
                if bid is not None:
                    kw = ev.attributes["reading"]
                    peak[bid] = max(peak.get(bid, 0.0), kw)
                    kwh[bid] = kwh.get(bid, 0.0) + kw * self.scenario.cadence / 3600.0
            for sink in sinks:
                sink(ev)
        return {"events": counts, "peak_kw": peak, "total_kwh": kwh}
