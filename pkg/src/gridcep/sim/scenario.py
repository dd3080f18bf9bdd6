"""Scenario configuration: parse the JSON document and generate the world —
domain ontology (buildings, rooms, sensors, organizations) plus the stream
schemas the patterns validate against.

Config shape (see fixtures/scenarios/*.json):

    {
      "seed": 42,
      "start_time": 0,
      "buildings": [{"id": "MHP", "base_kw": 8.0, "department": "org:EEDepartment"}],
      "rooms": [{"id": "MHP101", "building": "MHP", "type": "bd:Classroom",
                 "setpoint_f": 70, "fan_coils": 2,
                 "sensors": {"sts": true, "occ": true, "meter": false},
                 "base_kw": 0.3, "department": "org:EEDepartment",
                 "thermal": {"drift": 0.08, "cool": 0.8}}],
      "departments": [{"id": "org:EEDepartment"}],
      "schedule": [{"room": "MHP101", "start": 28800, "end": 36000, "occupancy": 20}],
      "load_model": {"kw_per_occupant": 0.1, "kw_per_fancoil": 2.0,
                     "noise_sd": 0.05, "walk_in_rate": 0.0},
      "thermal": {"drift": 0.08, "cool": 0.8},
      "outdoor": {"mean_f": 78, "amplitude_f": 12, "period_s": 86400, "phase_s": 28800},
      "cadence": {"default": 60}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..events import AttributeSpec, StreamSchema
from ..ontology import DEFAULT_NAMESPACES, Iri, Ontology, Triple, expand_qname

SENSOR_STREAMS = ("meterstream", "fancoilstream", "schstream", "rtempstream",
                  "occstream", "stsstream")

# class hierarchy shipped with every generated ontology
_BASE_HIERARCHY = [
    ("bd:MeetingRoom", "bd:Office"),
    ("bd:Office", "bd:Room"),
    ("bd:Classroom", "bd:Room"),
    ("bd:ComputerLab", "bd:Lab"),
    ("bd:Lab", "bd:Room"),
]


@dataclass
class RoomSpec:
    id: str
    building: str
    type_qname: str
    setpoint_f: float
    fan_coils: int
    sensors: dict
    base_kw: float
    department: str | None
    drift: float
    cool: float
    init_temp_f: float


@dataclass
class BuildingSpec:
    id: str
    base_kw: float
    department: str | None


@dataclass
class ScheduleEntry:
    room: str
    start: int
    end: int
    occupancy: int


@dataclass
class LoadModel:
    kw_per_occupant: float = 0.1
    kw_per_fancoil: float = 2.0
    noise_sd: float = 0.0
    walk_in_rate: float = 0.0


@dataclass
class OutdoorProfile:
    mean_f: float = 78.0
    amplitude_f: float = 12.0
    period_s: int = 86400
    phase_s: int = 28800

    def at(self, t: int) -> float:
        return self.mean_f + self.amplitude_f * math.sin(
            2.0 * math.pi * (t - self.phase_s) / self.period_s)


@dataclass
class Scenario:
    seed: int
    start_time: int
    buildings: dict[str, BuildingSpec]
    rooms: dict[str, RoomSpec]
    departments: list[str]
    schedule: list[ScheduleEntry]
    load_model: LoadModel
    outdoor: OutdoorProfile
    cadence: int
    ontology: Ontology = field(default=None, repr=False)
    schemas: dict[str, StreamSchema] = field(default_factory=dict, repr=False)


def _req(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return obj[key]


def load_scenario(config: dict) -> Scenario:
    """Validate config, generate ontology + stream schemas."""
    buildings_cfg = _req(config, "buildings", "$")
    if not isinstance(buildings_cfg, list) or not buildings_cfg:
        raise ConfigError("$.buildings", "must be a non-empty list")

    departments = [d["id"] if isinstance(d, dict) else d
                   for d in config.get("departments", [])]

    buildings: dict[str, BuildingSpec] = {}
    for i, b in enumerate(buildings_cfg):
        bid = _req(b, "id", f"$.buildings[{i}]")
        dept = b.get("department")
        if dept is not None and dept not in departments:
            raise ConfigError(f"$.buildings[{i}].department", f"undeclared department {dept!r}")
        buildings[bid] = BuildingSpec(id=bid, base_kw=float(b.get("base_kw", 0.0)),
                                      department=dept)

    thermal_default = config.get("thermal", {})
    default_drift = float(thermal_default.get("drift", 0.08))
    default_cool = float(thermal_default.get("cool", 0.8))

    rooms: dict[str, RoomSpec] = {}
    for i, r in enumerate(config.get("rooms", [])):
        rid = _req(r, "id", f"$.rooms[{i}]")
        bld = _req(r, "building", f"$.rooms[{i}]")
        if bld not in buildings:
            raise ConfigError(f"$.rooms[{i}].building", f"unknown building {bld!r}")
        dept = r.get("department")
        if dept is not None and dept not in departments:
            raise ConfigError(f"$.rooms[{i}].department", f"undeclared department {dept!r}")
        thermal = r.get("thermal", {})
        setpoint = float(r.get("setpoint_f", 72.0))
        rooms[rid] = RoomSpec(
            id=rid, building=bld, type_qname=r.get("type", "bd:Room"),
            setpoint_f=setpoint, fan_coils=int(r.get("fan_coils", 0)),
            sensors=dict(r.get("sensors", {})), base_kw=float(r.get("base_kw", 0.0)),
            department=dept,
            drift=float(thermal.get("drift", default_drift)),
            cool=float(thermal.get("cool", default_cool)),
            init_temp_f=float(r.get("init_temp_f", setpoint)))

    schedule = []
    for i, s in enumerate(config.get("schedule", [])):
        room = _req(s, "room", f"$.schedule[{i}]")
        if room not in rooms:
            raise ConfigError(f"$.schedule[{i}].room", f"unknown room {room!r}")
        start, end = int(_req(s, "start", f"$.schedule[{i}]")), int(_req(s, "end", f"$.schedule[{i}]"))
        if end <= start:
            raise ConfigError(f"$.schedule[{i}].end", "class must end after it starts")
        schedule.append(ScheduleEntry(room=room, start=start, end=end,
                                      occupancy=int(s.get("occupancy", 0))))
    schedule.sort(key=lambda e: (e.start, e.room))

    lm = config.get("load_model", {})
    load_model = LoadModel(
        kw_per_occupant=float(lm.get("kw_per_occupant", 0.1)),
        kw_per_fancoil=float(lm.get("kw_per_fancoil", 2.0)),
        noise_sd=float(lm.get("noise_sd", 0.0)),
        walk_in_rate=float(lm.get("walk_in_rate", 0.0)))

    od = config.get("outdoor", {})
    outdoor = OutdoorProfile(
        mean_f=float(od.get("mean_f", 78.0)), amplitude_f=float(od.get("amplitude_f", 12.0)),
        period_s=int(od.get("period_s", 86400)), phase_s=int(od.get("phase_s", 28800)))

    scenario = Scenario(
        seed=int(config.get("seed", 0)), start_time=int(config.get("start_time", 0)),
        buildings=buildings, rooms=rooms, departments=departments, schedule=schedule,
        load_model=load_model, outdoor=outdoor,
        cadence=int(config.get("cadence", {}).get("default", 60)))
    scenario.ontology = _generate_ontology(scenario)
    scenario.schemas = _generate_schemas(scenario)
    return scenario


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(json.load(fh))


# --- sensor naming ---

def meter_source(target_id: str) -> Iri:
    return _ee(f"{target_id}METER")

def coil_source(room_id: str, index: int) -> Iri:
    return _ee(f"{room_id}FC{index}")

def sts_source(room: RoomSpec) -> Iri:
    custom = room.sensors.get("sts")
    return _ee(custom if isinstance(custom, str) else f"{room.id}TEMP")

def rtemp_source(room: RoomSpec) -> Iri:
    custom = room.sensors.get("rtemp")
    return _ee(custom if isinstance(custom, str) else f"{room.id}RTEMP")

def occ_source(room: RoomSpec) -> Iri:
    custom = room.sensors.get("occ")
    return _ee(custom if isinstance(custom, str) else f"{room.id}OCC")

def sch_source(room_id: str) -> Iri:
    return _ee(f"{room_id}SCH")

def action_source(building_id: str) -> Iri:
    return _ee(f"{building_id}ACTION")


def _ee(local: str) -> Iri:
    return Iri(DEFAULT_NAMESPACES["ee"] + local)

def _bd(local: str) -> Iri:
    return Iri(DEFAULT_NAMESPACES["bd"] + local)

def _qname(text: str) -> Iri:
    return expand_qname(text, DEFAULT_NAMESPACES)


# --- world generation ---

def _generate_ontology(sc: Scenario) -> Ontology:
    triples: list[Triple] = []
    rdf_type = _qname("rdf:type")
    subclass = _qname("rdfs:subClassOf")
    has_location = _qname("bd:hasLocation")
    part_of = _qname("bd:partOf")
    belongs_to = _qname("bd:belongsTo")

    for sub, sup in _BASE_HIERARCHY:
        triples.append(Triple(_qname(sub), subclass, _qname(sup)))

    for dept in sc.departments:
        triples.append(Triple(_qname(dept), rdf_type, _qname("org:Department")))

    for bld in sorted(sc.buildings.values(), key=lambda b: b.id):
        node = _bd(bld.id)
        triples.append(Triple(node, rdf_type, _qname("bd:Building")))
        if bld.department:
            triples.append(Triple(node, belongs_to, _qname(bld.department)))

    for room in sorted(sc.rooms.values(), key=lambda r: r.id):
        node = _bd(room.id)
        triples.append(Triple(node, rdf_type, _qname(room.type_qname)))
        triples.append(Triple(node, part_of, _bd(room.building)))
        if room.department:
            triples.append(Triple(node, belongs_to, _qname(room.department)))

    for src, kind, loc in _iter_sensors(sc):
        triples.append(Triple(src, rdf_type, _qname(kind)))
        triples.append(Triple(src, has_location, loc))

    return Ontology(triples)


def _iter_sensors(sc: Scenario):
    """(source IRI, sensor class qname, location IRI) for every sensor."""
    for bld in sorted(sc.buildings.values(), key=lambda b: b.id):
        yield meter_source(bld.id), "ee:Meter", _bd(bld.id)
        yield action_source(bld.id), "ee:ActionSource", _bd(bld.id)
    for room in sorted(sc.rooms.values(), key=lambda r: r.id):
        loc = _bd(room.id)
        if room.sensors.get("meter"):
            yield meter_source(room.id), "ee:Meter", loc
        if room.sensors.get("sts"):
            yield sts_source(room), "ee:TempSensor", loc
        if room.sensors.get("rtemp"):
            yield rtemp_source(room), "ee:TempSensor", loc
        if room.sensors.get("occ"):
            yield occ_source(room), "ee:OccupancySensor", loc
        for i in range(room.fan_coils):
            yield coil_source(room.id, i), "ee:FanCoil", loc
    scheduled_rooms = sorted({e.room for e in sc.schedule})
    for rid in scheduled_rooms:
        yield sch_source(rid), "ee:ScheduleSource", _bd(rid)


_LIFT_COMMON = {"source_id": "evt:hasSource", "timestamp": "evt:hasTimestamp"}


def _schema(stream_id: str, attrs: dict, lift_extra: dict) -> StreamSchema:
    lift = {k: _qname(v) for k, v in {**_LIFT_COMMON, **lift_extra}.items()}
    return StreamSchema(stream_id=stream_id, attributes=attrs, lift=lift, sources={})


def _generate_schemas(sc: Scenario) -> dict[str, StreamSchema]:
    schemas = {
        "meterstream": _schema("meterstream",
                               {"reading": AttributeSpec("number", "KW")},
                               {"reading": "evt:hasReading"}),
        "fancoilstream": _schema("fancoilstream",
                                 {"reading": AttributeSpec("boolean", "bool01")},
                                 {"reading": "evt:hasReading"}),
        "schstream": _schema("schstream",
                             {"schedule": AttributeSpec("timestamp", "epoch-s"),
                              "occupancy": AttributeSpec("number", "persons")},
                             {"schedule": "evt:hasSchedule", "occupancy": "evt:hasOccupancy"}),
        "rtempstream": _schema("rtempstream",
                               {"reading": AttributeSpec("number", "degF")},
                               {"reading": "evt:hasReading"}),
        "occstream": _schema("occstream",
                             {"reading": AttributeSpec("boolean", "bool01")},
                             {"reading": "evt:hasReading"}),
        "stsstream": _schema("stsstream",
                             {"reading": AttributeSpec("number", "degF")},
                             {"reading": "evt:hasReading"}),
        "actionstream": _schema("actionstream",
                                {"action": AttributeSpec("string", ""),
                                 "magnitude": AttributeSpec("number", "")},
                                {"action": "evt:hasAction", "magnitude": "evt:hasMagnitude"}),
    }
    rdf_type = _qname("rdf:type")
    has_location = _qname("bd:hasLocation")

    def add_source(stream: str, src: Iri, kind: str, loc: Iri):
        schemas[stream].sources[src] = [
            Triple(src, rdf_type, _qname(kind)), Triple(src, has_location, loc)]

    for bld in sorted(sc.buildings.values(), key=lambda b: b.id):
        add_source("meterstream", meter_source(bld.id), "ee:Meter", _bd(bld.id))
        add_source("actionstream", action_source(bld.id), "ee:ActionSource", _bd(bld.id))
    for room in sorted(sc.rooms.values(), key=lambda r: r.id):
        loc = _bd(room.id)
        if room.sensors.get("meter"):
            add_source("meterstream", meter_source(room.id), "ee:Meter", loc)
        if room.sensors.get("sts"):
            add_source("stsstream", sts_source(room), "ee:TempSensor", loc)
        if room.sensors.get("rtemp"):
            add_source("rtempstream", rtemp_source(room), "ee:TempSensor", loc)
        if room.sensors.get("occ"):
            add_source("occstream", occ_source(room), "ee:OccupancySensor", loc)
        for i in range(room.fan_coils):
            add_source("fancoilstream", coil_source(room.id, i), "ee:FanCoil", loc)
    for rid in sorted({e.room for e in sc.schedule}):
        add_source("schstream", sch_source(rid), "ee:ScheduleSource", _bd(rid))
    return schemas
