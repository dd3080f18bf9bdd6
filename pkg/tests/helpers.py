"""Shared builders: tiny synthetic worlds and event factories."""

from __future__ import annotations

from gridcep.events import AttributeSpec, Event, StreamSchema
from gridcep.ontology import DEFAULT_NAMESPACES, Iri, Ontology, Triple, expand_qname


def q(text: str) -> Iri:
    return expand_qname(text, DEFAULT_NAMESPACES)


def make_world(n_sources: int = 4, office_every: int = 2):
    """Ontology + two-stream schemas (`s_a`, `s_b`) over shared sensors.

    Sensor i sits in room R{i}; every `office_every`-th room is an Office
    (rest are Classrooms), so BGP filters have something to discriminate.
    """
    triples = [
        Triple(q("bd:MeetingRoom"), q("rdfs:subClassOf"), q("bd:Office")),
        Triple(q("bd:Office"), q("rdfs:subClassOf"), q("bd:Room")),
        Triple(q("bd:Classroom"), q("rdfs:subClassOf"), q("bd:Room")),
        Triple(q("bd:B1"), q("rdf:type"), q("bd:Building")),
    ]
    schemas = {}
    for stream in ("s_a", "s_b"):
        sources = {}
        for i in range(n_sources):
            src = q(f"ee:{stream.upper()}{i}")
            room = q(f"bd:R{i}")
            room_type = q("bd:Office") if i % office_every == 0 else q("bd:Classroom")
            static = [Triple(src, q("rdf:type"), q("ee:TempSensor")),
                      Triple(src, q("bd:hasLocation"), room)]
            sources[src] = static
            triples += [Triple(room, q("rdf:type"), room_type),
                        Triple(room, q("bd:partOf"), q("bd:B1"))] + static
        schemas[stream] = StreamSchema(
            stream_id=stream,
            attributes={"reading": AttributeSpec("number", "KW"),
                        "due": AttributeSpec("timestamp", "epoch-s")},
            lift={"source_id": q("evt:hasSource"), "timestamp": q("evt:hasTimestamp"),
                  "reading": q("evt:hasReading"), "due": q("evt:hasDue")},
            sources=sources)
    # deduplicate static triples added per stream
    return Ontology(triples), schemas


def ev(stream: str, seq: int, ts: int, reading, source_idx: int = 0, **extra) -> Event:
    attrs = {"reading": reading, **extra}
    return Event(stream_id=stream, source_id=q(f"ee:{stream.upper()}{source_idx}"),
                 seq=seq, timestamp=ts, attributes=attrs)


def register(engine_ontology, schemas, text: str, *, pattern_id="p", end_use="monitoring",
             lifecycle="persistent", schedule=None, start_time=0):
    """Parse + validate + register a single pattern on a fresh Engine."""
    from gridcep.pattern.parser import parse_pattern
    from gridcep.pattern.validate import validate
    from gridcep.runtime.engine import Engine

    engine = Engine(engine_ontology, schemas, start_time=start_time)
    checked = validate(parse_pattern(text), engine_ontology, schemas,
                       pattern_id=pattern_id, end_use=end_use, lifecycle=lifecycle,
                       schedule=schedule)
    engine.register_pattern(checked)
    return engine
