"""Events, stream schemas, and the lifting of raw tuples into semantic graphs.

A raw event is a timestamped attribute tuple from a named stream. Lifting
turns it into a small graph around a synthetic event node
(`evt:<stream_id>/<seq>`): one triple per mapped attribute plus the static
context triples of the producing sensor (location, sensor type).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .errors import OutOfOrderInput, SchemaViolation, UnknownSource
from .ontology import Iri, Triple, expand_qname

# attribute value kinds a stream schema may declare
KINDS = ("number", "string", "boolean", "timestamp", "iri")


@dataclass(frozen=True)
class Event:
    stream_id: str
    source_id: Iri
    seq: int
    timestamp: int  # event time, integer seconds UTC epoch
    attributes: dict

    def attr(self, name: str):
        """Attribute lookup with the builtin timestamp/seq pseudo-attributes."""
        if name == "timestamp":
            return self.timestamp
        if name == "seq":
            return self.seq
        return self.attributes[name]

    def ref(self) -> dict:
        return {"stream_id": self.stream_id, "seq": self.seq,
                "timestamp": self.timestamp, "source_id": str(self.source_id)}


@dataclass(frozen=True)
class AttributeSpec:
    kind: str              # one of KINDS
    unit: str = ""         # KW, degF, bool01, epoch-s, ...


@dataclass
class StreamSchema:
    """Declared attributes, tuple→graph lift mapping, and per-source context.

    `lift` maps attribute names to predicate IRIs and always covers
    `source_id` (evt:hasSource) and `timestamp` (evt:hasTimestamp).
    `sources` holds each sensor's static neighborhood (Figure-1 style:
    sensor type, location).
    """

    stream_id: str
    attributes: dict[str, AttributeSpec]
    lift: dict[str, Iri]
    sources: dict[Iri, list[Triple]] = field(default_factory=dict)

    def __post_init__(self):
        for required in ("source_id", "timestamp"):
            if required not in self.lift:
                raise SchemaViolation(f"stream {self.stream_id!r}: lift mapping must cover {required!r}")

    def check(self, event: Event) -> None:
        if event.stream_id != self.stream_id:
            raise SchemaViolation(f"event stream {event.stream_id!r} != schema {self.stream_id!r}")
        for name, value in event.attributes.items():
            spec = self.attributes.get(name)
            if spec is None:
                raise SchemaViolation(f"stream {self.stream_id!r}: undeclared attribute {name!r}")
            if spec.kind in ("number", "timestamp", "boolean") and not isinstance(value, (int, float)):
                raise SchemaViolation(f"stream {self.stream_id!r}: attribute {name!r} must be numeric")

    def attr_kind(self, name: str) -> str | None:
        if name == "timestamp":
            return "timestamp"
        if name == "seq":
            return "number"
        spec = self.attributes.get(name)
        return spec.kind if spec else None


def event_node(event: Event, namespaces: dict[str, str]) -> Iri:
    """Deterministic event node IRI: evt:<stream_id>/<seq>."""
    return Iri(namespaces["evt"] + f"{event.stream_id}/{event.seq}")


def lift_event(event: Event, schema: StreamSchema, namespaces: dict[str, str]) -> list[Triple]:
    """Lift a raw event into its semantic graph.

    Returns the event node's own triples (source, timestamp, one per mapped
    attribute) followed by the source's static context triples.
    """
    schema.check(event)
    static = schema.sources.get(event.source_id)
    if static is None:
        raise UnknownSource(event.source_id)
    node = event_node(event, namespaces)
    triples = [
        Triple(node, schema.lift["source_id"], event.source_id),
        Triple(node, schema.lift["timestamp"], event.timestamp),
    ]
    for name, value in event.attributes.items():
        pred = schema.lift.get(name)
        if pred is None:
            raise SchemaViolation(f"stream {schema.stream_id!r}: no lift mapping for attribute {name!r}")
        triples.append(Triple(node, pred, value))
    triples.extend(static)
    return triples


def merge_ordered(*streams):
    """Merge per-stream timestamp-ordered iterators into global event-time order.

    Key: (timestamp, stream_id lexicographic, seq). Raises OutOfOrderInput
    as soon as an input iterator yields a timestamp below its predecessor.
    """

    def checked(it):
        last_ts = None
        last_seq = None
        for ev in it:
            if last_ts is not None and ev.timestamp < last_ts:
                raise OutOfOrderInput(ev.stream_id, ev.seq,
                                      f"timestamp {ev.timestamp} after {last_ts}")
            if last_seq is not None and ev.seq <= last_seq:
                raise OutOfOrderInput(ev.stream_id, ev.seq,
                                      f"seq {ev.seq} after {last_seq}")
            last_ts, last_seq = ev.timestamp, ev.seq
            yield (ev.timestamp, ev.stream_id, ev.seq), ev

    for _key, ev in heapq.merge(*(checked(s) for s in streams), key=lambda kv: kv[0]):
        yield ev


# --- JSON-lines event format (simulator export and runtime ingest) ---

def event_to_json(event: Event) -> str:
    return json.dumps({
        "stream_id": event.stream_id,
        "source_id": str(event.source_id),
        "seq": event.seq,
        "timestamp": event.timestamp,
        "attributes": event.attributes,
    }, sort_keys=True, separators=(",", ":"))


def event_from_json(line: str) -> Event:
    obj = json.loads(line)
    return Event(stream_id=obj["stream_id"], source_id=Iri(obj["source_id"]),
                 seq=obj["seq"], timestamp=obj["timestamp"], attributes=obj["attributes"])


def schemas_to_json(schemas: dict[str, StreamSchema], namespaces: dict[str, str]) -> str:
    """One JSON object per stream: stream_id, attributes, lift, sources."""
    from .ontology import compact_iri

    def fmt_term(t):
        if isinstance(t, Iri):
            return compact_iri(t, namespaces)
        return t

    out = []
    for sid in sorted(schemas):
        sc = schemas[sid]
        out.append({
            "stream_id": sid,
            "attributes": {n: {"kind": a.kind, "unit": a.unit} for n, a in sorted(sc.attributes.items())},
            "lift": {n: compact_iri(p, namespaces) for n, p in sorted(sc.lift.items())},
            "sources": {
                compact_iri(src, namespaces): [
                    [fmt_term(t.subject), fmt_term(t.predicate), fmt_term(t.object)] for t in triples
                ] for src, triples in sorted(sc.sources.items())
            },
        })
    return json.dumps(out, indent=2, sort_keys=True)


def schemas_from_json(text: str, namespaces: dict[str, str]) -> dict[str, StreamSchema]:
    def parse_term(t):
        if isinstance(t, str) and ":" in t and not t.startswith("<"):
            return expand_qname(t, namespaces)
        if isinstance(t, str) and t.startswith("<") and t.endswith(">"):
            return Iri(t[1:-1])
        return t

    schemas = {}
    for obj in json.loads(text):
        sid = obj["stream_id"]
        schemas[sid] = StreamSchema(
            stream_id=sid,
            attributes={n: AttributeSpec(kind=a["kind"], unit=a.get("unit", ""))
                        for n, a in obj["attributes"].items()},
            lift={n: expand_qname(p, namespaces) for n, p in obj["lift"].items()},
            sources={expand_qname(src, namespaces): [
                Triple(parse_term(s), parse_term(p), parse_term(o)) for s, p, o in triples
            ] for src, triples in obj.get("sources", {}).items()},
        )
    return schemas
