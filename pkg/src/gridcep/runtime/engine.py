"""The CEP engine: pattern registry, lifecycle, and the ingest path.

One logical event loop: every ingest, tick, and lifecycle command runs
serialized on the caller's thread (the harness owns the single loop); the
detection log is append-only and safe for concurrent readers.

Per event, per active pattern: (1) semantic stage — lift the event and
evaluate the pattern's per-variable BGP slice against ontology ∪ lifted
graph with subclass inference; (2) syntactic stage — feed the qualified
event to the compiled operator. Detections come out in pattern
registration order, then operator buffer (binding) order.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DuplicateId, OutOfOrder, UnknownPattern, UnknownStream
from ..events import Event, StreamSchema, event_node, lift_event
from ..ontology import GraphView, Ontology, match_bgp
from ..pattern.validate import AggPlan, CheckedPattern, FilterPlan, JoinPlan, SeqPlan
from .detections import Detection
from .operators import AggOp, FilterOp, JoinOp, Qualified, SeqOp


@dataclass
class PatternState:
    checked: CheckedPattern
    status: str              # active | inactive
    op: object
    order: int
    never_matches: bool
    activated_at: int


class Engine:
    def __init__(self, ontology: Ontology, schemas: dict[str, StreamSchema], *,
                 start_time: int = 0):
        self.ontology = ontology
        self.schemas = dict(schemas)
        self.detections: list[Detection] = []   # append-only log
        self._patterns: dict[str, PatternState] = {}
        self._ordered: list[PatternState] = []  # registration order (hot path)
        self._clock = start_time
        self._stream_last: dict[str, tuple[int, int]] = {}  # stream -> (seq, ts)

    @property
    def clock(self) -> int:
        return self._clock

    def patterns(self) -> list[PatternState]:
        return list(self._ordered)

    def status_of(self, pattern_id: str) -> str:
        return self._state(pattern_id).status

    def _state(self, pattern_id: str) -> PatternState:
        st = self._patterns.get(pattern_id)
        if st is None:
            raise UnknownPattern(pattern_id)
        return st

    # --- registration & lifecycle ---

    def register_pattern(self, checked: CheckedPattern) -> str:
        existing = self._patterns.get(checked.pattern_id)
        if existing is not None:
            if existing.checked.text == checked.text:
                return checked.pattern_id  # idempotent re-registration
            raise DuplicateId(f"pattern id {checked.pattern_id!r} already registered with different text")

        never = False
        if checked.static_patterns:
            if not match_bgp(list(checked.static_patterns), GraphView(self.ontology)):
                never = True

        st = PatternState(checked=checked, status="inactive",
                          op=self._build_op(checked), order=len(self._patterns),
                          never_matches=never, activated_at=self._clock)
        self._patterns[checked.pattern_id] = st
        self._ordered.append(st)
        if checked.lifecycle == "persistent":
            self._activate(st)
        elif checked.lifecycle == "scheduled":
            if checked.schedule.active_at(self._clock):
                self._activate(st)
        # on_demand stays inactive until activated
        return checked.pattern_id

    def _build_op(self, checked: CheckedPattern):
        plan = checked.plan
        if isinstance(plan, SeqPlan):
            return SeqOp(plan, self._emitter(checked))
        if isinstance(plan, JoinPlan):
            return JoinOp(plan, self._emitter(checked))
        if isinstance(plan, AggPlan):
            return AggOp(plan, self._agg_emitter(checked), activation_ts=self._clock)
        if isinstance(plan, FilterPlan):
            return FilterOp(plan, self._emitter(checked))
        raise TypeError(f"no operator for plan {plan!r}")

    def _activate(self, st: PatternState) -> None:
        if st.status == "active":
            return
        st.status = "active"
        st.activated_at = self._clock
        st.op.reset(self._clock)

    def _deactivate(self, st: PatternState) -> None:
        if st.status == "inactive":
            return
        st.status = "inactive"
        st.op.reset(self._clock)  # buffered state drops immediately

    def activate(self, pattern_id: str) -> str:
        st = self._state(pattern_id)
        self._activate(st)
        return st.status

    def deactivate(self, pattern_id: str) -> str:
        st = self._state(pattern_id)
        self._deactivate(st)
        return st.status

    # --- time ---

    def tick(self, wall_time: int) -> list[tuple[str, str]]:
        """Advance the clock: flip scheduled patterns, close due batch blocks.

        Returns (pattern_id, new_status) for every flip. Detections emitted
        by closing batch windows land on the detection log.
        """
        if wall_time < self._clock:
            raise OutOfOrder(f"tick backwards: {wall_time} < {self._clock}")
        self._clock = wall_time
        changes = []
        for st in self._ordered:
            if st.checked.lifecycle == "scheduled":
                desired = st.checked.schedule.active_at(wall_time)
                if desired and st.status == "inactive":
                    self._activate(st)
                    changes.append((st.checked.pattern_id, "active"))
                elif not desired and st.status == "active":
                    self._deactivate(st)
                    changes.append((st.checked.pattern_id, "inactive"))
        for st in self._ordered:
            if st.status == "active":
                st.op.on_tick(wall_time)
        return changes

    # --- ingest ---

    def ingest(self, event: Event) -> list[Detection]:
        if event.timestamp < self._clock:
            raise OutOfOrder(f"event at {event.timestamp} behind engine clock {self._clock}")
        last = self._stream_last.get(event.stream_id)
        if last is not None:
            last_seq, last_ts = last
            if event.seq <= last_seq:
                raise OutOfOrder(f"stream {event.stream_id!r}: seq {event.seq} after {last_seq}")
            if event.timestamp < last_ts:
                raise OutOfOrder(f"stream {event.stream_id!r}: timestamp regressed")
        self._stream_last[event.stream_id] = (event.seq, event.timestamp)

        schema = self.schemas.get(event.stream_id)
        if schema is None:
            raise UnknownStream(event.stream_id)

        mark = len(self.detections)
        self.tick(event.timestamp)

        lifted = lift_event(event, schema, self.ontology.namespaces)
        view = GraphView(self.ontology, lifted)
        node = event_node(event, self.ontology.namespaces)

        for st in self._ordered:
            if st.status != "active" or st.never_matches:
                continue
            checked = st.checked
            for var, stream in checked.var_streams.items():
                if stream != event.stream_id:
                    continue
                slice_tps = checked.slices.get(var, ())
                if slice_tps:
                    solutions = match_bgp(list(slice_tps), view, {var: node})
                    if not solutions:
                        continue
                    keys = frozenset(
                        tuple(sol.get(sv) for sv in checked.shared_vars) for sol in solutions)
                else:
                    keys = frozenset([()])
                st.op.on_event(var, Qualified(event=event, keys=keys))
        return self.detections[mark:]

    # --- detection construction ---

    def _emitter(self, checked: CheckedPattern):
        def emit(bound: dict[str, Event]) -> None:
            detection_time = max(ev.timestamp for ev in bound.values())
            consequence_time = detection_time
            if checked.consequence is not None:
                var, attr = checked.consequence
                if var in bound:
                    consequence_time = int(bound[var].attr(attr))
            outputs = {}
            for kind, name in checked.ast.select:
                if kind == "var" and name in bound:
                    outputs[f"?{name}"] = bound[name].ref()
            self.detections.append(Detection(
                pattern_id=checked.pattern_id, detection_time=detection_time,
                consequence_time=consequence_time, outputs=outputs,
                bindings={v: ev.ref() for v, ev in bound.items()}))
        return emit

    def _agg_emitter(self, checked: CheckedPattern):
        alias = checked.plan.alias

        def emit(value: float, detection_time: int) -> None:
            self.detections.append(Detection(
                pattern_id=checked.pattern_id, detection_time=detection_time,
                consequence_time=detection_time, outputs={alias: value}, bindings={}))
        return emit
