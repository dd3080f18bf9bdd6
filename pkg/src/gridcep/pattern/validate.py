"""Semantic validation: resolve names against ontology + schemas, slice the
BGP per event variable, infer taxonomy tags, and compile the operator plan.

The per-variable slice of the WHERE block is the set of triple patterns
reachable from that event variable without crossing another event variable;
slices are evaluated per event at runtime, and correlation across slices is
re-established at pairing time through the variables the slices share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    UndeclaredVariable, UnknownAttribute, UnknownStream, UnresolvedQName,
    UnresolvedPrefix, ValidationError,
)
from ..ontology import Iri, Ontology, TriplePattern, Var
from .ast import Aggregate, AttrRef, Condition, Duration, Join, Number, PatternAst, Seq, Window
from .printer import format_pattern

NUMERIC_KINDS = ("number", "timestamp", "boolean")

END_USES = ("monitoring", "prediction", "curtailment")
LIFECYCLES = ("persistent", "scheduled", "on_demand")


@dataclass(frozen=True)
class ScheduleSpec:
    """Recurring daily windows (seconds-of-day) and absolute epoch intervals."""

    daily: tuple = ()      # tuple[(start_s, end_s), ...], half-open
    absolute: tuple = ()   # tuple[(start_epoch, end_epoch), ...], half-open

    def active_at(self, t: int) -> bool:
        tod = t % 86400
        for start, end in self.daily:
            if start <= tod < end:
                return True
        for start, end in self.absolute:
            if start <= t < end:
                return True
        return False

    def describe(self) -> str:
        parts = [f"daily {s//3600:02d}:{(s%3600)//60:02d}-{e//3600:02d}:{(e%3600)//60:02d}"
                 for s, e in self.daily]
        parts += [f"abs {s}-{e}" for s, e in self.absolute]
        return "; ".join(parts)


@dataclass(frozen=True)
class TaxonomyTags:
    """One feature per taxonomy dimension (end-use, spatial, temporal x2,
    representation, life cycle, adaptivity)."""

    end_use: str
    spatial: str
    frequency: str
    latency: str            # "zero" | "positive"
    representation: str = "semantic"
    lifecycle: str = "persistent"
    adaptivity: str = "static"

    def to_dict(self) -> dict:
        return {
            "end_use": self.end_use, "spatial": self.spatial,
            "frequency": self.frequency, "latency": self.latency,
            "representation": self.representation, "lifecycle": self.lifecycle,
            "adaptivity": self.adaptivity,
        }


# --- compiled operator plans ---

@dataclass(frozen=True)
class SeqPlan:
    first_var: str
    second_var: str
    within_seconds: int
    first_guards: tuple
    second_guards: tuple


@dataclass(frozen=True)
class JoinPlan:
    left_var: str
    right_var: str
    conditions: tuple
    retention_left: int
    retention_right: int


@dataclass(frozen=True)
class WindowPlan:
    mode: str                      # sliding | batch | latest
    width_seconds: int | None
    width_events: int | None


@dataclass(frozen=True)
class AggPlan:
    fn: str
    over_var: str
    alias: str
    window: WindowPlan | None      # None = newest-per-source, no expiry
    having: Condition | None


@dataclass(frozen=True)
class FilterPlan:
    """No CEP segment: every semantically qualified event is a detection."""

    var: str


@dataclass(frozen=True)
class CheckedPattern:
    pattern_id: str
    ast: PatternAst
    tags: TaxonomyTags
    var_streams: dict = field(compare=False)        # event var -> stream_id
    slices: dict = field(compare=False)             # event var -> tuple[TriplePattern]
    static_patterns: tuple = ()
    shared_vars: tuple = ()                         # non-event vars shared between slices
    plan: object = None
    consequence: tuple | None = None                # (var, attr) for prediction patterns
    schedule: ScheduleSpec | None = None
    text: str = ""

    @property
    def lifecycle(self) -> str:
        return self.tags.lifecycle

    def to_dict(self) -> dict:
        return {"pattern_id": self.pattern_id, "text": self.text,
                "tags": self.tags.to_dict(),
                "schedule": self.schedule.describe() if self.schedule else None}


def _resolve_term(term: tuple, ontology: Ontology):
    kind, text = term
    if kind == "var":
        return Var(text)
    try:
        return ontology.expand(text)
    except UnresolvedPrefix:
        raise UnresolvedQName(text)


def _conditions_of(ast: PatternAst) -> list[tuple[Condition, str | None]]:
    """All conditions with their owning event variable (None = HAVING)."""
    out = []
    cep = ast.cep
    if isinstance(cep, Seq):
        out += [(c, cep.first.variable) for c in cep.first.guards]
        out += [(c, cep.second.variable) for c in cep.second.guards]
    elif isinstance(cep, Join):
        out += [(c, None) for c in cep.on]
    elif isinstance(cep, Aggregate) and cep.having is not None:
        out.append((cep.having, None))
    return out


def _attr_refs(cond: Condition):
    for side in (cond.lhs, cond.rhs):
        for _op, atom in side.terms:
            if isinstance(atom, AttrRef):
                yield atom


def _derive_retention(join: Join, var_streams, schemas, default: int) -> tuple[int, int]:
    """Retention per side from ON-condition timestamp bounds.

    `?x.A - ?y.B < C` with A, B timestamp-kind and C > 0 bounds how stale
    side y may be relative to x, because timestamp-kind attributes never
    precede their event's own timestamp. Anything else keeps the default.
    """
    retention = {join.left: default, join.right: default}

    def ts_kind(ref: AttrRef) -> bool:
        if ref.var is None:
            return False
        schema = schemas[var_streams[ref.var]]
        return schema.attr_kind(ref.attr) == "timestamp"

    for cond in join.on:
        if cond.rel not in ("<", "<="):
            continue
        lhs, rhs = cond.lhs.terms, cond.rhs.terms
        if len(lhs) != 2 or len(rhs) != 1:
            continue
        (op1, a1), (op2, a2) = lhs
        (_, bound) = rhs[0]
        if op1 != "+" or op2 != "-":
            continue
        if not (isinstance(a1, AttrRef) and isinstance(a2, AttrRef) and isinstance(bound, Number)):
            continue
        if not (ts_kind(a1) and ts_kind(a2)) or bound.value <= 0:
            continue
        if a1.var != a2.var:  # ?x.A - ?y.B < C limits the age of side y
            retention[a2.var] = min(retention[a2.var], int(bound.value))
    return retention[join.left], retention[join.right]


def _slice_bgp(patterns: list[TriplePattern], event_vars: list[str]):
    """Per-event-variable reachable slices + leftover static patterns."""
    ev_set = set(event_vars)
    for tp in patterns:
        named = tp.variables() & ev_set
        if len(named) > 1:
            raise ValidationError(" ".join(sorted(named)),
                                  "triple pattern references two event variables")
    slices: dict[str, list[TriplePattern]] = {}
    used: set[int] = set()
    for ev in event_vars:
        frontier = {ev}
        chosen: list[TriplePattern] = []
        changed = True
        while changed:
            changed = False
            for idx, tp in enumerate(patterns):
                if any(tp is c for c in chosen):
                    continue
                tp_vars = tp.variables()
                other_events = (tp_vars & ev_set) - {ev}
                if other_events:
                    continue
                if tp_vars & frontier:
                    chosen.append(tp)
                    used.add(idx)
                    frontier |= tp_vars - ev_set
                    changed = True
        slices[ev] = chosen
    static = tuple(tp for idx, tp in enumerate(patterns) if idx not in used)
    return slices, static


def validate(ast: PatternAst, ontology: Ontology, schemas: dict, *,
             pattern_id: str, end_use: str, lifecycle: str = "persistent",
             schedule: ScheduleSpec | None = None, spatial: str | None = None,
             default_retention: int = 3600) -> CheckedPattern:
    """Check an AST against ontology namespaces and stream schemas and
    compile it. Raises UnknownStream / UndeclaredVariable / UnknownAttribute /
    UnresolvedQName naming the offending token."""
    if end_use not in END_USES:
        raise ValidationError(end_use, "end_use must be one of " + ", ".join(END_USES))
    if lifecycle not in LIFECYCLES:
        raise ValidationError(lifecycle, "lifecycle must be one of " + ", ".join(LIFECYCLES))
    if lifecycle == "scheduled" and schedule is None:
        raise ValidationError(pattern_id, "scheduled lifecycle requires a schedule")

    # stream bindings
    var_streams: dict[str, str] = {}
    for fc in ast.from_clauses:
        if fc.stream_id not in schemas:
            raise UnknownStream(fc.stream_id)
        for v in fc.variables:
            if v in var_streams:
                raise ValidationError(f"?{v}", "declared in more than one FROM clause")
            var_streams[v] = fc.stream_id
    event_vars = list(var_streams)

    def check_attr(ref: AttrRef, owner: str | None, alias: str | None = None):
        """Resolve an attribute reference; returns (var, attr) with var=None for alias."""
        if ref.var is None:
            if alias is not None:
                if ref.attr != alias:
                    raise UnknownAttribute(ref.attr, f"HAVING may only reference alias {alias!r}")
                return (None, ref.attr)
            if owner is None:
                raise ValidationError(ref.attr, "bare attribute is ambiguous here; qualify with ?var")
            var = owner
        else:
            var = ref.var
            if var not in var_streams:
                raise UndeclaredVariable(f"?{var}")
        if ref.attr == "":
            raise ValidationError(f"?{var}", "bare event variable cannot appear in arithmetic")
        schema = schemas[var_streams[var]]
        if schema.attr_kind(ref.attr) is None:
            raise UnknownAttribute(f"?{var}.{ref.attr}" if ref.var else ref.attr)
        return (var, ref.attr)

    def check_condition(cond: Condition, owner: str | None, alias: str | None = None,
                        allowed_vars: tuple | None = None):
        needs_numeric = cond.rel in ("<", "<=", ">", ">=") or \
            len(cond.lhs.terms) > 1 or len(cond.rhs.terms) > 1
        for ref in _attr_refs(cond):
            var, attr = check_attr(ref, owner, alias)
            if allowed_vars is not None and var is not None and var not in allowed_vars:
                raise ValidationError(f"?{var}", "condition references a variable outside the operator")
            if needs_numeric and var is not None:
                kind = schemas[var_streams[var]].attr_kind(attr)
                if kind not in NUMERIC_KINDS:
                    raise ValidationError(f"?{var}.{attr}", "non-numeric attribute in arithmetic/ordering")

    # select projections
    agg_alias = ast.cep.alias if isinstance(ast.cep, Aggregate) else None
    for kind, name in ast.select:
        if kind == "var":
            if name not in var_streams:
                raise UndeclaredVariable(f"?{name}")
        else:
            if name != agg_alias:
                raise UndeclaredVariable(name)

    # WHERE: resolve QNames, slice per event variable
    resolved = [TriplePattern(_resolve_term(tp.subject, ontology),
                              _resolve_term(tp.predicate, ontology),
                              _resolve_term(tp.object, ontology))
                for tp in ast.where]
    slices, static = _slice_bgp(resolved, event_vars)
    slice_map = {v: tuple(tps) for v, tps in slices.items()}
    shared: tuple = ()

    # CEP plan
    cep = ast.cep
    plan: object
    if isinstance(cep, Seq):
        for et in (cep.first, cep.second):
            if et.variable not in var_streams:
                raise UndeclaredVariable(f"?{et.variable}")
        for c in cep.first.guards:
            check_condition(c, cep.first.variable, allowed_vars=(cep.first.variable,))
        for c in cep.second.guards:
            check_condition(c, cep.second.variable,
                            allowed_vars=(cep.first.variable, cep.second.variable))
        plan = SeqPlan(first_var=cep.first.variable, second_var=cep.second.variable,
                       within_seconds=cep.within.seconds,
                       first_guards=cep.first.guards, second_guards=cep.second.guards)
        shared = _shared_vars(slice_map, cep.first.variable, cep.second.variable)
    elif isinstance(cep, Join):
        for v in (cep.left, cep.right):
            if v not in var_streams:
                raise UndeclaredVariable(f"?{v}")
        for c in cep.on:
            check_condition(c, None, allowed_vars=(cep.left, cep.right))
        r_left, r_right = _derive_retention(cep, var_streams, schemas, default_retention)
        plan = JoinPlan(left_var=cep.left, right_var=cep.right, conditions=cep.on,
                        retention_left=r_left, retention_right=r_right)
        shared = _shared_vars(slice_map, cep.left, cep.right)
    elif isinstance(cep, Aggregate):
        if cep.over not in var_streams:
            raise UndeclaredVariable(f"?{cep.over}")
        if cep.fn != "COUNT":
            schema = schemas[var_streams[cep.over]]
            if schema.attr_kind("reading") is None:
                raise UnknownAttribute("reading",
                                       f"stream {var_streams[cep.over]!r} has no 'reading' to aggregate")
        window = None
        if cep.window is not None:
            if cep.window.over != cep.over:
                raise ValidationError(f"?{cep.window.over}", "WINDOW variable must match the aggregate's")
            if isinstance(cep.window.width, Duration):
                window = WindowPlan(mode=cep.window.mode,
                                    width_seconds=cep.window.width.seconds, width_events=None)
            else:
                if cep.window.mode == "latest":
                    raise ValidationError(str(cep.window.width),
                                          "latest window requires a time width")
                window = WindowPlan(mode=cep.window.mode, width_seconds=None,
                                    width_events=int(cep.window.width))
        if cep.having is not None:
            check_condition(cep.having, None, alias=cep.alias)
        plan = AggPlan(fn=cep.fn, over_var=cep.over, alias=cep.alias,
                       window=window, having=cep.having)
    elif cep is None:
        if len(event_vars) != 1:
            raise ValidationError(",".join(f"?{v}" for v in event_vars),
                                  "a pattern without a CEP segment must bind exactly one event variable")
        plan = FilterPlan(var=event_vars[0])
    else:
        raise ValidationError(str(cep), "unknown CEP expression")

    # latency inference: positive iff some condition references a
    # timestamp-kind attribute other than the builtin event timestamp
    consequence = None
    for cond, owner in _conditions_of(ast):
        for ref in _attr_refs(cond):
            var = ref.var if ref.var is not None else owner
            if var is None or var not in var_streams or not ref.attr:
                continue
            if ref.attr != "timestamp" and \
                    schemas[var_streams[var]].attr_kind(ref.attr) == "timestamp":
                consequence = (var, ref.attr)
                break
        if consequence:
            break
    latency = "positive" if consequence else "zero"

    tags = TaxonomyTags(
        end_use=end_use,
        spatial=spatial if spatial else _infer_spatial(resolved, ontology),
        frequency=_frequency_tag(plan),
        latency=latency,
        lifecycle=lifecycle,
    )
    return CheckedPattern(pattern_id=pattern_id, ast=ast, tags=tags,
                          var_streams=var_streams, slices=slice_map,
                          static_patterns=static, shared_vars=shared, plan=plan,
                          consequence=consequence, schedule=schedule,
                          text=format_pattern(ast))


def _shared_vars(slice_map, var_a, var_b) -> tuple:
    def names(tps):
        out = set()
        for tp in tps:
            out |= tp.variables()
        return out

    shared = (names(slice_map.get(var_a, ())) & names(slice_map.get(var_b, ()))) \
        - {var_a, var_b}
    return tuple(sorted(shared))


def _infer_spatial(patterns, ontology: Ontology) -> str:
    """Virtual when the filter routes through an organization, else physical."""
    belongs = ontology.expand("bd:belongsTo")
    org_base = ontology.namespaces.get("org", "")
    for tp in patterns:
        if tp.predicate == belongs:
            return "virtual"
        if isinstance(tp.object, Iri) and org_base and tp.object.startswith(org_base):
            return "virtual"
    return "physical"


def _frequency_tag(plan) -> str:
    if isinstance(plan, SeqPlan):
        return f"sliding/{plan.within_seconds}s"
    if isinstance(plan, JoinPlan):
        return f"sliding/{max(plan.retention_left, plan.retention_right)}s"
    if isinstance(plan, AggPlan):
        if plan.window is None:
            return "latest/1-per-source"
        w = plan.window
        width = f"{w.width_seconds}s" if w.width_seconds is not None else f"{w.width_events}ev"
        return f"{w.mode}/{width}"
    return "per-event"
