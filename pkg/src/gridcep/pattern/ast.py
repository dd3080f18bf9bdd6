"""AST node types for the two-segment pattern language.

A pattern is projection + stream bindings + optional semantic filter (basic
graph pattern) + optional CEP operator expression, separated by `|`:

    SELECT(...) FROM(...)... [WHERE {...}] [| SEQ(...) / JOIN(...) / fn(...)]
"""

from __future__ import annotations

from dataclasses import dataclass, field

UNIT_SECONDS = {"s": 1, "min": 60, "h": 3600}


@dataclass(frozen=True)
class Duration:
    magnitude: int
    unit: str  # s | min | h

    def __post_init__(self):
        if self.unit not in UNIT_SECONDS:
            raise ValueError(f"bad duration unit {self.unit!r}")
        if self.magnitude <= 0:
            raise ValueError("duration must be positive")

    @property
    def seconds(self) -> int:
        return self.magnitude * UNIT_SECONDS[self.unit]

    def __str__(self):
        return f"{self.magnitude}{self.unit}"


# --- condition expressions: comparisons over ±-arithmetic ---

@dataclass(frozen=True)
class Number:
    value: float  # int kept as-is when parsed without a fraction


@dataclass(frozen=True)
class AttrRef:
    """`?var.attr` when var is set; bare `attr` (own attribute or alias) when None."""

    var: str | None
    attr: str


@dataclass(frozen=True)
class Expr:
    """atom {("+"|"-") atom}; terms[0][0] is always '+'."""

    terms: tuple  # tuple[(op, Number|AttrRef), ...]


@dataclass(frozen=True)
class Condition:
    lhs: Expr
    rel: str  # < <= > >= == !=
    rhs: Expr


# --- pattern segments ---

@dataclass(frozen=True)
class FromClause:
    variables: tuple  # event variable names, without '?'
    stream_id: str


@dataclass(frozen=True)
class TriplePatternAst:
    """Unresolved triple pattern; terms are ('var', name) or ('qname', text)."""

    subject: tuple
    predicate: tuple
    object: tuple


@dataclass(frozen=True)
class EventTerm:
    variable: str
    guards: tuple = ()  # tuple[Condition, ...]


@dataclass(frozen=True)
class Seq:
    first: EventTerm
    second: EventTerm
    within: Duration


@dataclass(frozen=True)
class Join:
    left: str
    right: str
    on: tuple  # tuple[Condition, ...], non-empty


@dataclass(frozen=True)
class Window:
    over: str
    mode: str           # sliding | batch | latest
    width: object       # Duration (time width) or int (event count)

    def __post_init__(self):
        if self.mode not in ("sliding", "batch", "latest"):
            raise ValueError(f"bad window mode {self.mode!r}")
        if isinstance(self.width, int) and self.width <= 0:
            raise ValueError("window width must be positive")


@dataclass(frozen=True)
class Aggregate:
    fn: str             # AVG | SUM | COUNT
    over: str
    alias: str
    window: Window | None = None
    having: Condition | None = None


@dataclass(frozen=True)
class PatternAst:
    select: tuple            # projections: ('var', name) or ('ident', alias)
    from_clauses: tuple      # tuple[FromClause, ...]
    where: tuple = ()        # tuple[TriplePatternAst, ...]; empty = no WHERE
    cep: object = None       # Seq | Join | Aggregate | None
    raw_text: str = field(default="", compare=False)

    def event_variables(self) -> list[str]:
        out = []
        for fc in self.from_clauses:
            out.extend(fc.variables)
        return out

    def stream_of(self, var: str) -> str | None:
        for fc in self.from_clauses:
            if var in fc.variables:
                return fc.stream_id
        return None
