"""Operator state machines fed with semantically qualified events.

Pairing operators (SEQ, JOIN) re-establish cross-slice correlation by
intersecting the solution keys each event carries (its slice solutions
projected onto the variables the two slices share).

Exactness contract: aggregate values are recomputed over the full window
extent at each emission, summing in arrival order — identical bits to the
window kernels and to a brute-force oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..events import Event
from ..pattern.ast import AttrRef, Condition, Expr, Number
from ..pattern.validate import AggPlan, FilterPlan, JoinPlan, SeqPlan


# --- condition evaluation ---

def eval_expr(expr: Expr, resolve):
    total = None
    for op, atom in expr.terms:
        if isinstance(atom, Number):
            value = atom.value
        elif isinstance(atom, AttrRef):
            value = resolve(atom.var, atom.attr)
        else:
            raise TypeError(f"bad atom {atom!r}")
        if total is None:
            total = value if op == "+" else -value
        else:
            total = total + value if op == "+" else total - value
    return total


def eval_condition(cond: Condition, resolve) -> bool:
    lhs = eval_expr(cond.lhs, resolve)
    rhs = eval_expr(cond.rhs, resolve)
    if cond.rel == "==":
        return _typed_eq(lhs, rhs)
    if cond.rel == "!=":
        return not _typed_eq(lhs, rhs)
    if not isinstance(lhs, (int, float)) or not isinstance(rhs, (int, float)):
        raise TypeError(f"ordering comparison on non-numeric values {lhs!r} {cond.rel} {rhs!r}")
    if cond.rel == "<":
        return lhs < rhs
    if cond.rel == "<=":
        return lhs <= rhs
    if cond.rel == ">":
        return lhs > rhs
    if cond.rel == ">=":
        return lhs >= rhs
    raise ValueError(f"bad relation {cond.rel!r}")


def _typed_eq(a, b) -> bool:
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    return a == b


def make_resolver(bound: dict, own: Event | None = None,
                  alias: str | None = None, alias_value=None):
    def resolve(var, attr):
        if var is None:
            if alias is not None and attr == alias:
                return alias_value
            if own is None:
                raise KeyError(attr)
            return own.attr(attr)
        return bound[var].attr(attr)
    return resolve


# --- qualified events ---

@dataclass(frozen=True)
class Qualified:
    """An event that passed a pattern's BGP slice for one variable.

    `keys` is the set of slice solutions projected onto the shared
    variables; two qualified events are compatible iff their keys
    intersect (empty shared tuple makes every pair compatible).
    """

    event: Event
    keys: frozenset


def compatible(a: Qualified, b: Qualified) -> bool:
    return not a.keys.isdisjoint(b.keys)


# --- operators ---

class SeqOp:
    """Every-match sequence: each second event pairs with every retained
    first event with t1 < t2 <= t1 + W; no consumption."""

    def __init__(self, plan: SeqPlan, emit):
        self.plan = plan
        self.emit = emit
        self.firsts: deque[Qualified] = deque()

    def reset(self, now: int) -> None:
        self.firsts.clear()

    def on_tick(self, now: int) -> None:
        pass

    def on_event(self, var: str, q: Qualified) -> None:
        plan = self.plan
        if var == plan.second_var:
            t2 = q.event.timestamp
            while self.firsts and self.firsts[0].event.timestamp < t2 - plan.within_seconds:
                self.firsts.popleft()
            for first in self.firsts:
                if first.event.timestamp >= t2:
                    continue
                if not compatible(first, q):
                    continue
                resolve = make_resolver({plan.first_var: first.event,
                                         plan.second_var: q.event}, own=q.event)
                if all(eval_condition(c, resolve) for c in plan.second_guards):
                    self.emit({plan.first_var: first.event, plan.second_var: q.event})
        if var == plan.first_var:
            resolve = make_resolver({plan.first_var: q.event}, own=q.event)
            if all(eval_condition(c, resolve) for c in plan.first_guards):
                self.firsts.append(q)


class JoinOp:
    """Symmetric join within per-side retention; ON conditions + slice
    compatibility; an event never joins with itself."""

    def __init__(self, plan: JoinPlan, emit):
        self.plan = plan
        self.emit = emit
        self.lefts: deque[Qualified] = deque()
        self.rights: deque[Qualified] = deque()

    def reset(self, now: int) -> None:
        self.lefts.clear()
        self.rights.clear()

    def on_tick(self, now: int) -> None:
        pass

    def _match(self, left: Qualified, right: Qualified) -> bool:
        if left.event.stream_id == right.event.stream_id and left.event.seq == right.event.seq:
            return False
        if not compatible(left, right):
            return False
        resolve = make_resolver({self.plan.left_var: left.event,
                                 self.plan.right_var: right.event})
        return all(eval_condition(c, resolve) for c in self.plan.conditions)

    def on_event(self, var: str, q: Qualified) -> None:
        plan = self.plan
        now = q.event.timestamp
        while self.lefts and self.lefts[0].event.timestamp < now - plan.retention_left:
            self.lefts.popleft()
        while self.rights and self.rights[0].event.timestamp < now - plan.retention_right:
            self.rights.popleft()
        if var == plan.left_var:
            for right in self.rights:
                if self._match(q, right):
                    self.emit({plan.left_var: q.event, plan.right_var: right.event})
        if var == plan.right_var:
            for left in self.lefts:
                if self._match(left, q):
                    self.emit({plan.left_var: left.event, plan.right_var: q.event})
        if var == plan.left_var:
            self.lefts.append(q)
        if var == plan.right_var:
            self.rights.append(q)


class AggOp:
    """Windowed aggregate with HAVING gating.

    No WINDOW clause means newest-per-source with no expiry, i.e.
    current-total semantics for e.g. department-wide sums.
    """

    def __init__(self, plan: AggPlan, emit, activation_ts: int = 0):
        self.plan = plan
        self.emit = emit  # emit(value, detection_time)
        self.reset(activation_ts)

    def reset(self, now: int) -> None:
        self.buffer: deque = deque()          # (ts, value) for sliding/batch
        self.newest: dict = {}                # source -> (arrival_idx, ts, value)
        self.arrivals = 0
        self.block_start: int | None = None
        w = self.plan.window
        if w is not None and w.mode == "batch" and w.width_seconds is not None:
            self.block_start = now

    def _value_of(self, ev: Event) -> float:
        if self.plan.fn == "COUNT" and "reading" not in ev.attributes:
            return 0.0
        return float(ev.attr("reading"))

    def _fn_over(self, values) -> float:
        acc = 0.0
        cnt = 0
        for v in values:
            acc += v
            cnt += 1
        if self.plan.fn == "AVG":
            return acc / cnt if cnt else 0.0
        if self.plan.fn == "COUNT":
            return float(cnt)
        return acc

    def _candidate(self, value: float, detection_time: int) -> None:
        having = self.plan.having
        if having is not None:
            resolve = make_resolver({}, alias=self.plan.alias, alias_value=value)
            if not eval_condition(having, resolve):
                return
        self.emit(value, detection_time)

    def on_event(self, var: str, q: Qualified) -> None:
        ev = q.event
        t = ev.timestamp
        value = self._value_of(ev)
        w = self.plan.window
        if w is None:
            self.newest[ev.source_id] = (self.arrivals, t, value)
            self.arrivals += 1
            live = sorted(self.newest.values())
            self._candidate(self._fn_over(v for _i, _t, v in live), t)
        elif w.mode == "sliding" and w.width_seconds is not None:
            self.buffer.append((t, value))
            while self.buffer[0][0] <= t - w.width_seconds:
                self.buffer.popleft()
            self._candidate(self._fn_over(v for _t, v in self.buffer), t)
        elif w.mode == "sliding":
            self.buffer.append((t, value))
            while len(self.buffer) > w.width_events:
                self.buffer.popleft()
            self._candidate(self._fn_over(v for _t, v in self.buffer), t)
        elif w.mode == "batch" and w.width_seconds is not None:
            self._close_due_blocks(t)
            self.buffer.append((t, value))
        elif w.mode == "batch":
            self.buffer.append((t, value))
            if len(self.buffer) == w.width_events:
                self._candidate(self._fn_over(v for _t, v in self.buffer), self.buffer[-1][0])
                self.buffer.clear()
        else:  # latest with time width
            self.newest[ev.source_id] = (self.arrivals, t, value)
            self.arrivals += 1
            live = sorted(v for v in self.newest.values() if v[1] > t - w.width_seconds)
            self._candidate(self._fn_over(v for _i, _t, v in live), t)

    def _close_due_blocks(self, now: int) -> None:
        width = self.plan.window.width_seconds
        while self.block_start is not None and now >= self.block_start + width:
            if self.buffer:
                self._candidate(self._fn_over(v for _t, v in self.buffer), self.buffer[-1][0])
                self.buffer.clear()
                self.block_start += width
            else:
                # empty blocks emit nothing; jump to the block containing `now`
                self.block_start += ((now - self.block_start) // width) * width

    def on_tick(self, now: int) -> None:
        w = self.plan.window
        if w is not None and w.mode == "batch" and w.width_seconds is not None:
            self._close_due_blocks(now)


class FilterOp:
    """No CEP segment: every qualified event is a detection."""

    def __init__(self, plan: FilterPlan, emit):
        self.plan = plan
        self.emit = emit

    def reset(self, now: int) -> None:
        pass

    def on_tick(self, now: int) -> None:
        pass

    def on_event(self, var: str, q: Qualified) -> None:
        self.emit({self.plan.var: q.event})
