"""Randomized-trace equivalence harness: engine vs nested-loop oracles.

One trial = one random two-stream trace pushed through an engine carrying
SEQ / JOIN / windowed-aggregate patterns, then compared against
independent oracles with exact equality (floats to the bit).

The windowed scans below use bisect only to bound the candidate range; the
pair predicates are still evaluated the brute-force way. Small traces are
additionally cross-checked against the unbounded O(n^2) scans.
"""

from __future__ import annotations

import random
from bisect import bisect_left

from gridcep.events import merge_ordered
from gridcep.pattern.parser import parse_pattern
from gridcep.pattern.validate import validate
from gridcep.runtime.engine import Engine

import oracles
from helpers import ev, make_world

SMALL_CROSSCHECK = 600


def windowed_seq_oracle(firsts, seconds, within, guard):
    """Pairs (e1, e2): t1 < t2 <= t1 + within, in engine emission order."""
    ts = [e.timestamp for e in firsts]
    pairs = []
    for e2 in seconds:
        lo = bisect_left(ts, e2.timestamp - within)
        for e1 in firsts[lo:]:
            if e1.timestamp >= e2.timestamp:
                break
            if guard is None or guard(e1, e2):
                pairs.append((e1, e2))
    return pairs


def windowed_join_oracle(merged, left_set, right_set, cond, r_left, r_right):
    ts = [e.timestamp for e in merged]
    key = lambda e: (e.stream_id, e.seq)
    pairs = []
    for i, e in enumerate(merged):
        if key(e) in left_set:
            lo = bisect_left(ts, e.timestamp - r_right)
            for other in merged[lo:i]:
                if key(other) in right_set and key(other) != key(e) and cond(e, other):
                    pairs.append((e, other))
        if key(e) in right_set:
            lo = bisect_left(ts, e.timestamp - r_left)
            for other in merged[lo:i]:
                if key(other) in left_set and key(other) != key(e) and cond(other, e):
                    pairs.append((other, e))
    return pairs


PATTERNS = {
    "seq_cross": ("SELECT(?a,?b) FROM(?a,s_a) FROM(?b,s_b) "
                  "| SEQ(?a, ?b(reading-?a.reading>{delta}) within {W}s)"),
    "seq_office": ("SELECT(?e1,?e2) FROM(?e1,?e2,s_a) "
                   "WHERE {{?e1 evt:hasSource ?src . ?e2 evt:hasSource ?src . "
                   "?src bd:hasLocation ?loc . ?loc rdf:type bd:Office}} "
                   "| SEQ(?e1, ?e2(reading-?e1.reading>{delta2}) within {W2}s)"),
    "join": ("SELECT(?a,?b) FROM(?a,s_a) FROM(?b,s_b) "
             "| JOIN(?a,?b) ON(?b.due-?a.timestamp<{RB},?a.reading<{C})"),
    "avg_slide": "SELECT(v) FROM(?m,s_a) | AVG(?m) AS v WINDOW(?m,sliding,{W}s) HAVING(v>{H})",
    "sum_count": "SELECT(v) FROM(?m,s_a) | SUM(?m) AS v WINDOW(?m,sliding,{N})",
    "sum_batch": "SELECT(v) FROM(?m,s_a) | SUM(?m) AS v WINDOW(?m,batch,{WB}s)",
    "cnt_batch": "SELECT(v) FROM(?m,s_a) | COUNT(?m) AS v WINDOW(?m,batch,{M})",
    "sum_latest": "SELECT(v) FROM(?m,s_a) | SUM(?m) AS v WINDOW(?m,latest,{WL}s) HAVING(v>{H2})",
    "avg_default": "SELECT(v) FROM(?m,s_a) | AVG(?m) AS v",
}


def generate_trace(rng: random.Random, n_events: int, n_sources: int):
    streams = []
    for stream in ("s_a", "s_b"):
        t, events = 0, []
        for seq in range(1, n_events // 2 + 1):
            t += rng.randint(1, 40)
            extra = {"due": t + rng.randint(0, 3000)} if stream == "s_b" else {}
            events.append(ev(stream, seq, t, round(rng.uniform(0.0, 50.0), 3),
                             source_idx=rng.randrange(n_sources), **extra))
        streams.append(events)
    return list(merge_ordered(*(iter(s) for s in streams)))


def run_trial(rng: random.Random, n_events: int) -> dict:
    """Returns {check_name: (engine_result, oracle_result)}; caller asserts."""
    n_sources = rng.randint(2, 6)
    ontology, schemas = make_world(n_sources=n_sources, office_every=2)
    # thresholds stay non-negative: the condition grammar has no unary minus;
    # ranges keep pair cardinality sane so 10k-event traces stay tractable
    params = {
        "delta": rng.randint(2, 14), "W": rng.randint(60, 500),
        "delta2": rng.randint(2, 14), "W2": rng.randint(60, 400),
        "RB": rng.randint(100, 900), "C": round(rng.uniform(2, 20), 2),
        "H": round(rng.uniform(10, 40), 2), "N": rng.randint(1, 12),
        "WB": rng.randint(100, 900), "M": rng.randint(1, 15),
        "WL": rng.randint(100, 900), "H2": round(rng.uniform(20, 120), 2),
    }
    engine = Engine(ontology, schemas, start_time=0)
    for pid, template in PATTERNS.items():
        text = template.format(**params)
        checked = validate(parse_pattern(text), ontology, schemas,
                           pattern_id=pid, end_use="monitoring")
        engine.register_pattern(checked)

    merged = generate_trace(rng, n_events, n_sources)
    for event in merged:
        engine.ingest(event)
    end_time = merged[-1].timestamp + rng.randint(0, 2000)
    engine.tick(end_time)

    a_events = [e for e in merged if e.stream_id == "s_a"]
    b_events = [e for e in merged if e.stream_id == "s_b"]
    office = [e for e in a_events if int(str(e.source_id)[-1]) % 2 == 0]
    rows = [(e.timestamp, float(e.attributes["reading"]), str(e.source_id))
            for e in a_events]
    pairs = [(t, v) for t, v, _s in rows]

    def det(pid):
        return [d for d in engine.detections if d.pattern_id == pid]

    def pair_refs(pid, v1, v2):
        return [(d.bindings[v1]["seq"], d.bindings[v2]["seq"], d.detection_time)
                for d in det(pid)]

    def agg_out(pid):
        return [(d.detection_time, float(d.outputs["v"])) for d in det(pid)]

    checks = {}

    guard = lambda e1, e2: e2.attributes["reading"] - e1.attributes["reading"] > params["delta"]
    expected = windowed_seq_oracle(a_events, b_events, params["W"], guard)
    if len(merged) <= SMALL_CROSSCHECK:
        assert expected == oracles.seq_oracle(a_events, b_events, params["W"], guard)
    checks["seq_cross"] = (pair_refs("seq_cross", "a", "b"),
                           [(e1.seq, e2.seq, e2.timestamp) for e1, e2 in expected])

    guard2 = lambda e1, e2: (e2.attributes["reading"] - e1.attributes["reading"]
                             > params["delta2"]) and e1.source_id == e2.source_id
    expected = windowed_seq_oracle(office, office, params["W2"], guard2)
    checks["seq_office"] = (pair_refs("seq_office", "e1", "e2"),
                            [(e1.seq, e2.seq, e2.timestamp) for e1, e2 in expected])

    cond = lambda l, r: (r.attributes["due"] - l.timestamp < params["RB"]
                         and l.attributes["reading"] < params["C"])
    left_set = {(e.stream_id, e.seq) for e in a_events}
    right_set = {(e.stream_id, e.seq) for e in b_events}
    expected = windowed_join_oracle(merged, left_set, right_set, cond,
                                    params["RB"], 3600)
    if len(merged) <= SMALL_CROSSCHECK:
        assert expected == oracles.join_oracle(merged, left_set, right_set, cond,
                                               params["RB"], 3600)
    checks["join"] = (pair_refs("join", "a", "b"),
                      [(l.seq, r.seq, max(l.timestamp, r.timestamp)) for l, r in expected])

    gate = lambda v: v > params["H"]
    checks["avg_slide"] = (agg_out("avg_slide"),
                           [(t, v) for t, v in oracles.sliding_time_oracle(
                               pairs, params["W"], "AVG") if gate(v)])
    checks["sum_count"] = (agg_out("sum_count"),
                           oracles.sliding_count_oracle(pairs, params["N"], "SUM"))
    checks["sum_batch"] = (agg_out("sum_batch"),
                           oracles.batch_time_oracle(pairs, params["WB"], "SUM",
                                                     origin=0, end_time=end_time))
    checks["cnt_batch"] = (agg_out("cnt_batch"),
                           oracles.batch_count_oracle(pairs, params["M"], "COUNT"))
    gate2 = lambda v: v > params["H2"]
    checks["sum_latest"] = (agg_out("sum_latest"),
                            [(t, v) for t, v in oracles.latest_oracle(
                                rows, params["WL"], "SUM") if gate2(v)])
    if len(merged) <= SMALL_CROSSCHECK:
        brute = [(t, v) for t, v in
                 oracles.latest_oracle_bruteforce(rows, params["WL"], "SUM") if gate2(v)]
        assert checks["sum_latest"][1] == brute
    checks["avg_default"] = (agg_out("avg_default"),
                             oracles.latest_oracle(rows, None, "AVG"))
    return checks


def assert_trial(rng: random.Random, n_events: int):
    for name, (got, expected) in run_trial(rng, n_events).items():
        assert got == expected, f"{name}: engine {got[:3]}... != oracle {expected[:3]}..."
