"""API tests against a real uvicorn instance (SSE needs actual streaming;
the bundled TestClient buffers responses)."""

import json

import httpx


def sse_events(resp, limit, collected):
    """Parse SSE frames from a streaming response; stop after `limit`."""
    current = {}
    for line in resp.iter_lines():
        if line.startswith("id: "):
            current["id"] = int(line[4:])
        elif line.startswith("event: "):
            current["event"] = line[7:]
        elif line.startswith("data: "):
            current["data"] = json.loads(line[6:])
        elif line == "" and current.get("data") is not None:
            collected.append(current)
            current = {}
            if len(collected) >= limit:
                return


def test_patterns_listing_with_taxonomy(live_server):
    pats = httpx.get(live_server + "/patterns").json()
    by_id = {p["pattern_id"]: p for p in pats}
    assert set(by_id) == {"p0", "p1", "p3", "p4", "p5", "p6", "p2resp"}
    assert by_id["p1"]["tags"]["frequency"] == "sliding/300s"
    assert by_id["p3"]["tags"]["latency"] == "positive"
    assert by_id["p6"]["tags"]["spatial"] == "virtual"
    assert by_id["p5"]["tags"]["lifecycle"] == "scheduled"
    assert by_id["p5"]["status"] == "inactive"  # registered at t=0, outside 08-18


def test_sim_step_produces_detections_and_actions(live_server):
    httpx.post(live_server + "/sim/step", json={"ticks": 40}, timeout=60)
    sim = httpx.get(live_server + "/sim").json()
    assert sim["clock"] >= 2400
    dets = httpx.get(live_server + "/detections", params={"since": 0}).json()
    assert dets["next"] > 0
    assert any(d["pattern_id"] == "p1" for d in dets["detections"])
    acts = httpx.get(live_server + "/actions").json()
    outcomes = {a["outcome"] for a in acts["actions"]}
    assert "applied" in outcomes
    # paging: since=next returns nothing new
    again = httpx.get(live_server + "/detections",
                      params={"since": dets["next"]}).json()
    assert again["detections"] == []


def test_detections_feed_matches_get(live_server):
    httpx.post(live_server + "/sim/step", json={"ticks": 5}, timeout=60)
    full = httpx.get(live_server + "/detections", params={"since": 0}).json()
    want = min(5, full["next"])
    got = []
    with httpx.stream("GET", live_server + "/feed/detections",
                      headers={"Last-Event-ID": "-1"}, timeout=20) as resp:
        sse_events(resp, want, got)
    for frame, expected in zip(got, full["detections"]):
        assert frame["id"] == expected["id"]
        assert frame["data"]["pattern_id"] == expected["pattern_id"]
        assert frame["data"]["detection_time"] == expected["detection_time"]


def test_feed_resume_from_last_event_id(live_server):
    full = httpx.get(live_server + "/detections", params={"since": 0}).json()
    assert full["next"] >= 3
    resume_from = full["next"] - 3
    got = []
    with httpx.stream("GET", live_server + "/feed/detections",
                      headers={"Last-Event-ID": str(resume_from - 1)},
                      timeout=20) as resp:
        sse_events(resp, 3, got)
    assert [f["id"] for f in got] == [resume_from, resume_from + 1, resume_from + 2]


def test_events_feed_stream_filter(live_server):
    got = []
    with httpx.stream("GET", live_server + "/feed/events",
                      params={"stream": "meterstream"},
                      headers={"Last-Event-ID": "-1"}, timeout=20) as resp:
        sse_events(resp, 5, got)
    assert all(f["data"]["stream_id"] == "meterstream" for f in got)
    ids = [f["id"] for f in got]
    assert ids == sorted(ids)


def test_manual_action_logged_and_visible(live_server):
    before = httpx.get(live_server + "/actions").json()["next"]
    r = httpx.post(live_server + "/actions",
                   json={"kind": "gtr", "target": "MHP", "delta_f": 4,
                         "duration": 3600}, timeout=30)
    body = r.json()
    assert body["outcome"] == "applied"
    assert body["action_id"] >= before
    log = httpx.get(live_server + "/actions", params={"since": body["action_id"]}).json()
    assert log["actions"][0]["rule_id"] == "manual"
    assert log["actions"][0]["command"]["kind"] == "gtr"


def test_manual_action_unknown_target(live_server):
    r = httpx.post(live_server + "/actions",
                   json={"kind": "gtr", "target": "XYZ", "delta_f": 4,
                         "duration": 60}, timeout=30)
    assert r.json()["outcome"] == "target-error"


def test_activate_deactivate_roundtrip(live_server):
    r = httpx.post(live_server + "/patterns/p5/activate")
    assert r.json()["status"] == "active"
    r = httpx.post(live_server + "/patterns/p5/deactivate")
    assert r.json()["status"] == "inactive"
    r = httpx.post(live_server + "/patterns/ghost/activate")
    assert r.status_code == 404


def test_register_pattern_via_api(live_server):
    body = {"id": "apipat", "end_use": "monitoring",
            "text": "SELECT(total) FROM(?m,meterstream) | SUM(?m) AS total"}
    r = httpx.post(live_server + "/patterns", json=body, timeout=30)
    assert r.status_code == 200
    assert any(p["pattern_id"] == "apipat"
               for p in httpx.get(live_server + "/patterns").json())
    bad = {"id": "badpat", "end_use": "monitoring", "text": "SELECT(?x FROM("}
    assert httpx.post(live_server + "/patterns", json=bad).status_code == 400


def test_rules_listing_and_register(live_server):
    rules = httpx.get(live_server + "/rules").json()
    assert {r["rule_id"] for r in rules} >= {"r_gtr", "r_duty"}
    new = {"rule_id": "r_api", "trigger": "p1", "cooldown": 9999,
           "action": {"kind": "notify", "audience": "ops", "template": "hello"}}
    assert httpx.post(live_server + "/rules", json=new, timeout=30).status_code == 200
    assert httpx.post(live_server + "/rules", json=new, timeout=30).status_code == 400


def test_pause_resume_speed(live_server):
    assert httpx.get(live_server + "/sim").json()["paused"] is True
    r = httpx.post(live_server + "/sim/speed", json={"factor": "max"})
    assert r.json()["speed"] == 0.0
    clock0 = httpx.get(live_server + "/sim").json()["clock"]
    httpx.post(live_server + "/sim/resume")
    deadline = clock0
    for _ in range(100):
        import time
        time.sleep(0.05)
        deadline = httpx.get(live_server + "/sim").json()["clock"]
        if deadline > clock0:
            break
    httpx.post(live_server + "/sim/pause")
    assert deadline > clock0  # unthrottled pacer advanced the world
    paused_clock = httpx.get(live_server + "/sim").json()["clock"]
    import time
    time.sleep(0.2)
    assert httpx.get(live_server + "/sim").json()["clock"] == paused_clock


def test_report_and_intervals(live_server):
    report = httpx.get(live_server + "/report", timeout=30).json()
    assert "patterns" in report and "buildings" in report
    intervals = httpx.get(live_server + "/intervals", timeout=30).json()
    for pid, ivs in intervals.items():
        for start, end, count in ivs:
            assert start <= end and count >= 1
