"""HTTP + SSE control/observation API consumed by the operator console.

One runtime loop task owns all mutable state; every state-mutating request
is enqueued and acknowledged with the loop's resulting sequence id. Feeds
(events / detections / actions) are server-sent-event streams over the
append-only logs with monotone ids, so `Last-Event-ID` resumes exactly.

The simulation starts paused; POST /sim/resume starts the pacer, which
advances one cadence tick per (cadence / speed) real seconds. Speed factor
0 means as-fast-as-possible.
"""

from __future__ import annotations

import asyncio
import json
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, StreamingResponse

from ..commands import command_from_dict
from ..errors import GridCepError
from ..events import event_to_json
from ..pattern.files import parse_schedule
from ..pattern.parser import parse_pattern
from ..pattern.validate import validate
from ..runtime.detections import coalesce
from .experiment import D2RLoop, ExperimentSpec, build_loop

MAX_BURST = 500  # events feed: bursts larger than this are downsampled


class LiveRuntime:
    """Serialized command execution + pacing around one D2RLoop."""

    def __init__(self, loop: D2RLoop, *, speed: float = 1.0, gap: int | None = None):
        self.loop = loop
        self.speed = speed            # sim-seconds per real-second factor; 0 = max
        self.paused = True
        self.gap = gap if gap is not None else 2 * loop.scenario.cadence
        self.loop_seq = 0
        # asyncio primitives bind to the running loop; created in start()
        self.queue: asyncio.Queue | None = None
        self.changed: asyncio.Condition | None = None
        self._tasks: list[asyncio.Task] = []

    # --- lifecycle ---

    async def start(self):
        self.queue = asyncio.Queue()
        self.changed = asyncio.Condition()
        self._tasks = [asyncio.create_task(self._worker()),
                       asyncio.create_task(self._pacer())]

    async def stop(self):
        for t in self._tasks:
            t.cancel()
        for t in self._tasks:
            try:
                await t
            except asyncio.CancelledError:
                pass

    async def _notify(self):
        async with self.changed:
            self.changed.notify_all()

    async def _worker(self):
        while True:
            fn, future = await self.queue.get()
            try:
                result = fn()
                self.loop_seq += 1
                if not future.done():
                    future.set_result((self.loop_seq, result))
            except Exception as exc:  # surface to the caller, keep the loop alive
                if not future.done():
                    future.set_exception(exc)
            await self._notify()

    async def _pacer(self):
        while True:
            if self.paused:
                await asyncio.sleep(0.02)
                continue
            cadence = self.loop.scenario.cadence
            self.loop.advance(self.loop.simulator.clock + cadence)
            self.loop_seq += 1
            await self._notify()
            if self.speed > 0:
                await asyncio.sleep(cadence / self.speed)
            else:
                await asyncio.sleep(0)

    async def submit(self, fn):
        future = asyncio.get_running_loop().create_future()
        await self.queue.put((fn, future))
        return await future


def _sse(event_id: int, kind: str, data: str) -> str:
    return f"id: {event_id}\nevent: {kind}\ndata: {data}\n\n"


def _last_id(request: Request) -> int:
    header = request.headers.get("last-event-id")
    if header is not None:
        try:
            return int(header)
        except ValueError:
            pass
    try:
        return int(request.query_params.get("last_id", -1))
    except ValueError:
        return -1


def build_app(spec: ExperimentSpec, *, speed: float = 1.0, ui_dir: str | None = None) -> FastAPI:
    loop = build_loop(spec)
    runtime = LiveRuntime(loop, speed=speed, gap=spec.gap)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        await runtime.start()
        yield
        await runtime.stop()

    app = FastAPI(title="gridcep", lifespan=lifespan)
    app.state.runtime = runtime

    def engine():
        return runtime.loop.engine

    # --- patterns ---

    @app.get("/patterns")
    def get_patterns():
        out = []
        for st in engine().patterns():
            entry = st.checked.to_dict()
            entry["status"] = st.status
            out.append(entry)
        return out

    @app.post("/patterns")
    async def post_pattern(body: dict):
        try:
            ast = parse_pattern(body["text"])
            schedule = parse_schedule(body["schedule"]) if body.get("schedule") else None
            checked = validate(ast, runtime.loop.scenario.ontology,
                               runtime.loop.scenario.schemas,
                               pattern_id=body["id"], end_use=body["end_use"],
                               lifecycle=body.get("lifecycle", "persistent"),
                               schedule=schedule, spatial=body.get("spatial"))
        except (GridCepError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            seq, pid = await runtime.submit(lambda: engine().register_pattern(checked))
        except GridCepError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"seq": seq, "pattern_id": pid}

    @app.post("/patterns/{pattern_id}/activate")
    async def activate(pattern_id: str):
        try:
            seq, status = await runtime.submit(lambda: engine().activate(pattern_id))
        except GridCepError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"seq": seq, "pattern_id": pattern_id, "status": status}

    @app.post("/patterns/{pattern_id}/deactivate")
    async def deactivate(pattern_id: str):
        try:
            seq, status = await runtime.submit(lambda: engine().deactivate(pattern_id))
        except GridCepError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"seq": seq, "pattern_id": pattern_id, "status": status}

    # --- detections ---

    @app.get("/detections")
    def get_detections(since: int = 0):
        log = engine().detections
        items = [{"id": i, **json.loads(log[i].to_json())} for i in range(since, len(log))]
        return {"detections": items, "next": len(log)}

    @app.get("/feed/detections")
    async def feed_detections(request: Request):
        async def gen():
            idx = _last_id(request) + 1
            while True:
                log = engine().detections
                while idx < len(log):
                    yield _sse(idx, "detection", log[idx].to_json())
                    idx += 1
                if await request.is_disconnected():
                    return
                async with runtime.changed:
                    try:
                        await asyncio.wait_for(runtime.changed.wait(), timeout=5.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
        return StreamingResponse(gen(), media_type="text/event-stream")

    # --- events feed (downsampled on large bursts) ---

    @app.get("/feed/events")
    async def feed_events(request: Request, stream: str | None = None):
        async def gen():
            idx = _last_id(request) + 1
            while True:
                log = runtime.loop.events_log
                pending = []
                while idx < len(log):
                    ev = log[idx]
                    if stream is None or ev.stream_id == stream:
                        pending.append((idx, ev))
                    idx += 1
                if len(pending) > MAX_BURST:
                    # keep each source's newest, then even stride down to cap
                    newest = {}
                    for i, ev in pending:
                        newest[(ev.stream_id, str(ev.source_id))] = (i, ev)
                    pending = sorted(newest.values())
                    if len(pending) > MAX_BURST:
                        stride = len(pending) / MAX_BURST
                        pending = [pending[int(k * stride)] for k in range(MAX_BURST)]
                for i, ev in pending:
                    yield _sse(i, "event", event_to_json(ev))
                if await request.is_disconnected():
                    return
                async with runtime.changed:
                    try:
                        await asyncio.wait_for(runtime.changed.wait(), timeout=5.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
        return StreamingResponse(gen(), media_type="text/event-stream")

    # --- actions & rules ---

    @app.get("/rules")
    def get_rules():
        return [{"rule_id": r.rule_id, "trigger": r.trigger,
                 "action": r.action.__dict__ | {"kind": r.action.kind},
                 "cooldown": r.cooldown, "enabled": r.enabled}
                for r in runtime.loop.actions.rules]

    @app.post("/rules")
    async def post_rule(body: dict):
        from ..actions import ActionRule
        try:
            rule = ActionRule(rule_id=body["rule_id"], trigger=body["trigger"],
                              action=command_from_dict(body["action"]),
                              cooldown=int(body.get("cooldown", 900)),
                              enabled=bool(body.get("enabled", True)))
            seq, rid = await runtime.submit(
                lambda: runtime.loop.actions.register_rule(rule))
        except (GridCepError, KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"seq": seq, "rule_id": rid}

    @app.get("/actions")
    def get_actions(since: int = 0):
        log = runtime.loop.actions.log
        items = [{"id": i, **json.loads(log[i].to_json())} for i in range(since, len(log))]
        return {"actions": items, "next": len(log)}

    @app.post("/actions")
    async def post_action(body: dict):
        try:
            command = command_from_dict(body)
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

        def apply():
            actions = runtime.loop.actions
            now = runtime.loop.simulator.clock
            entry, injected = actions.apply_manual(command, now)
            if injected is not None:
                runtime.loop.process_event(injected)
            return {"action_id": len(actions.log) - 1, "outcome": entry.outcome,
                    "detail": entry.detail}

        seq, result = await runtime.submit(apply)
        return {"seq": seq, **result}

    @app.get("/feed/actions")
    async def feed_actions(request: Request):
        async def gen():
            idx = _last_id(request) + 1
            while True:
                log = runtime.loop.actions.log
                while idx < len(log):
                    yield _sse(idx, "action", log[idx].to_json())
                    idx += 1
                if await request.is_disconnected():
                    return
                async with runtime.changed:
                    try:
                        await asyncio.wait_for(runtime.changed.wait(), timeout=5.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
        return StreamingResponse(gen(), media_type="text/event-stream")

    # --- simulation clock ---

    @app.get("/sim")
    def get_sim():
        counts: dict[str, int] = {}
        for ev in runtime.loop.events_log:
            counts[ev.stream_id] = counts.get(ev.stream_id, 0) + 1
        return {"clock": runtime.loop.simulator.clock, "paused": runtime.paused,
                "speed": runtime.speed, "cadence": runtime.loop.scenario.cadence,
                "buildings": sorted(runtime.loop.scenario.buildings),
                "event_counts": counts, "seq": runtime.loop_seq}

    @app.post("/sim/pause")
    async def pause():
        seq, _ = await runtime.submit(lambda: setattr(runtime, "paused", True))
        return {"seq": seq, "paused": True}

    @app.post("/sim/resume")
    async def resume():
        seq, _ = await runtime.submit(lambda: setattr(runtime, "paused", False))
        return {"seq": seq, "paused": False}

    @app.post("/sim/speed")
    async def set_speed(body: dict):
        factor = body.get("factor", 1.0)
        factor = 0.0 if factor in ("max", None) else float(factor)
        if factor < 0:
            raise HTTPException(status_code=400, detail="speed factor must be >= 0")
        seq, _ = await runtime.submit(lambda: setattr(runtime, "speed", factor))
        return {"seq": seq, "speed": factor}

    @app.post("/sim/step")
    async def step(body: dict | None = None):
        """Advance exactly N cadence ticks while paused (deterministic driving)."""
        ticks = int((body or {}).get("ticks", 1))

        def advance():
            cadence = runtime.loop.scenario.cadence
            runtime.loop.advance(runtime.loop.simulator.clock + ticks * cadence)
            return runtime.loop.simulator.clock

        seq, clock = await runtime.submit(advance)
        return {"seq": seq, "clock": clock}

    @app.get("/report")
    def report(gap: int | None = None):
        return runtime.loop.report(gap if gap is not None else runtime.gap)

    @app.get("/intervals")
    def intervals(gap: int | None = None):
        merged = coalesce(engine().detections, gap if gap is not None else runtime.gap)
        return {pid: [[iv.start_time, iv.end_time, iv.count] for iv in ivs]
                for pid, ivs in merged.items()}

    # --- optional static console ---

    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        index = os.path.join(ui_dir, "index.html")
        if os.path.exists(index):
            @app.get("/")
            def root():
                return FileResponse(index)
        app.mount("/ui", StaticFiles(directory=ui_dir), name="ui")

    return app
