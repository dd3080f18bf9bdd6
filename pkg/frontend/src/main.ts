// Console bootstrap: one SSE connection per feed, all mutations as POSTs
// acknowledged by sequence id; the whole view re-derives from state.

import { ApiClient } from "./api.js";
import { SseClient } from "./sse.js";
import {
  applyActionFrame, applyDetectionFrame, applyEventFrame, fullLoad,
  initialState, resyncActions, resyncDetections,
} from "./state.js";
import {
  renderActions, renderConnection, renderError, renderKwChart,
  renderPatterns, renderSim, renderTimeline,
} from "./ui.js";

const api = new ApiClient("");
const state = initialState();

const $ = (id: string) => document.getElementById(id) as HTMLElement;

let renderQueued = false;
function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    render();
  });
}

function gap(): number {
  return state.sim ? 2 * state.sim.cadence : 120;
}

function render(): void {
  renderConnection($("conn"), state);
  renderSim($("simline"), state);
  renderPatterns($("patterns"), state, onTogglePattern);
  renderTimeline(document.getElementById("timeline") as unknown as SVGSVGElement,
    state, gap());
  renderKwChart($("kwchart") as HTMLCanvasElement, state);
  renderActions($("actions"), state);
  renderError($("error"), state);
}

function onTogglePattern(id: string, activate: boolean): void {
  const call = activate ? api.activatePattern(id) : api.deactivatePattern(id);
  call
    .then(async () => {
      state.patterns = await api.patterns();
      state.lastError = null;
      scheduleRender();
    })
    .catch((err) => {
      state.lastError = String(err);
      scheduleRender();
    });
}

function wireSse(): void {
  const detections = new SseClient("/feed/detections", {
    onFrame: (frame) => {
      if (applyDetectionFrame(state, frame)) {
        void resyncDetections(state, api).then(scheduleRender);
      }
      scheduleRender();
    },
    onGap: () => void resyncDetections(state, api).then(scheduleRender),
    onStatus: (up) => {
      state.connected.detections = up;
      if (up) void resyncDetections(state, api).then(scheduleRender);
      scheduleRender();
    },
  });
  const events = new SseClient("/feed/events?stream=meterstream", {
    onFrame: (frame) => {
      applyEventFrame(state, frame);
      scheduleRender();
    },
    onStatus: (up) => {
      state.connected.events = up;
      scheduleRender();
    },
  });
  const actions = new SseClient("/feed/actions", {
    onFrame: (frame) => {
      if (applyActionFrame(state, frame)) {
        void resyncActions(state, api).then(scheduleRender);
      }
      scheduleRender();
    },
    onGap: () => void resyncActions(state, api).then(scheduleRender),
    onStatus: (up) => {
      state.connected.actions = up;
      scheduleRender();
    },
  });
  detections.start();
  events.start();
  actions.start();
}

function wireControls(): void {
  ($("btn-pause") as HTMLButtonElement).onclick = () =>
    void api.pause().then(refreshSim);
  ($("btn-resume") as HTMLButtonElement).onclick = () =>
    void api.resume().then(refreshSim);
  ($("btn-step") as HTMLButtonElement).onclick = () =>
    void api.step(10).then(refreshSim);
  ($("speed") as HTMLSelectElement).onchange = (e) => {
    const v = (e.target as HTMLSelectElement).value;
    void api.setSpeed(v === "max" ? "max" : Number(v)).then(refreshSim);
  };

  const form = $("action-form") as HTMLFormElement;
  form.onsubmit = (e) => {
    e.preventDefault();
    const data = new FormData(form);
    const kind = String(data.get("kind"));
    const command: Record<string, unknown> = {
      kind,
      target: String(data.get("target")),
      duration: Number(data.get("duration") || 3600),
    };
    if (kind === "gtr") command["delta_f"] = Number(data.get("magnitude") || 2);
    if (kind === "duty_cycle") command["cap"] = Number(data.get("magnitude") || 6);
    if (kind === "notify") {
      command["audience"] = String(data.get("target"));
      command["template"] = "operator notice";
    }
    const submit = form.querySelector("button") as HTMLButtonElement;
    submit.disabled = true; // optimistic lock until the ack lands on the feed
    api.sendAction(command)
      .then((ack) => {
        state.lastError = ack.outcome === "applied" ? null :
          `action ${ack.outcome}: ${String(ack["detail"] ?? "")}`;
        state.pendingActionIds.add(ack.action_id);
        const poll = setInterval(() => {
          if (!state.pendingActionIds.has(ack.action_id)) {
            submit.disabled = false;
            clearInterval(poll);
            scheduleRender();
          }
        }, 100);
      })
      .catch((err) => {
        state.lastError = String(err);
        submit.disabled = false;
        scheduleRender();
      });
  };
}

async function refreshSim(): Promise<void> {
  state.sim = await api.sim();
  scheduleRender();
}

async function boot(): Promise<void> {
  await fullLoad(state, api);
  wireSse();
  wireControls();
  setInterval(() => void refreshSim(), 2000);
  render();
}

void boot();
