// DOM rendering. Pure-ish: every render derives the view from ConsoleState;
// charts and lanes are hand-rolled SVG/canvas.

import { bandTitle, buildLanes, type Lane } from "./timeline.js";
import { downsample } from "./downsample.js";
import { shortSource, type ConsoleState } from "./state.js";

const LANE_H = 26;
const LEFT_PAD = 110;

export function renderConnection(el: HTMLElement, state: ConsoleState): void {
  const all = Object.values(state.connected);
  const up = all.filter(Boolean).length;
  el.textContent = up === all.length ? "live" : up > 0 ? "degraded" : "offline";
  el.className = "conn " + (up === all.length ? "ok" : up > 0 ? "warn" : "bad");
}

export function renderSim(el: HTMLElement, state: ConsoleState): void {
  const sim = state.sim;
  if (!sim) {
    el.textContent = "sim: —";
    return;
  }
  const d = Math.floor(sim.clock / 86400);
  const hh = String(Math.floor((sim.clock % 86400) / 3600)).padStart(2, "0");
  const mm = String(Math.floor((sim.clock % 3600) / 60)).padStart(2, "0");
  el.textContent = `sim d${d} ${hh}:${mm} · ${sim.paused ? "paused" : "running"}` +
    ` · speed ${sim.speed === 0 ? "max" : sim.speed + "x"}`;
}

export function renderPatterns(
  el: HTMLElement,
  state: ConsoleState,
  onToggle: (id: string, activate: boolean) => void,
): void {
  el.replaceChildren();
  for (const p of state.patterns) {
    const row = document.createElement("div");
    row.className = "pattern " + p.status;
    const head = document.createElement("div");
    head.className = "phead";
    const dot = document.createElement("span");
    dot.className = "dot " + p.status;
    const name = document.createElement("strong");
    name.textContent = p.pattern_id;
    const btn = document.createElement("button");
    btn.textContent = p.status === "active" ? "deactivate" : "activate";
    btn.onclick = () => onToggle(p.pattern_id, p.status !== "active");
    head.append(dot, name, btn);
    const badges = document.createElement("div");
    badges.className = "badges";
    for (const [k, v] of Object.entries(p.tags)) {
      if (k === "representation" || k === "adaptivity") continue;
      const b = document.createElement("span");
      b.className = "badge " + k;
      b.textContent = `${k.replace("_", "-")}: ${v}`;
      badges.append(b);
    }
    const text = document.createElement("code");
    text.textContent = p.text;
    row.append(head, badges, text);
    el.append(row);
  }
}

export function renderTimeline(svg: SVGSVGElement, state: ConsoleState, gap: number): void {
  const lanes: Lane[] = buildLanes(
    state.patterns.map((p) => p.pattern_id),
    state.detections,
    gap,
  );
  const width = svg.clientWidth || 760;
  const height = lanes.length * LANE_H + 24;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("height", String(height));
  svg.replaceChildren();

  let t0 = Infinity;
  let t1 = -Infinity;
  for (const lane of lanes) {
    for (const band of lane.bands) {
      t0 = Math.min(t0, band.start);
      t1 = Math.max(t1, band.end);
    }
  }
  if (!isFinite(t0)) {
    t0 = 0;
    t1 = 1;
  }
  if (state.sim) t1 = Math.max(t1, state.sim.clock);
  const span = Math.max(1, t1 - t0);
  const x = (t: number) => LEFT_PAD + ((t - t0) / span) * (width - LEFT_PAD - 8);

  lanes.forEach((lane, i) => {
    const y = i * LANE_H + 16;
    const label = document.createElementNS("http://www.w3.org/2000/svg", "text");
    label.setAttribute("x", "4");
    label.setAttribute("y", String(y + 12));
    label.setAttribute("class", "lane-label");
    label.textContent = lane.patternId;
    svg.append(label);
    const rail = document.createElementNS("http://www.w3.org/2000/svg", "line");
    rail.setAttribute("x1", String(LEFT_PAD));
    rail.setAttribute("x2", String(width - 8));
    rail.setAttribute("y1", String(y + 9));
    rail.setAttribute("y2", String(y + 9));
    rail.setAttribute("class", "rail");
    svg.append(rail);
    for (const band of lane.bands) {
      const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      const x0 = x(band.start);
      rect.setAttribute("x", String(x0));
      rect.setAttribute("y", String(y));
      rect.setAttribute("width", String(Math.max(2, x(band.end) - x0)));
      rect.setAttribute("height", "18");
      rect.setAttribute("class", "band");
      const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
      title.textContent = bandTitle(band);
      rect.append(title);
      svg.append(rect);
    }
  });
}

export function renderKwChart(canvas: HTMLCanvasElement, state: ConsoleState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const entries = [...state.kwSeries.entries()].sort((a, b) => a[0].localeCompare(b[0]));
  if (!entries.length) return;
  let vMax = 1;
  let t0 = Infinity;
  let t1 = -Infinity;
  for (const [, series] of entries) {
    for (const p of series) {
      vMax = Math.max(vMax, p.v);
      t0 = Math.min(t0, p.t);
      t1 = Math.max(t1, p.t);
    }
  }
  const span = Math.max(1, t1 - t0);
  const palette = ["#4fc3f7", "#ffb74d", "#aed581", "#f06292", "#ba68c8", "#fff176"];
  entries.forEach(([source, series], idx) => {
    const pts = downsample(series, w);
    ctx.strokeStyle = palette[idx % palette.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    pts.forEach((p, i) => {
      const px = ((p.t - t0) / span) * (w - 4) + 2;
      const py = h - 4 - (p.v / vMax) * (h - 10);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.fillStyle = palette[idx % palette.length];
    ctx.fillText(`${shortSource(source)} ${series[series.length - 1].v.toFixed(1)} KW`,
      6, 12 + idx * 12);
  });
}

export function renderActions(el: HTMLElement, state: ConsoleState): void {
  el.replaceChildren();
  const recent = state.actions.slice(-30).reverse();
  for (const a of recent) {
    const row = document.createElement("div");
    row.className = "action " + a.outcome;
    const kind = a.command ? String(a.command["kind"]) : "—";
    const target = a.command && a.command["target"] ? ` → ${a.command["target"]}` : "";
    row.textContent = `t=${a.time} ${a.rule_id} ${kind}${target} [${a.outcome}]` +
      (a.detail ? ` ${a.detail}` : "");
    if (state.pendingActionIds.has(a.id)) row.classList.add("pending");
    el.append(row);
  }
}

export function renderError(el: HTMLElement, state: ConsoleState): void {
  el.textContent = state.lastError ?? "";
  el.style.display = state.lastError ? "block" : "none";
}
