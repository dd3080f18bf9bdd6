// Thin typed client over fetch; `fetchImpl` is injectable so tests and the
// node e2e harness can pass their own.

import type { Ack, ActionEntry, DetectionRecord, PatternInfo, SimStatus } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.base + path);
    if (!resp.ok) throw new Error(`GET ${path}: ${resp.status}`);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (payload as { detail?: string }).detail ?? `${resp.status}`;
      throw new Error(`POST ${path}: ${detail}`);
    }
    return payload as T;
  }

  patterns(): Promise<PatternInfo[]> {
    return this.get("/patterns");
  }

  detectionsSince(since: number): Promise<{ detections: DetectionRecord[]; next: number }> {
    return this.get(`/detections?since=${since}`);
  }

  actionsSince(since: number): Promise<{ actions: ActionEntry[]; next: number }> {
    return this.get(`/actions?since=${since}`);
  }

  sim(): Promise<SimStatus> {
    return this.get("/sim");
  }

  activatePattern(id: string): Promise<Ack> {
    return this.post(`/patterns/${encodeURIComponent(id)}/activate`);
  }

  deactivatePattern(id: string): Promise<Ack> {
    return this.post(`/patterns/${encodeURIComponent(id)}/deactivate`);
  }

  sendAction(command: Record<string, unknown>): Promise<Ack & { action_id: number; outcome: string }> {
    return this.post("/actions", command);
  }

  pause(): Promise<Ack> {
    return this.post("/sim/pause");
  }

  resume(): Promise<Ack> {
    return this.post("/sim/resume");
  }

  setSpeed(factor: number | "max"): Promise<Ack> {
    return this.post("/sim/speed", { factor });
  }

  step(ticks: number): Promise<Ack & { clock: number }> {
    return this.post("/sim/step", { ticks });
  }
}
