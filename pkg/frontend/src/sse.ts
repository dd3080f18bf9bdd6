// Server-sent-events client over fetch + ReadableStream (works in browsers
// and node, unlike EventSource), with Last-Event-ID resume, exponential
// backoff, and sequence-gap detection so the owner can resync via the
// paging endpoints.

export interface SseFrame {
  id: number;
  event: string;
  data: unknown;
}

export interface SseOptions {
  onFrame: (frame: SseFrame) => void;
  /** called when ids skip ahead (frames were missed); owner should resync */
  onGap?: (expected: number, got: number) => void;
  onStatus?: (connected: boolean) => void;
  lastEventId?: number;
  fetchImpl?: (url: string, init?: RequestInit) => Promise<Response>;
  maxBackoffMs?: number;
}

export class SseClient {
  lastEventId: number;
  private stopped = false;
  private controller: AbortController | null = null;
  private backoff = 500;
  private readonly maxBackoff: number;
  private readonly fetchImpl: (url: string, init?: RequestInit) => Promise<Response>;

  constructor(private readonly url: string, private readonly opts: SseOptions) {
    this.lastEventId = opts.lastEventId ?? -1;
    this.maxBackoff = opts.maxBackoffMs ?? 15000;
    this.fetchImpl = opts.fetchImpl ?? ((u, i) => fetch(u, i));
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  /** Abort the underlying request without stopping: simulates a drop and
   * exercises the reconnect path. */
  dropConnection(): void {
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const resp = await this.fetchImpl(this.url, {
          headers: { "last-event-id": String(this.lastEventId) },
          signal: this.controller.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`SSE ${resp.status}`);
        this.opts.onStatus?.(true);
        this.backoff = 500;
        await this.consume(resp.body);
      } catch {
        // fall through to reconnect
      }
      this.opts.onStatus?.(false);
      if (this.stopped) return;
      await new Promise((r) => setTimeout(r, this.backoff));
      this.backoff = Math.min(this.backoff * 2, this.maxBackoff);
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let nl: number;
      let frame: Partial<SseFrame> & { hasData?: boolean } = this.pending;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, nl).replace(/\r$/, "");
        buffer = buffer.slice(nl + 1);
        if (line === "") {
          if (frame.hasData) this.dispatch(frame);
          frame = {};
        } else if (line.startsWith("id: ")) {
          frame.id = Number(line.slice(4));
        } else if (line.startsWith("event: ")) {
          frame.event = line.slice(7);
        } else if (line.startsWith("data: ")) {
          frame.data = JSON.parse(line.slice(6));
          frame.hasData = true;
        }
        // lines starting with ":" are keepalive comments
      }
      this.pending = frame;
    }
  }

  private pending: Partial<SseFrame> & { hasData?: boolean } = {};

  private dispatch(raw: Partial<SseFrame>): void {
    const frame: SseFrame = { id: raw.id ?? -1, event: raw.event ?? "", data: raw.data };
    const expected = this.lastEventId + 1;
    if (frame.id > expected) this.opts.onGap?.(expected, frame.id);
    if (frame.id > this.lastEventId) this.lastEventId = frame.id;
    this.opts.onFrame(frame);
  }
}
