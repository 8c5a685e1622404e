// Live event feed over server-sent events, built on fetch streaming so the
// same code runs in browsers and in node-based tests. Reconnects with
// exponential backoff; duplicate events are dropped by id; the feed keeps
// the newest rows first, capped.

export interface FeedEvent {
  id: number;
  ts: string;
  kind: string;
  mac: string | null;
  detail: string;
}

export const FEED_CAP = 200;

/**
 * Split buffered SSE text into complete event payloads.
 * Returns the JSON `data:` payload strings plus the unconsumed remainder.
 */
export function parseSseChunk(buffer: string): { payloads: string[]; rest: string } {
  const payloads: string[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    const data = block
      .split("\n")
      .filter((line) => line.startsWith("data:"))
      .map((line) => line.slice(5).trimStart())
      .join("\n");
    if (data) payloads.push(data);
  }
  return { payloads, rest };
}

export class EventFeed {
  rows: FeedEvent[] = []; // newest first
  gapNotice = false;
  private seen = new Set<number>();

  constructor(private cap: number = FEED_CAP) {}

  /** Add one event; returns false for duplicates (already-rendered ids). */
  ingest(event: FeedEvent): boolean {
    if (this.seen.has(event.id)) return false;
    this.seen.add(event.id);
    this.rows.unshift(event);
    if (this.rows.length > this.cap) this.rows.length = this.cap;
    return true;
  }

  /** A reconnect happened; events may have been missed. */
  noteDisconnect(): void {
    this.gapNotice = true;
  }
}

export interface StreamOptions {
  fetchImpl?: typeof fetch;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  onEvent?: (event: FeedEvent) => void;
  onReconnect?: () => void;
}

/** Start streaming /api/events into the feed; returns a stop function. */
export function connectEvents(url: string, feed: EventFeed, opts: StreamOptions = {}): () => void {
  const fetchImpl = opts.fetchImpl ?? fetch;
  let stopped = false;
  let backoff = opts.initialBackoffMs ?? 500;
  const maxBackoff = opts.maxBackoffMs ?? 15_000;
  let controller: AbortController | null = null;

  const run = async () => {
    let first = true;
    while (!stopped) {
      controller = new AbortController();
      try {
        const response = await fetchImpl(url, {
          signal: controller.signal,
          headers: { accept: "text/event-stream" },
        });
        if (!response.ok || !response.body) throw new Error(`HTTP ${response.status}`);
        if (!first) {
          feed.noteDisconnect();
          opts.onReconnect?.();
        }
        first = false;
        backoff = opts.initialBackoffMs ?? 500;
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          const { payloads, rest } = parseSseChunk(buffer);
          buffer = rest;
          for (const payload of payloads) {
            try {
              const event = JSON.parse(payload) as FeedEvent;
              if (feed.ingest(event)) opts.onEvent?.(event);
            } catch {
              // tolerate malformed payloads rather than killing the stream
            }
          }
        }
      } catch {
        // fall through to the backoff below
      }
      if (stopped) break;
      await new Promise((resolve) => setTimeout(resolve, backoff));
      backoff = Math.min(backoff * 2, maxBackoff);
    }
  };

  void run();
  return () => {
    stopped = true;
    controller?.abort();
  };
}
