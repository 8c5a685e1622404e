// End-to-end round trip against a lossless `serve` process: toggling LED1
// drives the device to On and the widget to confirmed within one ack cycle,
// and the third failed connect attempt raises the alert banner.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "./api.js";
import { connectEvents, EventFeed, type FeedEvent } from "./events.js";
import { commandToken, WidgetPanel } from "./widgets.js";

const GOOD = "AA:BB:CC:DD:EE:FF";
const BAD = "11:22:33:44:55:66";

let child: ChildProcess;
let base: string;
let api: ApiClient;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      srv.close(() => resolve(address.port));
    });
  });
}

async function waitForServer(url: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const res = await fetch(url);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`server at ${url} never came up`);
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "wiacomm-ui-"));
  const allowlist = join(dir, "allow.txt");
  writeFileSync(allowlist, `${GOOD} dashboard-test\n`);
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  child = spawn(
    "python3",
    ["-m", "wiacomm", "serve",
     "--allowlist", allowlist,
     "--audit", join(dir, "audit.jsonl"),
     "--loss", "0", "--seed", "0",
     "--listen", `127.0.0.1:${port}`],
    { stdio: "ignore" },
  );
  api = new ApiClient(base);
  await waitForServer(`${base}/api/devices`);
}, 40_000);

afterAll(() => {
  child?.kill("SIGTERM");
});

describe("dashboard against a live lossless serve", () => {
  it("toggling LED1 confirms the widget within one ack cycle", async () => {
    const panel = new WidgetPanel();
    const session = await api.openSession(GOOD);
    expect(session.ok).toBe(true);
    if (!session.ok) return;

    const desired = panel.beginToggle("led1");
    expect(desired).toBe(1);
    const submitted = await api.submitCommand(session.token, commandToken("led1", desired!));
    expect(submitted.ok).toBe(true);
    if (!submitted.ok) return;

    const ticket = await api.waitForTicket(submitted.ticketId);
    expect(ticket.status).toBe("acked");
    expect(ticket.code).toBe(11);
    panel.confirm("led1", ticket.code!);

    expect(panel.widgets.led1.confirmed).toBe(1);
    expect(panel.widgets.led1.pending).toBe(false);
    expect((await api.devices()).led1).toBe(1);
  }, 20_000);

  it("third failed connect renders the alert banner", async () => {
    const feed = new EventFeed();
    let banner: string | null = null;
    let sawAlert: (event: FeedEvent) => void = () => {};
    const alertSeen = new Promise<FeedEvent>((resolve) => {
      sawAlert = resolve;
    });
    const stop = connectEvents(`${base}/api/events`, feed, {
      onEvent: (event) => {
        if (event.kind === "alert") {
          banner = `ALERT: 3 failed attempts from ${event.mac}`;
          sawAlert(event);
        }
      },
    });
    try {
      // give the stream a moment to subscribe before provoking events
      await new Promise((resolve) => setTimeout(resolve, 300));
      const failures: number[] = [];
      for (let i = 0; i < 3; i++) {
        const denied = await api.openSession(BAD);
        expect(denied.ok).toBe(false);
        if (!denied.ok) failures.push(denied.failures ?? -1);
      }
      expect(failures).toEqual([1, 2, 3]);

      const alert = await Promise.race([
        alertSeen,
        new Promise<never>((_, reject) =>
          setTimeout(() => reject(new Error("no alert event within 10s")), 10_000)),
      ]);
      expect(alert.mac).toBe(BAD);
      expect(banner).toContain(BAD);
      expect(feed.rows.some((row) => row.kind === "alert")).toBe(true);

      const locked = await api.openSession(BAD);
      expect(locked.ok).toBe(false);
      if (!locked.ok) expect(locked.status).toBe(423);
    } finally {
      stop();
    }
  }, 20_000);
});
