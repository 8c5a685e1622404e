// Thin client for the gateway's HTTP control API.

export type DeviceName = "led1" | "led2" | "motor";
export type Bit = 0 | 1;

export interface SessionOk {
  ok: true;
  token: string;
  expiresAt: number;
}

export interface SessionDenied {
  ok: false;
  status: number;
  failures?: number;
  lockedUntil?: number;
  error?: string;
}

export interface Ticket {
  ticketId: number;
  command: string;
  status: "queued" | "sent" | "acked" | "failed";
  attempts: number;
  code?: number;
}

export class ApiClient {
  constructor(
    private base: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  async openSession(mac: string): Promise<SessionOk | SessionDenied> {
    const res = await this.fetchImpl(`${this.base}/api/session`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ mac }),
    });
    const body = await res.json();
    if (res.ok) {
      return { ok: true, token: body.token, expiresAt: body.expires_at };
    }
    return {
      ok: false,
      status: res.status,
      failures: body.failures,
      lockedUntil: body.locked_until,
      error: body.error,
    };
  }

  async submitCommand(
    token: string,
    command: string,
  ): Promise<{ ok: true; ticketId: number } | { ok: false; status: number }> {
    const res = await this.fetchImpl(`${this.base}/api/command`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token, command }),
    });
    if (!res.ok) return { ok: false, status: res.status };
    const body = await res.json();
    return { ok: true, ticketId: body.ticket_id };
  }

  async pollTicket(ticketId: number): Promise<Ticket> {
    const res = await this.fetchImpl(`${this.base}/api/command/${ticketId}`);
    if (!res.ok) throw new Error(`ticket ${ticketId}: HTTP ${res.status}`);
    const body = await res.json();
    return {
      ticketId: body.ticket_id,
      command: body.command,
      status: body.status,
      attempts: body.attempts,
      code: body.code,
    };
  }

  /** Poll until the ticket settles (acked or failed). */
  async waitForTicket(
    ticketId: number,
    opts: { timeoutMs?: number; intervalMs?: number } = {},
  ): Promise<Ticket> {
    const timeoutMs = opts.timeoutMs ?? 10_000;
    const intervalMs = opts.intervalMs ?? 50;
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const ticket = await this.pollTicket(ticketId);
      if (ticket.status === "acked" || ticket.status === "failed") return ticket;
      if (Date.now() > deadline) throw new Error(`ticket ${ticketId} did not settle`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  async devices(): Promise<Record<DeviceName, Bit>> {
    const res = await this.fetchImpl(`${this.base}/api/devices`);
    if (!res.ok) throw new Error(`devices: HTTP ${res.status}`);
    return res.json();
  }
}
