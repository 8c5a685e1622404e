// DOM glue for the operator panel: connect form, three switch widgets,
// alert banner, live event feed.

import { ApiClient, type DeviceName } from "./api.js";
import { connectEvents, EventFeed, type FeedEvent } from "./events.js";
import { normalizeMac } from "./mac.js";
import { commandToken, DEVICES, WidgetPanel } from "./widgets.js";

const api = new ApiClient("");
const panel = new WidgetPanel();
const feed = new EventFeed();

let token: string | null = null;

const el = (id: string) => document.getElementById(id) as HTMLElement;

function renderWidgets() {
  for (const device of DEVICES) {
    const w = panel.widgets[device];
    const row = el(`widget-${device}`);
    row.querySelector(".state")!.textContent = w.pending ? "…" : w.confirmed ? "ON" : "OFF";
    row.classList.toggle("on", !w.pending && w.confirmed === 1);
    row.classList.toggle("pending", w.pending);
    (row.querySelector("button") as HTMLButtonElement).disabled = w.pending || token === null;
    row.querySelector(".note")!.textContent =
      w.error ?? (w.lastCode !== null ? `ack ${w.lastCode}` : "");
  }
}

function renderFeed() {
  const body = el("feed");
  body.innerHTML = "";
  for (const event of feed.rows) {
    const tr = document.createElement("tr");
    tr.className = event.kind;
    for (const cell of [event.ts, event.kind, event.mac ?? "", event.detail]) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    body.appendChild(tr);
  }
  el("gap-notice").hidden = !feed.gapNotice;
}

function showBanner(text: string) {
  const banner = el("banner");
  banner.textContent = text;
  banner.hidden = false;
}

function onEvent(event: FeedEvent) {
  if (event.kind === "alert") {
    showBanner(`ALERT: 3 failed attempts from ${event.mac ?? "unknown"} — address locked`);
  }
  renderFeed();
  void refreshDevices();
}

async function refreshDevices() {
  try {
    panel.refresh(await api.devices());
    renderWidgets();
  } catch {
    // transient; the next event or poll will retry
  }
}

async function connect() {
  const input = el("mac-input") as HTMLInputElement;
  const status = el("connect-status");
  const mac = normalizeMac(input.value);
  if (mac === null) {
    status.textContent = "not a MAC address (need six hex pairs)";
    return;
  }
  status.textContent = "connecting…";
  const result = await api.openSession(mac);
  if (result.ok) {
    token = result.token;
    status.textContent = `connected as ${mac}`;
    el("panel").classList.remove("locked-out");
  } else if (result.status === 423) {
    status.textContent = `locked out until ${new Date((result.lockedUntil ?? 0) * 1000).toLocaleTimeString()}`;
  } else if (result.status === 401) {
    status.textContent = `denied (${result.failures ?? "?"} consecutive failures)`;
  } else {
    status.textContent = result.error ?? `error ${result.status}`;
  }
  renderWidgets();
}

async function toggle(device: DeviceName) {
  if (token === null) return;
  const desired = panel.beginToggle(device);
  if (desired === null) return; // pending: ignore the click
  renderWidgets();
  const submitted = await api.submitCommand(token, commandToken(device, desired));
  if (!submitted.ok) {
    panel.fail(device, submitted.status === 401 ? "session expired — reconnect" : `HTTP ${submitted.status}`);
    if (submitted.status === 401) token = null;
    renderWidgets();
    return;
  }
  try {
    const ticket = await api.waitForTicket(submitted.ticketId);
    if (ticket.status === "acked" && ticket.code !== undefined) {
      panel.confirm(device, ticket.code);
    } else {
      panel.fail(device, `delivery failed after ${ticket.attempts} attempts`);
    }
  } catch (err) {
    panel.fail(device, String(err));
  }
  renderWidgets();
}

export function start(): void {
  el("connect-btn").addEventListener("click", () => void connect());
  for (const device of DEVICES) {
    el(`widget-${device}`).querySelector("button")!.addEventListener("click", () => void toggle(device));
  }
  connectEvents("/api/events", feed, { onEvent });
  renderWidgets();
  void refreshDevices();
}

start();
