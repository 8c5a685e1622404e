// Switch-widget state machine: one widget per device.
//
// Rules: confirmed changes only on an acked command or a devices-snapshot
// refresh; pending is true from submit until resolution; a toggle while
// pending is ignored. No optimistic state — the widget shows what the
// server confirmed, nothing else.

import type { Bit, DeviceName } from "./api.js";

export interface WidgetView {
  label: string;
  confirmed: Bit;
  pending: boolean;
  commanded: Bit | null;
  lastCode: number | null;
  error: string | null;
}

export const DEVICES: DeviceName[] = ["led1", "led2", "motor"];

const LABELS: Record<DeviceName, string> = {
  led1: "LED1",
  led2: "LED2",
  motor: "MOTOR",
};

export function commandToken(device: DeviceName, desired: Bit): string {
  return `${device}_${desired ? "on" : "off"}`;
}

export class WidgetPanel {
  widgets: Record<DeviceName, WidgetView>;

  constructor() {
    this.widgets = Object.fromEntries(
      DEVICES.map((d) => [
        d,
        { label: LABELS[d], confirmed: 0, pending: false, commanded: null, lastCode: null, error: null },
      ]),
    ) as Record<DeviceName, WidgetView>;
  }

  /** Start a toggle; returns the desired bit, or null when the widget is busy. */
  beginToggle(device: DeviceName): Bit | null {
    const w = this.widgets[device];
    if (w.pending) return null;
    const desired: Bit = w.confirmed ? 0 : 1;
    w.pending = true;
    w.commanded = desired;
    w.error = null;
    return desired;
  }

  /** Acked: the commanded state is now confirmed. */
  confirm(device: DeviceName, code: number): void {
    const w = this.widgets[device];
    if (w.commanded !== null) w.confirmed = w.commanded;
    w.pending = false;
    w.commanded = null;
    w.lastCode = code;
    w.error = null;
  }

  /** Failed: revert to the last confirmed state and keep an error note. */
  fail(device: DeviceName, message: string): void {
    const w = this.widgets[device];
    w.pending = false;
    w.commanded = null;
    w.error = message;
  }

  /** Devices-snapshot refresh; pending widgets keep waiting for their ack. */
  refresh(snapshot: Partial<Record<DeviceName, Bit>>): void {
    for (const device of DEVICES) {
      const bit = snapshot[device];
      const w = this.widgets[device];
      if (bit !== undefined && !w.pending) w.confirmed = bit;
    }
  }
}
