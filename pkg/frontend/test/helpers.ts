// Shared fixtures: pour-shaped snapshots and a scripted fake socket.

import { SocketLike } from "../src/client";
import { NodeStatus, Snapshot } from "../src/protocol";

export const POUR_LABELS = [
  "pour",
  "t",
  "t.0:d(bottle,cup)<=0.5",
  "t.1:d(bottle,cup)>=0.2",
  "t.2:project_to(bottle->cup)",
  "r_b",
  "r_b.0:tilt(bottle)>30",
  "r_b.1:d(bottle,cup)<0.2",
  "r_b.2:rotation(bottle@base)",
  "r_n",
  "r_n.0:tilt(bottle)<=30",
  "r_n.1:rotation(bottle@neck)",
];

export function loadedMessage(): string {
  return JSON.stringify({ type: "loaded", activity: "pour", labels: POUR_LABELS });
}

export function makeSnapshot(
  tick: number,
  phase: string | null,
  bottleX = 0.6,
  overrides: Partial<Snapshot> = {},
): Snapshot {
  const statuses: [string, NodeStatus][] = POUR_LABELS.map((label) => {
    if (label === "pour") return [label, phase === null ? "FAILURE" : "SUCCESS"];
    if (label === phase) return [label, "SUCCESS"];
    if (phase !== null && label.startsWith(`${phase}.`)) return [label, "SUCCESS"];
    return [label, "IDLE"];
  });
  return {
    tick,
    time_s: tick * 0.02,
    active_phase: phase,
    degenerate: false,
    poses: {
      cup: { p: [0, 0, 0], q: [1, 0, 0, 0] },
      bottle: { p: [bottleX, 0, 0], q: [1, 0, 0, 0] },
      ee: { p: [bottleX, 0, 0], q: [1, 0, 0, 0] },
    },
    statuses,
    u: [0, 0, 0],
    ...overrides,
  };
}

export function stateMessage(snapshot: Snapshot): string {
  return JSON.stringify({ type: "state", snapshot });
}

/** Scripted in-memory socket: test code plays the server side. */
export class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  open(): void {
    this.onopen?.();
  }

  push(data: string): void {
    this.onmessage?.({ data });
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}
