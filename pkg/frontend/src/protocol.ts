// Wire protocol spoken by the teleop service. One JSON object per text
// frame; the snapshot schema matches replay output lines exactly.

export type NodeStatus = "SUCCESS" | "FAILURE" | "RUNNING" | "IDLE";

export interface PoseEntry {
  p: [number, number, number];
  q: [number, number, number, number];
}

export interface Snapshot {
  tick: number;
  time_s: number;
  active_phase: string | null;
  degenerate: boolean;
  poses: Record<string, PoseEntry>;
  statuses: [string, NodeStatus][];
  u: [number, number, number];
}

export interface LoadedMessage {
  type: "loaded";
  activity: string;
  labels: string[];
}

export interface StateMessage {
  type: "state";
  snapshot: Snapshot;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = LoadedMessage | StateMessage | ErrorMessage;

export interface InputMessage {
  type: "input";
  u: [number, number, number];
}

const STATUSES = new Set(["SUCCESS", "FAILURE", "RUNNING", "IDLE"]);

function isVec(value: unknown, length: number): boolean {
  return (
    Array.isArray(value) &&
    value.length === length &&
    value.every((c) => typeof c === "number" && Number.isFinite(c))
  );
}

function isSnapshot(raw: any): raw is Snapshot {
  if (typeof raw !== "object" || raw === null) return false;
  if (typeof raw.tick !== "number" || typeof raw.time_s !== "number") return false;
  if (raw.active_phase !== null && typeof raw.active_phase !== "string") return false;
  if (typeof raw.degenerate !== "boolean") return false;
  if (typeof raw.poses !== "object" || raw.poses === null) return false;
  for (const entry of Object.values<any>(raw.poses)) {
    if (!entry || !isVec(entry.p, 3) || !isVec(entry.q, 4)) return false;
  }
  if (!Array.isArray(raw.statuses)) return false;
  for (const pair of raw.statuses) {
    if (!Array.isArray(pair) || pair.length !== 2) return false;
    if (typeof pair[0] !== "string" || !STATUSES.has(pair[1])) return false;
  }
  return isVec(raw.u, 3);
}

/** Parse one server frame; null when the payload is not a known message. */
export function parseServerMessage(data: string): ServerMessage | null {
  let raw: any;
  try {
    raw = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  switch (raw.type) {
    case "loaded":
      if (typeof raw.activity === "string" && Array.isArray(raw.labels) &&
          raw.labels.every((l: unknown) => typeof l === "string")) {
        return { type: "loaded", activity: raw.activity, labels: raw.labels };
      }
      return null;
    case "state":
      return isSnapshot(raw.snapshot) ? { type: "state", snapshot: raw.snapshot } : null;
    case "error":
      if (typeof raw.code === "string") {
        return { type: "error", code: raw.code, detail: String(raw.detail ?? "") };
      }
      return null;
    default:
      return null;
  }
}

export function inputMessage(u: [number, number, number]): string {
  return JSON.stringify({ type: "input", u });
}

export function resetMessage(): string {
  return JSON.stringify({ type: "reset" });
}

export function setModeMessage(mode: "pass_through" | "hold"): string {
  return JSON.stringify({ type: "set_mode", mode });
}
