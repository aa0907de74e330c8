// Display state assembled from server messages. Renders only the latest
// snapshot, never extrapolates poses, and holds no simulation state of its
// own: closing the cockpit can never change the engine.

import { NodeStatus, ServerMessage, Snapshot } from "./protocol";

export type ConnectionState = "idle" | "connecting" | "connected" | "disconnected";

export const TRAIL_CAPACITY = 500;

export interface Banner {
  kind: "error" | "warning";
  text: string;
}

export class ViewModel {
  connection: ConnectionState = "idle";
  activity: string | null = null;
  labels: string[] = [];
  snapshot: Snapshot | null = null;
  statuses = new Map<string, NodeStatus>();
  banner: Banner | null = null;
  /** Recent end-effector positions, oldest first, bounded ring. */
  trail: [number, number, number][] = [];
  ticksSeen = 0;
  lastTick: number | null = null;

  private trailCapacity: number;

  constructor(trailCapacity: number = TRAIL_CAPACITY) {
    this.trailCapacity = trailCapacity;
  }

  setConnection(state: ConnectionState): void {
    this.connection = state;
    if (state !== "connected") {
      this.statuses.clear();
    }
  }

  apply(message: ServerMessage): void {
    switch (message.type) {
      case "loaded":
        this.activity = message.activity;
        this.labels = message.labels;
        this.snapshot = null;
        this.statuses = new Map(message.labels.map((l) => [l, "IDLE" as NodeStatus]));
        this.trail = [];
        this.banner = null;
        this.lastTick = null;
        break;
      case "state":
        this.applySnapshot(message.snapshot);
        break;
      case "error":
        this.banner = { kind: "warning", text: `${message.code}: ${message.detail}` };
        break;
    }
  }

  private applySnapshot(snapshot: Snapshot): void {
    const known = new Set(this.labels);
    for (const [label] of snapshot.statuses) {
      if (!known.has(label)) {
        // Protocol mismatch: the stream does not match the loaded tree.
        this.banner = { kind: "error", text: `unknown node label ${JSON.stringify(label)}` };
        return;
      }
    }
    this.snapshot = snapshot;
    this.statuses = new Map(snapshot.statuses);
    this.ticksSeen += 1;
    this.lastTick = snapshot.tick;
    const ee = snapshot.poses["ee"];
    if (ee) {
      this.trail.push([ee.p[0], ee.p[1], ee.p[2]]);
      if (this.trail.length > this.trailCapacity) {
        this.trail.splice(0, this.trail.length - this.trailCapacity);
      }
    }
  }

  activePhase(): string | null {
    return this.snapshot ? this.snapshot.active_phase : null;
  }

  passThroughActive(): boolean {
    return this.snapshot !== null && this.snapshot.active_phase === null;
  }

  degenerate(): boolean {
    return this.snapshot !== null && this.snapshot.degenerate;
  }
}
