// Pure scene geometry: turns a snapshot into 2-D draw primitives for the
// top view (world x/y) and side view (world x/z). Painting happens in
// render.ts; keeping this pure makes the layout testable without a canvas.

import { PoseEntry, Snapshot } from "./protocol";

export type View = "top" | "side";

export interface CanvasSpec {
  width: number;
  height: number;
  /** Half-extent of the world window shown, meters. */
  span: number;
}

export interface Circle {
  kind: "circle";
  x: number;
  y: number;
  r: number;
  style: "object" | "threshold" | "ee";
  label?: string;
}

export interface Segment {
  kind: "segment";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  style: "axis" | "guide" | "trail";
}

export type Primitive = Circle | Segment;

export const THRESHOLD_RADII_M = [0.5, 0.2];
export const AXIS_DISPLAY_LENGTH_M = 0.25;
const OBJECT_RADIUS_M = 0.035;
const EE_RADIUS_M = 0.018;

/** World point -> canvas point for the chosen view (y axis flipped). */
export function project(view: View, p: [number, number, number], spec: CanvasSpec): [number, number] {
  const horizontal = p[0];
  const vertical = view === "top" ? p[1] : p[2];
  const scale = Math.min(spec.width, spec.height) / (2 * spec.span);
  return [spec.width / 2 + horizontal * scale, spec.height / 2 - vertical * scale];
}

function scaleLength(meters: number, spec: CanvasSpec): number {
  return (meters * Math.min(spec.width, spec.height)) / (2 * spec.span);
}

function rotate(q: [number, number, number, number], v: [number, number, number]): [number, number, number] {
  const [w, x, y, z] = q;
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + y * tz - z * ty,
    v[1] + w * ty + z * tx - x * tz,
    v[2] + w * tz + x * ty - y * tx,
  ];
}

/** Display convention: the first object anchors the threshold circles and
 * the second carries the axis, guide line, and trail (declaration order of
 * the activity's objects; the pour example declares cup then bottle). */
export function sceneObjects(snapshot: Snapshot): { names: string[]; reference?: string; subject?: string } {
  const names = Object.keys(snapshot.poses).filter((n) => n !== "ee");
  return { names, reference: names[0], subject: names[1] };
}

export function buildScene(
  view: View,
  snapshot: Snapshot,
  trail: [number, number, number][],
  spec: CanvasSpec,
): Primitive[] {
  const out: Primitive[] = [];
  const { names, reference, subject } = sceneObjects(snapshot);

  if (reference) {
    const [cx, cy] = project(view, snapshot.poses[reference].p, spec);
    for (const radius of THRESHOLD_RADII_M) {
      out.push({ kind: "circle", x: cx, y: cy, r: scaleLength(radius, spec), style: "threshold" });
    }
  }

  if (trail.length > 1) {
    for (let i = 1; i < trail.length; i++) {
      const [x1, y1] = project(view, trail[i - 1], spec);
      const [x2, y2] = project(view, trail[i], spec);
      out.push({ kind: "segment", x1, y1, x2, y2, style: "trail" });
    }
  }

  if (reference && subject) {
    const [x1, y1] = project(view, snapshot.poses[subject].p, spec);
    const [x2, y2] = project(view, snapshot.poses[reference].p, spec);
    out.push({ kind: "segment", x1, y1, x2, y2, style: "guide" });
  }

  if (subject) {
    const pose: PoseEntry = snapshot.poses[subject];
    const axisWorld = rotate(pose.q, [0, 0, AXIS_DISPLAY_LENGTH_M]);
    const tip: [number, number, number] = [
      pose.p[0] + axisWorld[0],
      pose.p[1] + axisWorld[1],
      pose.p[2] + axisWorld[2],
    ];
    const [x1, y1] = project(view, pose.p, spec);
    const [x2, y2] = project(view, tip, spec);
    out.push({ kind: "segment", x1, y1, x2, y2, style: "axis" });
  }

  for (const name of names) {
    const [x, y] = project(view, snapshot.poses[name].p, spec);
    out.push({ kind: "circle", x, y, r: scaleLength(OBJECT_RADIUS_M, spec), style: "object", label: name });
  }
  const ee = snapshot.poses["ee"];
  if (ee) {
    const [x, y] = project(view, ee.p, spec);
    out.push({ kind: "circle", x, y, r: scaleLength(EE_RADIUS_M, spec), style: "ee", label: "ee" });
  }
  return out;
}
