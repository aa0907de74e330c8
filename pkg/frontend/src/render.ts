// Tree panel row model and canvas painting. Row building and colors are
// pure; the painters take real 2D contexts and stay thin.

import { NodeStatus, Snapshot } from "./protocol";
import { CanvasSpec, Primitive, View, buildScene } from "./scene";
import { ViewModel } from "./viewmodel";

export const STATUS_COLORS: Record<NodeStatus, string> = {
  SUCCESS: "#2f9e44",
  FAILURE: "#d64545",
  RUNNING: "#e0a93e",
  IDLE: "#9aa0a6",
};

export interface TreeRow {
  label: string;
  /** Text shown for the node; leaves drop their "phase.index:" prefix. */
  text: string;
  depth: 0 | 1 | 2;
  status: NodeStatus;
  activePhase: boolean;
}

/** Rows in pre-order; depth derived from label structure: the first label
 * is the root, labels containing ":" are leaves, the rest are phases. */
export function treeRows(vm: ViewModel): TreeRow[] {
  const rows: TreeRow[] = [];
  const active = vm.activePhase();
  vm.labels.forEach((label, index) => {
    const status = vm.statuses.get(label) ?? "IDLE";
    const leaf = label.includes(":");
    const depth = index === 0 ? 0 : leaf ? 2 : 1;
    rows.push({
      label,
      text: leaf ? label.slice(label.indexOf(":") + 1) : label,
      depth: depth as 0 | 1 | 2,
      status,
      activePhase: depth === 1 && label === active,
    });
  });
  return rows;
}

export function renderTreePanel(container: HTMLElement, vm: ViewModel): void {
  const rows = treeRows(vm);
  container.textContent = "";
  for (const row of rows) {
    const div = document.createElement("div");
    div.className = "node-row" + (row.activePhase ? " active-phase" : "");
    div.style.marginLeft = `${row.depth * 16}px`;
    const dot = document.createElement("span");
    dot.className = "status-dot";
    dot.style.background = STATUS_COLORS[row.status];
    const text = document.createElement("span");
    text.textContent = row.text;
    const status = document.createElement("span");
    status.className = "status-text";
    status.textContent = row.status;
    status.style.color = STATUS_COLORS[row.status];
    div.append(dot, text, status);
    container.appendChild(div);
  }
}

const PRIMITIVE_STYLES: Record<string, { stroke: string; fill?: string; width: number; dash: number[] }> = {
  threshold: { stroke: "#4c566a", width: 1, dash: [6, 4] },
  guide: { stroke: "#7f8ca3", width: 1, dash: [3, 3] },
  axis: { stroke: "#4dabf7", width: 3, dash: [] },
  trail: { stroke: "#2f9e4466", width: 1.5, dash: [] },
  object: { stroke: "#dee2e6", fill: "#343a40", width: 1.5, dash: [] },
  ee: { stroke: "#ffd43b", fill: "#665c1e", width: 1.5, dash: [] },
};

function paint(ctx: CanvasRenderingContext2D, primitives: Primitive[]): void {
  for (const prim of primitives) {
    const style = PRIMITIVE_STYLES[prim.style];
    ctx.save();
    ctx.strokeStyle = style.stroke;
    ctx.lineWidth = style.width;
    ctx.setLineDash(style.dash);
    if (prim.kind === "circle") {
      ctx.beginPath();
      ctx.arc(prim.x, prim.y, prim.r, 0, Math.PI * 2);
      if (style.fill) {
        ctx.fillStyle = style.fill;
        ctx.fill();
      }
      ctx.stroke();
      if (prim.label) {
        ctx.fillStyle = "#ced4da";
        ctx.font = "11px system-ui, sans-serif";
        ctx.fillText(prim.label, prim.x + prim.r + 3, prim.y + 3);
      }
    } else {
      ctx.beginPath();
      ctx.moveTo(prim.x1, prim.y1);
      ctx.lineTo(prim.x2, prim.y2);
      ctx.stroke();
    }
    ctx.restore();
  }
}

export function renderSceneView(
  canvas: HTMLCanvasElement,
  view: View,
  snapshot: Snapshot | null,
  trail: [number, number, number][],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const spec: CanvasSpec = { width: canvas.width, height: canvas.height, span: 0.8 };
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#1b1e24";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#868e96";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(view === "top" ? "top view (x/y)" : "side view (x/z)", 8, 16);
  if (snapshot) {
    paint(ctx, buildScene(view, snapshot, view === "top" ? trail : trail, spec));
  }
}
