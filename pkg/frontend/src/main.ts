// Browser bootstrap: DOM wiring, keyboard/gamepad capture, and one render
// per animation frame reading the view model.

import { CockpitClient } from "./client";
import { GamepadLike } from "./input";
import { resetMessage, setModeMessage } from "./protocol";
import { renderSceneView, renderTreePanel } from "./render";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const client = new CockpitClient();
const vm = client.vm;

const urlInput = el<HTMLInputElement>("server-url");
const connectButton = el<HTMLButtonElement>("connect");
const resetButton = el<HTMLButtonElement>("reset");
const modeSelect = el<HTMLSelectElement>("mode");
const connectionLabel = el<HTMLSpanElement>("connection");
const activityLabel = el<HTMLSpanElement>("activity");
const tickLabel = el<HTMLSpanElement>("tick");
const phaseLabel = el<HTMLSpanElement>("phase");
const badges = el<HTMLSpanElement>("badges");
const bannerBox = el<HTMLDivElement>("banner");
const inputLabel = el<HTMLSpanElement>("input-state");
const treePanel = el<HTMLDivElement>("tree");
const topCanvas = el<HTMLCanvasElement>("view-top");
const sideCanvas = el<HTMLCanvasElement>("view-side");

connectButton.addEventListener("click", () => {
  client.connect(urlInput.value.trim());
});
resetButton.addEventListener("click", () => {
  client.send(resetMessage());
});
modeSelect.addEventListener("change", () => {
  client.send(setModeMessage(modeSelect.value === "hold" ? "hold" : "pass_through"));
});

window.addEventListener("keydown", (ev) => {
  if (document.activeElement === urlInput) return;
  if (client.input.keyDown(ev.key)) ev.preventDefault();
});
window.addEventListener("keyup", (ev) => {
  if (client.input.keyUp(ev.key)) ev.preventDefault();
});
window.addEventListener("blur", () => client.input.clearKeys());

function pollGamepad(): void {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  const pad = Array.from(pads).find((p) => p !== null) ?? null;
  client.input.gamepad = pad as GamepadLike | null;
}

function frame(): void {
  pollGamepad();

  connectionLabel.textContent = vm.connection;
  connectionLabel.className = `pill ${vm.connection}`;
  activityLabel.textContent = vm.activity ?? "—";
  tickLabel.textContent = vm.snapshot ? String(vm.snapshot.tick) : "—";
  phaseLabel.textContent = vm.activePhase() ?? (vm.snapshot ? "pass-through" : "—");

  const badgeParts: string[] = [];
  if (vm.degenerate()) badgeParts.push("⚠ degenerate geometry");
  if (vm.passThroughActive()) badgeParts.push("direct control");
  badges.textContent = badgeParts.join("  ");

  if (vm.banner) {
    bannerBox.textContent = vm.banner.text;
    bannerBox.className = `banner ${vm.banner.kind}`;
  } else {
    bannerBox.textContent = "";
    bannerBox.className = "banner hidden";
  }

  const u = client.input.current();
  inputLabel.textContent = `u = [${u.map((c) => c.toFixed(2)).join(", ")}]`;

  renderTreePanel(treePanel, vm);
  renderSceneView(topCanvas, "top", vm.snapshot, vm.trail);
  renderSceneView(sideCanvas, "side", vm.snapshot, vm.trail);
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
