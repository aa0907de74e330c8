import { describe, expect, it } from "vitest";

import { GamepadLike, InputState, applyDeadzone } from "../src/input";

function pad(axes: number[], lt = 0, rt = 0): GamepadLike {
  const buttons = Array.from({ length: 8 }, () => ({ value: 0 }));
  buttons[6] = { value: lt };
  buttons[7] = { value: rt };
  return { axes, buttons };
}

describe("InputState keyboard mapping", () => {
  it("is zero with nothing pressed", () => {
    expect(new InputState().current()).toEqual([0, 0, 0]);
  });

  it("maps right arrow to +x", () => {
    const input = new InputState();
    input.keyDown("ArrowRight");
    expect(input.current()).toEqual([1, 0, 0]);
  });

  it("maps the full key set onto the three axes", () => {
    const input = new InputState();
    input.keyDown("ArrowLeft");
    input.keyDown("ArrowUp");
    input.keyDown("PageDown");
    expect(input.current()).toEqual([-1, 1, -1]);
  });

  it("release drops the contribution immediately", () => {
    const input = new InputState();
    input.keyDown("ArrowRight");
    input.keyUp("ArrowRight");
    expect(input.current()).toEqual([0, 0, 0]);
    expect(input.idle()).toBe(true);
  });

  it("opposing keys cancel and clamp holds at one", () => {
    const input = new InputState();
    input.keyDown("ArrowRight");
    input.keyDown("ArrowLeft");
    expect(input.current()[0]).toBe(0);
  });

  it("ignores unmapped keys", () => {
    const input = new InputState();
    expect(input.keyDown("a")).toBe(false);
    expect(input.current()).toEqual([0, 0, 0]);
  });
});

describe("InputState gamepad mapping", () => {
  it("half stick deflection is proportional and inside (0, 1)", () => {
    const input = new InputState();
    input.gamepad = pad([0.5, 0]);
    const [x] = input.current();
    expect(x).toBeGreaterThan(0);
    expect(x).toBeLessThan(1);
    input.gamepad = pad([0.25, 0]);
    const [quarter] = input.current();
    expect(quarter).toBeGreaterThan(0);
    expect(quarter).toBeLessThan(x);
  });

  it("stick up maps to +y", () => {
    const input = new InputState();
    input.gamepad = pad([0, -1]);
    expect(input.current()[1]).toBe(1);
  });

  it("triggers drive z both ways", () => {
    const input = new InputState();
    input.gamepad = pad([0, 0], 0, 1);
    expect(input.current()[2]).toBe(1);
    input.gamepad = pad([0, 0], 1, 0);
    expect(input.current()[2]).toBe(-1);
  });

  it("deadzone zeroes drift", () => {
    const input = new InputState();
    input.gamepad = pad([0.03, -0.02]);
    expect(input.current()).toEqual([0, 0, 0]);
    expect(input.idle()).toBe(true);
  });

  it("keyboard and gamepad merge with clamping", () => {
    const input = new InputState();
    input.keyDown("ArrowRight");
    input.gamepad = pad([0.8, 0]);
    expect(input.current()[0]).toBe(1);
  });
});

describe("applyDeadzone", () => {
  it("rescales proportionally above the deadzone", () => {
    expect(applyDeadzone(0.05)).toBe(0);
    expect(applyDeadzone(1)).toBe(1);
    expect(applyDeadzone(-1)).toBe(-1);
    const half = applyDeadzone(0.5);
    expect(half).toBeCloseTo((0.5 - 0.05) / 0.95, 12);
  });
});
