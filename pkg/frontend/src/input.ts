// Keyboard and gamepad capture mapped onto the engine's 3-component
// command vector, each component clamped to [-1, 1]. Released keys drop
// their contribution immediately; gamepad values pass through a small
// deadzone and stay proportional above it.

export type Vec3 = [number, number, number];

const KEY_AXES: Record<string, [number, number]> = {
  ArrowRight: [0, 1],
  ArrowLeft: [0, -1],
  ArrowUp: [1, 1],
  ArrowDown: [1, -1],
  PageUp: [2, 1],
  PageDown: [2, -1],
};

export const GAMEPAD_DEADZONE = 0.05;

export function applyDeadzone(value: number, deadzone: number = GAMEPAD_DEADZONE): number {
  const magnitude = Math.abs(value);
  if (magnitude <= deadzone) return 0;
  const scaled = (magnitude - deadzone) / (1 - deadzone);
  return Math.sign(value) * Math.min(1, scaled);
}

function clamp(value: number): number {
  return Math.max(-1, Math.min(1, value));
}

/** Minimal shape of the browser Gamepad we read. */
export interface GamepadLike {
  axes: ReadonlyArray<number>;
  buttons: ReadonlyArray<{ value: number }>;
}

export class InputState {
  private pressed = new Set<string>();
  gamepad: GamepadLike | null = null;

  /** Returns true when the key participates in the command mapping. */
  keyDown(key: string): boolean {
    if (!(key in KEY_AXES)) return false;
    this.pressed.add(key);
    return true;
  }

  keyUp(key: string): boolean {
    if (!(key in KEY_AXES)) return false;
    this.pressed.delete(key);
    return true;
  }

  clearKeys(): void {
    this.pressed.clear();
  }

  /** Current command vector from keys plus the last polled gamepad. */
  current(): Vec3 {
    const u: Vec3 = [0, 0, 0];
    for (const key of this.pressed) {
      const [axis, sign] = KEY_AXES[key];
      u[axis] += sign;
    }
    const pad = this.gamepad;
    if (pad) {
      // Left stick: horizontal -> x, vertical (up is negative) -> y.
      u[0] += applyDeadzone(pad.axes[0] ?? 0);
      u[1] += applyDeadzone(-(pad.axes[1] ?? 0));
      // Triggers: right raises z, left lowers it.
      const rt = pad.buttons[7]?.value ?? 0;
      const lt = pad.buttons[6]?.value ?? 0;
      u[2] += applyDeadzone(rt) - applyDeadzone(lt);
    }
    return [clamp(u[0]), clamp(u[1]), clamp(u[2])];
  }

  idle(): boolean {
    const [x, y, z] = this.current();
    return x === 0 && y === 0 && z === 0;
  }
}
