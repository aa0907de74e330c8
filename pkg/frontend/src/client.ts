// Connection wiring: one WebSocket, one view model, and a fixed-rate input
// sender. The socket implementation is injectable so tests can drive the
// client with a scripted fake or node's "ws".

import { InputState } from "./input";
import { inputMessage, parseServerMessage } from "./protocol";
import { ViewModel } from "./viewmodel";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export const DEFAULT_INPUT_RATE_HZ = 60;

export interface ClientOptions {
  socketFactory?: SocketFactory;
  inputRateHz?: number;
  /** Keep sending zero vectors while idle; the engine treats stale input
   * as zero anyway, so the default only sends while a command is active. */
  sendWhenIdle?: boolean;
}

export class CockpitClient {
  readonly vm: ViewModel;
  readonly input = new InputState();

  private socket: SocketLike | null = null;
  private factory: SocketFactory;
  private inputPeriodMs: number;
  private sendWhenIdle: boolean;
  private timer: ReturnType<typeof setInterval> | null = null;
  private wasIdle = true;

  constructor(vm?: ViewModel, options: ClientOptions = {}) {
    this.vm = vm ?? new ViewModel();
    this.factory = options.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.inputPeriodMs = 1000 / (options.inputRateHz ?? DEFAULT_INPUT_RATE_HZ);
    this.sendWhenIdle = options.sendWhenIdle ?? false;
  }

  connect(url: string): void {
    this.disconnect();
    this.vm.setConnection("connecting");
    const socket = this.factory(url);
    this.socket = socket;
    socket.onopen = () => {
      this.vm.setConnection("connected");
      this.startInputLoop();
    };
    socket.onmessage = (ev) => {
      const text = typeof ev.data === "string" ? ev.data : String(ev.data);
      const message = parseServerMessage(text);
      if (message) {
        this.vm.apply(message);
      } else {
        this.vm.banner = { kind: "error", text: "unparseable server message" };
      }
    };
    socket.onclose = () => {
      this.vm.setConnection("disconnected");
      this.stopInputLoop();
    };
    socket.onerror = () => {
      this.vm.setConnection("disconnected");
    };
  }

  disconnect(): void {
    this.stopInputLoop();
    if (this.socket) {
      const socket = this.socket;
      this.socket = null;
      socket.onclose = null;
      try {
        socket.close();
      } catch {
        // already closed
      }
      this.vm.setConnection("disconnected");
    }
  }

  connected(): boolean {
    return this.vm.connection === "connected";
  }

  send(data: string): boolean {
    if (!this.socket || !this.connected()) return false;
    this.socket.send(data);
    return true;
  }

  /** Sample the input state and send one input message. Idle input is sent
   * once (so the engine sees the release) and then muted until activity
   * resumes, unless sendWhenIdle is set. */
  sendInputNow(): boolean {
    const idle = this.input.idle();
    if (idle && this.wasIdle && !this.sendWhenIdle) return false;
    this.wasIdle = idle;
    return this.send(inputMessage(this.input.current()));
  }

  private startInputLoop(): void {
    this.stopInputLoop();
    this.wasIdle = true;
    this.timer = setInterval(() => this.sendInputNow(), this.inputPeriodMs);
  }

  private stopInputLoop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
