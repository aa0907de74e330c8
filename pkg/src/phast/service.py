"""Deterministic replay and the live session server.

`replay` drives the engine offline from a JSON-lines input trace, sampling
it with zero-order hold at the activity's tick rate, and writes one
snapshot line per tick. `serve` runs the same engine behind a WebSocket
endpoint: every tick broadcasts a state message, clients feed a
latest-wins input mailbox, and load/reset/set_mode commands are applied
between ticks. One session per server process; every connected client
sees the same stream and writes into the same mailbox.

Trace line:     {"t": <seconds>, "u": [x, y, z]}
State message:  {"type": "state", "snapshot": {<snapshot line schema>}}
"""

from __future__ import annotations

import asyncio
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .activity import ActivityDocument, ActivityError, parse
from .engine import Fallthrough, PhastTree, StructureError, tick
from .world import TickSnapshot, WorldState, snapshot
from .bt import idle_ledger

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

CLIENT_QUEUE_LIMIT = 64
DEFAULT_STALENESS_S = 0.25


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    t: float
    u: tuple[float, float, float]


def read_trace(text: str) -> list[TraceRecord]:
    """Parse a JSON-lines input trace; timestamps must be non-decreasing."""
    records: list[TraceRecord] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: not valid JSON: {exc}") from None
        if not isinstance(raw, dict) or "t" not in raw or "u" not in raw:
            raise TraceError(f'line {lineno}: expected {{"t": seconds, "u": [x, y, z]}}')
        t = raw["t"]
        u = raw["u"]
        if not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
            raise TraceError(f"line {lineno}: t must be a finite non-negative number")
        if (
            not isinstance(u, list)
            or len(u) != 3
            or not all(isinstance(c, (int, float)) and math.isfinite(c) for c in u)
        ):
            raise TraceError(f"line {lineno}: u must be a list of 3 finite numbers")
        if records and t < records[-1].t:
            raise TraceError(f"line {lineno}: timestamps must be non-decreasing")
        records.append(TraceRecord(float(t), (float(u[0]), float(u[1]), float(u[2]))))
    return records


def initial_snapshot(tree: PhastTree, world: WorldState) -> TickSnapshot:
    """The pre-tick state of a fresh session: every node IDLE, zero input."""
    return snapshot(world, idle_ledger(tree.root), None, (0.0, 0.0, 0.0), False)


def iter_replay(tree, world, records, *, fallthrough, pass_gain):
    """Tick from t = 0 through the last trace timestamp, zero-order hold."""
    if not records:
        return
    last_t = records[-1].t
    index = 0
    current_u = (0.0, 0.0, 0.0)
    k = 0
    while True:
        now = k * world.dt
        if now > last_t:
            break
        while index < len(records) and records[index].t <= now:
            current_u = records[index].u
            index += 1
        world, snap = tick(tree, world, current_u, fallthrough=fallthrough, pass_gain=pass_gain)
        yield snap
        k += 1


def _load_session(activity_path, tick_rate, err) -> tuple[ActivityDocument, PhastTree, WorldState] | int:
    try:
        raw = Path(activity_path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read activity file: {exc}", file=err)
        return EXIT_IO
    try:
        doc = parse(raw)
        tree = doc.to_tree()
    except (ActivityError, StructureError) as exc:
        print(f"error: invalid activity file {activity_path}:", file=err)
        for item in getattr(exc, "diagnostics", None) or getattr(exc, "violations", []):
            print(f"  {item}", file=err)
        return EXIT_VALIDATION
    world = doc.to_world()
    if tick_rate is not None:
        if not math.isfinite(tick_rate) or tick_rate <= 0:
            print("error: tick rate must be a positive number", file=err)
            return EXIT_VALIDATION
        world = replace(world, dt=1.0 / tick_rate)
    return doc, tree, world


def replay(activity_path, trace_path, out_path, *, tick_rate: float | None = None, err=sys.stderr) -> int:
    """Deterministic offline run; returns a process exit code.

    0 on success, 1 if the activity or trace fails validation, 2 on I/O
    failure. The output file is not created unless validation passed.
    """
    loaded = _load_session(activity_path, tick_rate, err)
    if isinstance(loaded, int):
        return loaded
    doc, tree, world = loaded

    try:
        trace_text = Path(trace_path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read trace file: {exc}", file=err)
        return EXIT_IO
    except UnicodeDecodeError as exc:
        print(f"error: trace file is not UTF-8: {exc}", file=err)
        return EXIT_VALIDATION
    try:
        records = read_trace(trace_text)
    except TraceError as exc:
        print(f"error: invalid trace file {trace_path}: {exc}", file=err)
        return EXIT_VALIDATION

    try:
        out = open(out_path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        print(f"error: cannot open output file: {exc}", file=err)
        return EXIT_IO
    with out:
        for snap in iter_replay(
            tree, world, records, fallthrough=doc.fallthrough, pass_gain=doc.pass_through_gain
        ):
            out.write(snap.to_json_line() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Live session


class _Session:
    """Engine state owned exclusively by the tick loop."""

    def __init__(self, doc: ActivityDocument, tick_rate: float | None):
        self.doc = doc
        self.tick_rate = tick_rate
        self.tree = doc.to_tree()
        self.mode = doc.fallthrough
        self.world = self._fresh_world()
        self.last_snapshot = initial_snapshot(self.tree, self.world)

    def _fresh_world(self) -> WorldState:
        world = self.doc.to_world()
        if self.tick_rate is not None:
            world = replace(world, dt=1.0 / self.tick_rate)
        return world

    def reset(self) -> TickSnapshot:
        self.world = self._fresh_world()
        self.last_snapshot = initial_snapshot(self.tree, self.world)
        return self.last_snapshot

    def step(self, u) -> TickSnapshot:
        self.world, snap = tick(
            self.tree, self.world, u, fallthrough=self.mode, pass_gain=self.doc.pass_through_gain
        )
        self.last_snapshot = snap
        return snap

    def loaded_message(self) -> str:
        labels = [node.label for node in self.tree.root.iter_preorder()]
        return json.dumps({"type": "loaded", "activity": self.doc.name, "labels": labels})


def _state_message(snap: TickSnapshot) -> str:
    return '{"type": "state", "snapshot": ' + snap.to_json_line() + "}"


def _error_message(code: str, detail: str) -> str:
    return json.dumps({"type": "error", "code": code, "detail": detail})


class TeleopServer:
    """Single-session WebSocket server around one engine loop.

    The engine ticks on a fixed timer (or once per input message in
    lockstep mode, which tests use for deterministic pacing). Snapshots are
    fanned out through bounded per-client queues; a slow client loses its
    oldest queued snapshots, never the engine its cadence.
    """

    def __init__(
        self,
        doc: ActivityDocument,
        *,
        tick_rate: float | None = None,
        lockstep: bool = False,
        staleness_s: float = DEFAULT_STALENESS_S,
    ):
        self.session = _Session(doc, tick_rate)
        self.lockstep = lockstep
        self.staleness_s = staleness_s
        self.clients: dict[object, asyncio.Queue] = {}
        self._pending_u: tuple[float, float, float] = (0.0, 0.0, 0.0)
        self._input_time: float | None = None
        self._fresh_input = False
        self._commands: list[tuple] = []
        self._wakeup = asyncio.Event()

    # -- fan-out ------------------------------------------------------------

    @staticmethod
    def _offer(queue: asyncio.Queue, message: str) -> None:
        while True:
            try:
                queue.put_nowait(message)
                return
            except asyncio.QueueFull:
                try:
                    queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass

    def _broadcast(self, message: str) -> None:
        for queue in self.clients.values():
            self._offer(queue, message)

    # -- client handling ----------------------------------------------------

    async def _sender(self, conn, queue: asyncio.Queue) -> None:
        try:
            while True:
                await conn.send(await queue.get())
        except Exception:
            return

    async def handler(self, conn) -> None:
        queue: asyncio.Queue = asyncio.Queue(CLIENT_QUEUE_LIMIT)
        self.clients[conn] = queue
        self._offer(queue, self.session.loaded_message())
        self._offer(queue, _state_message(self.session.last_snapshot))
        sender = asyncio.create_task(self._sender(conn, queue))
        try:
            async for raw in conn:
                self._on_message(queue, raw)
        except Exception:
            pass
        finally:
            self.clients.pop(conn, None)
            sender.cancel()

    def _on_message(self, queue: asyncio.Queue, raw) -> None:
        try:
            message = json.loads(raw)
        except (json.JSONDecodeError, TypeError, UnicodeDecodeError):
            self._offer(queue, _error_message("bad-message", "not valid JSON"))
            return
        if not isinstance(message, dict):
            self._offer(queue, _error_message("bad-message", "expected a JSON object"))
            return
        kind = message.get("type")
        if kind == "input":
            u = message.get("u")
            if (
                not isinstance(u, list)
                or len(u) != 3
                or not all(isinstance(c, (int, float)) and math.isfinite(c) for c in u)
            ):
                self._offer(queue, _error_message("bad-input", "u must be a list of 3 finite numbers"))
                return
            self._pending_u = (float(u[0]), float(u[1]), float(u[2]))
            self._input_time = asyncio.get_running_loop().time()
            self._fresh_input = True
            self._wakeup.set()
        elif kind == "load":
            text = message.get("activity")
            if not isinstance(text, str):
                self._offer(queue, _error_message("bad-message", "load needs an activity text"))
                return
            try:
                doc = parse(text)
                doc.to_tree()
            except (ActivityError, StructureError) as exc:
                detail = "; ".join(
                    str(d) for d in (getattr(exc, "diagnostics", None) or getattr(exc, "violations", []))
                )
                self._offer(queue, _error_message("load-failed", detail))
                return
            self._commands.append(("load", doc))
            self._wakeup.set()
        elif kind == "reset":
            self._commands.append(("reset",))
            self._wakeup.set()
        elif kind == "set_mode":
            mode = message.get("mode")
            if mode not in (Fallthrough.PASS_THROUGH.value, Fallthrough.HOLD.value):
                self._offer(queue, _error_message("bad-mode", "mode must be pass_through or hold"))
                return
            self._commands.append(("set_mode", Fallthrough(mode)))
            self._wakeup.set()
        else:
            self._offer(queue, _error_message("bad-message", f"unknown message type {kind!r}"))

    # -- engine loop ----------------------------------------------------------

    def _apply_commands(self) -> None:
        commands, self._commands = self._commands, []
        for command in commands:
            if command[0] == "load":
                self.session = _Session(command[1], self.session.tick_rate)
                self._broadcast(self.session.loaded_message())
                self._broadcast(_state_message(self.session.last_snapshot))
            elif command[0] == "reset":
                self._broadcast(_state_message(self.session.reset()))
            elif command[0] == "set_mode":
                self.session.mode = command[1]

    def _current_input(self, now: float) -> tuple[float, float, float]:
        if self.lockstep:
            return self._pending_u
        if self._input_time is None or now - self._input_time > self.staleness_s:
            return (0.0, 0.0, 0.0)
        return self._pending_u

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.session.world.dt
        while True:
            if self.lockstep:
                await self._wakeup.wait()
                self._wakeup.clear()
                self._apply_commands()
                if not self._fresh_input:
                    continue
                self._fresh_input = False
            else:
                delay = deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                deadline += self.session.world.dt
                if deadline < loop.time():
                    # Fell far behind (suspended process): resynchronize.
                    deadline = loop.time() + self.session.world.dt
                self._apply_commands()
            snap = self.session.step(self._current_input(loop.time()))
            self._broadcast(_state_message(snap))

    async def run(self, host: str, port: int, *, bound: "asyncio.Future | None" = None) -> None:
        from websockets.asyncio.server import serve as ws_serve

        async with ws_serve(self.handler, host, port, compression=None) as server:
            if bound is not None:
                bound.set_result(server.sockets[0].getsockname()[1])
            await self._tick_loop()


def serve(
    activity_path,
    port: int,
    *,
    host: str = "127.0.0.1",
    tick_rate: float | None = None,
    lockstep: bool = False,
    staleness_s: float = DEFAULT_STALENESS_S,
    err=sys.stderr,
) -> int:
    """Run the live session until interrupted; returns an exit code."""
    loaded = _load_session(activity_path, tick_rate, err)
    if isinstance(loaded, int):
        return loaded
    doc, _, _ = loaded
    server = TeleopServer(doc, tick_rate=tick_rate, lockstep=lockstep, staleness_s=staleness_s)

    async def main() -> None:
        bound = asyncio.get_running_loop().create_future()
        bound.add_done_callback(
            lambda fut: print(f"serving {doc.name!r} on ws://{host}:{fut.result()}", file=err, flush=True)
        )
        await server.run(host, port, bound=bound)

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        print(f"error: cannot bind {host}:{port}: {exc}", file=err)
        return EXIT_IO
    return EXIT_OK
