"""Command-line interface: `phast replay` and `phast serve`."""

from __future__ import annotations

import argparse

from .service import DEFAULT_STALENESS_S, replay, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phast",
        description="Shared-autonomy teleoperation engine driven by phase-switching behavior trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    replay_p = sub.add_parser("replay", help="re-run a recorded input trace deterministically")
    replay_p.add_argument("--activity", required=True, help="path to the .activity file")
    replay_p.add_argument("--trace", required=True, help="path to the JSON-lines input trace")
    replay_p.add_argument("--out", required=True, help="path for the snapshot output (one JSON line per tick)")
    replay_p.add_argument("--tick-rate", type=float, default=None, help="override the activity's tick rate (Hz)")

    serve_p = sub.add_parser("serve", help="run the live session over WebSocket")
    serve_p.add_argument("--activity", required=True, help="path to the .activity file")
    serve_p.add_argument("--port", type=int, required=True, help="TCP port to listen on")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--tick-rate", type=float, default=None, help="override the activity's tick rate (Hz)")
    serve_p.add_argument(
        "--lockstep",
        action="store_true",
        help="tick once per input message instead of on a timer (deterministic pacing for tests)",
    )
    serve_p.add_argument(
        "--staleness",
        type=float,
        default=DEFAULT_STALENESS_S,
        help="treat inputs older than this many seconds as zero (default %(default)s)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "replay":
        return replay(args.activity, args.trace, args.out, tick_rate=args.tick_rate)
    return serve(
        args.activity,
        args.port,
        host=args.host,
        tick_rate=args.tick_rate,
        lockstep=args.lockstep,
        staleness_s=args.staleness,
    )


if __name__ == "__main__":
    raise SystemExit(main())
