"""Command-line front door.

Five subcommands: `track` runs a live stdio session (or replays a recorded
script), `simulate` emits a performance script, `bench` times the analysis
against input size, `eval` runs the steady-state and adaptation studies,
and `serve` exposes the live session over a WebSocket.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
import threading

from .experiments import (
    dump_records,
    format_latency_table,
    run_experiment_1,
    run_experiment_2,
    run_experiment_3,
    run_experiment_4,
)
from .kernels import KernelConfig
from .protocol import (
    INBOUND_TYPES,
    ProtocolError,
    decode_record,
    encode_record,
    read_script,
    status_record,
    write_script,
)
from .service import StreamSession, replay, serve_forever
from .simulate import ChangeSchedule, SimulationConfig, generate
from .tracker import TrackerConfig

__all__ = ["main"]


def _add_tracker_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--window", type=float, default=6000.0, help="analysis window, ms"
    )
    parser.add_argument(
        "--sigma", type=float, default=25.0, help="Gaussian kernel width, ms"
    )
    parser.add_argument(
        "--ts",
        type=float,
        default=500.0,
        help="spontaneous tempo for the salience weighting, ms",
    )
    parser.add_argument("--min-lag", type=float, default=100.0, help="ms")
    parser.add_argument("--max-lag", type=float, default=2000.0, help="ms")
    parser.add_argument(
        "--max-notes",
        type=int,
        default=60,
        help="newest notes kept per analysis; 0 keeps all",
    )


def _tracker_config(args: argparse.Namespace) -> TrackerConfig:
    return TrackerConfig(
        kernel=KernelConfig(sigma=args.sigma, spontaneous_tempo=args.ts),
        window=args.window,
        min_lag=args.min_lag,
        max_lag=args.max_lag,
        max_notes=args.max_notes,
    )


def cmd_track(args: argparse.Namespace) -> int:
    config = _tracker_config(args)
    if args.script is not None:
        cadence = args.cadence if args.cadence > 0 else 500.0
        with open(args.script, encoding="utf-8") as fh:
            script = read_script(fh)
        for record in replay(script, cadence=cadence, config=config):
            print(encode_record(record))
        return 0

    session = StreamSession(config=config)
    out_lock = threading.Lock()

    def emit(record: dict) -> None:
        with out_lock:
            print(encode_record(record), flush=True)

    stop = threading.Event()

    def metronome() -> None:
        while not stop.wait(args.cadence / 1000.0):
            reply = session.tick()
            if reply is not None:
                emit(reply)

    if args.cadence > 0:
        threading.Thread(target=metronome, daemon=True).start()
    try:
        for line in sys.stdin:
            if not line.strip():
                continue
            try:
                record = decode_record(line)
                if record["type"] not in INBOUND_TYPES:
                    raise ProtocolError(
                        f"client may not send {record['type']!r}"
                    )
                reply = session.handle_record(record)
            except ProtocolError as exc:
                # One bad line never kills the session.
                emit(
                    status_record(
                        f"error: {exc}",
                        session.note_count,
                        session.clock.now(),
                    )
                )
                continue
            if reply is not None:
                emit(reply)
    finally:
        stop.set()
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    schedule = None
    if args.schedule is not None:
        schedule = ChangeSchedule(
            kind=args.schedule,
            after_measures=args.change_after,
            new_beat=args.new_beat,
            new_meter=args.new_meter,
            increment=args.increment,
        )
    config = SimulationConfig(
        beat=args.beat,
        meter=args.meter,
        sigma_err=args.sigma_err,
        steps=args.steps,
        schedule=schedule,
        rng_seed=args.seed,
    )
    script = generate(config)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_script(script, fh)
    else:
        write_script(script, sys.stdout)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    rows = run_experiment_1(reps=args.reps)
    print(format_latency_table(rows))
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row.as_dict(), sort_keys=True) + "\n")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    runners = {2: run_experiment_2, 3: run_experiment_3, 4: run_experiment_4}
    result = runners[args.experiment](reps=args.reps, base_seed=args.seed)
    print(result.table())
    if args.out is not None:
        dump_records(result.records(), args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = _tracker_config(args)
    try:
        asyncio.run(
            serve_forever(
                host=args.host,
                port=args.port,
                config=config,
                cadence=args.cadence,
            )
        )
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsetrack",
        description="Real-time beat, meter and measure tracking from note onsets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="live stdio session (or script replay)")
    _add_tracker_flags(p)
    p.add_argument(
        "--cadence",
        type=float,
        default=500.0,
        help="automatic analysis period, ms; 0 disables the ticker",
    )
    p.add_argument(
        "--script",
        default=None,
        help="recorded script to replay offline instead of reading stdin",
    )
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("simulate", help="emit a simulated performance script")
    p.add_argument("--beat", type=float, default=500.0, help="ms per beat")
    p.add_argument("--meter", type=int, default=4, choices=(3, 4))
    p.add_argument(
        "--sigma-err", type=float, default=0.0, help="timing jitter SD, ms"
    )
    p.add_argument("--steps", type=int, default=160, help="sixteenth steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--schedule",
        choices=("sudden_tempo", "sudden_meter", "tempo_ramp"),
        default=None,
        help="mid-performance change to apply",
    )
    p.add_argument(
        "--change-after",
        type=int,
        default=5,
        help="measures before the change takes effect",
    )
    p.add_argument("--new-beat", type=float, default=None, help="ms")
    p.add_argument("--new-meter", type=int, default=None, choices=(3, 4))
    p.add_argument(
        "--increment",
        type=float,
        default=None,
        help="signed ms added per sixteenth during a ramp",
    )
    p.add_argument("--out", default=None, help="script file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="analysis latency vs. note count")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--out", default=None, help="row records as JSON lines")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="steady-state and adaptation studies")
    p.add_argument("--experiment", type=int, required=True, choices=(2, 3, 4))
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="cell records as JSON lines")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="WebSocket endpoint for live clients")
    _add_tracker_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--port", type=int, default=8765, help="WebSocket listen port"
    )
    p.add_argument(
        "--cadence",
        type=float,
        default=500.0,
        help="automatic analysis period, ms; 0 disables the ticker",
    )
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ProtocolError, ValueError) as exc:
        print(f"pulsetrack: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
