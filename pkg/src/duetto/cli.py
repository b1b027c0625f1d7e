"""Command-line front: headless runs, replay, validation, variation files.

Exit codes are a stable contract: 0 success, 1 validation or divergence
failure, 2 I/O error.  All configuration comes from flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .melody import cover_motifs, generate_variation
from .scenario import (
    ScenarioError,
    load_melody_file,
    load_scenario,
    save_melody_file,
    validate_scenario,
)
from .session import SchemaMismatchError, TraceError, replay, run_session

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _IoFailure(f"{path} is not valid JSON: {exc}") from exc


class _IoFailure(Exception):
    pass


def cmd_validate(args: argparse.Namespace) -> int:
    raw = _read_json(args.scenario)
    violations = validate_scenario(raw)
    if violations:
        for v in violations:
            print(f"INVALID {args.scenario}: {v}")
        return EXIT_VALIDATION
    print(f"OK {args.scenario}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        raise _IoFailure(f"cannot read {args.scenario}: {exc}") from exc
    script = _read_json(args.script) if args.script else []
    if not isinstance(script, list):
        print("script file must contain a JSON list of events", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        trace = run_session(scenario, script, args.ticks, args.snapshot_every)
    except ValueError as exc:
        print(f"cannot run session: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        trace.save(args.out)
    except OSError as exc:
        raise _IoFailure(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(trace.snapshots)} snapshots over {args.ticks} ticks to {args.out}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        report = replay(args.trace, args.snapshot_every)
    except SchemaMismatchError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TraceError as exc:
        print(f"bad trace: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        raise _IoFailure(f"cannot read {args.trace}: {exc}") from exc
    print(report.status if report.identical else f"{report.status}: {report.detail}")
    return EXIT_OK if report.identical else EXIT_VALIDATION


def cmd_serve(args: argparse.Namespace) -> int:
    from .scenario import parse_scenario, scenario_with_seed
    from .server import SessionServer

    raw = _read_json(args.scenario)
    try:
        if args.seed is not None:
            scenario = scenario_with_seed(raw, args.seed)
        else:
            scenario = parse_scenario(raw)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    server = SessionServer(
        scenario,
        port=args.port,
        snapshot_every=args.snapshot_every,
        tick_rate=args.tick_rate,
        max_ticks=args.max_ticks,
        trace_path=args.trace,
    )
    server.start()
    print(f"listening on port {server.port} (ctrl-c to stop)", flush=True)
    try:
        while not server.wait(timeout=0.2):
            pass
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


def cmd_gen_variations(args: argparse.Namespace) -> int:
    try:
        melody = load_melody_file(args.melody)
    except OSError as exc:
        raise _IoFailure(f"cannot read {args.melody}: {exc}") from exc
    except ValueError as exc:
        print(f"invalid melody file: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    n = len(melody.notes)
    if n == 0:
        print("melody has no notes", file=sys.stderr)
        return EXIT_VALIDATION
    min_len = min(args.min_len, n)
    max_len = min(args.max_len, n)
    motifs = cover_motifs(melody, min_len, max_len)
    recurring = sum(1 for m in motifs if m.length > min_len)
    print(
        f"cover: {len(motifs)} motifs over {n} notes "
        f"(lengths {[m.length for m in motifs]}, {recurring} recurring spans)"
    )
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IoFailure(f"cannot create {out_dir}: {exc}") from exc
    stem = Path(args.melody).stem
    for i in range(args.count):
        variation = generate_variation(melody, motifs, args.seed + i)
        out_path = out_dir / f"{stem}_var{i:02d}.json"
        try:
            save_melody_file(variation.melody, out_path)
        except OSError as exc:
            raise _IoFailure(f"cannot write {out_path}: {exc}") from exc
        print(f"wrote {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duetto",
        description="Deterministic interactive-opera engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check every load-time invariant of a scenario")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="headless session run, writing a trace file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--script", default=None, help="JSON list of user events")
    p.add_argument("--ticks", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="re-run a trace and verify it byte for byte")
    p.add_argument("--trace", required=True)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="live session over line-delimited JSON TCP")
    p.add_argument("--scenario", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.add_argument("--tick-rate", type=float, default=60.0)
    p.add_argument("--max-ticks", type=int, default=None)
    p.add_argument("--trace", default=None, help="write the session trace here on stop")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen-variations", help="write motif-shuffled melody variations")
    p.add_argument("--melody", required=True, help="melody JSON or type-0 MIDI file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--max-len", type=int, default=4)
    p.set_defaults(func=cmd_gen_variations)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _IoFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
