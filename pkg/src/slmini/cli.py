"""Command-line driver.

    slmini check FILE            report diagnostics; exit 0 iff none
    slmini ir FILE               dump the lowered program
    slmini run FILE [options]    execute; program output on stdout
    slmini dist FILE --family F  show how F's threads distribute over cores

Run exit codes: 0 ok, 1 compile or I/O error, 2 runtime dataflow error,
3 deadlock, 4 step limit.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import check_source, compile_source
from .errors import CompileError
from .ir import ir_dump
from .machine import Machine, MachineConfig
from .trace import format_trace

CONFIG_FIELDS = {
    "cores": "num_cores",
    "hw_threads": "hw_threads_per_core",
    "family_entries": "family_entries_per_core",
    "seed": "scheduler_seed",
    "max_steps": "max_steps",
}


def _add_machine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cores", type=int, default=None, help="number of cores (default 4)")
    p.add_argument("--hw-threads", type=int, default=None, help="hardware thread slots per core (default 16)")
    p.add_argument("--family-entries", type=int, default=None, help="family entries per core (default 8)")
    p.add_argument("--seed", type=int, default=None, help="scheduler seed, unsigned 64-bit (default 1)")
    p.add_argument("--max-steps", type=int, default=None, help="step limit (default 10^7)")
    p.add_argument("--config", metavar="PATH", default=None, help="JSON file with the same field names as the flags")


def _build_config(args) -> MachineConfig:
    values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            raw = json.load(f)
        for key, value in raw.items():
            field = CONFIG_FIELDS.get(key)
            if field is None:
                raise SystemExit(f"slmini: unknown machine config field {key!r}")
            values[field] = value
    for flag, field in CONFIG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[field] = v
    if getattr(args, "serialize", False):
        values["serialize_all"] = True
    if getattr(args, "forward_unwritten", False):
        values["forward_unwritten"] = True
    return MachineConfig(**values)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _compile(path: str):
    source = _read(path)
    return compile_source(source, path)


def cmd_check(args) -> int:
    try:
        diags = check_source(_read(args.file), args.file)
    except OSError as e:
        print(f"slmini: {e}", file=sys.stderr)
        return 1
    for d in diags:
        print(d, file=sys.stderr)
    return 1 if diags else 0


def cmd_ir(args) -> int:
    try:
        program = _compile(args.file)
    except OSError as e:
        print(f"slmini: {e}", file=sys.stderr)
        return 1
    except CompileError as e:
        print(e.diagnostic, file=sys.stderr)
        return 1
    text = ir_dump(program)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _emit_trace(args, result) -> None:
    if args.trace == "none":
        return
    text = format_trace(result.trace, args.trace)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stderr.write(text)


def cmd_run(args) -> int:
    try:
        program = _compile(args.file)
        config = _build_config(args)
    except OSError as e:
        print(f"slmini: {e}", file=sys.stderr)
        return 1
    except CompileError as e:
        print(e.diagnostic, file=sys.stderr)
        return 1
    result = Machine(program, config).run()
    sys.stdout.write(result.output)
    sys.stdout.flush()
    _emit_trace(args, result)
    if result.error is not None:
        print(f"slmini: runtime error: {result.error}", file=sys.stderr)
    if result.deadlock_report is not None:
        print(f"slmini: {result.deadlock_report}", file=sys.stderr)
    if result.status == "step-limit":
        print(f"slmini: step limit of {config.max_steps} exceeded", file=sys.stderr)
    return result.exit_code


def cmd_dist(args) -> int:
    try:
        program = _compile(args.file)
        config = _build_config(args)
    except OSError as e:
        print(f"slmini: {e}", file=sys.stderr)
        return 1
    except CompileError as e:
        print(e.diagnostic, file=sys.stderr)
        return 1
    result = Machine(program, config, dist_family=args.family).run()
    if result.error is not None:
        print(f"slmini: runtime error: {result.error}", file=sys.stderr)
        return result.exit_code
    if result.deadlock_report is not None:
        print(f"slmini: {result.deadlock_report}", file=sys.stderr)
        return result.exit_code
    if not result.dist_tables:
        print(f"slmini: no family running {args.family!r} was created", file=sys.stderr)
        return 1
    per_core: dict[int, list[str]] = {}
    for _fid, table in result.dist_tables:
        for cid, (lo, hi, step) in table.items():
            text = f"[{lo},{hi})" if step == 1 else f"[{lo},{hi}) step {step}"
            per_core.setdefault(cid, []).append(text)
    for cid in sorted(per_core):
        print(f"core {cid}: {' '.join(per_core[cid])}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slmini", description="SL-mini compiler and machine simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="compile checks only")
    p_check.add_argument("file")
    p_check.set_defaults(fn=cmd_check)

    p_ir = sub.add_parser("ir", help="dump the lowered program")
    p_ir.add_argument("file")
    p_ir.add_argument("-o", "--output", default=None)
    p_ir.set_defaults(fn=cmd_ir)

    p_run = sub.add_parser("run", help="execute a program")
    p_run.add_argument("file")
    _add_machine_flags(p_run)
    p_run.add_argument("--serialize", action="store_true", help="serialize every family in its creator")
    p_run.add_argument("--forward-unwritten", action="store_true",
                       help="forward instead of erroring when a thread skips its shared output")
    p_run.add_argument("--trace", choices=("none", "text", "json"), default="none")
    p_run.add_argument("--trace-out", metavar="PATH", default=None,
                       help="write the trace here instead of stderr")
    p_run.set_defaults(fn=cmd_run)

    p_dist = sub.add_parser("dist", help="show a family's thread distribution without running its bodies")
    p_dist.add_argument("file")
    p_dist.add_argument("--family", required=True, help="thread function name to select create constructs")
    _add_machine_flags(p_dist)
    p_dist.set_defaults(fn=cmd_dist)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
