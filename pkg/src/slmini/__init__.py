"""SL-mini: a C-like concurrency language compiled to a control-event IR and
executed on a simulated many-core machine with bulk thread-family creation,
dataflow channels, placement control, exclusive contexts, and automatic
serialization under resource exhaustion.
"""

from __future__ import annotations

from .check import check_channels, check_program, resolve, SymbolTable
from .errors import CompileError, Diagnostic, MachineError, SourceSpan
from .ir import IrProgram, ir_dump
from .lower import lower
from .machine import (
    Machine,
    MachineConfig,
    RunResult,
    STATUS_DATAFLOW,
    STATUS_DEADLOCK,
    STATUS_OK,
    STATUS_STEP_LIMIT,
    distribute,
    thread_count,
)
from .nodes import AstProgram
from .parser import parse_program, parse_source
from .placement import PlacementValue, ResolvedPlacement, encode as encode_placement
from .printer import print_ast
from .tokens import Token, split_arguments, tokenize
from .trace import TraceEvent, format_trace

__all__ = [
    "AstProgram",
    "CompileError",
    "Diagnostic",
    "IrProgram",
    "Machine",
    "MachineConfig",
    "MachineError",
    "PlacementValue",
    "ResolvedPlacement",
    "RunResult",
    "SourceSpan",
    "STATUS_DATAFLOW",
    "STATUS_DEADLOCK",
    "STATUS_OK",
    "STATUS_STEP_LIMIT",
    "SymbolTable",
    "Token",
    "TraceEvent",
    "check_channels",
    "check_program",
    "check_source",
    "compile_source",
    "distribute",
    "encode_placement",
    "format_trace",
    "ir_dump",
    "lower",
    "parse_program",
    "parse_source",
    "print_ast",
    "resolve",
    "run_source",
    "split_arguments",
    "thread_count",
    "tokenize",
]


def check_source(source: str, filename: str = "<string>") -> list[Diagnostic]:
    """All diagnostics for a source text (lexical, syntax, semantic)."""
    try:
        ast = parse_source(source, filename)
    except CompileError as e:
        return [e.diagnostic]
    _symbols, diags = check_program(ast)
    return diags


def compile_source(source: str, filename: str = "<string>") -> IrProgram:
    """Parse, check, and lower; raises CompileError carrying the first
    diagnostic if the program does not compile cleanly."""
    ast = parse_source(source, filename)
    symbols, diags = check_program(ast)
    if diags:
        first = diags[0]
        raise CompileError(first.code, first.message, first.span)
    return lower(ast, symbols)


def run_source(
    source: str,
    config: MachineConfig | None = None,
    filename: str = "<string>",
    dist_family: str | None = None,
) -> RunResult:
    """Compile and run a program on a fresh machine."""
    program = compile_source(source, filename)
    machine = Machine(program, config or MachineConfig(), dist_family=dist_family)
    return machine.run()
