"""Lowered program representation.

Ops are flat tuples with a leading opcode string; the machine dispatches on
it.  Concurrency opcodes mirror the simulated machine's control events
(allocate, configure, create, sync, release, put, get, read, write); the rest
is plumbing for the host-language subset.

Register operands are frame-slot names ("x", "%t3", "%f0").  The allocate
placement and the configure range/window operands are tagged pairs
("const", value) or ("reg", name) so that defaulted slots stay visible as
constants in dumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Opcode reference (tuple layouts):
#   ("const", dst, value)
#   ("mov", dst, src)
#   ("bin", op, dst, a, b)
#   ("un", op, dst, a)                      op: "-", "!", "bool"
#   ("jmp", target)
#   ("jz", src, target)
#   ("call", dst, fname, (args...))
#   ("ret", src_or_None)
#   ("arr", dst, value_class, size)
#   ("aload", dst, base, idx)
#   ("astore", base, idx, src)
#   ("print", kind, src)                    kind: "int" | "float"
#   ("prints", const_index)
#   ("read", dst, ch)
#   ("write", ch, src)
#   ("index", dst)
#   ("allocate", slot, placement, kind, mode)
#   ("configure", slot, target, start, limit, step, ws, terminator)
#   ("put", slot, ch, src)
#   ("create", slot)
#   ("sync", slot)
#   ("get", dst, slot, ch)
#   ("release", slot)
#   ("defplace", dst)
#   ("placesize", dst, src)
#   ("firstproc", dst, src)
#   ("localproc", dst)
#   ("makeplace", dst, lsrc, ssrc)

Op = tuple


@dataclass
class IrFunction:
    name: str
    kind: str  # "thread" | "c"
    param_names: list[str] = field(default_factory=list)  # C functions
    signature: list[tuple[str, str]] = field(default_factory=list)  # thread: (direction, class)
    ops: list[Op] = field(default_factory=list)


@dataclass
class IrProgram:
    functions: dict[str, IrFunction]
    entry: str = "main"
    constants: list[str] = field(default_factory=list)  # string pool


def _operand(v) -> str:
    tag, val = v
    return str(val) if tag == "const" else str(val)


def _fmt_op(op: Op, constants: list[str]) -> str:
    name = op[0]
    if name == "const":
        return f"CONST {op[1]}, {op[2]!r}"
    if name == "mov":
        return f"MOV {op[1]}, {op[2]}"
    if name == "bin":
        return f"BIN {op[1]} {op[2]}, {op[3]}, {op[4]}"
    if name == "un":
        return f"UN {op[1]} {op[2]}, {op[3]}"
    if name == "jmp":
        return f"JMP {op[1]}"
    if name == "jz":
        return f"JZ {op[1]}, {op[2]}"
    if name == "call":
        return f"CALL {op[1]}, {op[2]}({', '.join(op[3])})"
    if name == "ret":
        return "RET" if op[1] is None else f"RET {op[1]}"
    if name == "arr":
        return f"ARR {op[1]}, class={op[2]}, size={op[3]}"
    if name == "aload":
        return f"ALOAD {op[1]}, {op[2]}[{op[3]}]"
    if name == "astore":
        return f"ASTORE {op[1]}[{op[2]}], {op[3]}"
    if name == "print":
        return f"PRINT_{op[1].upper()} {op[2]}"
    if name == "prints":
        return f"PRINT_STR {constants[op[1]]!r}"
    if name == "read":
        return f"READ {op[1]}, ch={op[2]}"
    if name == "write":
        return f"WRITE ch={op[1]}, {op[2]}"
    if name == "index":
        return f"INDEX {op[1]}"
    if name == "allocate":
        return f"ALLOCATE placement={_operand(op[2])} kind={op[3]} mode={op[4]} fam={op[1]}"
    if name == "configure":
        rng = f"({_operand(op[3])},{_operand(op[4])},{_operand(op[5])})"
        return (
            f"CONFIGURE range={rng} ws={_operand(op[6])} fam={op[1]} "
            f"target={op[2]} term={op[7]}"
        )
    if name == "put":
        return f"PUT fam={op[1]} ch={op[2]}, {op[3]}"
    if name == "create":
        return f"CREATE fam={op[1]}"
    if name == "sync":
        return f"SYNC fam={op[1]}"
    if name == "get":
        return f"GET {op[1]}, fam={op[2]} ch={op[3]}"
    if name == "release":
        return f"RELEASE fam={op[1]}"
    if name == "defplace":
        return f"DEFPLACE {op[1]}"
    if name == "placesize":
        return f"PLACESIZE {op[1]}, {op[2]}"
    if name == "firstproc":
        return f"FIRSTPROC {op[1]}, {op[2]}"
    if name == "localproc":
        return f"LOCALPROC {op[1]}"
    if name == "makeplace":
        return f"MAKEPLACE {op[1]}, {op[2]}, {op[3]}"
    raise ValueError(f"unknown opcode {name!r}")


def ir_dump(program: IrProgram) -> str:
    """Deterministic, line-oriented text form of a lowered program."""
    lines = [f"entry {program.entry}"]
    if program.constants:
        lines.append("consts:")
        for i, c in enumerate(program.constants):
            lines.append(f"  {i}: {c!r}")
    for fn in program.functions.values():
        if fn.kind == "thread":
            sig = ",".join(f"{d[:2]}:{c}" for d, c in fn.signature)
            lines.append(f"function {fn.name} kind=thread sig=({sig})")
        else:
            lines.append(f"function {fn.name} kind=c params=({','.join(fn.param_names)})")
        for i, op in enumerate(fn.ops):
            lines.append(f"  {i}: {_fmt_op(op, program.constants)}")
    return "\n".join(lines) + "\n"
