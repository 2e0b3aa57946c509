"""AST-to-IR lowering.

Each create construct lowers to allocate / configure / put... / create, with
the construct's body statements in between: all creator-side feeding happens
before the bulk creation fires at the terminator site.  sl_sync adds a sync
and an explicit release; sl_detach adds neither (the machine releases a
detached family's context when its last thread ends).

Absent create slots are baked in as constants: range (0, 1, 1), window size
0, placement 0 (inherit).  Locals are renamed per lexical scope so shadowed
names get distinct frame slots.
"""

from __future__ import annotations

from typing import Optional

from . import nodes as n
from .check import FunctionInfo, SymbolTable
from .ir import IrFunction, IrProgram

_DEFAULTS = {"start": ("const", 0), "limit": ("const", 1), "step": ("const", 1), "ws": ("const", 0)}


class _FnLowering:
    def __init__(self, info: FunctionInfo, symbols: SymbolTable, constants: list[str]):
        self.info = info
        self.symbols = symbols
        self.constants = constants
        self.ops: list[tuple] = []
        self.ntmp = 0
        self.nfam = 0
        self.nlabel = 0
        self.scopes: list[dict[str, str]] = [{}]
        self.name_counts: dict[str, int] = {}
        self.fam_slots: dict[int, str] = {}
        self.param_index = {p.name: p.index for p in info.params}

    # -- small helpers ---------------------------------------------------------

    def emit(self, *op) -> None:
        self.ops.append(tuple(op))

    def tmp(self) -> str:
        self.ntmp += 1
        return f"%t{self.ntmp}"

    def label(self) -> int:
        self.nlabel += 1
        return self.nlabel

    def place_label(self, label: int) -> None:
        self.emit("label", label)

    def declare(self, name: str) -> str:
        count = self.name_counts.get(name, 0)
        self.name_counts[name] = count + 1
        reg = name if count == 0 else f"{name}.{count}"
        self.scopes[-1][name] = reg
        return reg

    def lookup(self, name: str) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise AssertionError(f"unresolved variable {name!r} (checker should have caught this)")

    def pool(self, text: str) -> int:
        try:
            return self.constants.index(text)
        except ValueError:
            self.constants.append(text)
            return len(self.constants) - 1

    # -- expressions -------------------------------------------------------------

    def expr(self, e) -> str:
        if isinstance(e, n.IntLit):
            t = self.tmp()
            self.emit("const", t, e.value)
            return t
        if isinstance(e, n.FloatLit):
            t = self.tmp()
            self.emit("const", t, e.value)
            return t
        if isinstance(e, n.Ident):
            return self.lookup(e.name)
        if isinstance(e, n.Index):
            base = self.lookup(e.base)
            idx = self.expr(e.index)
            t = self.tmp()
            self.emit("aload", t, base, idx)
            return t
        if isinstance(e, n.Unary):
            src = self.expr(e.operand)
            t = self.tmp()
            self.emit("un", e.op, t, src)
            return t
        if isinstance(e, n.Binary):
            if e.op in ("&&", "||"):
                return self._short_circuit(e)
            a = self.expr(e.left)
            b = self.expr(e.right)
            t = self.tmp()
            self.emit("bin", e.op, t, a, b)
            return t
        if isinstance(e, n.GetP):
            t = self.tmp()
            self.emit("read", t, self.param_index[e.name])
            return t
        if isinstance(e, n.GetA):
            binding = e.binding
            slot = self.fam_slots[id(binding.construct)]
            t = self.tmp()
            self.emit("get", t, slot, binding.arg_index)
            return t
        if isinstance(e, n.Call):
            return self._call(e)
        if isinstance(e, n.StrLit):
            raise AssertionError("string literal outside print_str survived checking")
        raise TypeError(f"unknown expression {e!r}")

    def _short_circuit(self, e: n.Binary) -> str:
        t = self.tmp()
        l_skip = self.label()
        l_end = self.label()
        a = self.expr(e.left)
        self.emit("jz", a, l_skip)
        if e.op == "&&":
            b = self.expr(e.right)
            self.emit("un", "bool", t, b)
            self.emit("jmp", l_end)
            self.place_label(l_skip)
            self.emit("const", t, 0)
        else:
            self.emit("const", t, 1)
            self.emit("jmp", l_end)
            self.place_label(l_skip)
            b = self.expr(e.right)
            self.emit("un", "bool", t, b)
        self.place_label(l_end)
        return t

    def _call(self, e: n.Call) -> str:
        t = self.tmp()
        if e.name == "print_int" or e.name == "print_float":
            src = self.expr(e.args[0])
            self.emit("print", e.name.split("_")[1], src)
            self.emit("const", t, 0)
            return t
        if e.name == "print_str":
            arg = e.args[0]
            assert isinstance(arg, n.StrLit)
            self.emit("prints", self.pool(arg.value))
            self.emit("const", t, 0)
            return t
        if e.name == "sl_default_placement":
            self.emit("defplace", t)
            return t
        if e.name == "sl_placement_size":
            self.emit("placesize", t, self.expr(e.args[0]))
            return t
        if e.name == "sl_first_processor_address":
            self.emit("firstproc", t, self.expr(e.args[0]))
            return t
        if e.name == "sl_local_processor_address":
            self.emit("localproc", t)
            return t
        if e.name == "sl_placement":
            l = self.expr(e.args[0])
            s = self.expr(e.args[1])
            self.emit("makeplace", t, l, s)
            return t
        args = tuple(self.expr(a) for a in e.args)
        self.emit("call", t, e.name, args)
        return t

    # -- statements ----------------------------------------------------------------

    def block(self, block: n.Block) -> None:
        self.scopes.append({})
        for item in block.items:
            self.stmt(item)
        self.scopes.pop()

    def _scoped_stmt(self, stmt) -> None:
        if isinstance(stmt, n.Block):
            self.block(stmt)
        else:
            self.scopes.append({})
            self.stmt(stmt)
            self.scopes.pop()

    def stmt(self, stmt) -> None:
        if isinstance(stmt, n.Block):
            self.block(stmt)
        elif isinstance(stmt, n.Decl):
            for d in stmt.declarators:
                self._declarator(stmt.base_type, d)
        elif isinstance(stmt, n.SlIndexDecl):
            reg = self.declare(stmt.name)
            self.emit("index", reg)
        elif isinstance(stmt, n.Assign):
            if isinstance(stmt.target, n.Ident):
                src = self.expr(stmt.value)
                self.emit("mov", self.lookup(stmt.target.name), src)
            else:
                base = self.lookup(stmt.target.base)
                idx = self.expr(stmt.target.index)
                src = self.expr(stmt.value)
                self.emit("astore", base, idx, src)
        elif isinstance(stmt, n.ExprStmt):
            self.expr(stmt.expr)
        elif isinstance(stmt, n.If):
            cond = self.expr(stmt.cond)
            l_else = self.label()
            l_end = self.label()
            self.emit("jz", cond, l_else)
            self._scoped_stmt(stmt.then)
            if stmt.orelse is not None:
                self.emit("jmp", l_end)
                self.place_label(l_else)
                self._scoped_stmt(stmt.orelse)
                self.place_label(l_end)
            else:
                self.place_label(l_else)
        elif isinstance(stmt, n.While):
            l_top = self.label()
            l_end = self.label()
            self.place_label(l_top)
            cond = self.expr(stmt.cond)
            self.emit("jz", cond, l_end)
            self._scoped_stmt(stmt.body)
            self.emit("jmp", l_top)
            self.place_label(l_end)
        elif isinstance(stmt, n.Return):
            src = self.expr(stmt.value) if stmt.value is not None else None
            self.emit("ret", src)
        elif isinstance(stmt, n.SetP):
            src = self.expr(stmt.value)
            self.emit("write", self.param_index[stmt.name], src)
        elif isinstance(stmt, n.SetA):
            binding = stmt.binding
            slot = self.fam_slots[id(binding.construct)]
            src = self.expr(stmt.value)
            self.emit("put", slot, binding.arg_index, src)
        elif isinstance(stmt, n.CreateConstruct):
            self._create(stmt)
        else:
            raise TypeError(f"unknown statement {stmt!r}")

    def _declarator(self, base_type: str, d: n.Declarator) -> None:
        if d.array_size is not None:
            reg = self.declare(d.name)
            cls = n.FLOAT_SCALAR if base_type == "float" else n.INT_SCALAR
            self.emit("arr", reg, cls, d.array_size)
            for i, e in enumerate(d.init_list or []):
                src = self.expr(e)
                idx = self.tmp()
                self.emit("const", idx, i)
                self.emit("astore", reg, idx, src)
            return
        if d.init is not None:
            src = self.expr(d.init)
            reg = self.declare(d.name)
            self.emit("mov", reg, src)
        else:
            reg = self.declare(d.name)
            zero = 0.0 if (base_type == "float" and not d.is_pointer) else 0
            self.emit("const", reg, zero)

    def _create(self, construct: n.CreateConstruct) -> None:
        slot = f"%f{self.nfam}"
        self.nfam += 1
        self.fam_slots[id(construct)] = slot

        placement = ("const", 0)
        if construct.placement is not None:
            placement = ("reg", self.expr(construct.placement))
        kind = "regular"
        mode = "serialize"
        if construct.specifier == "sl__exclusive":
            kind = "exclusive"
            mode = "wait"
        elif construct.specifier == "sl__forcewait":
            mode = "wait"
        elif construct.specifier == "sl__forceseq":
            mode = "forceseq"

        def operand(e, default):
            if e is None:
                return _DEFAULTS[default]
            return ("reg", self.expr(e))

        start = operand(construct.start, "start")
        limit = operand(construct.limit, "limit")
        step = operand(construct.step, "step")
        ws = operand(construct.window, "ws")

        self.emit("allocate", slot, placement, kind, mode)
        self.emit("configure", slot, construct.target, start, limit, step, ws, construct.terminator)
        for idx, arg in enumerate(construct.args):
            if arg.init is not None:
                src = self.expr(arg.init)
                self.emit("put", slot, idx, src)
        for item in construct.body_items:
            self.stmt(item)
        self.emit("create", slot)
        if construct.terminator == n.SYNC:
            self.emit("sync", slot)
            self.emit("release", slot)

    # -- finish --------------------------------------------------------------------

    def finish(self) -> list[tuple]:
        self.emit("ret", None)
        positions: dict[int, int] = {}
        body: list[tuple] = []
        for op in self.ops:
            if op[0] == "label":
                positions[op[1]] = len(body)
            else:
                body.append(op)
        out: list[tuple] = []
        for op in body:
            if op[0] == "jmp":
                out.append(("jmp", positions[op[1]]))
            elif op[0] == "jz":
                out.append(("jz", op[1], positions[op[2]]))
            else:
                out.append(op)
        return out


def lower(program: n.AstProgram, symbols: SymbolTable) -> IrProgram:
    """Lower a resolved, checked program.  Asserts on internal inconsistency."""
    constants: list[str] = []
    functions: dict[str, IrFunction] = {}
    for item in program.items:
        if isinstance(item, n.ThreadFuncDef):
            info = symbols.functions[item.name]
            fl = _FnLowering(info, symbols, constants)
            fl.block(item.body)
            functions[item.name] = IrFunction(
                item.name,
                "thread",
                signature=[(p.direction, p.value_class) for p in info.params],
                ops=fl.finish(),
            )
        elif isinstance(item, n.CFuncDef):
            info = symbols.functions[item.name]
            fl = _FnLowering(info, symbols, constants)
            for p in item.params:
                fl.declare(p.name)
            fl.block(item.body)
            functions[item.name] = IrFunction(
                item.name,
                "c",
                param_names=[p.name for p in item.params],
                ops=fl.finish(),
            )
    return IrProgram(functions, "main", constants)
