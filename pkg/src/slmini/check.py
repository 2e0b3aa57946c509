"""Name resolution and channel-usage checking.

resolve() builds the function table and channel signatures; check_channels()
enforces endpoint rules:

  (a) sl_getp/sl_setp only inside thread functions, on declared parameters;
  (b) sl_setp only on shared parameters;
  (c) sl_seta only between sl_create and its terminator, sl_geta only after
      sl_sync (never after sl_detach);
  (d) argument lists match the target signature in count, order, direction,
      value class, and declared type text;
  (e) every channel of a sync-terminated create receives a source value
      unconditionally (an init expression, or sl_seta on the straight-line
      path of the construct body) before the sl_sync.

Feeding rules are straight-line: sl_seta under if/while does not count as
feeding and draws E_UNFED_CHANNEL.  A channel whose only feed is misplaced
(before the create, or after the terminator) reports the placement error
alone, not a cascading E_UNFED_CHANNEL.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import nodes as n
from .errors import (
    Diagnostic,
    E_BAD_CALL,
    E_DOUBLE_WRITE,
    E_DUP,
    E_FP_KEYWORD,
    E_GETA_AFTER_DETACH,
    E_GETA_BEFORE_SYNC,
    E_INDEX_OUTSIDE,
    E_PARAM_OUTSIDE,
    E_SETA_OUTSIDE,
    E_SETP_GLOBAL,
    E_SIG_MISMATCH,
    E_SYNTAX,
    E_TARGET_KIND,
    E_UNDEF,
    E_UNFED_CHANNEL,
    SourceSpan,
)

BUILTIN_ARITY = {
    "print_int": 1,
    "print_float": 1,
    "print_str": 1,
    "sl_default_placement": 0,
    "sl_placement_size": 1,
    "sl_first_processor_address": 1,
    "sl_local_processor_address": 0,
    "sl_placement": 2,
}


@dataclass
class ParamInfo:
    index: int
    name: str
    direction: str
    value_class: str
    type_tokens: tuple[str, ...]


@dataclass
class FunctionInfo:
    name: str
    kind: str  # "thread" | "c"
    is_static: bool
    params: list[ParamInfo] = field(default_factory=list)
    c_params: list[n.CParam] = field(default_factory=list)
    return_type: Optional[str] = None
    node: object = None
    has_def: bool = False
    index_var: Optional[str] = None

    @property
    def has_shared(self) -> bool:
        return any(p.direction == n.SHARED for p in self.params)

    def signature(self) -> list[tuple[str, str, tuple[str, ...]]]:
        return [(p.direction, p.value_class, p.type_tokens) for p in self.params]


@dataclass
class SymbolTable:
    functions: dict[str, FunctionInfo]


def channel_class(fp_keyword: bool, type_tokens: tuple[str, ...]) -> tuple[str, Optional[str]]:
    """Classify a channel declaration; returns (value class, error or None)."""
    is_pointer = type_tokens[-1] == "*"
    base = type_tokens[0]
    if is_pointer:
        if fp_keyword:
            return n.ARRAY_HANDLE, "array handles are integer scalars; use the non-fp channel keyword"
        return n.ARRAY_HANDLE, None
    if base == "float":
        if not fp_keyword:
            return n.FLOAT_SCALAR, "floating-point scalar channels need the fp channel keyword"
        return n.FLOAT_SCALAR, None
    if fp_keyword:
        return n.INT_SCALAR, "fp channel keywords carry float scalars only"
    return n.INT_SCALAR, None


def _param_infos(params: list[n.ChannelParam], diags: Optional[list[Diagnostic]] = None) -> list[ParamInfo]:
    infos = []
    seen = set()
    for i, p in enumerate(params):
        if p.name in seen and diags is not None:
            diags.append(Diagnostic("error", E_DUP, f"duplicate channel parameter {p.name!r}", p.span))
        seen.add(p.name)
        cls, problem = channel_class(p.fp_keyword, p.type_tokens)
        if problem and diags is not None:
            diags.append(Diagnostic("error", E_FP_KEYWORD, f"{p.name!r}: {problem}", p.span))
        infos.append(ParamInfo(i, p.name, p.direction, cls, p.type_tokens))
    return infos


def resolve(program: n.AstProgram) -> tuple[SymbolTable, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    functions: dict[str, FunctionInfo] = {}

    def err(code: str, message: str, span: SourceSpan) -> None:
        diags.append(Diagnostic("error", code, message, span))

    def build_params(params: list[n.ChannelParam]) -> list[ParamInfo]:
        return _param_infos(params, diags)

    for item in program.items:
        if isinstance(item, n.CFuncDef):
            if item.name in functions:
                err(E_DUP, f"duplicate definition of {item.name!r}", item.span)
                continue
            functions[item.name] = FunctionInfo(
                item.name,
                "c",
                False,
                c_params=item.params,
                return_type=item.return_type,
                node=item,
                has_def=True,
            )
        elif isinstance(item, (n.ThreadFuncDef, n.ThreadFuncDecl)):
            is_def = isinstance(item, n.ThreadFuncDef)
            params = build_params(item.params)
            prev = functions.get(item.name)
            if prev is None:
                functions[item.name] = FunctionInfo(
                    item.name, "thread", item.is_static, params=params, node=item, has_def=is_def
                )
                continue
            if prev.kind != "thread":
                err(E_DUP, f"{item.name!r} already defined as a plain C function", item.span)
                continue
            if prev.has_def and is_def:
                err(E_DUP, f"duplicate definition of thread function {item.name!r}", item.span)
                continue
            sig = [(p.direction, p.value_class, p.type_tokens) for p in params]
            if sig != prev.signature():
                err(
                    E_SIG_MISMATCH,
                    f"declaration of {item.name!r} does not match its other declaration",
                    item.span,
                )
            if is_def:
                prev.node = item
                prev.params = params
                prev.has_def = True
                prev.is_static = prev.is_static or item.is_static

    main = functions.get("main")
    if main is None or main.kind != "c":
        span = program.items[0].span if program.items else SourceSpan("<string>", 1, 1)
        err(E_UNDEF, "program has no C function 'main'", span)
    elif main.c_params:
        err(E_SYNTAX, "main must take no parameters", main.node.span)

    return SymbolTable(functions), diags


# ---------------------------------------------------------------------------
# Channel usage checking


_BEFORE = "before"
_BODY = "body"
_AFTER_SYNC = "after-sync"
_AFTER_DETACH = "after-detach"


class _BindEntry:
    __slots__ = ("name", "construct", "idx", "direction", "state")

    def __init__(self, name, construct, idx, direction):
        self.name = name
        self.construct = construct
        self.idx = idx
        self.direction = direction
        self.state = _BEFORE


class _Scope:
    """One compound block: local variable names plus channel bindings."""

    def __init__(self, parent: Optional["_Scope"]):
        self.parent = parent
        self.vars: set[str] = set()
        self.bindings: list[_BindEntry] = []

    def declare(self, name: str) -> bool:
        if name in self.vars:
            return False
        self.vars.add(name)
        return True

    def lookup_var(self, name: str) -> bool:
        scope = self
        while scope is not None:
            if name in scope.vars:
                return True
            scope = scope.parent
        return False

    def lookup_binding(self, name: str) -> Optional[_BindEntry]:
        # Latest already-reached binding wins; otherwise the nearest
        # forward reference (a construct later in some enclosing block).
        scope = self
        forward: Optional[_BindEntry] = None
        while scope is not None:
            for entry in reversed(scope.bindings):
                if entry.name != name:
                    continue
                if entry.state != _BEFORE:
                    return entry
            if forward is None:
                for entry in scope.bindings:
                    if entry.name == name:
                        forward = entry
                        break
            scope = scope.parent
        return forward


class _Checker:
    def __init__(self, symbols: SymbolTable):
        self.symbols = symbols
        self.diags: list[Diagnostic] = []
        self.func: Optional[FunctionInfo] = None
        self.in_thread = False
        self.conditional_depth = 0
        # Per-function feed bookkeeping, keyed by (id(construct), arg index).
        self.feeds: set[tuple[int, int]] = set()
        self.conditional_feeds: set[tuple[int, int]] = set()
        self.misplaced: set[tuple[int, int]] = set()
        self.sync_constructs: list[n.CreateConstruct] = []
        self.setp_counts: dict[str, int] = {}

    def err(self, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic("error", code, message, span))

    # -- driver --------------------------------------------------------------

    def check_program(self, program: n.AstProgram) -> list[Diagnostic]:
        for item in program.items:
            if isinstance(item, n.ThreadFuncDef):
                info = self.symbols.functions.get(item.name)
                if info is None or info.node is not item:
                    # Duplicate definition: still check this body against its
                    # own parameter list so diagnostics stay meaningful.
                    info = FunctionInfo(
                        item.name,
                        "thread",
                        item.is_static,
                        params=_param_infos(item.params),
                        node=item,
                        has_def=True,
                    )
                self._check_function(info, item.body, in_thread=True, c_params=[])
            elif isinstance(item, n.CFuncDef):
                info = self.symbols.functions.get(item.name)
                if info is None or info.node is not item:
                    info = FunctionInfo(
                        item.name,
                        "c",
                        False,
                        c_params=item.params,
                        return_type=item.return_type,
                        node=item,
                        has_def=True,
                    )
                self._check_function(info, item.body, in_thread=False, c_params=item.params)
        return self.diags

    def _check_function(self, info, body: n.Block, in_thread: bool, c_params) -> None:
        self.func = info
        self.in_thread = in_thread
        self.conditional_depth = 0
        self.feeds = set()
        self.conditional_feeds = set()
        self.misplaced = set()
        self.sync_constructs = []
        self.setp_counts = {}
        scope = _Scope(None)
        for p in c_params:
            if not scope.declare(p.name):
                self.err(E_DUP, f"duplicate parameter {p.name!r}", p.span)
        self._walk_block(body, scope, new_scope=False)

        for name, count in self.setp_counts.items():
            if count > 1:
                self.err(
                    E_DOUBLE_WRITE,
                    f"shared channel {name!r} is written more than once on the straight-line path",
                    info.node.span if info else body.span,
                )
        for construct in self.sync_constructs:
            cid = id(construct)
            for idx, arg in enumerate(construct.args):
                if arg.init is not None or (cid, idx) in self.feeds:
                    continue
                if (cid, idx) in self.misplaced:
                    continue  # the misplaced sl_seta already got its own diagnostic
                label = arg.name or f"#{idx}"
                if (cid, idx) in self.conditional_feeds:
                    self.err(
                        E_UNFED_CHANNEL,
                        f"channel {label!r} is only fed conditionally; feeding must be unconditional",
                        arg.span,
                    )
                else:
                    self.err(
                        E_UNFED_CHANNEL,
                        f"channel {label!r} receives no source value before sl_sync",
                        arg.span,
                    )

    # -- statements ------------------------------------------------------------

    def _walk_block(self, block: n.Block, scope: _Scope, new_scope: bool = True) -> None:
        inner = _Scope(scope) if new_scope else scope
        # Pre-register create-arg names so forward references resolve.
        for item in block.items:
            if isinstance(item, n.CreateConstruct):
                for idx, arg in enumerate(item.args):
                    if arg.name is not None:
                        inner.bindings.append(_BindEntry(arg.name, item, idx, arg.direction))
        for item in block.items:
            self._walk_stmt(item, inner)

    def _walk_stmt(self, stmt, scope: _Scope) -> None:
        if isinstance(stmt, n.Block):
            self._walk_block(stmt, scope)
        elif isinstance(stmt, n.Decl):
            for d in stmt.declarators:
                if d.init is not None and d.array_size is not None:
                    self.err(E_SYNTAX, "array initializer must be a braced list", d.span)
                if d.init_list is not None and d.array_size is None:
                    self.err(E_SYNTAX, "braced initializer needs an array declarator", d.span)
                if d.init_list is not None and d.array_size is not None and len(d.init_list) > d.array_size:
                    self.err(E_SYNTAX, f"too many initializers for {d.name!r}[{d.array_size}]", d.span)
                if d.init is not None:
                    self._walk_expr(d.init, scope)
                if d.init_list is not None:
                    for e in d.init_list:
                        self._walk_expr(e, scope)
                if not scope.declare(d.name):
                    self.err(E_DUP, f"redeclaration of {d.name!r}", d.span)
        elif isinstance(stmt, n.SlIndexDecl):
            if not self.in_thread:
                self.err(E_INDEX_OUTSIDE, "sl_index is only valid inside a thread function", stmt.span)
            elif self.func is not None and self.func.index_var is not None:
                self.err(E_DUP, "a thread function may declare sl_index at most once", stmt.span)
            elif self.func is not None:
                self.func.index_var = stmt.name
            if not scope.declare(stmt.name):
                self.err(E_DUP, f"redeclaration of {stmt.name!r}", stmt.span)
        elif isinstance(stmt, n.Assign):
            target = stmt.target
            if isinstance(target, n.Ident):
                if not scope.lookup_var(target.name):
                    self.err(E_UNDEF, f"assignment to undeclared variable {target.name!r}", target.span)
            else:
                if not scope.lookup_var(target.base):
                    self.err(E_UNDEF, f"undeclared array {target.base!r}", target.span)
                self._walk_expr(target.index, scope)
            self._walk_expr(stmt.value, scope)
        elif isinstance(stmt, n.ExprStmt):
            self._walk_expr(stmt.expr, scope)
        elif isinstance(stmt, n.If):
            self._walk_expr(stmt.cond, scope)
            self.conditional_depth += 1
            self._walk_stmt_scoped(stmt.then, scope)
            if stmt.orelse is not None:
                self._walk_stmt_scoped(stmt.orelse, scope)
            self.conditional_depth -= 1
        elif isinstance(stmt, n.While):
            self._walk_expr(stmt.cond, scope)
            self.conditional_depth += 1
            self._walk_stmt_scoped(stmt.body, scope)
            self.conditional_depth -= 1
        elif isinstance(stmt, n.Return):
            if stmt.value is not None:
                self._walk_expr(stmt.value, scope)
        elif isinstance(stmt, n.SetP):
            self._check_param_access(stmt.name, stmt.span, write=True)
            if self.conditional_depth == 0:
                self.setp_counts[stmt.name] = self.setp_counts.get(stmt.name, 0) + 1
            self._walk_expr(stmt.value, scope)
        elif isinstance(stmt, n.SetA):
            self._walk_expr(stmt.value, scope)
            entry = scope.lookup_binding(stmt.name)
            if entry is None:
                self.err(E_UNDEF, f"sl_seta on unknown channel {stmt.name!r}", stmt.span)
                return
            stmt.binding = n.ArgBinding(entry.construct, entry.idx, entry.direction)
            key = (id(entry.construct), entry.idx)
            if entry.state == _BODY:
                if self.conditional_depth == 0:
                    if key in self.feeds or entry.construct.args[entry.idx].init is not None:
                        self.err(
                            E_DOUBLE_WRITE,
                            f"channel {stmt.name!r} is fed more than once",
                            stmt.span,
                        )
                    self.feeds.add(key)
                else:
                    self.conditional_feeds.add(key)
            else:
                self.misplaced.add(key)
                where = "before its sl_create" if entry.state == _BEFORE else "after its terminator"
                self.err(
                    E_SETA_OUTSIDE,
                    f"sl_seta on {stmt.name!r} {where}; channels are fed between "
                    f"sl_create and its sl_sync/sl_detach",
                    stmt.span,
                )
        elif isinstance(stmt, n.CreateConstruct):
            self._walk_create(stmt, scope)
        else:
            raise TypeError(f"unknown statement {stmt!r}")

    def _walk_stmt_scoped(self, stmt, scope: _Scope) -> None:
        """A non-block statement in if/while position gets its own scope."""
        if isinstance(stmt, n.Block):
            self._walk_block(stmt, scope)
        else:
            self._walk_stmt(stmt, _Scope(scope))

    def _walk_create(self, construct: n.CreateConstruct, scope: _Scope) -> None:
        for e in (construct.placement, construct.start, construct.limit, construct.step, construct.window):
            if e is not None:
                self._walk_expr(e, scope)

        target = self.symbols.functions.get(construct.target)
        if target is None:
            self.err(E_UNDEF, f"create of undefined thread function {construct.target!r}", construct.span)
        elif target.kind == "thread" and not target.has_def:
            # Single-file programs: a forward declaration must be backed by a
            # definition somewhere in the same file to be runnable.
            self.err(
                E_UNDEF,
                f"thread function {construct.target!r} is declared but never defined",
                construct.span,
            )
            target = None
        elif target.kind != "thread":
            self.err(
                E_TARGET_KIND,
                f"{construct.target!r} is a plain C function and cannot be created as a family",
                construct.span,
            )
            target = None

        arg_sig = []
        for arg in construct.args:
            cls, problem = channel_class(arg.fp_keyword, arg.type_tokens)
            if problem:
                self.err(E_FP_KEYWORD, f"channel argument: {problem}", arg.span)
            arg_sig.append((arg.direction, cls, arg.type_tokens))
            if arg.init is not None:
                self._walk_expr(arg.init, scope)

        if target is not None and arg_sig != target.signature():
            self.err(
                E_SIG_MISMATCH,
                f"channel arguments do not match the signature of {construct.target!r} "
                f"(expected {_sig_text(target.signature())}, got {_sig_text(arg_sig)})",
                construct.span,
            )

        entries = [
            e for e in scope.bindings if e.construct is construct
        ]
        for e in entries:
            e.state = _BODY
        for item in construct.body_items:
            self._walk_stmt(item, scope)
        after = _AFTER_SYNC if construct.terminator == n.SYNC else _AFTER_DETACH
        for e in entries:
            e.state = after
        if construct.terminator == n.SYNC:
            self.sync_constructs.append(construct)

    # -- expressions ------------------------------------------------------------

    def _walk_expr(self, expr, scope: _Scope) -> None:
        if isinstance(expr, (n.IntLit, n.FloatLit)):
            return
        if isinstance(expr, n.StrLit):
            self.err(E_BAD_CALL, "string literals may only appear in print_str", expr.span)
            return
        if isinstance(expr, n.Ident):
            if not scope.lookup_var(expr.name):
                self.err(E_UNDEF, f"undeclared variable {expr.name!r}", expr.span)
            return
        if isinstance(expr, n.Index):
            if not scope.lookup_var(expr.base):
                self.err(E_UNDEF, f"undeclared array {expr.base!r}", expr.span)
            self._walk_expr(expr.index, scope)
            return
        if isinstance(expr, n.Unary):
            self._walk_expr(expr.operand, scope)
            return
        if isinstance(expr, n.Binary):
            self._walk_expr(expr.left, scope)
            self._walk_expr(expr.right, scope)
            return
        if isinstance(expr, n.Call):
            self._walk_call(expr, scope)
            return
        if isinstance(expr, n.GetP):
            self._check_param_access(expr.name, expr.span, write=False)
            return
        if isinstance(expr, n.GetA):
            entry = scope.lookup_binding(expr.name)
            if entry is None:
                self.err(E_UNDEF, f"sl_geta on unknown channel {expr.name!r}", expr.span)
                return
            expr.binding = n.ArgBinding(entry.construct, entry.idx, entry.direction)
            if entry.state in (_BEFORE, _BODY):
                self.err(
                    E_GETA_BEFORE_SYNC,
                    f"sl_geta on {expr.name!r} before sl_sync", expr.span,
                )
            elif entry.state == _AFTER_DETACH:
                self.err(
                    E_GETA_AFTER_DETACH,
                    f"sl_geta on {expr.name!r}: detached families have no readable endpoints",
                    expr.span,
                )
            return
        raise TypeError(f"unknown expression {expr!r}")

    def _walk_call(self, call: n.Call, scope: _Scope) -> None:
        arity = BUILTIN_ARITY.get(call.name)
        if arity is not None:
            if len(call.args) != arity:
                self.err(
                    E_BAD_CALL,
                    f"{call.name} takes {arity} argument(s), got {len(call.args)}",
                    call.span,
                )
            for i, a in enumerate(call.args):
                if call.name == "print_str" and i == 0:
                    if not isinstance(a, n.StrLit):
                        self.err(E_BAD_CALL, "print_str takes a string literal", call.span)
                    continue
                self._walk_expr(a, scope)
            return
        info = self.symbols.functions.get(call.name)
        if info is None:
            self.err(E_UNDEF, f"call to undefined function {call.name!r}", call.span)
        elif info.kind != "c":
            self.err(
                E_TARGET_KIND,
                f"{call.name!r} is a thread function; run it with sl_create",
                call.span,
            )
        elif len(call.args) != len(info.c_params):
            self.err(
                E_BAD_CALL,
                f"{call.name} takes {len(info.c_params)} argument(s), got {len(call.args)}",
                call.span,
            )
        for a in call.args:
            self._walk_expr(a, scope)

    def _check_param_access(self, name: str, span: SourceSpan, write: bool) -> None:
        op = "sl_setp" if write else "sl_getp"
        if not self.in_thread:
            self.err(E_PARAM_OUTSIDE, f"{op} is only valid inside a thread function", span)
            return
        param = None
        if self.func is not None:
            for p in self.func.params:
                if p.name == name:
                    param = p
                    break
        if param is None:
            self.err(E_PARAM_OUTSIDE, f"{op} on {name!r}, which is not a channel parameter", span)
            return
        if write and param.direction == n.GLOBAL:
            self.err(E_SETP_GLOBAL, f"sl_setp on global channel {name!r}; only shared channels are written", span)


def _sig_text(sig) -> str:
    return "(" + ", ".join(f"{d[:2]}:{''.join(t)}" for d, _cls, t in sig) + ")"


def check_channels(program: n.AstProgram, symbols: SymbolTable) -> list[Diagnostic]:
    return _Checker(symbols).check_program(program)


def check_program(program: n.AstProgram) -> tuple[SymbolTable, list[Diagnostic]]:
    """Run resolution and channel checks; returns symbols plus all diagnostics."""
    symbols, diags = resolve(program)
    diags = diags + check_channels(program, symbols)
    return symbols, diags
