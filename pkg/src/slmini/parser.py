"""Recursive-descent parser for SL-mini.

The SL constructs follow a uniform shape (a construct keyword, an opening
parenthesis, comma-separated slots with balanced inner parentheses, a closing
parenthesis), so their headers are carved out with split_arguments and each
slot is parsed as an isolated expression.  The surrounding C subset is parsed
with ordinary recursive descent.

Create constructs accept up to the canonical seven pre-target slots
(reserved, placement, start, limit, step, window size, specifier); shorter
forms are right-padded with absent slots, filled slots counting left to right
in canonical order.  A bare specifier keyword may stand in the last non-empty
slot.
"""

from __future__ import annotations

from .errors import CompileError, E_SYNTAX, SourceSpan
from .nodes import (
    ArgBinding,
    Assign,
    AstProgram,
    Binary,
    Block,
    Call,
    CFuncDef,
    ChannelArg,
    ChannelParam,
    CParam,
    CreateConstruct,
    Decl,
    Declarator,
    DETACH,
    Expr,
    ExprStmt,
    FloatLit,
    GetA,
    GetP,
    GLOBAL,
    Ident,
    If,
    Index,
    IntLit,
    Return,
    SetA,
    SetP,
    SHARED,
    SlIndexDecl,
    Stmt,
    StrLit,
    SYNC,
    ThreadFuncDecl,
    ThreadFuncDef,
    Unary,
    While,
)
from .tokens import (
    ARG_KEYWORDS,
    FLOAT,
    IDENT,
    INT,
    KEYWORD,
    PARAM_KEYWORDS,
    PUNCT,
    SPECIFIER_KEYWORDS,
    STRING,
    Token,
    split_arguments,
    tokenize,
)

TYPE_NAMES = ("int", "float", "sl_place_t")
RETURN_TYPES = ("int", "float", "void", "sl_place_t")

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "0": "\0"}


def _unescape(raw: str, span: SourceSpan) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            i += 1
            esc = body[i] if i < len(body) else ""
            if esc not in _ESCAPES:
                raise CompileError(E_SYNTAX, f"unknown string escape \\{esc}", span)
            out.append(_ESCAPES[esc])
        else:
            out.append(c)
        i += 1
    return "".join(out)


class Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.toks = tokens
        self.pos = 0
        self.filename = filename
        last = tokens[-1].span if tokens else SourceSpan(filename, 1, 1)
        self._eof = Token(PUNCT, "<eof>", SourceSpan(filename, last.line, last.column + 1))

    # -- cursor helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else self._eof

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def error(self, message: str, span: SourceSpan | None = None) -> CompileError:
        return CompileError(E_SYNTAX, message, span or self.peek().span)

    def expect(self, text: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.text != text:
            raise self.error(f"expected {what or text!r}, found {tok.text!r}")
        return self.next()

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != IDENT:
            raise self.error(f"expected {what}, found {tok.text!r}")
        return self.next()

    def split_parens(self) -> list[list[Token]]:
        open_tok = self.expect("(")
        slices, consumed = split_arguments(self.toks[self.pos :], open_tok.span)
        self.pos += consumed
        return slices

    # -- top level ----------------------------------------------------------

    def parse_program(self) -> AstProgram:
        start = self.peek().span
        items = []
        while not self.at_end():
            items.append(self.parse_top_level())
        return AstProgram(items, start)

    def parse_top_level(self):
        tok = self.peek()
        if tok.is_kw("sl_def"):
            return self.parse_thread_def()
        if tok.is_kw("sl_decl"):
            return self.parse_thread_decl()
        if tok.kind == KEYWORD and tok.text in RETURN_TYPES:
            return self.parse_c_function()
        raise self.error(f"expected a function definition, found {tok.text!r}")

    def _parse_def_header(self, slices: list[list[Token]], allow_args: bool):
        name_slice = slices[0]
        if len(name_slice) != 1 or name_slice[0].kind != IDENT:
            raise self.error("expected thread function name", self._slice_span(name_slice))
        name = name_slice[0].text
        is_static = False
        params: list[ChannelParam] = []
        rest = slices[1:]
        if rest:
            spec = rest[0]
            if len(spec) == 1 and spec[0].is_kw("sl__static"):
                is_static = True
            elif spec:
                raise self.error(
                    f"expected sl__static or empty specifier slot", spec[0].span
                )
            for sl in rest[1:]:
                params.append(self._parse_channel_param(sl, allow_args))
        return name, is_static, params

    def _slice_span(self, sl: list[Token]) -> SourceSpan:
        return sl[0].span if sl else self.peek(-1).span if self.pos else self._eof.span

    def _parse_type_tokens(self, toks: list[Token], where: SourceSpan) -> tuple[str, ...]:
        if not toks or toks[0].text not in TYPE_NAMES:
            raise self.error(
                "channel type must be int, float, sl_place_t, or a pointer to one",
                toks[0].span if toks else where,
            )
        if len(toks) == 1:
            return (toks[0].text,)
        if len(toks) == 2 and toks[1].text == "*":
            return (toks[0].text, "*")
        raise self.error("unsupported channel type", toks[0].span)

    def _parse_channel_param(self, sl: list[Token], allow_args: bool) -> ChannelParam:
        if not sl:
            raise self.error("empty channel parameter slot", self._eof.span)
        kw = sl[0]
        ok = kw.kind == KEYWORD and (
            kw.text in PARAM_KEYWORDS or (allow_args and kw.text in ARG_KEYWORDS)
        )
        if not ok:
            raise self.error(f"expected channel parameter declaration, found {kw.text!r}", kw.span)
        sub = Parser(sl[1:], self.filename)
        inner = sub.split_parens()
        if not sub.at_end():
            raise self.error("unexpected tokens after channel parameter", sub.peek().span)
        if len(inner) != 2:
            raise self.error(
                "channel parameter needs exactly a type and a name", kw.span
            )
        type_tokens = self._parse_type_tokens(inner[0], kw.span)
        name_slice = inner[1]
        if len(name_slice) != 1 or name_slice[0].kind != IDENT:
            raise self.error("expected channel endpoint name", self._slice_span(name_slice) if name_slice else kw.span)
        fp = kw.text in ("sl_glfparm", "sl_shfparm", "sl_glfarg", "sl_shfarg")
        direction = GLOBAL if kw.text in ("sl_glparm", "sl_glfparm", "sl_glarg", "sl_glfarg") else SHARED
        return ChannelParam(direction, fp, type_tokens, name_slice[0].text, kw.span)

    def parse_thread_def(self) -> ThreadFuncDef:
        kw = self.next()
        slices = self.split_parens()
        name, is_static, params = self._parse_def_header(slices, allow_args=False)
        body = self.parse_compound(in_thread=True)
        if not self.peek().is_kw("sl_enddef"):
            raise self.error(
                f"missing sl_enddef after body of thread function {name!r}", self.peek().span
            )
        self.next()
        return ThreadFuncDef(name, is_static, params, body, kw.span)

    def parse_thread_decl(self) -> ThreadFuncDecl:
        kw = self.next()
        slices = self.split_parens()
        name, is_static, params = self._parse_def_header(slices, allow_args=True)
        self.expect(";")
        return ThreadFuncDecl(name, is_static, params, kw.span)

    def parse_c_function(self) -> CFuncDef:
        rtok = self.next()
        name = self.expect_ident("function name")
        self.expect("(")
        params: list[CParam] = []
        if self.peek().is_kw("void") and self.peek(1).text == ")":
            self.next()
        elif self.peek().text != ")":
            while True:
                ptok = self.peek()
                if not (ptok.kind == KEYWORD and ptok.text in TYPE_NAMES):
                    raise self.error(f"expected parameter type, found {ptok.text!r}")
                self.next()
                is_ptr = False
                if self.peek().text == "*":
                    self.next()
                    is_ptr = True
                pname = self.expect_ident("parameter name")
                params.append(CParam(ptok.text, is_ptr, pname.text, ptok.span))
                if self.peek().text == ",":
                    self.next()
                    continue
                break
        self.expect(")")
        body = self.parse_compound(in_thread=False)
        return CFuncDef(rtok.text, name.text, params, body, rtok.span)

    # -- statements ----------------------------------------------------------

    def parse_compound(self, in_thread: bool) -> Block:
        open_tok = self.expect("{")
        items: list[Stmt] = []
        # Stack of (partial create construct, items list it will be appended to).
        open_creates: list[tuple[CreateConstruct, list[Stmt]]] = []
        current = items
        while True:
            tok = self.peek()
            if tok.text == "<eof>":
                raise self.error("unexpected end of file inside block", open_tok.span)
            if tok.text == "}":
                if open_creates:
                    c = open_creates[-1][0]
                    raise self.error(
                        "create construct is missing its sl_sync() or sl_detach()", c.span
                    )
                self.next()
                return Block(items, open_tok.span)
            if tok.is_kw("sl_create"):
                construct = self.parse_create_header()
                open_creates.append((construct, current))
                current = construct.body_items
                continue
            if tok.is_kw("sl_sync") or tok.is_kw("sl_detach"):
                term = SYNC if tok.text == "sl_sync" else DETACH
                self.next()
                self.expect("(")
                self.expect(")")
                self.expect(";")
                if not open_creates:
                    raise self.error(
                        f"{tok.text}() without a matching sl_create in this block", tok.span
                    )
                construct, outer = open_creates.pop()
                construct.terminator = term
                outer.append(construct)
                current = outer
                continue
            current.append(self.parse_statement(in_thread))

    def parse_statement(self, in_thread: bool) -> Stmt:
        tok = self.peek()
        if tok.text == "{":
            return self.parse_compound(in_thread)
        if tok.is_kw("sl_create"):
            raise self.error(
                "create construct must appear within a compound statement", tok.span
            )
        if tok.is_kw("sl_sync") or tok.is_kw("sl_detach"):
            raise self.error(
                f"{tok.text}() must appear in the block of its sl_create", tok.span
            )
        if tok.kind == KEYWORD and tok.text in TYPE_NAMES:
            return self.parse_decl()
        if tok.is_kw("sl_index"):
            self.next()
            self.expect("(")
            name = self.expect_ident("index variable name")
            self.expect(")")
            self.expect(";")
            return SlIndexDecl(name.text, tok.span)
        if tok.is_kw("sl_setp") or tok.is_kw("sl_seta"):
            self.next()
            slices = self.split_parens()
            if len(slices) != 2:
                raise self.error(f"{tok.text} takes a channel name and a value", tok.span)
            name_slice = slices[0]
            if len(name_slice) != 1 or name_slice[0].kind != IDENT:
                raise self.error(
                    f"expected channel name in {tok.text}", self._slice_span(name_slice) if name_slice else tok.span
                )
            value = self.parse_expr_slice(slices[1], tok.span)
            self.expect(";")
            cls = SetP if tok.text == "sl_setp" else SetA
            return cls(name_slice[0].text, value, tok.span)
        if tok.is_kw("if"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_statement(in_thread)
            orelse = None
            if self.peek().is_kw("else"):
                self.next()
                orelse = self.parse_statement(in_thread)
            return If(cond, then, orelse, tok.span)
        if tok.is_kw("while"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_statement(in_thread)
            return While(cond, body, tok.span)
        if tok.is_kw("return"):
            self.next()
            value = None
            if self.peek().text != ";":
                value = self.parse_expr()
            self.expect(";")
            return Return(value, tok.span)
        # Assignment or expression statement.
        if tok.kind == IDENT:
            nxt = self.peek(1)
            if nxt.text == "=":
                self.next()
                self.next()
                value = self.parse_expr()
                self.expect(";")
                return Assign(Ident(tok.text, tok.span), value, tok.span)
            if nxt.text == "[":
                save = self.pos
                base = self.next()
                self.next()
                idx = self.parse_expr()
                self.expect("]")
                if self.peek().text == "=":
                    self.next()
                    value = self.parse_expr()
                    self.expect(";")
                    return Assign(Index(base.text, idx, base.span), value, tok.span)
                self.pos = save
        expr = self.parse_expr()
        self.expect(";")
        return ExprStmt(expr, tok.span)

    def parse_decl(self) -> Decl:
        ttok = self.next()
        declarators = []
        while True:
            is_ptr = False
            if self.peek().text == "*":
                self.next()
                is_ptr = True
            name = self.expect_ident("variable name")
            array_size = None
            if self.peek().text == "[":
                self.next()
                size_tok = self.peek()
                if size_tok.kind != INT:
                    raise self.error("array size must be an integer literal")
                self.next()
                array_size = int(size_tok.text)
                self.expect("]")
            init = None
            init_list = None
            if self.peek().text == "=":
                self.next()
                if self.peek().text == "{":
                    self.next()
                    init_list = []
                    if self.peek().text != "}":
                        while True:
                            init_list.append(self.parse_expr())
                            if self.peek().text == ",":
                                self.next()
                                continue
                            break
                    self.expect("}")
                else:
                    init = self.parse_expr()
            declarators.append(Declarator(name.text, is_ptr, array_size, init, init_list, name.span))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(";")
        return Decl(ttok.text, declarators, ttok.span)

    # -- create construct ----------------------------------------------------

    def parse_create_header(self) -> CreateConstruct:
        kw = self.next()
        slices = self.split_parens()
        self.expect(";")

        if len(slices) < 2:
            raise self.error("sl_create needs a reserved slot and a thread function", kw.span)

        # Trailing sl_*arg slices are the channel arguments; the slice just
        # before them names the target thread function.
        target_idx = len(slices) - 1
        while target_idx > 0 and slices[target_idx] and slices[target_idx][0].kind == KEYWORD \
                and slices[target_idx][0].text in ARG_KEYWORDS:
            target_idx -= 1
        target_slice = slices[target_idx]
        if len(target_slice) != 1 or target_slice[0].kind != IDENT:
            raise self.error(
                "expected thread function name in sl_create",
                self._slice_span(target_slice) if target_slice else kw.span,
            )
        target = target_slice[0].text

        pre = slices[:target_idx]
        if not pre:
            raise self.error("sl_create is missing its reserved slot", kw.span)
        if len(pre) > 7:
            raise self.error(
                f"sl_create has {len(pre)} slots before the thread function; at most 7 allowed",
                kw.span,
            )
        if pre[0]:
            raise self.error("the first sl_create slot is reserved and must be empty", pre[0][0].span)

        specifier = None
        numeric = pre[1:]
        for i, sl in enumerate(numeric):
            if len(sl) == 1 and sl[0].kind == KEYWORD and sl[0].text in SPECIFIER_KEYWORDS:
                if specifier is not None:
                    raise self.error("duplicate create specifier", sl[0].span)
                specifier = sl[0].text
                for later in numeric[i + 1 :]:
                    if later:
                        raise self.error(
                            "create slots after the specifier must be empty", later[0].span
                        )
                numeric = numeric[:i]
                break
        if specifier is None and len(numeric) == 6:
            if numeric[5]:
                raise self.error(
                    "expected a create specifier (sl__exclusive, sl__forceseq, sl__forcewait)",
                    numeric[5][0].span,
                )
            numeric = numeric[:5]
        if len(numeric) > 5:
            raise self.error("too many numeric slots in sl_create", kw.span)

        exprs: list[Expr | None] = []
        for sl in numeric:
            exprs.append(self.parse_expr_slice(sl, kw.span) if sl else None)
        while len(exprs) < 5:
            exprs.append(None)
        placement, start, limit, step, window = exprs

        args = [self._parse_channel_arg(sl) for sl in slices[target_idx + 1 :]]
        return CreateConstruct(
            placement, start, limit, step, window, specifier, target, args, [], SYNC, kw.span
        )

    def _parse_channel_arg(self, sl: list[Token]) -> ChannelArg:
        if not sl:
            raise self.error("empty channel argument slot", self._eof.span)
        kw = sl[0]
        if not (kw.kind == KEYWORD and kw.text in ARG_KEYWORDS):
            raise self.error(f"expected channel argument, found {kw.text!r}", kw.span)
        sub = Parser(sl[1:], self.filename)
        inner = sub.split_parens()
        if not sub.at_end():
            raise self.error("unexpected tokens after channel argument", sub.peek().span)
        if len(inner) not in (2, 3):
            raise self.error("channel argument needs a type, an optional name, and an optional value", kw.span)
        type_tokens = self._parse_type_tokens(inner[0], kw.span)
        name_slice = inner[1]
        name = None
        if name_slice:
            if len(name_slice) != 1 or name_slice[0].kind != IDENT:
                raise self.error("expected channel endpoint name", name_slice[0].span)
            name = name_slice[0].text
        init = None
        if len(inner) == 3:
            if not inner[2]:
                raise self.error("empty source value in channel argument", kw.span)
            init = self.parse_expr_slice(inner[2], kw.span)
        if name is None and init is None:
            raise self.error(
                "anonymous channel argument must carry a source value", kw.span
            )
        fp = kw.text in ("sl_glfarg", "sl_shfarg")
        direction = GLOBAL if kw.text in ("sl_glarg", "sl_glfarg") else SHARED
        return ChannelArg(direction, fp, type_tokens, name, init, kw.span)

    # -- expressions ----------------------------------------------------------

    def parse_expr_slice(self, sl: list[Token], where: SourceSpan) -> Expr:
        if not sl:
            raise self.error("expected an expression", where)
        sub = Parser(sl, self.filename)
        expr = sub.parse_expr()
        if not sub.at_end():
            raise self.error(f"unexpected token {sub.peek().text!r} in expression", sub.peek().span)
        return expr

    def parse_expr(self) -> Expr:
        return self._parse_binary(0)

    def _parse_binary(self, level: int) -> Expr:
        if level >= len(_BINARY_LEVELS):
            return self._parse_unary()
        ops = _BINARY_LEVELS[level]
        left = self._parse_binary(level + 1)
        while self.peek().kind == PUNCT and self.peek().text in ops:
            op = self.next()
            right = self._parse_binary(level + 1)
            left = Binary(op.text, left, right, op.span)
        return left

    def _parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == PUNCT and tok.text in ("-", "!", "+"):
            self.next()
            operand = self._parse_unary()
            if tok.text == "+":
                return operand
            return Unary(tok.text, operand, tok.span)
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        tok = self.peek()
        if tok.kind == INT:
            self.next()
            return IntLit(int(tok.text), tok.span)
        if tok.kind == FLOAT:
            self.next()
            return FloatLit(float(tok.text), tok.span)
        if tok.kind == STRING:
            self.next()
            return StrLit(_unescape(tok.text, tok.span), tok.text, tok.span)
        if tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.is_kw("sl_getp") or tok.is_kw("sl_geta"):
            self.next()
            self.expect("(")
            name = self.expect_ident("channel name")
            self.expect(")")
            if tok.text == "sl_getp":
                return GetP(name.text, tok.span)
            return GetA(name.text, tok.span)
        if tok.kind == IDENT:
            self.next()
            if self.peek().text == "(":
                self.next()
                args = []
                if self.peek().text != ")":
                    while True:
                        args.append(self.parse_expr())
                        if self.peek().text == ",":
                            self.next()
                            continue
                        break
                self.expect(")")
                return Call(tok.text, args, tok.span)
            if self.peek().text == "[":
                self.next()
                idx = self.parse_expr()
                self.expect("]")
                return Index(tok.text, idx, tok.span)
            return Ident(tok.text, tok.span)
        raise self.error(f"expected an expression, found {tok.text!r}", tok.span)


def parse_program(tokens: list[Token], filename: str = "<string>") -> AstProgram:
    return Parser(tokens, filename).parse_program()


def parse_source(source: str, filename: str = "<string>") -> AstProgram:
    return parse_program(tokenize(source, filename), filename)
