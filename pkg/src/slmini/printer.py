"""Canonical source printer: parse(print_ast(a)) structurally equals a."""

from __future__ import annotations

from . import nodes as n

_PARM_KW = {
    (n.GLOBAL, False): "sl_glparm",
    (n.SHARED, False): "sl_shparm",
    (n.GLOBAL, True): "sl_glfparm",
    (n.SHARED, True): "sl_shfparm",
}
_ARG_KW = {
    (n.GLOBAL, False): "sl_glarg",
    (n.SHARED, False): "sl_sharg",
    (n.GLOBAL, True): "sl_glfarg",
    (n.SHARED, True): "sl_shfarg",
}

# Binding strength of each operator, for minimal parenthesization.
_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PREC = 7


def print_ast(program: n.AstProgram) -> str:
    out: list[str] = []
    for item in program.items:
        _top_level(out, item)
    return "".join(out)


def _top_level(out: list[str], item) -> None:
    if isinstance(item, n.ThreadFuncDef):
        out.append(f"sl_def({item.name}")
        _def_tail(out, item.is_static, item.params, _PARM_KW)
        out.append(")\n")
        _block(out, item.body, 0)
        out.append("sl_enddef\n\n")
    elif isinstance(item, n.ThreadFuncDecl):
        out.append(f"sl_decl({item.name}")
        _def_tail(out, item.is_static, item.params, _PARM_KW)
        out.append(");\n\n")
    elif isinstance(item, n.CFuncDef):
        params = ", ".join(
            f"{p.base_type}{' *' if p.is_pointer else ' '}{p.name}" for p in item.params
        )
        out.append(f"{item.return_type} {item.name}({params or 'void'})\n")
        _block(out, item.body, 0)
        out.append("\n")
    else:
        raise TypeError(f"unknown top-level item {item!r}")


def _def_tail(out: list[str], is_static: bool, params, kw_table) -> None:
    if not (is_static or params):
        return
    out.append(", sl__static" if is_static else ", ")
    for p in params:
        kw = kw_table[(p.direction, p.fp_keyword)]
        out.append(f", {kw}({_type(p.type_tokens)}, {p.name})")


def _type(tokens: tuple[str, ...]) -> str:
    return "".join(tokens)


def _block(out: list[str], block: n.Block, depth: int) -> None:
    pad = "    " * depth
    out.append(pad + "{\n")
    for item in block.items:
        _stmt(out, item, depth + 1)
    out.append(pad + "}\n")


def _stmt(out: list[str], stmt, depth: int) -> None:
    pad = "    " * depth
    if isinstance(stmt, n.Block):
        _block(out, stmt, depth)
    elif isinstance(stmt, n.Decl):
        parts = []
        for d in stmt.declarators:
            text = ("*" if d.is_pointer else "") + d.name
            if d.array_size is not None:
                text += f"[{d.array_size}]"
            if d.init is not None:
                text += f" = {_expr(d.init)}"
            elif d.init_list is not None:
                text += " = { " + ", ".join(_expr(e) for e in d.init_list) + " }"
            parts.append(text)
        out.append(f"{pad}{stmt.base_type} {', '.join(parts)};\n")
    elif isinstance(stmt, n.SlIndexDecl):
        out.append(f"{pad}sl_index({stmt.name});\n")
    elif isinstance(stmt, n.Assign):
        out.append(f"{pad}{_expr(stmt.target)} = {_expr(stmt.value)};\n")
    elif isinstance(stmt, n.ExprStmt):
        out.append(f"{pad}{_expr(stmt.expr)};\n")
    elif isinstance(stmt, n.If):
        out.append(f"{pad}if ({_expr(stmt.cond)})\n")
        _substmt(out, stmt.then, depth)
        if stmt.orelse is not None:
            out.append(f"{pad}else\n")
            _substmt(out, stmt.orelse, depth)
    elif isinstance(stmt, n.While):
        out.append(f"{pad}while ({_expr(stmt.cond)})\n")
        _substmt(out, stmt.body, depth)
    elif isinstance(stmt, n.Return):
        if stmt.value is None:
            out.append(f"{pad}return;\n")
        else:
            out.append(f"{pad}return {_expr(stmt.value)};\n")
    elif isinstance(stmt, n.SetP):
        out.append(f"{pad}sl_setp({stmt.name}, {_expr(stmt.value)});\n")
    elif isinstance(stmt, n.SetA):
        out.append(f"{pad}sl_seta({stmt.name}, {_expr(stmt.value)});\n")
    elif isinstance(stmt, n.CreateConstruct):
        slots = [
            "" if e is None else _expr(e)
            for e in (stmt.placement, stmt.start, stmt.limit, stmt.step, stmt.window)
        ]
        slots.append(stmt.specifier or "")
        head = f"{pad}sl_create(, " + ", ".join(slots) + f", {stmt.target}"
        for a in stmt.args:
            kw = _ARG_KW[(a.direction, a.fp_keyword)]
            init = f", {_expr(a.init)}" if a.init is not None else ""
            head += f", {kw}({_type(a.type_tokens)}, {a.name or ''}{init})"
        out.append(head + ");\n")
        for item in stmt.body_items:
            _stmt(out, item, depth)
        term = "sl_sync" if stmt.terminator == n.SYNC else "sl_detach"
        out.append(f"{pad}{term}();\n")
    else:
        raise TypeError(f"unknown statement {stmt!r}")


def _substmt(out: list[str], stmt, depth: int) -> None:
    if isinstance(stmt, n.Block):
        _block(out, stmt, depth)
    else:
        _stmt(out, stmt, depth + 1)


def _expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, n.IntLit):
        return str(e.value)
    if isinstance(e, n.FloatLit):
        text = repr(e.value)
        if "e" in text or "E" in text:
            # The lexer has no exponent notation; spell the value out.
            text = f"{e.value:f}"
        return text if "." in text else text + ".0"
    if isinstance(e, n.StrLit):
        return e.raw
    if isinstance(e, n.Ident):
        return e.name
    if isinstance(e, n.Index):
        return f"{e.base}[{_expr(e.index)}]"
    if isinstance(e, n.Unary):
        inner = _expr(e.operand, _UNARY_PREC)
        text = f"{e.op}{inner}"
        return text if parent_prec <= _UNARY_PREC else f"({text})"
    if isinstance(e, n.Binary):
        prec = _PREC[e.op]
        left = _expr(e.left, prec)
        right = _expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(e, n.Call):
        return f"{e.name}({', '.join(_expr(a) for a in e.args)})"
    if isinstance(e, n.GetP):
        return f"sl_getp({e.name})"
    if isinstance(e, n.GetA):
        return f"sl_geta({e.name})"
    raise TypeError(f"unknown expression {e!r}")
