"""AST node types.

Every node carries exactly one SourceSpan; spans are excluded from equality
so that structural comparison (used by the printer round-trip) ignores
layout.  Fields filled in by the checker (``binding`` on channel-endpoint
accesses) are likewise excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import SourceSpan

GLOBAL = "global"
SHARED = "shared"

INT_SCALAR = "integerScalar"
FLOAT_SCALAR = "floatScalar"
ARRAY_HANDLE = "arrayHandle"

SYNC = "sync"
DETACH = "detach"


def _span_field():
    return field(compare=False, repr=False)


# --------------------------------------------------------------------------
# Expressions


@dataclass
class IntLit:
    value: int
    span: SourceSpan = _span_field()


@dataclass
class FloatLit:
    value: float
    span: SourceSpan = _span_field()


@dataclass
class StrLit:
    value: str  # unescaped
    raw: str  # source text including quotes
    span: SourceSpan = _span_field()


@dataclass
class Ident:
    name: str
    span: SourceSpan = _span_field()


@dataclass
class Index:
    base: str
    index: "Expr"
    span: SourceSpan = _span_field()


@dataclass
class Unary:
    op: str
    operand: "Expr"
    span: SourceSpan = _span_field()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span_field()


@dataclass
class Call:
    name: str
    args: list["Expr"]
    span: SourceSpan = _span_field()


@dataclass
class GetP:
    name: str
    span: SourceSpan = _span_field()


@dataclass
class GetA:
    name: str
    span: SourceSpan = _span_field()
    binding: Optional["ArgBinding"] = field(default=None, compare=False, repr=False)


Expr = Union[IntLit, FloatLit, StrLit, Ident, Index, Unary, Binary, Call, GetP, GetA]


# --------------------------------------------------------------------------
# Channel endpoint declarations


@dataclass
class ChannelParam:
    direction: str  # GLOBAL | SHARED
    fp_keyword: bool  # declared with an sl_*f* keyword
    type_tokens: tuple[str, ...]
    name: str
    span: SourceSpan = _span_field()

    @property
    def type_text(self) -> str:
        return "".join(self.type_tokens)


@dataclass
class ChannelArg:
    direction: str
    fp_keyword: bool
    type_tokens: tuple[str, ...]
    name: Optional[str]  # None for anonymous endpoints
    init: Optional[Expr]
    span: SourceSpan = _span_field()

    @property
    def type_text(self) -> str:
        return "".join(self.type_tokens)


@dataclass
class ArgBinding:
    """Resolution of an sl_seta/sl_geta name to a create construct's arg."""

    construct: "CreateConstruct"
    arg_index: int
    direction: str


# --------------------------------------------------------------------------
# Statements and block items


@dataclass
class Declarator:
    name: str
    is_pointer: bool
    array_size: Optional[int]
    init: Optional[Expr]
    init_list: Optional[list[Expr]]
    span: SourceSpan = _span_field()


@dataclass
class Decl:
    base_type: str  # int | float | sl_place_t
    declarators: list[Declarator]
    span: SourceSpan = _span_field()


@dataclass
class SlIndexDecl:
    name: str
    span: SourceSpan = _span_field()


@dataclass
class Assign:
    target: Union[Ident, Index]
    value: Expr
    span: SourceSpan = _span_field()


@dataclass
class ExprStmt:
    expr: Expr
    span: SourceSpan = _span_field()


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"]
    span: SourceSpan = _span_field()


@dataclass
class While:
    cond: Expr
    body: "Stmt"
    span: SourceSpan = _span_field()


@dataclass
class Return:
    value: Optional[Expr]
    span: SourceSpan = _span_field()


@dataclass
class Block:
    items: list["Stmt"]
    span: SourceSpan = _span_field()


@dataclass
class SetP:
    name: str
    value: Expr
    span: SourceSpan = _span_field()


@dataclass
class SetA:
    name: str
    value: Expr
    span: SourceSpan = _span_field()
    binding: Optional[ArgBinding] = field(default=None, compare=False, repr=False)


@dataclass
class CreateConstruct:
    placement: Optional[Expr]
    start: Optional[Expr]
    limit: Optional[Expr]
    step: Optional[Expr]
    window: Optional[Expr]
    specifier: Optional[str]  # sl__exclusive | sl__forceseq | sl__forcewait
    target: str
    args: list[ChannelArg]
    body_items: list["Stmt"]
    terminator: str  # SYNC | DETACH
    span: SourceSpan = _span_field()


Stmt = Union[
    Decl, SlIndexDecl, Assign, ExprStmt, If, While, Return, Block, SetP, SetA, CreateConstruct
]


# --------------------------------------------------------------------------
# Top-level items


@dataclass
class CParam:
    base_type: str
    is_pointer: bool
    name: str
    span: SourceSpan = _span_field()


@dataclass
class ThreadFuncDef:
    name: str
    is_static: bool
    params: list[ChannelParam]
    body: Block
    span: SourceSpan = _span_field()


@dataclass
class ThreadFuncDecl:
    name: str
    is_static: bool
    params: list[ChannelParam]
    span: SourceSpan = _span_field()


@dataclass
class CFuncDef:
    return_type: str  # int | float | void | sl_place_t
    name: str
    params: list[CParam]
    body: Block
    span: SourceSpan = _span_field()


TopLevel = Union[ThreadFuncDef, ThreadFuncDecl, CFuncDef]


@dataclass
class AstProgram:
    items: list[TopLevel]
    span: SourceSpan = _span_field()
