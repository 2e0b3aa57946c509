"""Source locations, diagnostics, and the error types shared by all stages.

Diagnostic codes are part of the public contract and stay stable across
releases; the full list is documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" (all current codes are errors)
    code: str
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.code}: {self.message}"


class CompileError(Exception):
    """Raised by the tokenizer and parser on the first unrecoverable error."""

    def __init__(self, code: str, message: str, span: SourceSpan):
        super().__init__(f"{span}: error: {code}: {message}")
        self.diagnostic = Diagnostic("error", code, message, span)


class MachineError(Exception):
    """A runtime dataflow/resource error; aborts the simulated run."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


# Compile-time diagnostic codes.
E_LEX = "E_LEX"
E_SYNTAX = "E_SYNTAX"
E_UNDEF = "E_UNDEF"
E_DUP = "E_DUP"
E_TARGET_KIND = "E_TARGET_KIND"
E_PARAM_OUTSIDE = "E_PARAM_OUTSIDE"
E_SETP_GLOBAL = "E_SETP_GLOBAL"
E_SETA_OUTSIDE = "E_SETA_OUTSIDE"
E_GETA_BEFORE_SYNC = "E_GETA_BEFORE_SYNC"
E_GETA_AFTER_DETACH = "E_GETA_AFTER_DETACH"
E_SIG_MISMATCH = "E_SIG_MISMATCH"
E_UNFED_CHANNEL = "E_UNFED_CHANNEL"
E_FP_KEYWORD = "E_FP_KEYWORD"
E_INDEX_OUTSIDE = "E_INDEX_OUTSIDE"
E_BAD_CALL = "E_BAD_CALL"

# Runtime error codes.
E_DOUBLE_WRITE = "E_DOUBLE_WRITE"
E_UNWRITTEN_SHARED = "E_UNWRITTEN_SHARED"
E_SERIAL_BLOCK = "E_SERIAL_BLOCK"
E_BAD_STEP = "E_BAD_STEP"
E_BAD_WS = "E_BAD_WS"
E_BAD_PLACEMENT = "E_BAD_PLACEMENT"
E_DIV_ZERO = "E_DIV_ZERO"
E_TYPE = "E_TYPE"
E_BOUNDS = "E_BOUNDS"
