"""Tokenizer for SL-mini source text.

Construct keywords are recognized as whole words only: ``slx_create`` or
``sl_created`` lex as plain identifiers.  ``//`` and ``/* */`` comments are
skipped, and preprocessor lines (``#include`` and friends) are treated like
comments: recognized and discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CompileError, E_LEX, E_SYNTAX, SourceSpan

KEYWORD = "keyword"
IDENT = "identifier"
INT = "integer-literal"
FLOAT = "float-literal"
STRING = "string-literal"
PUNCT = "punctuation"

SL_KEYWORDS = frozenset(
    {
        "sl_def",
        "sl_enddef",
        "sl_decl",
        "sl_create",
        "sl_sync",
        "sl_detach",
        "sl_index",
        "sl_getp",
        "sl_setp",
        "sl_geta",
        "sl_seta",
        "sl_glparm",
        "sl_shparm",
        "sl_glfparm",
        "sl_shfparm",
        "sl_glarg",
        "sl_sharg",
        "sl_glfarg",
        "sl_shfarg",
        "sl__static",
        "sl__exclusive",
        "sl__forcewait",
        "sl__forceseq",
    }
)

C_KEYWORDS = frozenset({"int", "float", "void", "if", "else", "while", "return", "sl_place_t"})

PARAM_KEYWORDS = frozenset({"sl_glparm", "sl_shparm", "sl_glfparm", "sl_shfparm"})
ARG_KEYWORDS = frozenset({"sl_glarg", "sl_sharg", "sl_glfarg", "sl_shfarg"})
SPECIFIER_KEYWORDS = frozenset({"sl__exclusive", "sl__forcewait", "sl__forceseq"})

TWO_CHAR_PUNCT = ("<=", ">=", "==", "!=", "&&", "||")
ONE_CHAR_PUNCT = "()[]{},;=+-*/%<>!"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan

    def is_kw(self, word: str) -> bool:
        return self.kind == KEYWORD and self.text == word


def tokenize(source: str, filename: str = "<string>") -> list[Token]:
    """Turn source text into a token list.

    Raises CompileError (code E_LEX) on unterminated strings/comments or
    illegal characters.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    line_has_token = False  # false while only whitespace seen on this line

    def span() -> SourceSpan:
        return SourceSpan(filename, line, col)

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            line_has_token = False
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#" and not line_has_token:
            # Preprocessor directive: recognized and ignored, like a comment.
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "*":
            start = span()
            i += 2
            col += 2
            while True:
                if i >= n:
                    raise CompileError(E_LEX, "unterminated block comment", start)
                if source[i] == "*" and i + 1 < n and source[i + 1] == "/":
                    i += 2
                    col += 2
                    break
                if source[i] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                i += 1
            continue

        line_has_token = True
        start = span()

        if c == '"':
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    raise CompileError(E_LEX, "unterminated string literal", start)
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == '"':
                    break
                j += 1
            text = source[i : j + 1]
            tokens.append(Token(STRING, text, start))
            col += j + 1 - i
            i = j + 1
            continue

        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                kind = FLOAT
            else:
                kind = INT
            text = source[i:j]
            tokens.append(Token(kind, text, start))
            col += j - i
            i = j
            continue

        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = KEYWORD if (text in SL_KEYWORDS or text in C_KEYWORDS) else IDENT
            tokens.append(Token(kind, text, start))
            col += j - i
            i = j
            continue

        pair = source[i : i + 2]
        if pair in TWO_CHAR_PUNCT:
            tokens.append(Token(PUNCT, pair, start))
            i += 2
            col += 2
            continue
        if c in ONE_CHAR_PUNCT:
            tokens.append(Token(PUNCT, c, start))
            i += 1
            col += 1
            continue

        raise CompileError(E_LEX, f"illegal character {c!r}", start)

    return tokens


def split_arguments(tokens: list[Token], open_span: SourceSpan) -> tuple[list[list[Token]], int]:
    """Split the token run after an opening ``(`` into top-level comma slices.

    ``tokens`` starts just past the opening parenthesis.  Returns the slices
    (empty slices preserved: they denote defaulted slots) and the number of
    tokens consumed including the closing parenthesis.  Commas nested inside
    balanced inner parentheses, brackets, or braces do not split.
    """
    slices: list[list[Token]] = []
    current: list[Token] = []
    depth = 0
    i = 0
    while True:
        if i >= len(tokens):
            raise CompileError(E_SYNTAX, "unbalanced parentheses", open_span)
        tok = tokens[i]
        if tok.kind == PUNCT:
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                if tok.text == ")" and depth == 0:
                    slices.append(current)
                    return slices, i + 1
                depth -= 1
                if depth < 0:
                    raise CompileError(E_SYNTAX, "unbalanced parentheses", tok.span)
            elif tok.text == "," and depth == 0:
                slices.append(current)
                current = []
                i += 1
                continue
        current.append(tok)
        i += 1
