import pytest
from hypothesis import given, strategies as st

from slmini import CompileError, tokenize, split_arguments
from slmini.tokens import IDENT, INT, KEYWORD, PUNCT, SL_KEYWORDS, STRING

from conftest import corpus_names, load_program

# Old-style chain-of-ten program: the creator feeds and reads its endpoints
# with sl_setp/sl_getp. Only used to pin down keyword counting.
CHAIN_OLD_STYLE = """
#include <stdio.h>
sl_def(foo, , sl_shparm(int, a)) {
    sl_setp(a, sl_getp(a) + 1);
    printf("%d", sl_getp(a));
} sl_enddef

int main(void) {
    sl_create(, , 0, 10, 1, 0, , foo, sl_sharg(int, x));
    sl_setp(x, 0);
    sl_sync();
    printf("%d\\n", sl_getp(x));
    return 0;
}
"""


def kinds_and_texts(tokens):
    return [(t.kind, t.text) for t in tokens]


def test_single_construct():
    toks = tokenize("sl_sync();")
    assert kinds_and_texts(toks) == [
        (KEYWORD, "sl_sync"),
        (PUNCT, "("),
        (PUNCT, ")"),
        (PUNCT, ";"),
    ]


def test_whole_word_rule():
    toks = tokenize("slx_create(")
    assert kinds_and_texts(toks) == [(IDENT, "slx_create"), (PUNCT, "(")]
    toks = tokenize("sl_created sl_create")
    assert toks[0].kind == IDENT
    assert toks[1].kind == KEYWORD


def test_chain_program_keyword_counts():
    toks = tokenize(CHAIN_OLD_STYLE)
    counts = {}
    for t in toks:
        if t.kind == KEYWORD:
            counts[t.text] = counts.get(t.text, 0) + 1
    assert counts["sl_create"] == 1
    assert counts["sl_sync"] == 1
    assert counts["sl_setp"] == 2
    assert counts["sl_getp"] == 3


def test_comments_and_directives_are_skipped():
    toks = tokenize("// line\nint /* block\nspanning */ x; #not_a_directive\n#include <stdio.h>\n")
    # '#' mid-line is not a directive start: it is an illegal character.
    assert [t.text for t in toks[:3]] == ["int", "x", ";"]


def test_hash_midline_is_error():
    with pytest.raises(CompileError) as exc:
        tokenize("int x; #include <y>")
    assert exc.value.diagnostic.code == "E_LEX"


def test_unterminated_string_and_comment():
    with pytest.raises(CompileError) as exc:
        tokenize('"abc')
    assert exc.value.diagnostic.code == "E_LEX"
    assert exc.value.diagnostic.span.line == 1
    with pytest.raises(CompileError):
        tokenize("/* never closed")


def test_spans_are_one_based():
    toks = tokenize("int\n  x;")
    assert (toks[0].span.line, toks[0].span.column) == (1, 1)
    assert (toks[1].span.line, toks[1].span.column) == (2, 3)


def test_float_and_int_literals():
    toks = tokenize("3 3.5 0.25")
    assert toks[0].kind == INT
    assert toks[1].kind == "float-literal"
    assert toks[2].kind == "float-literal"


def test_string_token_keeps_raw_text():
    toks = tokenize(r'print_str("a\n\"b");')
    assert toks[2].kind == STRING
    assert toks[2].text == r'"a\n\"b"'


def _scrub(source: str) -> str:
    """Independent whitespace/comment/directive remover for the
    reproduction property."""
    out = []
    i = 0
    n = len(source)
    line_start = True
    while i < n:
        c = source[i]
        if c == "#" and line_start:
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == "\n":
            line_start = True
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            i = source.index("*/", i) + 2
            continue
        line_start = False
        if c == '"':
            j = i + 1
            while source[j] != '"':
                j += 2 if source[j] == "\\" else 1
            out.append(source[i : j + 1])
            i = j + 1
            continue
        out.append(c)
        i += 1
    return "".join(out)


@pytest.mark.parametrize("name", corpus_names())
def test_token_concatenation_reproduces_source(name):
    source = load_program(name)
    toks = tokenize(source)
    assert "".join(t.text for t in toks) == _scrub(source)


def test_split_arguments_defaulted_slots():
    toks = tokenize(", , 0, 10, 1, 0, , foo)")
    slices, consumed = split_arguments(toks, toks[0].span)
    assert consumed == len(toks)
    assert len(slices) == 8
    empties = [i for i, s in enumerate(slices) if not s]
    assert empties == [0, 1, 6]


def test_split_arguments_nested_commas_protected():
    toks = tokenize("f(a,b), c)")
    slices, _ = split_arguments(toks, toks[0].span)
    assert len(slices) == 2
    assert [t.text for t in slices[0]] == ["f", "(", "a", ",", "b", ")"]


def test_split_arguments_unbalanced():
    toks = tokenize("(")
    with pytest.raises(CompileError):
        split_arguments(toks, toks[0].span)


@given(
    st.lists(
        st.one_of(
            st.sampled_from(["x", "foo", "0", "3.5", "+", "(", ")", ",", ";", "sl_create"]),
            st.text(alphabet="abcz_", min_size=1, max_size=6),
        ),
        max_size=20,
    )
)
def test_tokenize_space_joined_fragments_round_trip(parts):
    """Tokenizing space-joined fragments and re-joining the texts loses
    nothing but the spaces."""
    source = " ".join(parts)
    toks = tokenize(source)
    assert "".join(t.text for t in toks) == source.replace(" ", "")


@given(st.sampled_from(sorted(SL_KEYWORDS)), st.text(alphabet="abc_", min_size=1, max_size=4))
def test_keyword_with_suffix_is_identifier(kw, suffix):
    toks = tokenize(kw + suffix)
    assert len(toks) == 1
    assert toks[0].kind == IDENT
