import random

import pytest

from codegaze import (
    LexError,
    OutOfRange,
    AttentionVector,
    Snippet,
    Token,
    TokenClass,
    compute_window,
    tokenize,
    tokenize_line,
)


def kinds(source):
    return [(t.text, t.token_class) for t in tokenize(source)]


class TestLexer:
    def test_declaration_with_comment(self):
        toks = tokenize("int x = 42; // done")
        assert [(t.text, t.token_class.value) for t in toks] == [
            ("int", "type"),
            ("x", "identifier"),
            ("=", "operator"),
            ("42", "literal"),
            (";", "separator"),
            ("// done", "comment"),
        ]
        assert [t.col_start for t in toks] == [0, 4, 6, 8, 10, 12]
        assert all(t.line == 1 for t in toks)

    def test_word_classes(self):
        assert kinds("while") == [("while", TokenClass.KEYWORD)]
        assert kinds("int double void") == [
            ("int", TokenClass.TYPE),
            ("double", TokenClass.TYPE),
            ("void", TokenClass.TYPE),
        ]
        assert kinds("String Integer") == [
            ("String", TokenClass.TYPE),
            ("Integer", TokenClass.TYPE),
        ]
        assert kinds("public static final") == [
            ("public", TokenClass.MODIFIER),
            ("static", TokenClass.MODIFIER),
            ("final", TokenClass.MODIFIER),
        ]
        assert kinds("true false null") == [
            ("true", TokenClass.LITERAL),
            ("false", TokenClass.LITERAL),
            ("null", TokenClass.LITERAL),
        ]
        assert kinds("foo _bar $baz x2") == [
            ("foo", TokenClass.IDENTIFIER),
            ("_bar", TokenClass.IDENTIFIER),
            ("$baz", TokenClass.IDENTIFIER),
            ("x2", TokenClass.IDENTIFIER),
        ]

    def test_operators_longest_match(self):
        assert [t.text for t in tokenize("a>>>=b")] == ["a", ">>>=", "b"]
        assert [t.text for t in tokenize("a>>>b")] == ["a", ">>>", "b"]
        assert [t.text for t in tokenize("a>=b")] == ["a", ">=", "b"]
        assert [t.text for t in tokenize("x->y")] == ["x", "->", "y"]
        assert [t.text for t in tokenize("i++ + ++j")] == ["i", "++", "+", "++", "j"]

    def test_separators(self):
        assert [t.text for t in tokenize("f(a, b[0]);")] == [
            "f", "(", "a", ",", "b", "[", "0", "]", ")", ";",
        ]
        assert [t.text for t in tokenize("String::valueOf")] == ["String", "::", "valueOf"]
        assert [t.text for t in tokenize("f(int... xs)")][3] == "..."
        assert all(
            t.token_class is TokenClass.SEPARATOR
            for t in tokenize("( ) { } [ ] ; , . @ :: ...")
        )

    def test_number_literals(self):
        for text in ["0", "42", "0x1F", "0xdeadBEEF", "1_000", "3.14", "1.5e3",
                     "2e-4", "10L", "3.14f", "2.5d", ".5"]:
            toks = tokenize(text)
            assert [t.text for t in toks] == [text], text
            assert toks[0].token_class is TokenClass.LITERAL

    def test_dot_after_number_vs_method(self):
        # "1." followed by a word is literal 1 then separator . (no digit after dot)
        assert [t.text for t in tokenize("x.length")] == ["x", ".", "length"]
        assert [t.text for t in tokenize("1.5.toString")] == ["1.5", ".", "toString"]

    def test_string_and_char_literals(self):
        toks = tokenize('s = "a // not comment" + \'\\n\';')
        assert [t.text for t in toks] == [
            "s", "=", '"a // not comment"', "+", "'\\n'", ";",
        ]
        assert toks[2].token_class is TokenClass.LITERAL
        assert toks[4].token_class is TokenClass.LITERAL
        assert [t.text for t in tokenize(r'"escaped \" quote"')] == [r'"escaped \" quote"']

    def test_line_comment_runs_to_eol(self):
        toks = tokenize("a; // rest is comment ; b\nc;")
        assert [t.text for t in toks] == ["a", ";", "// rest is comment ; b", "c", ";"]
        assert toks[3].line == 2

    def test_block_comment_single_line(self):
        toks = tokenize("a /* mid */ b")
        assert [t.text for t in toks] == ["a", "/* mid */", "b"]
        assert toks[1].token_class is TokenClass.COMMENT

    def test_block_comment_splits_per_line(self):
        toks = tokenize("/* one\n   two\n   three */\nint x;")
        comments = [t for t in toks if t.token_class is TokenClass.COMMENT]
        assert [c.text for c in comments] == ["/* one", "two", "three */"]
        assert [c.line for c in comments] == [1, 2, 3]
        # continuation lines keep their in-line columns
        assert comments[1].col_start == 3

    def test_lex_errors_carry_position(self):
        with pytest.raises(LexError) as err:
            tokenize('x = "unterminated')
        assert err.value.line == 1
        with pytest.raises(LexError):
            tokenize("/* never closed")
        with pytest.raises(LexError) as err:
            tokenize("a\nb `")
        assert err.value.line == 2

    def test_tokenize_line_is_lenient(self):
        toks = tokenize_line('x = "half typed')
        assert [t.text for t in toks] == ["x", "=", '"half typed']
        toks = tokenize_line("a ` b")
        assert [t.text for t in toks] == ["a", "`", "b"]
        with pytest.raises(ValueError):
            tokenize_line("two\nlines")

    def test_round_trip_positions(self, gcd_snippet):
        gcd_snippet.check_invariants()
        for tok in gcd_snippet.tokens:
            line_text = gcd_snippet.lines[tok.line - 1]
            assert line_text[tok.col_start : tok.col_end] == tok.text


class TestSnippet:
    def test_line_tokens_and_ranges(self, gcd_snippet):
        buggy = gcd_snippet.line_tokens(7)
        assert [t.text for t in buggy] == ["a", "=", "t", "-", "b", ";"]
        lo, hi = gcd_snippet.line_token_range(7)
        assert hi - lo == 6
        assert gcd_snippet.buggy_line_indices() == frozenset(range(lo, hi))

    def test_buggy_line_must_hold_tokens(self):
        with pytest.raises(ValueError):
            Snippet.from_source("bad", "int x;\n\nint y;", 2, "")
        with pytest.raises(ValueError):
            Snippet.from_source("bad", "int x;", 5, "")

    def test_line_token_range_out_of_range(self, gcd_snippet):
        with pytest.raises(OutOfRange):
            gcd_snippet.line_token_range(0)
        with pytest.raises(OutOfRange):
            gcd_snippet.line_token_range(99)

    def test_attention_vector_rejects_negative(self):
        with pytest.raises(ValueError):
            AttentionVector("s", (0.1, -0.2))
        with pytest.raises(ValueError):
            AttentionVector("s", (float("nan"),))


def brute_force_window(snippet: Snippet, cursor: int) -> list[int]:
    line = snippet.tokens[cursor].line
    return [
        t.index
        for t in snippet.tokens
        if t.line == line and abs(t.index - cursor) <= 3
    ]


class TestComputeWindow:
    def test_interior_window(self, flat_snippet):
        assert compute_window(flat_snippet, 5) == [2, 3, 4, 5, 6, 7, 8]

    def test_clipped_at_line_start(self, flat_snippet):
        assert compute_window(flat_snippet, 0) == [0, 1, 2, 3]

    def test_clipped_both_sides(self):
        snip = Snippet.from_source("tiny", "a b c d e", 1, "")
        assert compute_window(snip, 2) == [0, 1, 2, 3, 4]

    def test_never_crosses_lines(self, gcd_snippet):
        for cursor in range(len(gcd_snippet.tokens)):
            window = compute_window(gcd_snippet, cursor)
            lines = {gcd_snippet.tokens[i].line for i in window}
            assert lines == {gcd_snippet.tokens[cursor].line}
            assert 1 <= len(window) <= 7
            assert cursor in window

    def test_out_of_range(self, flat_snippet):
        with pytest.raises(OutOfRange):
            compute_window(flat_snippet, -1)
        with pytest.raises(OutOfRange):
            compute_window(flat_snippet, 999)

    def test_matches_brute_force_everywhere(self, gcd_snippet, sqrt_snippet, flat_snippet):
        for snip in (gcd_snippet, sqrt_snippet, flat_snippet):
            for cursor in range(len(snip.tokens)):
                assert compute_window(snip, cursor) == brute_force_window(snip, cursor)

    def test_fuzz_random_snippets(self):
        rng = random.Random(1234)
        words = ["a", "bb", "ccc", "x1", "foo", "int", "if", "42", "+", ";", "(", ")"]
        for _ in range(60):
            n_lines = rng.randint(1, 8)
            lines = [
                " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))
                for _ in range(n_lines)
            ]
            buggy = 1 + max(range(n_lines), key=lambda i: len(lines[i]))
            snip = Snippet.from_source("fz", "\n".join(lines), buggy, "")
            snip.check_invariants()
            for cursor in range(len(snip.tokens)):
                assert compute_window(snip, cursor) == brute_force_window(snip, cursor)
