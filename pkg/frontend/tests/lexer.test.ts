import { describe, expect, it } from "vitest";

import { LexError, tokenize, tokenizeLine } from "../src/tokens.js";
import { windowTable } from "./helpers.js";

describe("lexer vs committed server token table", () => {
  const tokens = tokenize(windowTable.snippet.source);

  it("reproduces every token exactly", () => {
    const got = tokens.map((t) => ({
      index: t.index,
      text: t.text,
      line: t.line,
      col_start: t.colStart,
      col_end: t.colEnd,
      class: t.tokenClass,
    }));
    expect(got).toEqual(windowTable.tokens);
  });

  it("the fixture covers all eight token classes", () => {
    const classes = new Set(tokens.map((t) => t.tokenClass));
    expect([...classes].sort()).toEqual([
      "comment",
      "identifier",
      "keyword",
      "literal",
      "modifier",
      "operator",
      "separator",
      "type",
    ]);
  });

  it("columns are consistent with the source text", () => {
    const lines = windowTable.snippet.source.split("\n");
    for (const t of tokens) {
      expect(lines[t.line - 1].slice(t.colStart, t.colEnd)).toBe(t.text);
    }
  });
});

describe("strict mode rejects broken input", () => {
  it("unterminated string literal", () => {
    expect(() => tokenize('String s = "abc')).toThrow(LexError);
  });

  it("unterminated block comment", () => {
    expect(() => tokenize("int x; /* dangling")).toThrow(LexError);
  });

  it("unknown character, with position", () => {
    try {
      tokenize("int x = 1 § 2;");
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(LexError);
      expect((err as LexError).line).toBe(1);
      expect((err as LexError).col).toBe(10);
    }
  });
});

describe("lenient single-line mode", () => {
  it("an unterminated string swallows the rest of the line", () => {
    const toks = tokenizeLine('int s = "ab');
    const last = toks[toks.length - 1];
    expect(last.text).toBe('"ab');
    expect(last.tokenClass).toBe("literal");
  });

  it("an unterminated char literal lexes too", () => {
    const toks = tokenizeLine("char c = 'x");
    expect(toks[toks.length - 1].text).toBe("'x");
  });

  it("an unknown character becomes a one-character separator", () => {
    const toks = tokenizeLine("a § b");
    expect(toks.map((t) => t.text)).toEqual(["a", "§", "b"]);
    expect(toks[1].tokenClass).toBe("separator");
  });

  it("an unterminated block comment runs to end of line", () => {
    const toks = tokenizeLine("x = 1; /* wip");
    expect(toks[toks.length - 1].text).toBe("/* wip");
    expect(toks[toks.length - 1].tokenClass).toBe("comment");
  });

  it("rejects multi-line input", () => {
    expect(() => tokenizeLine("a\nb")).toThrow(/single line/);
  });

  it("agrees with strict mode on well-formed lines", () => {
    const line = '    total += data[i] * 2 - f(x, "s");';
    const strict = tokenize(line);
    expect(tokenizeLine(line)).toEqual(strict);
  });
});
