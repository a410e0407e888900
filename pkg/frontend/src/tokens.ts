/**
 * Token model, lexer, and unblur window law.
 *
 * This is a line-for-line port of the server's lexer: the committed fixture
 * fixtures/window_table.json (generated server-side) pins both the token
 * table and every window to it, so any divergence fails the test suite.
 * The frozen eight-class table is documented in ../docs/token-classes.md.
 */

export type TokenClass =
  | "identifier"
  | "keyword"
  | "type"
  | "modifier"
  | "operator"
  | "literal"
  | "separator"
  | "comment";

/** One lexed token. `line` is 1-based; columns are 0-based offsets in that line. */
export interface Token {
  readonly index: number;
  readonly text: string;
  readonly line: number;
  readonly colStart: number;
  readonly colEnd: number;
  readonly tokenClass: TokenClass;
}

export class LexError extends Error {
  constructor(message: string, readonly line: number, readonly col: number) {
    super(`${message} (line ${line}, col ${col})`);
    this.name = "LexError";
  }
}

const PRIMITIVE_TYPES = new Set([
  "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
]);

const BOXED_TYPES = new Set([
  "Boolean", "Byte", "Character", "Short", "Integer",
  "Long", "Float", "Double", "Void", "String",
]);

const MODIFIERS = new Set([
  "public", "protected", "private", "static", "final", "abstract",
  "synchronized", "native", "transient", "volatile", "strictfp",
]);

const WORD_LITERALS = new Set(["true", "false", "null"]);

const KEYWORDS = new Set([
  "assert", "break", "case", "catch", "class", "const", "continue", "default",
  "do", "else", "enum", "extends", "finally", "for", "goto", "if",
  "implements", "import", "instanceof", "interface", "new", "package",
  "return", "super", "switch", "this", "throw", "throws", "try", "while",
]);

// Longest match first. Angle brackets are always operators (generics are not
// disambiguated without a parser; the class table documents this).
const OPERATORS = [
  ">>>=",
  "<<=", ">>=", ">>>",
  "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
  "&=", "|=", "^=", "%=", "<<", ">>", "->",
  "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

const SEPARATORS = ["...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"];

function classifyWord(word: string): TokenClass {
  if (PRIMITIVE_TYPES.has(word) || BOXED_TYPES.has(word)) return "type";
  if (MODIFIERS.has(word)) return "modifier";
  if (WORD_LITERALS.has(word)) return "literal";
  if (KEYWORDS.has(word)) return "keyword";
  return "identifier";
}

type LexicalKind = "word" | "number" | "string" | "char" | "operator" | "separator" | "comment";

function classify(text: string, kind: LexicalKind): TokenClass {
  switch (kind) {
    case "word": return classifyWord(text);
    case "number":
    case "string":
    case "char": return "literal";
    case "operator": return "operator";
    case "separator": return "separator";
    case "comment": return "comment";
  }
}

const IDENT_START = /[\p{L}_$]/u;
const IDENT_PART = /[\p{L}\p{N}_$]/u;
const DIGIT = /\p{Nd}/u;
const HEX_DIGITS = "0123456789abcdefABCDEF_";

function isDigit(ch: string): boolean {
  return ch !== "" && DIGIT.test(ch);
}

/** Character scanner over one source string, tracking line/col. */
class Scanner {
  private readonly src: string;
  private readonly n: number;
  private i = 0;
  private line = 1;
  private col = 0;
  private readonly lenient: boolean;
  private readonly out: Token[] = [];

  constructor(source: string, lenient = false) {
    this.src = source;
    this.n = source.length;
    this.lenient = lenient;
  }

  private error(message: string): LexError {
    return new LexError(message, this.line, this.col);
  }

  private peek(offset = 0): string {
    const j = this.i + offset;
    return j < this.n ? this.src[j] : "";
  }

  private advance(): void {
    const ch = this.src[this.i];
    this.i += 1;
    if (ch === "\n") {
      this.line += 1;
      this.col = 0;
    } else {
      this.col += 1;
    }
  }

  private emit(startI: number, startLine: number, startCol: number, kind: LexicalKind): void {
    const text = this.src.slice(startI, this.i);
    // a token never spans lines; multi-line lexemes are split by the caller
    this.out.push({
      index: this.out.length,
      text,
      line: startLine,
      colStart: startCol,
      colEnd: startCol + text.length,
      tokenClass: classify(text, kind),
    });
  }

  run(): Token[] {
    while (this.i < this.n) {
      const ch = this.peek();
      if (" \t\r\n\f".includes(ch)) {
        this.advance();
      } else if (ch === "/" && this.peek(1) === "/") {
        this.lineComment();
      } else if (ch === "/" && this.peek(1) === "*") {
        this.blockComment();
      } else if (IDENT_START.test(ch)) {
        this.word();
      } else if (isDigit(ch) || (ch === "." && isDigit(this.peek(1)))) {
        this.number();
      } else if (ch === '"') {
        this.string('"', "string");
      } else if (ch === "'") {
        this.string("'", "char");
      } else {
        this.punct(ch);
      }
    }
    return this.out;
  }

  private word(): void {
    const [start, line, col] = [this.i, this.line, this.col];
    while (this.i < this.n && IDENT_PART.test(this.peek())) {
      this.advance();
    }
    this.emit(start, line, col, "word");
  }

  private number(): void {
    const [start, line, col] = [this.i, this.line, this.col];
    if (this.peek() === "0" && (this.peek(1) === "x" || this.peek(1) === "X")) {
      this.advance();
      this.advance();
      while (this.peek() !== "" && HEX_DIGITS.includes(this.peek())) {
        this.advance();
      }
    } else {
      let seenExp = false;
      for (;;) {
        const ch = this.peek();
        if (isDigit(ch) || ch === "_") {
          this.advance();
        } else if (ch === "." && isDigit(this.peek(1))) {
          this.advance();
        } else if (
          (ch === "e" || ch === "E") &&
          !seenExp &&
          (isDigit(this.peek(1)) ||
            ((this.peek(1) === "+" || this.peek(1) === "-") && isDigit(this.peek(2))))
        ) {
          seenExp = true;
          this.advance();
          if (this.peek() === "+" || this.peek() === "-") {
            this.advance();
          }
        } else {
          break;
        }
      }
    }
    if (this.peek() !== "" && "lLfFdD".includes(this.peek())) {
      this.advance();
    }
    this.emit(start, line, col, "number");
  }

  private string(quote: string, kind: "string" | "char"): void {
    const [start, line, col] = [this.i, this.line, this.col];
    this.advance();
    for (;;) {
      const ch = this.peek();
      if (ch === "" || ch === "\n") {
        if (this.lenient) {
          this.emit(start, line, col, kind);
          return;
        }
        throw new LexError(`unterminated ${kind} literal`, line, col);
      }
      if (ch === "\\") {
        this.advance();
        if (this.peek() !== "" && this.peek() !== "\n") {
          this.advance();
        }
        continue;
      }
      this.advance();
      if (ch === quote) {
        break;
      }
    }
    this.emit(start, line, col, kind);
  }

  private lineComment(): void {
    const [start, line, col] = [this.i, this.line, this.col];
    while (this.i < this.n && this.peek() !== "\n") {
      this.advance();
    }
    this.emit(start, line, col, "comment");
  }

  private blockComment(): void {
    // emitted as one comment token per line so every token stays on a
    // single line with in-line column offsets
    let [start, line, col] = [this.i, this.line, this.col];
    const [openLine, openCol] = [this.line, this.col];
    this.advance();
    this.advance();
    for (;;) {
      const ch = this.peek();
      if (ch === "") {
        if (this.lenient) break;
        throw new LexError("unterminated block comment", openLine, openCol);
      }
      if (ch === "\n") {
        if (this.i > start) {
          this.emit(start, line, col, "comment");
        }
        this.advance();
        while (this.peek() === " " || this.peek() === "\t") {
          this.advance();
        }
        [start, line, col] = [this.i, this.line, this.col];
        continue;
      }
      if (ch === "*" && this.peek(1) === "/") {
        this.advance();
        this.advance();
        break;
      }
      this.advance();
    }
    if (this.i > start) {
      this.emit(start, line, col, "comment");
    }
  }

  private punct(ch: string): void {
    const [start, line, col] = [this.i, this.line, this.col];
    for (const sep of SEPARATORS) {
      if (this.src.startsWith(sep, this.i)) {
        for (let k = 0; k < sep.length; k++) this.advance();
        this.emit(start, line, col, "separator");
        return;
      }
    }
    for (const op of OPERATORS) {
      if (this.src.startsWith(op, this.i)) {
        for (let k = 0; k < op.length; k++) this.advance();
        this.emit(start, line, col, "operator");
        return;
      }
    }
    if (this.lenient) {
      this.advance();
      this.emit(start, line, col, "separator");
      return;
    }
    throw this.error(`unexpected character ${JSON.stringify(ch)}`);
  }
}

/** Lex `source` into tokens. Pure; throws LexError with position on bad input. */
export function tokenize(source: string): Token[] {
  return new Scanner(source).run();
}

/**
 * Lenient single-line lexing for in-progress edits: unterminated literals and
 * comments swallow the rest of the line, unknown characters become
 * one-character separators, so any editable line state lexes to something.
 */
export function tokenizeLine(text: string): Token[] {
  if (text.includes("\n")) {
    throw new Error("tokenizeLine expects a single line");
  }
  return new Scanner(text, true).run();
}

/** A lexed snippet with its marked buggy line. */
export class SnippetText {
  readonly source: string;
  readonly buggyLine: number;
  readonly tokens: Token[];
  readonly lines: string[];

  constructor(source: string, buggyLine: number) {
    this.source = source;
    this.buggyLine = buggyLine;
    this.tokens = tokenize(source);
    this.lines = source.split("\n");
    if (buggyLine < 1 || buggyLine > this.lines.length) {
      throw new Error(`buggy line ${buggyLine} outside snippet`);
    }
    if (this.lineTokens(buggyLine).length === 0) {
      throw new Error(`buggy line ${buggyLine} holds no tokens`);
    }
  }

  /** Half-open [lo, hi) index range of tokens on `line` (possibly empty). */
  lineTokenRange(line: number): [number, number] {
    let lo = this.tokens.length;
    let hi = 0;
    for (const tok of this.tokens) {
      if (tok.line === line) {
        lo = Math.min(lo, tok.index);
        hi = Math.max(hi, tok.index + 1);
      }
    }
    return hi === 0 ? [0, 0] : [lo, hi];
  }

  lineTokens(line: number): Token[] {
    const [lo, hi] = this.lineTokenRange(line);
    return this.tokens.slice(lo, hi);
  }

  lineText(line: number): string {
    return this.lines[line - 1];
  }
}

export const MAX_WINDOW_TOKENS = 7;

/**
 * Unblur window law: the cursor token plus three to each side, clipped to the
 * cursor's line. Returns sorted token indices; size is always within [1, 7].
 */
export function computeWindow(snippet: SnippetText, cursorTokenIndex: number): number[] {
  if (cursorTokenIndex < 0 || cursorTokenIndex >= snippet.tokens.length) {
    throw new RangeError(`token index ${cursorTokenIndex} outside snippet`);
  }
  const line = snippet.tokens[cursorTokenIndex].line;
  const [lo, hi] = snippet.lineTokenRange(line);
  const start = Math.max(cursorTokenIndex - 3, lo);
  const end = Math.min(cursorTokenIndex + 3, hi - 1);
  const out: number[] = [];
  for (let i = start; i <= end; i++) out.push(i);
  return out;
}
