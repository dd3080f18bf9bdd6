"""Tokenizer and recursive-descent parser for the pattern language.

Deterministic with one-token lookahead over the grammar published in
GRAMMAR.md. Whitespace (including newlines) is insignificant everywhere,
so queries may be wrapped arbitrarily. Errors carry line/column and the
set of expected tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import PatternSyntaxError
from .ast import (
    Aggregate, AttrRef, Condition, Duration, EventTerm, Expr, FromClause,
    Join, Number, PatternAst, Seq, TriplePatternAst, Window,
)

_TOKEN_RE = re.compile(r"""
    (?P<WS>\s+)
  | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<DUR>[0-9]+(?:min|s|h)(?![A-Za-z0-9_]))
  | (?P<NUMBER>[0-9]+(?:\.[0-9]+)?)
  | (?P<QNAME>[A-Za-z_][A-Za-z0-9_]*:[A-Za-z_][A-Za-z0-9_]*)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<REL><=|>=|==|!=|<|>)
  | (?P<PUNCT>[(){},.|+\-])
""", re.VERBOSE)

AGG_FNS = ("AVG", "SUM", "COUNT")
WINDOW_MODES = ("sliding", "batch", "latest")


@dataclass(frozen=True)
class Token:
    kind: str   # VAR DUR NUMBER QNAME IDENT REL PUNCT EOF
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise PatternSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "WS":
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, expected):
        tok = self.cur
        shown = tok.text if tok.kind != "EOF" else "end of input"
        raise PatternSyntaxError(f"unexpected {shown!r}", tok.line, tok.col, expected)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.cur
        if tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.accept(kind, text)
        if tok is None:
            self._fail({text if text is not None else kind})
        return tok

    def expect_punct(self, ch: str) -> Token:
        return self.expect("PUNCT", ch)

    # pattern = select from+ [where] ["|" cep] EOF
    def pattern(self) -> PatternAst:
        select = self.select()
        froms = [self.from_clause()]
        while self.cur.kind == "IDENT" and self.cur.text == "FROM":
            froms.append(self.from_clause())
        where = ()
        if self.accept("IDENT", "WHERE"):
            where = self.where_body()
        cep = None
        if self.accept("PUNCT", "|"):
            cep = self.cep()
        if self.cur.kind != "EOF":
            self._fail({"FROM", "WHERE", "|", "end of input"})
        return PatternAst(select=select, from_clauses=tuple(froms), where=where,
                          cep=cep, raw_text=self.text)

    def _comma_list(self, parse_item) -> list:
        """item {"," item} ")"; fails with {',', ')'} at a bad continuation."""
        items = [parse_item()]
        while True:
            if self.accept("PUNCT", ","):
                items.append(parse_item())
            elif self.accept("PUNCT", ")"):
                return items
            else:
                self._fail({",", ")"})

    def select(self) -> tuple:
        self.expect("IDENT", "SELECT")
        self.expect_punct("(")
        return tuple(self._comma_list(self.proj))

    def proj(self) -> tuple:
        if self.cur.kind == "VAR":
            return ("var", self.expect("VAR").text[1:])
        if self.cur.kind == "IDENT":
            return ("ident", self.expect("IDENT").text)
        self._fail({"VAR", "IDENT"})

    def from_clause(self) -> FromClause:
        self.expect("IDENT", "FROM")
        self.expect_punct("(")
        variables = [self.expect("VAR").text[1:]]
        stream = None
        while self.accept("PUNCT", ","):
            if self.cur.kind == "VAR":
                variables.append(self.expect("VAR").text[1:])
            elif self.cur.kind == "IDENT":
                stream = self.expect("IDENT").text
                break
            else:
                self._fail({"VAR", "IDENT"})
        if stream is None:
            self._fail({",", "IDENT"})
        self.expect_punct(")")
        return FromClause(variables=tuple(variables), stream_id=stream)

    def where_body(self) -> tuple:
        self.expect_punct("{")
        tpats = [self.tpat()]
        while self.accept("PUNCT", "."):
            tpats.append(self.tpat())
        self.expect_punct("}")
        return tuple(tpats)

    def tpat(self) -> TriplePatternAst:
        return TriplePatternAst(self.term(), self.term(), self.term())

    def term(self) -> tuple:
        if self.cur.kind == "VAR":
            return ("var", self.expect("VAR").text[1:])
        if self.cur.kind == "QNAME":
            return ("qname", self.expect("QNAME").text)
        self._fail({"VAR", "QNAME"})

    def cep(self):
        tok = self.cur
        if tok.kind == "IDENT" and tok.text == "SEQ":
            return self.seq()
        if tok.kind == "IDENT" and tok.text == "JOIN":
            return self.join()
        if tok.kind == "IDENT" and tok.text in AGG_FNS:
            return self.agg()
        self._fail({"SEQ", "JOIN", *AGG_FNS})

    def seq(self) -> Seq:
        self.expect("IDENT", "SEQ")
        self.expect_punct("(")
        first = self.eterm()
        self.expect_punct(",")
        second = self.eterm()
        self.expect("IDENT", "within")
        within = self.duration()
        self.expect_punct(")")
        return Seq(first=first, second=second, within=within)

    def eterm(self) -> EventTerm:
        var = self.expect("VAR").text[1:]
        guards = ()
        if self.accept("PUNCT", "("):
            guards = tuple(self._comma_list(self.cond))
        return EventTerm(variable=var, guards=guards)

    def join(self) -> Join:
        self.expect("IDENT", "JOIN")
        self.expect_punct("(")
        left = self.expect("VAR").text[1:]
        self.expect_punct(",")
        right = self.expect("VAR").text[1:]
        self.expect_punct(")")
        self.expect("IDENT", "ON")
        self.expect_punct("(")
        return Join(left=left, right=right, on=tuple(self._comma_list(self.cond)))

    def agg(self) -> Aggregate:
        fn = self.expect("IDENT").text
        self.expect_punct("(")
        over = self.expect("VAR").text[1:]
        self.expect_punct(")")
        self.expect("IDENT", "AS")
        alias = self.expect("IDENT").text
        window = None
        if self.cur.kind == "IDENT" and self.cur.text == "WINDOW":
            window = self.window()
        having = None
        if self.accept("IDENT", "HAVING"):
            self.expect_punct("(")
            having = self.cond()
            self.expect_punct(")")
        return Aggregate(fn=fn, over=over, alias=alias, window=window, having=having)

    def window(self) -> Window:
        self.expect("IDENT", "WINDOW")
        self.expect_punct("(")
        over = self.expect("VAR").text[1:]
        self.expect_punct(",")
        mode = self.expect("IDENT").text
        if mode not in WINDOW_MODES:
            self.pos -= 1
            self._fail(set(WINDOW_MODES))
        self.expect_punct(",")
        if self.cur.kind == "DUR":
            width = self.duration()
        elif self.cur.kind == "NUMBER" and "." not in self.cur.text:
            width = int(self.expect("NUMBER").text)
        else:
            self._fail({"DUR", "INT"})
        self.expect_punct(")")
        return Window(over=over, mode=mode, width=width)

    def duration(self) -> Duration:
        tok = self.expect("DUR")
        m = re.match(r"([0-9]+)(min|s|h)", tok.text)
        return Duration(magnitude=int(m.group(1)), unit=m.group(2))

    def cond(self) -> Condition:
        lhs = self.expr()
        rel = self.expect("REL").text
        rhs = self.expr()
        return Condition(lhs=lhs, rel=rel, rhs=rhs)

    def expr(self) -> Expr:
        terms = [("+", self.atom())]
        while self.cur.kind == "PUNCT" and self.cur.text in "+-":
            op = self.expect("PUNCT").text
            terms.append((op, self.atom()))
        return Expr(terms=tuple(terms))

    def atom(self):
        tok = self.cur
        if tok.kind == "NUMBER":
            self.pos += 1
            return Number(value=float(tok.text) if "." in tok.text else int(tok.text))
        if tok.kind == "IDENT":
            self.pos += 1
            return AttrRef(var=None, attr=tok.text)
        if tok.kind == "VAR":
            self.pos += 1
            if self.accept("PUNCT", "."):
                attr = self.expect("IDENT").text
                return AttrRef(var=tok.text[1:], attr=attr)
            return AttrRef(var=tok.text[1:], attr="")  # bare event var; validator rejects
        self._fail({"NUMBER", "IDENT", "VAR"})


def parse_pattern(text: str) -> PatternAst:
    """Parse pattern text into an AST. Raises PatternSyntaxError."""
    if not text or not text.strip():
        raise PatternSyntaxError("empty pattern", 1, 1, {"SELECT"})
    return _Parser(text).pattern()
