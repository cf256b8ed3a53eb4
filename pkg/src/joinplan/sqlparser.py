"""Tokenizer and recursive-descent parser for the supported SQL subset.

Input grammar (what query files may contain):

    select      := SELECT select_list FROM from_list [WHERE condition] [';']
    select_list := select_item (',' select_item)*
    select_item := '*' | expr [[AS] name]
    expr        := func '(' ('*' | operand (',' operand)*) ')' | operand
    from_list   := table_ref (',' table_ref)*
    table_ref   := table [[AS] alias]
    condition   := disjunction of conjunctions of predicates
    predicate   := operand (= | <> | != | < | <= | > | >=) operand
                 | operand [NOT] IN '(' literal, ... ')'
                 | operand [NOT] BETWEEN operand AND operand
                 | operand [NOT] LIKE string
                 | operand IS [NOT] NULL
                 | '(' condition ')'
    operand     := alias '.' column | literal

The extended grammar additionally accepts what the rewriter emits:
derived tables ``(SELECT ...) AS name`` in FROM, and explicit
``JOIN ... ON`` / ``CROSS JOIN`` steps. ``parse_select`` rejects the
extended forms unless asked for them, so input queries stay inside the
documented subset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import QueryError
from .sqlast import (
    And,
    Between,
    Column,
    Comparison,
    DerivedRef,
    Expr,
    FromStep,
    FuncCall,
    InList,
    IsNull,
    Like,
    Literal,
    Not,
    Or,
    SelectItem,
    SelectStatement,
    Star,
    TableRef,
)

_KEYWORDS = {
    "SELECT", "FROM", "WHERE", "AS", "AND", "OR", "NOT", "IN", "BETWEEN",
    "LIKE", "IS", "NULL", "JOIN", "CROSS", "ON",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|!=|<=|>=|[<>=.,()*;-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | KEYWORD | NUMBER | STRING | OP | EOF
    text: str
    pos: int

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


def tokenize(sql: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            raise QueryError(f"unexpected character {sql[pos]!r}", pos)
        if m.lastgroup != "ws":
            text = m.group()
            if m.lastgroup == "ident":
                kind = "KEYWORD" if text.upper() in _KEYWORDS else "IDENT"
            else:
                kind = m.lastgroup.upper()
            tokens.append(Token(kind, text, pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(sql)))
    return tokens


class _Parser:
    def __init__(self, sql: str, extended: bool):
        self.sql = sql
        self.tokens = tokenize(sql)
        self.i = 0
        self.extended = extended

    # -- token plumbing --

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.text.upper() in words

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise QueryError(f"expected {word}", self.peek().pos)
        return self.advance()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text == text

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise QueryError(f"expected {text!r}", self.peek().pos)
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise QueryError(f"expected {what}", tok.pos)
        return self.advance()

    # -- grammar --

    def parse(self) -> SelectStatement:
        stmt = self.select_statement()
        if self.at_op(";"):
            self.advance()
        if self.peek().kind != "EOF":
            raise QueryError("trailing input after statement", self.peek().pos)
        return stmt

    def select_statement(self) -> SelectStatement:
        self.expect_keyword("SELECT")
        items = [self.select_item()]
        while self.at_op(","):
            self.advance()
            items.append(self.select_item())
        self.expect_keyword("FROM")
        first = self.from_item()
        steps: list[FromStep] = []
        while True:
            if self.at_op(","):
                self.advance()
                steps.append(FromStep("comma", self.from_item()))
            elif self.at_keyword("JOIN"):
                tok = self.advance()
                if not self.extended:
                    raise QueryError("explicit JOIN syntax is not part of the input grammar", tok.pos)
                item = self.from_item()
                self.expect_keyword("ON")
                steps.append(FromStep("join", item, self.condition()))
            elif self.at_keyword("CROSS"):
                tok = self.advance()
                if not self.extended:
                    raise QueryError("explicit JOIN syntax is not part of the input grammar", tok.pos)
                self.expect_keyword("JOIN")
                steps.append(FromStep("cross", self.from_item()))
            else:
                break
        where = None
        if self.at_keyword("WHERE"):
            self.advance()
            where = self.condition()
        return SelectStatement(tuple(items), first, tuple(steps), where)

    def select_item(self) -> SelectItem:
        start = self.peek().pos
        if self.at_op("*"):
            self.advance()
            return SelectItem(Star(), None, "*")
        expr = self.select_expr()
        text = self.sql[start : self.tokens[self.i - 1].end]
        name = None
        if self.at_keyword("AS"):
            self.advance()
            name = self.expect_ident("output name").text
        elif self.peek().kind == "IDENT":
            name = self.advance().text
        return SelectItem(expr, name, text)

    def select_expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "IDENT" and self.tokens[self.i + 1].kind == "OP" and self.tokens[self.i + 1].text == "(":
            name = self.advance().text
            self.expect_op("(")
            if self.at_op("*"):
                self.advance()
                self.expect_op(")")
                return FuncCall(name.upper(), star=True)
            args = [self.operand()]
            while self.at_op(","):
                self.advance()
                args.append(self.operand())
            self.expect_op(")")
            return FuncCall(name.upper(), tuple(args))
        return self.operand()

    def from_item(self):
        if self.at_op("("):
            tok = self.advance()
            if not self.extended:
                raise QueryError("derived tables are not part of the input grammar", tok.pos)
            select = self.select_statement()
            self.expect_op(")")
            if self.at_keyword("AS"):
                self.advance()
            alias = self.expect_ident("derived table alias").text
            return DerivedRef(select, alias)
        table = self.expect_ident("table name").text
        alias = table
        if self.at_keyword("AS"):
            self.advance()
            alias = self.expect_ident("alias").text
        elif self.peek().kind == "IDENT":
            alias = self.advance().text
        return TableRef(table, alias)

    def condition(self) -> Expr:
        items = [self.and_chain()]
        while self.at_keyword("OR"):
            self.advance()
            items.append(self.and_chain())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def and_chain(self) -> Expr:
        items = [self.negation()]
        while self.at_keyword("AND"):
            self.advance()
            items.append(self.negation())
        return items[0] if len(items) == 1 else And(tuple(items))

    def negation(self) -> Expr:
        if self.at_keyword("NOT"):
            self.advance()
            return Not(self.negation())
        return self.predicate()

    def predicate(self) -> Expr:
        if self.at_op("("):
            self.advance()
            inner = self.condition()
            self.expect_op(")")
            return inner
        operand = self.operand()
        tok = self.peek()
        negated = False
        if self.at_keyword("NOT"):
            self.advance()
            negated = True
            tok = self.peek()
        if tok.kind == "OP" and tok.text in ("=", "<>", "!=", "<", "<=", ">", ">="):
            if negated:
                raise QueryError("NOT cannot precede a comparison operator", tok.pos)
            op = self.advance().text
            if op == "!=":
                op = "<>"
            return Comparison(op, operand, self.operand())
        if self.at_keyword("IN"):
            self.advance()
            self.expect_op("(")
            values = [self.literal().value]
            while self.at_op(","):
                self.advance()
                values.append(self.literal().value)
            self.expect_op(")")
            return InList(operand, tuple(values), negated)
        if self.at_keyword("BETWEEN"):
            self.advance()
            low = self.operand()
            self.expect_keyword("AND")
            return Between(operand, low, self.operand(), negated)
        if self.at_keyword("LIKE"):
            self.advance()
            pattern = self.peek()
            if pattern.kind != "STRING":
                raise QueryError("LIKE requires a string pattern", pattern.pos)
            self.advance()
            return Like(operand, _string_value(pattern.text), negated)
        if self.at_keyword("IS"):
            if negated:
                raise QueryError("NOT cannot precede IS", tok.pos)
            self.advance()
            is_not = False
            if self.at_keyword("NOT"):
                self.advance()
                is_not = True
            self.expect_keyword("NULL")
            return IsNull(operand, is_not)
        raise QueryError("expected a comparison, IN, BETWEEN, LIKE, or IS NULL", tok.pos)

    def operand(self) -> Expr:
        tok = self.peek()
        if tok.kind == "IDENT":
            alias = self.advance().text
            self.expect_op(".")
            column = self.expect_ident("column name").text
            return Column(alias, column)
        return self.literal()

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Literal(float(tok.text) if "." in tok.text else int(tok.text))
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            num = self.peek()
            if num.kind != "NUMBER":
                raise QueryError("expected a number after '-'", num.pos)
            self.advance()
            return Literal(-float(num.text) if "." in num.text else -int(num.text))
        if tok.kind == "STRING":
            self.advance()
            return Literal(_string_value(tok.text))
        if tok.kind == "KEYWORD" and tok.text.upper() == "NULL":
            self.advance()
            return Literal(None)
        raise QueryError("expected a column, number, string, or NULL", tok.pos)


def _string_value(token_text: str) -> str:
    return token_text[1:-1].replace("''", "'")


def parse_select(sql: str, extended: bool = False) -> SelectStatement:
    """Parse one SELECT statement.

    With ``extended`` set, derived tables and explicit JOIN steps (the
    forms the rewriter emits) are accepted as well.
    """
    return _Parser(sql, extended).parse()
