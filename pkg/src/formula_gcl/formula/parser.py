"""Recursive-descent parser for a small LaTeX math subset.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | <juxtaposition>) factor)*
    factor := base ('^{' expr '}')? ('_{' expr '}')?
    base   := var | number | '(' expr ')' | '\\frac{' expr '}{' expr '}'
            | '\\sqrt{' expr '}' | func '(' expr ')'

Binary operators associate to the left.  Parentheses are kept in the tree as
``Group`` nodes so that :func:`unparse` can reproduce them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import FormulaSyntaxError

VARIABLE = "Variable"
NUMBER = "Number"
BINARY_OP = "BinaryOp"
UNARY_FUNC = "UnaryFunc"
FRACTION = "Fraction"
SQRT = "Sqrt"
GROUP = "Group"
SCRIPT = "Script"

FUNCTIONS = ("\\sin", "\\cos", "\\tan", "\\log", "\\exp")
GREEK = tuple(
    "\\" + name
    for name in (
        "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu "
        "nu xi pi rho sigma tau upsilon phi chi psi omega"
    ).split()
)
LATIN = tuple("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")

# lexeme of an implicit (juxtaposition) product
IMPLICIT = ""

_NUMBER_RE = re.compile(r"[0-9]+(?:\.[0-9]+)?")
_COMMAND_RE = re.compile(r"\\[A-Za-z]+")
_SINGLE = set("+-*^_{}()")


@dataclass(frozen=True)
class Ast:
    kind: str
    lexeme: str = ""
    children: tuple["Ast", ...] = ()

    # Script lexeme records which scripts are present: "^", "_" or "^_".
    @property
    def base(self) -> Ast:
        return self.children[0]

    @property
    def sup(self) -> Ast | None:
        return self.children[1] if "^" in self.lexeme else None

    @property
    def sub(self) -> Ast | None:
        return self.children[-1] if "_" in self.lexeme else None

    def __repr__(self) -> str:
        if not self.children:
            return f"{self.kind}({self.lexeme!r})"
        inner = ", ".join(repr(c) for c in self.children)
        return f"{self.kind}[{self.lexeme!r}]({inner})"


def var(name: str) -> Ast:
    return Ast(VARIABLE, name)


def num(value: str) -> Ast:
    return Ast(NUMBER, value)


def binop(op: str, left: Ast, right: Ast) -> Ast:
    return Ast(BINARY_OP, op, (left, right))


def script(base: Ast, sup: Ast | None = None, sub: Ast | None = None) -> Ast:
    if sup is None and sub is None:
        raise ValueError("script needs a superscript or a subscript")
    lexeme = ("^" if sup is not None else "") + ("_" if sub is not None else "")
    children = (base,) + tuple(c for c in (sup, sub) if c is not None)
    return Ast(SCRIPT, lexeme, children)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "var", "func", "frac", "sqrt", or the punctuation itself
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    byte = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            byte += len(c.encode())
            continue
        if c.isdigit():
            m = _NUMBER_RE.match(text, i)
            tokens.append(Token("num", m.group(), byte))
        elif c == "\\":
            m = _COMMAND_RE.match(text, i)
            if m is None:
                raise FormulaSyntaxError("bare backslash", byte, text)
            word = m.group()
            if word in GREEK:
                tokens.append(Token("var", word, byte))
            elif word in FUNCTIONS:
                tokens.append(Token("func", word, byte))
            elif word == "\\frac":
                tokens.append(Token("frac", word, byte))
            elif word == "\\sqrt":
                tokens.append(Token("sqrt", word, byte))
            else:
                raise FormulaSyntaxError(f"unknown command {word}", byte, text)
        elif c in _SINGLE:
            tokens.append(Token(c, c, byte))
        elif c.isascii() and c.isalpha():
            tokens.append(Token("var", c, byte))
        else:
            raise FormulaSyntaxError(f"unexpected character {c!r}", byte, text)
        consumed = len(tokens[-1].text)
        byte += len(text[i : i + consumed].encode())
        i += consumed
    return tokens


_FACTOR_START = {"num", "var", "func", "frac", "sqrt", "("}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def offset(self) -> int:
        tok = self.peek()
        return tok.offset if tok is not None else len(self.text.encode())

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = "end of input" if tok is None else repr(tok.text)
            raise FormulaSyntaxError(f"expected {kind!r}, found {found}", self.offset(), self.text)
        self.pos += 1
        return tok

    def parse(self) -> Ast:
        if not self.tokens:
            raise FormulaSyntaxError("empty formula", 0, self.text)
        node = self.expr()
        if self.peek() is not None:
            tok = self.peek()
            raise FormulaSyntaxError(f"unexpected {tok.text!r}", tok.offset, self.text)
        return node

    def expr(self) -> Ast:
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind in ("+", "-"):
            self.pos += 1
            node = binop(tok.kind, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.factor()
        while (tok := self.peek()) is not None:
            if tok.kind == "*":
                self.pos += 1
                node = binop("*", node, self.factor())
            elif tok.kind in _FACTOR_START:
                node = binop(IMPLICIT, node, self.factor())
            else:
                break
        return node

    def braced(self) -> Ast:
        self.expect("{")
        node = self.expr()
        self.expect("}")
        return node

    def factor(self) -> Ast:
        base = self.base()
        sup = sub = None
        tok = self.peek()
        if tok is not None and tok.kind == "^":
            self.pos += 1
            sup = self.braced()
            tok = self.peek()
        if tok is not None and tok.kind == "_":
            self.pos += 1
            sub = self.braced()
        if sup is None and sub is None:
            return base
        return script(base, sup, sub)

    def base(self) -> Ast:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", self.offset(), self.text)
        self.pos += 1
        if tok.kind == "var":
            return var(tok.text)
        if tok.kind == "num":
            return num(tok.text)
        if tok.kind == "(":
            inner = self.expr()
            self.expect(")")
            return Ast(GROUP, "()", (inner,))
        if tok.kind == "frac":
            top = self.braced()
            return Ast(FRACTION, tok.text, (top, self.braced()))
        if tok.kind == "sqrt":
            return Ast(SQRT, tok.text, (self.braced(),))
        if tok.kind == "func":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Ast(UNARY_FUNC, tok.text, (inner,))
        raise FormulaSyntaxError(f"unexpected {tok.text!r}", tok.offset, self.text)


def parse_formula(text: str) -> Ast:
    """Parse ``text`` into an :class:`Ast`; raises FormulaSyntaxError on bad input."""
    return _Parser(text).parse()


def unparse(node: Ast) -> str:
    """Deterministic pretty-printer; ``parse_formula(unparse(a)) == a``."""
    kind = node.kind
    if kind in (VARIABLE, NUMBER):
        return node.lexeme
    if kind == BINARY_OP:
        left, right = (unparse(c) for c in node.children)
        # juxtaposition always gets a space so "2 3" does not fuse into "23"
        op = " " if node.lexeme == IMPLICIT else node.lexeme
        return f"{left}{op}{right}"
    if kind == GROUP:
        return f"({unparse(node.children[0])})"
    if kind == UNARY_FUNC:
        return f"{node.lexeme}({unparse(node.children[0])})"
    if kind == FRACTION:
        return f"\\frac{{{unparse(node.children[0])}}}{{{unparse(node.children[1])}}}"
    if kind == SQRT:
        return f"\\sqrt{{{unparse(node.children[0])}}}"
    if kind == SCRIPT:
        out = unparse(node.base)
        if node.sup is not None:
            out += f"^{{{unparse(node.sup)}}}"
        if node.sub is not None:
            out += f"_{{{unparse(node.sub)}}}"
        return out
    raise ValueError(f"unknown node kind {kind!r}")


def walk(node: Ast):
    """Pre-order traversal."""
    yield node
    for child in node.children:
        yield from walk(child)
