"""Small arithmetic-expression language for potentials and numeric config values.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?          # right-associative, binds tighter than unary minus
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are ``x`` (the grid coordinate) and the constants ``pi`` and ``e``.
Functions: sin, cos, exp, sqrt, abs. Evaluation is vectorised with numpy.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("x",)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, column: int, source: str):
        super().__init__(f"{message} at column {column}: {source!r}")
        self.column = column
        self.source = source


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Name, Unary, Binary, Call]


@dataclass
class _Tok:
    kind: str
    text: str
    col: int  # 1-based


def tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ParseError(f"unexpected character {src[col - 1]!r}", col, src)
        kind = m.lastgroup
        text = m.group(kind)
        col = m.start(kind) + 1
        if text == "**":
            text = "^"
        toks.append(_Tok(kind, text, col))
        pos = m.end()
    toks.append(_Tok("end", "", len(src) + 1))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.open_parens: list[int] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, message: str):
        t = self.tok
        if t.kind == "end" and self.open_parens:
            raise ParseError(f"{message}; unclosed '('", self.open_parens[-1], self.src)
        raise ParseError(message, t.col, self.src)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def group(self) -> Node:
        self.open_parens.append(self.advance().col)
        node = self.expr()
        if self.tok.text != ")":
            self.fail("expected ')'")
        self.advance()
        self.open_parens.pop()
        return node

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                if self.tok.text != "(":
                    self.fail(f"expected '(' after {t.text}")
                return Call(t.text, self.group())
            if t.text in CONSTANTS or t.text in VARIABLES:
                return Name(t.text)
            raise ParseError(f"unknown name {t.text!r}", t.col, self.src)
        if t.text == "(":
            return self.group()
        self.fail("expected a number, name or '('" if t.kind != "end" else "unexpected end of input")


def parse(src: str) -> Node:
    return _Parser(src).parse()


def evaluate(node: Node, x=None):
    """Evaluate with ``x`` bound to a scalar or numpy array (None forbids x).

    Arithmetic follows numpy float64 semantics: division by zero gives inf or
    nan instead of raising, and callers check finiteness.
    """
    with np.errstate(all="ignore"):
        return _eval(node, x)


def _eval(node: Node, x):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Name):
        if node.name in CONSTANTS:
            return np.float64(CONSTANTS[node.name])
        if x is None:
            raise EvaluationError("expression uses 'x' where a constant is required")
        return x
    if isinstance(node, Unary):
        v = _eval(node.operand, x)
        return -v if node.op == "-" else v
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, x))
    left, right = _eval(node.left, x), _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return np.divide(left, right)
    return np.power(left, right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def render(node: Node) -> str:
    """Render with the minimum parentheses needed to reparse to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Unary):
        inner = render(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"{node.op}{inner}"
    p = _PREC[node.op]
    left, right = render(node.left), render(node.right)
    if node.op == "^":
        # base must be an atom; exponent may be a unary or another power
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}" if p < 4 else f"{left}^{right}"


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["neg"]
    if isinstance(node, Num) and node.value < 0:
        return _PREC["neg"]
    return 5


def eval_constant(src) -> float:
    """A config number: either already numeric or an x-free expression string."""
    if isinstance(src, (int, float)):
        return float(src)
    value = evaluate(parse(str(src)))
    if not math.isfinite(value):
        raise EvaluationError(f"expression {src!r} is not finite")
    return float(value)
