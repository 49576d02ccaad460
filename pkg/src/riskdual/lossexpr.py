"""Small arithmetic expression language for user-defined losses.

Grammar (whitespace-insensitive, ``^`` right-associative, ``^`` binds
tighter than unary minus, which binds tighter than ``* /``, which bind
tighter than ``+ -``)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?
    atom    := NUMBER | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``y`` (the label) and ``z1 .. zk`` (action components).
Functions: abs, max, min, exp, log, sin, cos, relu.  All parse failures
raise positioned errors; evaluation raises :class:`EvalError` whenever the
result would leave the reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ArityError, EvalError, ExprSyntaxError, UnknownIdentifier

FUNCTIONS = {"abs": 1, "max": 2, "min": 2, "exp": 1, "log": 1, "sin": 1, "cos": 1, "relu": 1}

MAX_DEPTH = 200


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str         # "y" or "z<i>"
    index: int        # 0 for y, 1-based action component otherwise


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Node", ...]


Node = Union[Num, Var, Neg, Bin, Call]


@dataclass(frozen=True)
class _Token:
    kind: str     # num ident op end
    text: str
    line: int
    col: int
    value: float = 0.0


_DIGITS = "0123456789"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        # only ASCII digits start a number (str.isdigit also accepts e.g. superscripts)
        if ch in _DIGITS or (ch == "." and i + 1 < n and text[i + 1] in _DIGITS):
            start, start_col = i, col
            while i < n and text[i] in _DIGITS:
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i] in _DIGITS:
                    i += 1
            lit = text[start:i]
            col += i - start
            tokens.append(_Token("num", lit, line, start_col, value=float(lit)))
            continue
        if ch.isalpha() or ch == "_":
            start, start_col = i, col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            col += i - start
            tokens.append(_Token("ident", text[start:i], line, start_col))
            continue
        if ch in "+-*/^(),":
            tokens.append(_Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.advance()
        found = repr(tok.text) if tok.text else "end of input"
        raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.line, tok.col)

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            tok = self.peek()
            raise ExprSyntaxError("expression too deeply nested", tok.line, tok.col)

    def _leave(self):
        self.depth -= 1

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
        return node

    def expr(self) -> Node:
        self._enter()
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        self._leave()
        return node

    def term(self) -> Node:
        self._enter()
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Bin(op, node, self.factor())
        self._leave()
        return node

    def factor(self) -> Node:
        self._enter()
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            node: Node = Neg(self.factor())
        else:
            node = self.power()
        self._leave()
        return node

    def power(self) -> Node:
        self._enter()
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            base = Bin("^", base, self.factor())
        self._leave()
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(tok.value)
        if tok.kind == "ident":
            self.advance()
            if self.peek().kind == "op" and self.peek().text == "(":
                return self.call(tok)
            return self.variable(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        found = repr(tok.text) if tok.text else "end of input"
        raise ExprSyntaxError(
            f"expected a number, variable or '(', found {found}", tok.line, tok.col
        )

    def call(self, name: _Token) -> Node:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name.text!r}", name.line, name.col)
        self.expect_op("(")
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.expr())
        self.expect_op(")")
        want = FUNCTIONS[name.text]
        if len(args) != want:
            raise ArityError(
                f"{name.text} takes {want} argument(s), got {len(args)}", name.line, name.col
            )
        return Call(name.text, tuple(args))

    def variable(self, tok: _Token) -> Node:
        if tok.text == "y":
            return Var("y", 0)
        if tok.text.startswith("z") and tok.text[1:].isdigit():
            idx = int(tok.text[1:])
            if idx >= 1:
                return Var(tok.text, idx)
        raise UnknownIdentifier(f"unknown identifier {tok.text!r}", tok.line, tok.col)


def parse_loss_expr(text: str) -> Node:
    """Parse expression text into an AST; raises positioned errors on failure."""
    return _Parser(_tokenize(text)).parse()


def max_action_index(node: Node) -> int:
    """Largest action component referenced (0 when only ``y`` and constants appear)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Neg):
        return max_action_index(node.operand)
    if isinstance(node, Bin):
        return max(max_action_index(node.left), max_action_index(node.right))
    if isinstance(node, Call):
        return max((max_action_index(a) for a in node.args), default=0)
    return 0


_CALLS = {
    "abs": abs,
    "max": max,
    "min": min,
    "sin": math.sin,
    "cos": math.cos,
    "relu": lambda v: v if v > 0.0 else 0.0,
}


def evaluate(node: Node, action: Sequence[float], y: float) -> float:
    """Evaluate the AST at an action vector and a label value."""
    result = _eval(node, action, y)
    if not math.isfinite(result):
        raise EvalError("expression evaluated to a non-finite value")
    return result


def _eval(node: Node, action: Sequence[float], y: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.index == 0:
            return float(y)
        if node.index > len(action):
            raise EvalError(
                f"expression references z{node.index} but actions have {len(action)} component(s)"
            )
        return float(action[node.index - 1])
    if isinstance(node, Neg):
        return -_eval(node.operand, action, y)
    if isinstance(node, Bin):
        lhs = _eval(node.left, action, y)
        rhs = _eval(node.right, action, y)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        if node.op == "/":
            if rhs == 0.0:
                raise EvalError("division by zero")
            return lhs / rhs
        try:
            out = math.pow(lhs, rhs)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"invalid power {lhs!r} ^ {rhs!r}") from exc
        return out
    if isinstance(node, Call):
        args = [_eval(a, action, y) for a in node.args]
        if node.func == "exp":
            try:
                return math.exp(args[0])
            except OverflowError as exc:
                raise EvalError("exp overflow") from exc
        if node.func == "log":
            if args[0] <= 0.0:
                raise EvalError(f"log of nonpositive value {args[0]!r}")
            return math.log(args[0])
        return float(_CALLS[node.func](*args))
    raise EvalError(f"unknown AST node {node!r}")  # pragma: no cover


def to_text(node: Node) -> str:
    """Render an AST back to (fully parenthesized) expression text."""
    if isinstance(node, Num):
        return f"{node.value:g}"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Bin):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_text(a) for a in node.args)})"
    raise EvalError(f"unknown AST node {node!r}")  # pragma: no cover
