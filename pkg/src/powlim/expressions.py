"""Parser and evaluator for scalar coefficient expressions.

The coefficient functions of an affine matrix family are given as strings in
a small arithmetic grammar:

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          -- right associative
    atom    := NUMBER | PARAM | FUNC '(' expr ')' | '(' expr ')'

NUMBER is a decimal literal (optional fraction and exponent), PARAM is one of
``mu1`` ... ``mu99`` (1-based parameter components), FUNC is one of ``exp``,
``cos``, ``sin``, ``sqrt``. Binding strength from tightest to loosest:
``^``, unary ``-``, ``*`` ``/``, ``+`` ``-``; so ``-mu1^2`` means
``-(mu1^2)``.

Evaluation is vectorized: calling a parsed expression with an array of
parameter vectors of shape (n, r) returns n values at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

MAX_PARAM_INDEX = 99

_FUNCTIONS = {"exp": np.exp, "cos": np.cos, "sin": np.sin, "sqrt": np.sqrt}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class ExpressionError(ValueError):
    """Malformed coefficient expression; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None or match.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            raise ExpressionError(f"unexpected character {stripped[0]!r}", len(src) - len(stripped))
        if match.lastgroup == "num":
            tokens.append(("num", match.group("num"), match.start("num")))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r}", offset)
        self.advance()

    def parse(self):
        tree = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExpressionError(f"trailing input {value!r}", offset)
        return tree

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if value == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.factor()
                node = ("mul" if value == "*" else "div", node, rhs)
            else:
                return node

    def factor(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return ("neg", self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            # right associative; the exponent may carry its own unary minus
            return ("pow", base, self.factor())
        return base

    def atom(self):
        kind, value, offset = self.advance()
        if kind == "num":
            return ("num", float(value))
        if kind == "ident":
            if value in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ("call", value, arg)
            param = re.fullmatch(r"mu(\d+)", value)
            if param:
                index = int(param.group(1))
                if index == 0 or index > MAX_PARAM_INDEX:
                    raise ExpressionError(
                        f"parameter index {index} out of range 1..{MAX_PARAM_INDEX}", offset
                    )
                return ("param", index - 1)
            raise ExpressionError(f"unknown identifier {value!r}", offset)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError("expected a number, parameter, function or '('", offset)


def _evaluate(node, mu: np.ndarray):
    op = node[0]
    if op == "num":
        return np.full(mu.shape[:-1], node[1]) if mu.ndim > 1 else node[1]
    if op == "param":
        return mu[..., node[1]]
    if op == "neg":
        return -_evaluate(node[1], mu)
    if op == "call":
        return _FUNCTIONS[node[1]](_evaluate(node[2], mu))
    a = _evaluate(node[1], mu)
    b = _evaluate(node[2], mu)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        return a**b
    raise AssertionError(f"unhandled node {op!r}")


_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _to_text(node, parent_prec: int = 0, right_of: str | None = None) -> str:
    op = node[0]
    if op == "num":
        return repr(node[1])
    if op == "param":
        return f"mu{node[1] + 1}"
    if op == "call":
        return f"{node[1]}({_to_text(node[2])})"
    prec = _PRECEDENCE[op]
    if op == "neg":
        text = f"-{_to_text(node[1], prec)}"
    elif op == "pow":
        # right associative: parenthesize a nested pow on the left
        text = f"{_to_text(node[1], prec + 1)}^{_to_text(node[2], prec, 'pow')}"
    else:
        symbol = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[op]
        # left associative: the right child needs parens at equal precedence
        text = f"{_to_text(node[1], prec)}{symbol}{_to_text(node[2], prec + 1)}"
    if prec < parent_prec:
        return f"({text})"
    return text


def _max_param(node) -> int:
    op = node[0]
    if op == "num":
        return 0
    if op == "param":
        return node[1] + 1
    if op in ("neg",):
        return _max_param(node[1])
    if op == "call":
        return _max_param(node[2])
    return max(_max_param(node[1]), _max_param(node[2]))


@dataclass(frozen=True)
class CoeffExpr:
    """A parsed coefficient expression.

    Calling the object evaluates it: ``expr(mu)`` with ``mu`` of shape (r,)
    gives a scalar, shape (n, r) gives n values. ``text`` is the canonical
    printed form, which reparses to an identically evaluating tree.
    """

    tree: tuple = field(repr=False)
    text: str = ""
    max_param: int = 0

    def __call__(self, mu) -> np.ndarray | float:
        mu = np.asarray(mu, dtype=float)
        if mu.ndim == 0:
            mu = mu[None]
        if mu.shape[-1] < self.max_param:
            raise ValueError(
                f"expression references mu{self.max_param}, got {mu.shape[-1]} components"
            )
        value = _evaluate(self.tree, mu)
        if np.ndim(value) == 0:
            return float(value)
        return np.asarray(value, dtype=float)

    def __str__(self) -> str:
        return self.text


def parse_expression(src: str) -> CoeffExpr:
    """Parse a coefficient expression string.

    Raises ExpressionError (with byte offset) on malformed input, unknown
    identifiers, or parameter indices outside 1..99.
    """
    if not src or not src.strip():
        raise ExpressionError("empty expression", 0)
    tree = _Parser(src).parse()
    return CoeffExpr(tree=tree, text=_to_text(tree), max_param=_max_param(tree))


def check_on_box(expr: CoeffExpr, box, n_probe: int = 256, seed: int = 0) -> None:
    """Probe an expression over a parameter box; raise on non-finite values.

    Catches division-by-zero and sqrt-of-negative domains before any offline
    run touches them. Probes the box corners (when affordable) plus a seeded
    uniform sample.
    """
    lows = np.asarray(box.lows, dtype=float)
    highs = np.asarray(box.highs, dtype=float)
    r = lows.size
    points = [np.random.default_rng(seed).uniform(lows, highs, size=(n_probe, r))]
    if r <= 12:
        grid = np.stack(np.meshgrid(*[(lo, hi) for lo, hi in zip(lows, highs)], indexing="ij"), -1)
        points.append(grid.reshape(-1, r))
    values = expr(np.concatenate(points, axis=0))
    if not np.all(np.isfinite(values)):
        raise ValueError(f"expression {expr.text!r} is non-finite on the parameter box")
