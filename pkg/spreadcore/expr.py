"""Parse and evaluate the expressions that define habitat coefficients.

Grammar, loosest binding first::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-2^2`` is
``-(2^2)``. Functions: ``sin cos exp tanh abs`` (one argument) and ``min max``
(two or more). ``pi`` is the only constant.

"""
import logging
import math
import re
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import (
    ExprSyntaxError,
    NonFiniteResult,
    UnboundVariable,
    UnknownIdentifier,
)

log = logging.getLogger(__package__)

CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "abs": (1, np.abs),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "max": (2, np.maximum),
    "min": (2, np.minimum),
    "sin": (1, np.sin),
    "tanh": (1, np.tanh),
}
BINARY_OPERATORS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class Expr(object):
    """Base class of the immutable expression tree."""

    def __str__(self):
        """Return the fully parenthesized text of the expression."""
        return to_text(self)

    def evaluate(self, ctx=None):
        """Evaluate the expression. See :func:`evaluate`."""
        return evaluate(self, ctx)

    @property
    def free_vars(self):
        """Return the names this expression needs bound."""
        return free_vars(self)


@dataclass(frozen=True)
class Number(Expr):
    value: float


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class Constant(Expr):
    name: str


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinaryOp(Expr):
    operator: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    function: str
    arguments: tuple


class _Parser(object):
    def __init__(self, text, names):
        self.text = text
        self.names = names
        self.tokens = list(self._tokenize(text))
        self.index = 0

    def _offset(self, position):
        return len(self.text[:position].encode("utf-8"))

    def _tokenize(self, text):
        position = 0
        stripped_end = len(text.rstrip())
        while position < stripped_end:
            match = _TOKEN.match(text, position)
            if match is None or match.end() == position:
                rest = text[position:]
                offset = position + len(rest) - len(rest.lstrip())
                raise ExprSyntaxError(
                    text, self._offset(offset), f"unexpected character {text[offset]!r}"
                )
            kind = match.lastgroup
            yield kind, match.group(kind), self._offset(match.start(kind))
            position = match.end()
        yield "end", "", self._offset(len(text))

    def _peek(self):
        return self.tokens[self.index]

    def _advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, value):
        kind, text, offset = self._advance()
        if text != value or kind != "op":
            found = repr(text) if kind != "end" else "end of input"
            raise ExprSyntaxError(
                self.text, offset, f"expected {value!r}, found {found}"
            )

    def parse(self):
        tree = self._expr()
        kind, text, offset = self._peek()
        if kind != "end":
            raise ExprSyntaxError(self.text, offset, f"unexpected {text!r}")
        return tree

    def _expr(self):
        tree = self._term()
        while self._peek()[1] in ("+", "-") and self._peek()[0] == "op":
            operator = self._advance()[1]
            tree = BinaryOp(operator, tree, self._term())
        return tree

    def _term(self):
        tree = self._unary()
        while self._peek()[1] in ("*", "/") and self._peek()[0] == "op":
            operator = self._advance()[1]
            tree = BinaryOp(operator, tree, self._unary())
        return tree

    def _unary(self):
        if self._peek()[0] == "op" and self._peek()[1] == "-":
            self._advance()
            return Negate(self._unary())
        return self._power()

    def _power(self):
        base = self._atom()
        if self._peek()[0] == "op" and self._peek()[1] == "^":
            self._advance()
            return BinaryOp("^", base, self._unary())
        return base

    def _atom(self):
        kind, text, offset = self._advance()
        if kind == "number":
            return Number(float(text))
        if kind == "name":
            return self._name(text, offset)
        if kind == "op" and text == "(":
            tree = self._expr()
            self._expect(")")
            return tree
        found = repr(text) if kind != "end" else "end of input"
        raise ExprSyntaxError(self.text, offset, f"expected a value, found {found}")

    def _name(self, text, offset):
        is_call = self._peek()[0] == "op" and self._peek()[1] == "("
        if text in FUNCTIONS:
            if not is_call:
                raise UnknownIdentifier(text, offset)
            self._advance()
            arguments = [self._expr()]
            while self._peek()[0] == "op" and self._peek()[1] == ",":
                self._advance()
                arguments.append(self._expr())
            self._expect(")")
            arity = FUNCTIONS[text][0]
            if len(arguments) < arity or (arity == 1 and len(arguments) > 1):
                raise ExprSyntaxError(
                    self.text, offset, f"wrong number of arguments to {text}"
                )
            return Call(text, tuple(arguments))
        if is_call:
            raise UnknownIdentifier(text, offset)
        if text in CONSTANTS:
            return Constant(text)
        if self.names is not None and text not in self.names:
            raise UnknownIdentifier(text, offset)
        return Name(text)


def parse(text, names=None):
    """Return the expression tree for ``text``.

    :param text: The expression source.
    :param names: (Optional) The variable and parameter names the expression
        may use. When given, any other name raises :class:`.UnknownIdentifier`.

    """
    if not text or not text.strip():
        raise ExprSyntaxError(text or "", 0, "empty expression")
    return _Parser(text, names).parse()


def to_text(expr):
    """Return fully parenthesized text that parses back to an equal value."""
    if isinstance(expr, Number):
        text = repr(float(expr.value))
        return f"({text})" if text.startswith("-") else text
    if isinstance(expr, (Name, Constant)):
        return expr.name
    if isinstance(expr, Negate):
        return f"(-{to_text(expr.operand)})"
    if isinstance(expr, BinaryOp):
        return f"({to_text(expr.left)} {expr.operator} {to_text(expr.right)})"
    arguments = ", ".join(to_text(argument) for argument in expr.arguments)
    return f"{expr.function}({arguments})"


def free_vars(expr):
    """Return the set of names ``expr`` needs bound."""
    if isinstance(expr, Name):
        return frozenset((expr.name,))
    if isinstance(expr, Negate):
        return free_vars(expr.operand)
    if isinstance(expr, BinaryOp):
        return free_vars(expr.left) | free_vars(expr.right)
    if isinstance(expr, Call):
        return frozenset().union(*(free_vars(arg) for arg in expr.arguments))
    return frozenset()


def _evaluate(expr, ctx):
    if isinstance(expr, Number):
        value = expr.value
    elif isinstance(expr, Constant):
        value = CONSTANTS[expr.name]
    elif isinstance(expr, Name):
        try:
            value = ctx[expr.name]
        except KeyError:
            raise UnboundVariable(expr.name)
    elif isinstance(expr, Negate):
        value = np.negative(_evaluate(expr.operand, ctx))
    elif isinstance(expr, BinaryOp):
        left = _evaluate(expr.left, ctx)
        right = _evaluate(expr.right, ctx)
        value = BINARY_OPERATORS[expr.operator](left, right)
    else:
        function = FUNCTIONS[expr.function][1]
        arguments = [_evaluate(argument, ctx) for argument in expr.arguments]
        value = reduce(function, arguments) if len(arguments) > 1 else function(
            arguments[0]
        )
    if not np.all(np.isfinite(value)):
        raise NonFiniteResult(to_text(expr))
    return value


def evaluate(expr, ctx=None):
    """Evaluate ``expr`` with the bindings in ``ctx``.

    Bindings may be floats or numpy arrays; array bindings broadcast and the
    result is an array. A sub-expression producing an infinity or NaN raises
    :class:`.NonFiniteResult` naming the innermost such sub-expression, which
    covers division by zero, overflow and fractional powers of negative
    numbers.

    :param expr: The expression tree.
    :param ctx: (Optional) Mapping from names to values.

    """
    with np.errstate(all="ignore"):
        value = _evaluate(expr, ctx or {})
    if np.ndim(value) == 0:
        return float(value)
    return value
