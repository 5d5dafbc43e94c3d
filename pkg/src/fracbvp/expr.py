"""
Arithmetic expressions for user supplied nonlinearities f(t, u)

Grammar (whitespace insensitive, no implicit multiplication):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          right associative
    primary := number | 't' | 'u' | name '(' args ')' | '(' expr ')'

so that -u^2 == -(u^2), 2^-1 == 0.5 and 2^3^2 == 512. Parsing is done by
precedence climbing; evaluation uses numpy so that the same tree evaluates
on scalars or on whole sampling grids.
"""
import re
from typing import Callable, Dict, List, NamedTuple, Tuple, Union

import attr
import numpy as np

from fracbvp.errors import ArityError, ExprSyntaxError, UnknownIdentifierError

VARIABLES = ("t", "u")

# name -> (arity, implementation)
FUNCTIONS: Dict[str, Tuple[int, Callable]] = {
    "exp": (1, np.exp),
    "log": (1, np.log),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "sqrt": (1, np.sqrt),
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

# binary operator -> (precedence, associativity)
BINARY_OPERATORS = {
    "+": (1, "left"),
    "-": (1, "left"),
    "*": (2, "left"),
    "/": (2, "left"),
    "^": (3, "right"),
}
# the operand of unary minus still takes a following '^'
UNARY_MINUS_PREC = BINARY_OPERATORS["^"][0]

BINARY_IMPLS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

RE_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),−])
""", re.VERBOSE)


@attr.s(slots=True, frozen=True)
class Number:
    """Numeric literal."""
    value: float = attr.ib(converter=float)


@attr.s(slots=True, frozen=True)
class Variable:
    """The variable t or u."""
    name: str = attr.ib()


@attr.s(slots=True, frozen=True)
class Neg:
    """Unary minus."""
    operand: "ExprAst" = attr.ib()


@attr.s(slots=True, frozen=True)
class BinOp:
    """Binary operation; `op` is one of + - * / ^."""
    op: str = attr.ib()
    left: "ExprAst" = attr.ib()
    right: "ExprAst" = attr.ib()


@attr.s(slots=True, frozen=True)
class Call:
    """Call of a built-in function."""
    name: str = attr.ib()
    args: Tuple["ExprAst", ...] = attr.ib(converter=tuple)


ExprAst = Union[Number, Variable, Neg, BinOp, Call]


class Token(NamedTuple):
    """Lexical token with the byte offset it starts at."""
    kind: str
    text: str
    offset: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> List[Token]:
    """Split `source` into tokens, dropping whitespace."""
    tokens: List[Token] = []
    index = 0
    while index < len(source):
        match = RE_TOKEN.match(source, index)
        if match is None:
            raise ExprSyntaxError(
                "unexpected character {!r}".format(source[index]),
                _byte_offset(source, index))
        kind = match.lastgroup
        text = match.group()
        if kind != "space":
            if text == "−":
                text = "-"
            tokens.append(Token(kind, text, _byte_offset(source, index)))
        index = match.end()
    tokens.append(Token("end", "", _byte_offset(source, len(source))))
    return tokens


class _Parser:
    """Precedence climbing over a token list."""

    def __init__(self, tokens: List[Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> Token:
        return self._tokens[self._pos]

    def _advance(self) -> Token:
        token = self._tokens[self._pos]
        if token.kind != "end":
            self._pos += 1
        return token

    def _expect(self, text: str) -> Token:
        token = self._advance()
        if token.text != text or token.kind == "end":
            raise ExprSyntaxError(
                "expected {!r}, got {!r}".format(text, token.text or "end of input"),
                token.offset)
        return token

    def parse(self) -> ExprAst:
        result = self._parse_expr(0)
        token = self._peek()
        if token.kind != "end":
            raise ExprSyntaxError(
                "unexpected token {!r}".format(token.text), token.offset)
        return result

    def _parse_expr(self, min_prec: int) -> ExprAst:
        lhs = self._parse_prefix()
        while True:
            token = self._peek()
            if token.kind != "op" or token.text not in BINARY_OPERATORS:
                return lhs
            prec, assoc = BINARY_OPERATORS[token.text]
            if prec < min_prec:
                return lhs
            self._advance()
            next_prec = prec + 1 if assoc == "left" else prec
            rhs = self._parse_expr(next_prec)
            lhs = BinOp(token.text, lhs, rhs)

    def _parse_prefix(self) -> ExprAst:
        token = self._advance()
        if token.kind == "op" and token.text == "-":
            return Neg(self._parse_expr(UNARY_MINUS_PREC))
        if token.kind == "number":
            if not np.isfinite(float(token.text)):
                raise ExprSyntaxError(
                    "number {!r} is not finite".format(token.text), token.offset)
            return Number(token.text)
        if token.kind == "name":
            if self._peek().text == "(":
                return self._parse_call(token)
            if token.text not in VARIABLES:
                raise UnknownIdentifierError(
                    "unknown variable {!r}".format(token.text), token.offset)
            return Variable(token.text)
        if token.kind == "op" and token.text == "(":
            inner = self._parse_expr(0)
            self._expect(")")
            return inner
        raise ExprSyntaxError(
            "unexpected {!r}".format(token.text or "end of input"), token.offset)

    def _parse_call(self, name: Token) -> ExprAst:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(
                "unknown function {!r}".format(name.text), name.offset)
        self._expect("(")
        args = []
        if self._peek().text != ")":
            args.append(self._parse_expr(0))
            while self._peek().text == ",":
                self._advance()
                args.append(self._parse_expr(0))
        self._expect(")")
        arity = FUNCTIONS[name.text][0]
        if len(args) != arity:
            raise ArityError(
                "{} takes {} argument(s), got {}".format(name.text, arity, len(args)),
                name.offset)
        return Call(name.text, args)


def parse(source: str) -> ExprAst:
    """Parse `source` into an expression tree.

    Raises:
        ExprSyntaxError, UnknownIdentifierError, ArityError: with the byte
            offset of the offending token.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(tokenize(source)).parse()


def evaluate(ast: ExprAst, t, u):
    """Evaluate `ast` at (t, u) with IEEE double semantics.

    Division by zero gives inf and invalid operations give nan; callers
    decide what to do with non-finite values. Scalars in give a float out,
    arrays broadcast.
    """
    with np.errstate(all="ignore"):
        result = _evaluate(ast, np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    result = np.asarray(result, dtype=float)
    return float(result) if result.ndim == 0 else result


def _evaluate(ast: ExprAst, t: np.ndarray, u: np.ndarray):
    if isinstance(ast, Number):
        return np.float64(ast.value)
    if isinstance(ast, Variable):
        return t if ast.name == "t" else u
    if isinstance(ast, Neg):
        return np.negative(_evaluate(ast.operand, t, u))
    if isinstance(ast, BinOp):
        return BINARY_IMPLS[ast.op](
            _evaluate(ast.left, t, u), _evaluate(ast.right, t, u))
    if isinstance(ast, Call):
        func = FUNCTIONS[ast.name][1]
        return func(*(_evaluate(arg, t, u) for arg in ast.args))
    raise TypeError("not an expression node: {!r}".format(ast))


def to_source(ast: ExprAst) -> str:
    """Canonical, fully parenthesised source; parse(to_source(a)) == a."""
    if isinstance(ast, Number):
        return repr(ast.value)
    if isinstance(ast, Variable):
        return ast.name
    if isinstance(ast, Neg):
        return "(-{})".format(to_source(ast.operand))
    if isinstance(ast, BinOp):
        return "({} {} {})".format(to_source(ast.left), ast.op, to_source(ast.right))
    if isinstance(ast, Call):
        return "{}({})".format(ast.name, ", ".join(to_source(arg) for arg in ast.args))
    raise TypeError("not an expression node: {!r}".format(ast))
