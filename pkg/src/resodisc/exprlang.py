"""A small arithmetic expression language for forcings f(x, y) and
nonlinearities g(u).

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Names are the variables of the chosen variable set (``x, y, r, theta`` for
forcings, ``u`` for nonlinearities), the constant ``pi``, and the functions
``sin cos tan exp log sqrt abs`` (one argument), ``atan2(y, x)`` and
``besselj(n, x)`` whose first argument is a non-negative integer literal.

Evaluation is vectorised: bindings may be floats or numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .besselkit import bessel_j
from .errors import ResodiscError

__all__ = [
    "FORCING_VARIABLES",
    "NONLINEARITY_VARIABLES",
    "Expr",
    "ExprSyntaxError",
    "ExprDomainError",
    "Nonlinearity",
    "NonlinearityReport",
    "parse",
    "evaluate",
    "evaluate_polar",
    "pretty",
    "rotate_forcing",
    "substitute",
    "validate_nonlinearity",
]

FORCING_VARIABLES = frozenset({"x", "y", "r", "theta"})
NONLINEARITY_VARIABLES = frozenset({"u"})

CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "sqrt": 1, "abs": 1,
    "atan2": 2, "besselj": 2,
}


class ExprSyntaxError(ResodiscError, ValueError):
    """Lexical, parse, name or arity error, located by byte offset into the source."""

    def __init__(self, kind: str, message: str, offset: int, expected: frozenset = frozenset()):
        self.kind = kind
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{kind} at offset {offset}: {message}"
        if expected:
            detail += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(detail)


class ExprDomainError(ResodiscError, ArithmeticError):
    """Evaluation left the domain of an operation or produced a non-finite value."""

    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in `{subexpression}`")


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Const, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the variable set it was checked against."""

    root: Node
    variables: frozenset = field(compare=False)
    source: str = field(default="", compare=False)

    def __call__(self, **bindings):
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return pretty(self)

    def free_variables(self) -> frozenset:
        found = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                found.add(node.name)
            elif isinstance(node, Neg):
                stack.append(node.operand)
            elif isinstance(node, BinOp):
                stack.extend((node.left, node.right))
            elif isinstance(node, Call):
                stack.extend(node.args)
        return frozenset(found)


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        offset = len(source[:pos].encode("utf-8"))
        if match is None:
            raise ExprSyntaxError("lexical error", f"unexpected character {source[pos]!r}", offset)
        kind = match.lastgroup
        if kind != "ws":
            text = match.group()
            if kind == "num" and not math.isfinite(float(text)):
                raise ExprSyntaxError("lexical error", f"literal {text} overflows", offset)
            toks.append(_Tok(kind, text, offset))
        pos = match.end()
    toks.append(_Tok("end", "", len(source.encode("utf-8"))))
    return toks


# --- parser ----------------------------------------------------------------

_PRIMARY_START = frozenset({"number", "identifier", "'('", "'-'"})


class _Parser:
    def __init__(self, source: str, variables: frozenset):
        self.toks = _tokenize(source)
        self.i = 0
        self.variables = variables

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _is(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def _fail(self, expected) -> None:
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError("parse error", f"unexpected {found}", tok.offset, expected)

    def _expect(self, text: str) -> None:
        if not self._is(text):
            self._fail({f"'{text}'"})
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail({"operator", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._is("+") or self._is("-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self._is("*") or self._is("/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self._is("-"):
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self._is("^"):
            self.i += 1
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if self._is("("):
            self.i += 1
            node = self.expr()
            self._expect(")")
            return node
        if tok.kind == "name":
            self.i += 1
            if self._is("("):
                return self.call(tok)
            if tok.text in FUNCTIONS:
                self._fail({"'('"})
            if tok.text in self.variables:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            allowed = sorted(self.variables | set(CONSTANTS))
            raise ExprSyntaxError(
                "unknown identifier", f"{tok.text!r} (allowed: {', '.join(allowed)})", tok.offset
            )
        self._fail(_PRIMARY_START)

    def call(self, name_tok: _Tok) -> Node:
        name = name_tok.text
        if name not in FUNCTIONS:
            raise ExprSyntaxError("unknown identifier", f"no function named {name!r}", name_tok.offset)
        self._expect("(")
        args = [self.expr()]
        while self._is(","):
            self.i += 1
            args.append(self.expr())
        self._expect(")")
        arity = FUNCTIONS[name]
        if len(args) != arity:
            raise ExprSyntaxError(
                "arity mismatch", f"{name} takes {arity} argument(s), got {len(args)}", name_tok.offset
            )
        if name == "besselj":
            order = args[0]
            if not (isinstance(order, Num) and order.value.is_integer() and order.value >= 0):
                raise ExprSyntaxError(
                    "arity mismatch", "besselj order must be a non-negative integer literal",
                    name_tok.offset,
                )
        return Call(name, tuple(args))


def parse(source: str, variables=FORCING_VARIABLES) -> Expr:
    """Parse ``source`` against ``variables``; raises :class:`ExprSyntaxError`."""
    variables = frozenset(variables)
    root = _Parser(source, variables).parse()
    return Expr(root, variables, source)


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3
_ATOM_PREC = 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    return _ATOM_PREC


def _show(node: Node) -> str:
    if isinstance(node, Num):
        if node.value.is_integer() and abs(node.value) < 1e15:
            return str(int(node.value))
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_show(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = _show(node.operand)
        return "-" + (f"({inner})" if _prec(node.operand) < _UNARY_PREC else inner)
    p = _PREC[node.op]
    left, right = _show(node.left), _show(node.right)
    if node.op == "^":
        if _prec(node.left) < _ATOM_PREC:
            left = f"({left})"
        if _prec(node.right) < _UNARY_PREC:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}" if p == 1 else f"{left}{node.op}{right}"


def pretty(expr) -> str:
    """Canonical source text; re-parses to a structurally identical tree."""
    return _show(expr.root if isinstance(expr, Expr) else expr)


def substitute(expr: Expr, replacements: Mapping[str, str]) -> Expr:
    """Replace variables by expressions (given as source text over the same variables)."""
    parsed = {name: parse(src, expr.variables).root for name, src in replacements.items()}

    def walk(node: Node) -> Node:
        if isinstance(node, Var):
            return parsed.get(node.name, node)
        if isinstance(node, Neg):
            return Neg(walk(node.operand))
        if isinstance(node, BinOp):
            return BinOp(node.op, walk(node.left), walk(node.right))
        if isinstance(node, Call):
            return Call(node.name, tuple(walk(a) for a in node.args))
        return node

    root = walk(expr.root)
    return Expr(root, expr.variables, _show(root))


def rotate_forcing(f: Expr, sigma: float) -> Expr:
    """The forcing (r, theta) -> f(r, theta - sigma)."""
    c, s = repr(math.cos(sigma)), repr(math.sin(sigma))
    return substitute(f, {
        "x": f"{c}*x + {s}*y",
        "y": f"-{s}*x + {c}*y",
        "theta": f"theta - {sigma!r}",
    })


# --- evaluation ------------------------------------------------------------

def _finite(value, node: Node):
    if not np.all(np.isfinite(value)):
        raise ExprDomainError("non-finite result", _show(node))
    return value


def _eval(node: Node, env: Mapping):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return _finite(a + b, node)
        if node.op == "-":
            return _finite(a - b, node)
        if node.op == "*":
            return _finite(a * b, node)
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprDomainError("division by zero", _show(node))
            return _finite(a / b, node)
        base = np.asarray(a, dtype=float)
        expo = np.asarray(b, dtype=float)
        if np.any((base < 0) & (expo != np.round(expo))):
            raise ExprDomainError("negative base with non-integer exponent", _show(node))
        if np.any((base == 0) & (expo < 0)):
            raise ExprDomainError("zero raised to a negative power", _show(node))
        return _finite(np.power(base, expo), node)
    return _call(node, env)


def _call(node: Call, env: Mapping):
    name = node.name
    if name == "besselj":
        return bessel_j(int(node.args[0].value), _eval(node.args[1], env))
    args = [np.asarray(_eval(a, env), dtype=float) for a in node.args]
    if name == "atan2":
        return np.arctan2(args[0], args[1])
    (x,) = args
    if name == "log":
        if np.any(x <= 0):
            raise ExprDomainError("log of a non-positive number", _show(node))
        return np.log(x)
    if name == "sqrt":
        if np.any(x < 0):
            raise ExprDomainError("sqrt of a negative number", _show(node))
        return np.sqrt(x)
    func = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "abs": np.abs}[name]
    return _finite(func(x), node)


def evaluate(expr: Expr, bindings: Mapping):
    """Evaluate ``expr``; floats in give a float out, arrays broadcast.

    Raises
    ------
    KeyError
        If a variable of ``expr`` is not bound.
    ExprDomainError
        On a domain violation or a non-finite result.
    """
    missing = expr.free_variables() - set(bindings)
    if missing:
        raise KeyError(f"unbound variable(s): {', '.join(sorted(missing))}")
    scalar = all(np.ndim(v) == 0 for v in bindings.values())
    with np.errstate(all="ignore"):
        value = _eval(expr.root, bindings)
        value = _finite(np.asarray(value, dtype=float), expr.root)
    if scalar:
        return float(value)
    shape = np.broadcast_shapes(*(np.shape(v) for v in bindings.values()))
    return np.broadcast_to(value, shape)


def evaluate_polar(expr: Expr, r, theta):
    """Evaluate a forcing at polar points, binding x = r cos(theta), y = r sin(theta)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return evaluate(expr, {"x": r * np.cos(theta), "y": r * np.sin(theta), "r": r, "theta": theta})


# --- nonlinearities --------------------------------------------------------

@dataclass(frozen=True)
class Nonlinearity:
    """g(u) with its declared limits g(+inf) = ``g_plus`` and g(-inf) = ``g_minus``."""

    g: Expr
    g_plus: float
    g_minus: float

    def __post_init__(self):
        if not (math.isfinite(self.g_plus) and math.isfinite(self.g_minus)):
            raise ValueError("declared limits of g must be finite")
        if not self.g_minus < self.g_plus:
            raise ValueError(f"need g(-inf) < g(+inf), got {self.g_minus} >= {self.g_plus}")
        extra = self.g.free_variables() - NONLINEARITY_VARIABLES
        if extra:
            raise ValueError(f"g may only depend on u, found {sorted(extra)}")

    @classmethod
    def from_source(cls, source: str, g_plus: float, g_minus: float) -> "Nonlinearity":
        return cls(parse(source, NONLINEARITY_VARIABLES), float(g_plus), float(g_minus))

    @property
    def spread(self) -> float:
        return self.g_plus - self.g_minus

    def __call__(self, u):
        return evaluate(self.g, {"u": u})

    def derivative(self, u, rel_step: float = 1e-6):
        """Central-difference g'(u), pointwise."""
        u = np.asarray(u, dtype=float)
        h = rel_step * np.maximum(1.0, np.abs(u))
        return (self(u + h) - self(u - h)) / (2.0 * h)

    def lipschitz_estimate(self, lo: float = -10.0, hi: float = 10.0, samples: int = 4001) -> float:
        u = np.linspace(lo, hi, samples)
        gu = np.asarray(self(u))
        return float(np.max(np.abs(np.diff(gu)) / np.diff(u)))


@dataclass(frozen=True)
class NonlinearityReport:
    passed: bool
    bounds_ok: bool
    limits_ok: bool
    worst_u: float
    worst_excess: float
    limit_error_plus: float
    limit_error_minus: float
    messages: tuple[str, ...] = ()


def validate_nonlinearity(nl: Nonlinearity, limit_tol: float = 1e-6, u_max: float = 1e8,
                          samples: int = 2001, saturation: float = 1e6) -> NonlinearityReport:
    """Sampled check of g(-inf) < g(u) < g(+inf) and of the declared limits.

    ``u`` runs over a symmetric logarithmic grid up to ``|u| = u_max`` plus 0.
    A sample touching a bound counts as a violation only for
    ``|u| < saturation``; beyond that a strictly bounded g legitimately rounds
    onto its limit in double precision.
    """
    mags = np.logspace(-8, math.log10(u_max), samples)
    u = np.concatenate([-mags[::-1], [0.0], mags])
    messages = []
    try:
        gu = np.asarray(nl(u), dtype=float)
    except ExprDomainError as exc:
        return NonlinearityReport(False, False, False, math.nan, math.inf, math.inf, math.inf, (str(exc),))
    over = gu - nl.g_plus
    under = nl.g_minus - gu
    excess = np.maximum(over, under)
    touching = (excess == 0) & (np.abs(u) < saturation)
    bad = (excess > 0) | touching
    worst = int(np.argmax(excess))
    bounds_ok = not bool(np.any(bad))
    if not bounds_ok:
        first = u[np.argmax(bad)]
        messages.append(
            f"g leaves ({nl.g_minus}, {nl.g_plus}): worst excess {excess[worst]:.3e} at u={u[worst]:.6g}; "
            f"first violation at u={first:.6g}"
        )
    err_plus = abs(float(gu[-1]) - nl.g_plus)
    err_minus = abs(float(gu[0]) - nl.g_minus)
    limits_ok = err_plus <= limit_tol and err_minus <= limit_tol
    if not limits_ok:
        messages.append(
            f"declared limits not approached: |g({u_max:g}) - g_plus| = {err_plus:.3e}, "
            f"|g({-u_max:g}) - g_minus| = {err_minus:.3e} (tolerance {limit_tol:g})"
        )
    return NonlinearityReport(
        bounds_ok and limits_ok, bounds_ok, limits_ok, float(u[worst]), float(excess[worst]),
        err_plus, err_minus, tuple(messages),
    )
