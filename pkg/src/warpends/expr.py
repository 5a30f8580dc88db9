"""Warp expressions: parsing, exact differentiation and evaluation.

A small infix language for closed-form warp functions ``phi(omega, r)``::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

``^`` is right-associative. Note that ``-2^2`` parses as ``(-2)^2`` because the
unary minus binds to the atom.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np

__all__ = [
    "WarpError",
    "WarpSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "DomainError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "WarpExpr",
    "WarpField",
    "parse_warp",
    "differentiate",
    "serialize",
    "evaluate",
    "FUNCTIONS",
    "COORDS",
]

#: Cross-section coordinate names by cross-section kind.
COORDS = {"radial": (), "circle": ("theta",), "torus": ("u", "v")}

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "log", "sqrt", "abs", "sign")
CONSTANTS = {"pi": math.pi}


class WarpError(ValueError):
    """Base class for expression errors."""


class WarpSyntaxError(WarpError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(WarpError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(WarpError):
    pass


class DomainError(WarpError, ArithmeticError):
    """Evaluation left the domain of an operation; ``subexpr`` names it."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Num | Var | Neg | BinOp | Call

ZERO = Num(0.0)
ONE = Num(1.0)


# -- tokenizer / parser -------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise WarpSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, coords: Sequence[str]):
        self.text = text
        self.coords = set(coords) | {"r"}
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.peek()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise WarpSyntaxError(f"expected {value!r}, found {what}", off)
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise WarpSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def unary(self) -> Node:
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(val, off)
                self.take()
                if self.peek()[1] == ")":
                    raise ArityError(f"{val}() expects 1 argument, got 0 (offset {off})")
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ArityError(
                        f"{val}() expects 1 argument, got more (offset {self.peek()[2]})"
                    )
                self.expect(")")
                return Call(val, arg)
            if val in self.coords:
                return Var(val)
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            if val in FUNCTIONS:
                raise ArityError(f"function '{val}' used without argument (offset {off})")
            raise UnknownIdentifierError(val, off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise WarpSyntaxError(f"unexpected {what}", off)


@dataclass(frozen=True)
class WarpExpr:
    """A parsed expression together with the coordinate names it may use."""

    ast: Node
    coords: tuple[str, ...] = ()

    def __str__(self) -> str:
        return serialize(self.ast)

    @property
    def variables(self) -> set[str]:
        return _free_vars(self.ast)

    def depends_on(self, name: str) -> bool:
        return name in self.variables


def parse_warp(text: str, coords: Sequence[str] = ()) -> WarpExpr:
    """Parse ``text`` into a :class:`WarpExpr` over ``r`` and ``coords``.

    Raises
    ------
    WarpSyntaxError
        Malformed input; ``offset`` is the character position.
    UnknownIdentifierError
        A name that is neither ``r``, a declared coordinate nor a function.
    ArityError
        A function applied to other than exactly one argument.
    """
    return WarpExpr(_Parser(text, coords).parse(), tuple(coords))


def _free_vars(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return _free_vars(node.arg)
    return _free_vars(node.left) | _free_vars(node.right)


# -- serialization ------------------------------------------------------------


def serialize(node: Node | WarpExpr) -> str:
    """Fully parenthesised text that parses back to the same AST."""
    if isinstance(node, WarpExpr):
        node = node.ast
    if isinstance(node, Num):
        if node.value < 0:
            return f"(-{_fmt(-node.value)})"
        return _fmt(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = serialize(node.arg)
        if isinstance(node.arg, Num) and node.arg.value < 0:
            inner = f"({inner})"
        return f"(-{inner})"
    if isinstance(node, Call):
        return f"{node.func}({serialize(node.arg)})"
    return f"({serialize(node.left)} {node.op} {serialize(node.right)})"


def _fmt(x: float) -> str:
    s = repr(float(x))
    if "inf" in s or "nan" in s:
        raise WarpError(f"non-finite constant {s}")
    return s


# -- differentiation ----------------------------------------------------------
# Constructors fold the trivial 0/1 cases so derivative trees stay readable;
# no other simplification is attempted.


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def _add(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return BinOp("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return BinOp("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def _neg(a: Node) -> Node:
    if _is(a, 0):
        return ZERO
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _d(node: Node, var: str) -> Node:
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return _neg(_d(node.arg, var))
    if isinstance(node, Call):
        a = node.arg
        da = _d(a, var)
        if _is(da, 0):
            return ZERO
        f = node.func
        if f == "sin":
            outer = Call("cos", a)
        elif f == "cos":
            outer = _neg(Call("sin", a))
        elif f == "sinh":
            outer = Call("cosh", a)
        elif f == "cosh":
            outer = Call("sinh", a)
        elif f == "exp":
            outer = node
        elif f == "log":
            return _div(da, a)
        elif f == "sqrt":
            return _div(da, _mul(Num(2.0), node))
        elif f == "abs":
            outer = Call("sign", a)
        elif f == "sign":
            # derivative is zero wherever sign itself is defined
            return ZERO
        else:  # pragma: no cover - parser rejects unknown functions
            raise UnknownIdentifierError(f, -1)
        return _mul(outer, da)
    a, b = node.left, node.right
    da, db = _d(a, var), _d(b, var)
    op = node.op
    if op == "+":
        return _add(da, db)
    if op == "-":
        return _sub(da, db)
    if op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), BinOp("^", b, Num(2.0)))
    # power
    if var not in _free_vars(b):
        if _is(da, 0):
            return ZERO
        if isinstance(b, Num):
            e = b.value - 1.0
            lowered = Num(e) if e >= 0 else Neg(Num(-e))
        else:
            lowered = _sub(b, ONE)
        return _mul(_mul(b, BinOp("^", a, lowered)), da)
    # general case: a^b * (b' log a + b a'/a)
    return _mul(node, _add(_mul(db, Call("log", a)), _div(_mul(b, da), a)))


def differentiate(expr: WarpExpr, var: str) -> WarpExpr:
    """Exact symbolic partial derivative of ``expr`` with respect to ``var``."""
    if var != "r" and var not in expr.coords:
        raise WarpError(f"'{var}' is not a declared coordinate of {expr.coords}")
    return WarpExpr(_d(expr.ast, var), expr.coords)


# -- evaluation ---------------------------------------------------------------


def _check(ok, message: str, node: Node):
    if not np.all(ok):
        raise DomainError(message, serialize(node))


def _eval_np(node: Node, env: Mapping[str, np.ndarray]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval_np(node.arg, env)
    if isinstance(node, Call):
        x = _eval_np(node.arg, env)
        f = node.func
        if f == "log":
            _check(np.asarray(x) > 0, "log of non-positive argument", node)
            return np.log(x)
        if f == "sqrt":
            _check(np.asarray(x) >= 0, "sqrt of negative argument", node)
            return np.sqrt(x)
        if f == "sign":
            _check(np.asarray(x) != 0, "sign (derivative of abs) undefined at 0", node)
            return np.sign(x)
        out = getattr(np, f)(x)
        _check(np.isfinite(out), "overflow", node)
        return out
    a = _eval_np(node.left, env)
    b = _eval_np(node.right, env)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        _check(np.asarray(b) != 0, "division by zero", node)
        return a / b
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    bad_neg = (a_arr < 0) & (b_arr != np.round(b_arr))
    _check(~bad_neg, "negative base with non-integer exponent", node)
    _check(~((a_arr == 0) & (b_arr < 0)), "zero to a negative power", node)
    out = np.power(a, b)
    _check(np.isfinite(out), "overflow", node)
    return out


_MP_FUNCS = {
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "sinh": mpmath.sinh,
    "cosh": mpmath.cosh,
    "exp": mpmath.exp,
    "log": mpmath.log,
    "sqrt": mpmath.sqrt,
    "abs": abs,
    "sign": mpmath.sign,
}


def _eval_mp(node: Node, env):
    if isinstance(node, Num):
        return mpmath.mpf(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval_mp(node.arg, env)
    if isinstance(node, Call):
        x = _eval_mp(node.arg, env)
        if node.func == "log" and x <= 0:
            raise DomainError("log of non-positive argument", serialize(node))
        if node.func == "sqrt" and x < 0:
            raise DomainError("sqrt of negative argument", serialize(node))
        if node.func == "sign" and x == 0:
            raise DomainError("sign (derivative of abs) undefined at 0", serialize(node))
        return _MP_FUNCS[node.func](x)
    a = _eval_mp(node.left, env)
    b = _eval_mp(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b == 0:
            raise DomainError("division by zero", serialize(node))
        return a / b
    if a < 0 and b != int(b):
        raise DomainError("negative base with non-integer exponent", serialize(node))
    return a**b


def evaluate(expr: WarpExpr, r, omega: Sequence = (), backend: str = "numpy"):
    """Evaluate ``expr`` at radius ``r`` and cross-section point ``omega``.

    ``omega`` lists one value (or array) per declared coordinate. Arrays
    broadcast; the result has the broadcast shape. With ``backend="mpmath"``
    scalars are evaluated at the current ``mpmath.mp`` precision.
    """
    if len(omega) != len(expr.coords):
        raise WarpError(
            f"expected {len(expr.coords)} cross-section coordinates {expr.coords}, "
            f"got {len(omega)}"
        )
    if backend == "mpmath":
        env = {"r": mpmath.mpf(r)}
        env.update({c: mpmath.mpf(w) for c, w in zip(expr.coords, omega)})
        return _eval_mp(expr.ast, env)
    env = {"r": np.asarray(r, dtype=float)}
    env.update({c: np.asarray(w, dtype=float) for c, w in zip(expr.coords, omega)})
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
    with np.errstate(all="ignore"):
        out = _eval_np(expr.ast, env)
    out = np.broadcast_to(np.asarray(out, dtype=float), shape)
    return out.copy() if shape else float(out)


class WarpField:
    """A warp ``phi(omega, r)`` with exact ``phi_r``, ``phi_rr`` and ``grad_N phi``.

    Parameters
    ----------
    expr : WarpExpr or str
        The warp. Strings are parsed with ``coords``.
    coords : sequence of str
        Cross-section coordinate names (``()`` for a radial field).
    """

    def __init__(self, expr: WarpExpr | str, coords: Sequence[str] = ()):
        if isinstance(expr, str):
            expr = parse_warp(expr, coords)
        elif tuple(coords) and tuple(coords) != expr.coords:
            expr = parse_warp(serialize(expr), coords)
        self.expr = expr
        self.coords = expr.coords
        self.expr_r = differentiate(expr, "r")
        self.expr_rr = differentiate(self.expr_r, "r")
        self.expr_omega = tuple(differentiate(expr, c) for c in self.coords)
        self.positivity_domain: tuple[float, float] | None = None

    @classmethod
    def radial(cls, text: str) -> "WarpField":
        return cls(text, ())

    def __repr__(self) -> str:
        return f"WarpField({serialize(self.expr)!r}, coords={self.coords})"

    def __str__(self) -> str:
        return serialize(self.expr)

    @property
    def is_radial(self) -> bool:
        return not (self.expr.variables & set(self.coords))

    def value(self, r, omega: Sequence = ()):
        return evaluate(self.expr, r, omega)

    __call__ = value

    def d_r(self, r, omega: Sequence = ()):
        return evaluate(self.expr_r, r, omega)

    def d_rr(self, r, omega: Sequence = ()):
        return evaluate(self.expr_rr, r, omega)

    def d_omega(self, r, omega: Sequence = ()) -> tuple:
        return tuple(evaluate(e, r, omega) for e in self.expr_omega)

    def value_mp(self, r, omega: Sequence = ()):
        return evaluate(self.expr, r, omega, backend="mpmath")

    def with_coords(self, coords: Sequence[str]) -> "WarpField":
        """The same formula re-declared over other coordinates (must still parse)."""
        return WarpField(parse_warp(serialize(self.expr), coords))

    def scaled(self, c: float) -> "WarpField":
        return WarpField(WarpExpr(BinOp("*", Num(float(c)), self.expr.ast), self.coords))

    def times(self, other: "WarpField") -> "WarpField":
        return WarpField(WarpExpr(BinOp("*", other.expr.ast, self.expr.ast), self.coords))

    def verify_positive(self, r_lo: float, r_hi: float, omega_grid: Sequence = (), n_r: int = 200):
        """Check ``phi > 0`` on sampled nodes of ``[r_lo, r_hi]`` and record the domain."""
        rs = np.linspace(r_lo, r_hi, n_r)
        grids = np.meshgrid(*omega_grid, rs, indexing="ij") if omega_grid else [rs]
        vals = self.value(grids[-1], tuple(grids[:-1]))
        if not np.all(vals > 0):
            idx = np.unravel_index(np.argmin(vals), np.shape(vals))
            where = tuple(float(g[idx]) for g in grids)
            raise DomainError(f"warp not positive at (omega..., r) = {where}", str(self))
        self.positivity_domain = (float(r_lo), float(r_hi))
        return self.positivity_domain


def as_callable(expr: WarpExpr) -> Callable:
    """Plain ``f(r, *omega)`` view on an expression."""
    return lambda r, *omega: evaluate(expr, r, omega)
