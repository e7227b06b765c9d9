"""Scalar expression trees over chart coordinates y1..yn.

Expressions are immutable ASTs supporting exact symbolic partial
differentiation (closed under d/dy^i to any order), checked pointwise
evaluation, and compiled vectorized evaluation over arrays of points.
They are the scalar substrate for tensor components, connection
coefficients and Pfaff right-hand sides.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "DomainError",
    "const",
    "coord",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "powi",
    "func",
    "parse_expr",
    "diff_expr",
    "eval_expr",
    "subst",
    "ZERO",
    "ONE",
]

FUNCS = ("exp", "ln", "sqrt", "sin", "cos")
_BINOPS = ("add", "sub", "mul", "div")


class ExprError(ValueError):
    """Base error for expression construction, parsing and evaluation."""


class ParseError(ExprError):
    """Syntax or bounds error while parsing; carries the byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(ExprError):
    """Evaluation outside the real domain; carries the offending subtree."""

    def __init__(self, message, subexpr):
        super().__init__(f"{message}: {subexpr}")
        self.subexpr = subexpr


class Expr:
    """Immutable expression node.

    ``op`` is one of: "const" (value: float), "coord" (index: int, 1-based),
    "neg", "add", "sub", "mul", "div", "pow" (value: int or Fraction
    exponent), or a function name from FUNCS.  Use the module-level smart
    constructors rather than instantiating directly; they apply light
    simplification (constant folding, x*0, x*1, x+0) so derivative trees
    stay small.
    """

    __slots__ = ("op", "args", "value", "index", "_hash", "_dmemo")

    def __init__(self, op, args=(), value=None, index=None):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_dmemo", None)

    def __setattr__(self, name, val):  # pragma: no cover - guard
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (
            self.op == other.op
            and self.value == other.value
            and self.index == other.index
            and self.args == other.args
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.op, self.value, self.index, self.args))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    # Convenience arithmetic so tensor code reads naturally.
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def diff(self, i):
        return diff_expr(self, i)

    def __call__(self, point):
        return eval_expr(self, point)

    @property
    def max_index(self):
        """Largest coordinate index referenced (0 for constant trees)."""
        if self.op == "coord":
            return self.index
        if not self.args:
            return 0
        return max(a.max_index for a in self.args)


def _coerce(v):
    if isinstance(v, Expr):
        return v
    return const(v)


def _is_const(e, v=None):
    return e.op == "const" and (v is None or e.value == v)


def const(v):
    v = float(v)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return Expr("const", value=v)


ZERO = const(0.0)
ONE = const(1.0)


def coord(i):
    if not isinstance(i, int) or i < 1:
        raise ExprError(f"coordinate index must be a positive integer, got {i!r}")
    return Expr("coord", index=i)


def add(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Expr("add", (a, b))


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Expr("sub", (a, b))


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Expr("mul", (a, b))


def div(a, b):
    if _is_const(b) and b.value != 0.0:
        if _is_const(a):
            return const(a.value / b.value)
        if b.value == 1.0:
            return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    return Expr("div", (a, b))


def neg(a):
    if _is_const(a):
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def powi(a, k):
    """a ** k with a constant integer (or Fraction) exponent."""
    if isinstance(k, float) and k.is_integer():
        k = int(k)
    if not isinstance(k, (int, Fraction)):
        raise ExprError(f"exponent must be an integer or Fraction, got {k!r}")
    if isinstance(k, Fraction) and k.denominator == 1:
        k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if _is_const(a) and isinstance(k, int):
        if a.value == 0.0 and k < 0:
            return Expr("pow", (a,), value=k)  # defer the domain error to eval
        return const(a.value**k)
    return Expr("pow", (a,), value=k)


def func(name, a):
    if name not in FUNCS:
        raise ExprError(f"unknown function {name!r}")
    if _is_const(a):
        try:
            v = _apply_func(name, a.value)
        except (ValueError, OverflowError):
            return Expr(name, (a,))  # let eval report the domain error
        return const(v)
    return Expr(name, (a,))


def _apply_func(name, x):
    if name == "exp":
        return float(np.exp(x))
    if name == "ln":
        if x <= 0.0:
            raise ValueError("ln of nonpositive argument")
        return float(np.log(x))
    if name == "sqrt":
        if x < 0.0:
            raise ValueError("sqrt of negative argument")
        return float(np.sqrt(x))
    if name == "sin":
        return float(np.sin(x))
    return float(np.cos(x))


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def diff_expr(e, i):
    """Exact partial derivative d(e)/dy^i as a new Expr.

    Derivatives are memoized per node, so repeated differentiation of fields
    with heavily shared subtrees (bracket and curvature assemblies) stays
    linear in the number of distinct nodes.
    """
    if not isinstance(i, int) or i < 1:
        raise ExprError(f"differentiation index must be >= 1, got {i!r}")
    memo = e._dmemo
    if memo is None:
        memo = {}
        object.__setattr__(e, "_dmemo", memo)
    hit = memo.get(i)
    if hit is not None:
        return hit
    out = _diff_raw(e, i)
    memo[i] = out
    return out


def _diff_raw(e, i):
    op = e.op
    if op == "const":
        return ZERO
    if op == "coord":
        return ONE if e.index == i else ZERO
    if op == "add":
        return add(diff_expr(e.args[0], i), diff_expr(e.args[1], i))
    if op == "sub":
        return sub(diff_expr(e.args[0], i), diff_expr(e.args[1], i))
    if op == "neg":
        return neg(diff_expr(e.args[0], i))
    if op == "mul":
        a, b = e.args
        return add(mul(diff_expr(a, i), b), mul(a, diff_expr(b, i)))
    if op == "div":
        a, b = e.args
        num = sub(mul(diff_expr(a, i), b), mul(a, diff_expr(b, i)))
        return div(num, powi(b, 2))
    if op == "pow":
        a = e.args[0]
        k = e.value
        kc = const(float(k))
        return mul(mul(kc, powi(a, k - 1)), diff_expr(a, i))
    if op == "exp":
        return mul(e, diff_expr(e.args[0], i))
    if op == "ln":
        return div(diff_expr(e.args[0], i), e.args[0])
    if op == "sqrt":
        return div(diff_expr(e.args[0], i), mul(const(2.0), e))
    if op == "sin":
        return mul(func("cos", e.args[0]), diff_expr(e.args[0], i))
    if op == "cos":
        return neg(mul(func("sin", e.args[0]), diff_expr(e.args[0], i)))
    raise ExprError(f"cannot differentiate node {op!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_expr(e, point):
    """Evaluate at a point (sequence of floats), checking the real domain.

    Raises DomainError on division by zero, ln/sqrt of invalid arguments or
    0 raised to a negative power, naming the offending subexpression.
    """
    op = e.op
    if op == "const":
        return e.value
    if op == "coord":
        if e.index > len(point):
            raise ExprError(
                f"coordinate y{e.index} out of range for a point of dimension {len(point)}"
            )
        return float(point[e.index - 1])
    if op == "add":
        return eval_expr(e.args[0], point) + eval_expr(e.args[1], point)
    if op == "sub":
        return eval_expr(e.args[0], point) - eval_expr(e.args[1], point)
    if op == "neg":
        return -eval_expr(e.args[0], point)
    if op == "mul":
        return eval_expr(e.args[0], point) * eval_expr(e.args[1], point)
    if op == "div":
        d = eval_expr(e.args[1], point)
        if d == 0.0:
            raise DomainError("division by zero", e)
        return eval_expr(e.args[0], point) / d
    if op == "pow":
        b = eval_expr(e.args[0], point)
        k = e.value
        if b == 0.0 and k < 0:
            raise DomainError("zero raised to a negative power", e)
        if isinstance(k, Fraction):
            if b < 0.0:
                raise DomainError("negative base with fractional exponent", e)
            return float(b) ** float(k)
        return float(b) ** k
    x = eval_expr(e.args[0], point)
    if op == "ln" and x <= 0.0:
        raise DomainError("ln of nonpositive argument", e)
    if op == "sqrt" and x < 0.0:
        raise DomainError("sqrt of negative argument", e)
    try:
        return _apply_func(op, x)
    except (ValueError, OverflowError) as exc:  # pragma: no cover - guarded above
        raise DomainError(str(exc), e) from None


_VEC_FUNCS = {"exp": np.exp, "ln": np.log, "sqrt": np.sqrt, "sin": np.sin, "cos": np.cos}


def _eval_into_cache(e, pts, cache):
    """Iterative postorder evaluation with subtree sharing by node identity."""
    if id(e) in cache:
        return cache[id(e)]
    stack = [e]
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid in cache:
            stack.pop()
            continue
        op = node.op
        if op == "const":
            cache[nid] = np.full(pts.shape[0], node.value)
            stack.pop()
            continue
        if op == "coord":
            cache[nid] = pts[:, node.index - 1]
            stack.pop()
            continue
        pending = [a for a in node.args if id(a) not in cache]
        if pending:
            stack.extend(pending)
            continue
        vals = [cache[id(a)] for a in node.args]
        if op == "add":
            out = vals[0] + vals[1]
        elif op == "sub":
            out = vals[0] - vals[1]
        elif op == "mul":
            out = vals[0] * vals[1]
        elif op == "div":
            out = vals[0] / vals[1]
        elif op == "neg":
            out = -vals[0]
        elif op == "pow":
            k = float(node.value) if isinstance(node.value, Fraction) else node.value
            out = vals[0] ** k
        else:
            out = _VEC_FUNCS[op](vals[0])
        cache[nid] = out
        stack.pop()
    return cache[id(e)]


def eval_many(e, points):
    """Vectorized evaluation over an array of points with shape (P, n).

    Unchecked: out-of-domain inputs yield inf/nan per IEEE semantics (callers
    probing residuals assert finiteness instead).  Shared subtrees are
    evaluated once.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    with np.errstate(all="ignore"):
        return _eval_into_cache(e, pts, {})


def eval_many_shared(exprs, points):
    """Evaluate a collection of expressions at shared points with one common
    subtree cache; returns a list of (P,) arrays in input order."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    cache = {}
    with np.errstate(all="ignore"):
        return [_eval_into_cache(e, pts, cache) for e in exprs]


# ---------------------------------------------------------------------------
# Substitution (coordinate change support)
# ---------------------------------------------------------------------------


def subst(e, mapping):
    """Replace coordinate y^i by mapping[i] (an Expr) throughout.

    Indices missing from the mapping are left untouched.
    """
    op = e.op
    if op == "const":
        return e
    if op == "coord":
        return mapping.get(e.index, e)
    args = tuple(subst(a, mapping) for a in e.args)
    if op == "add":
        return add(*args)
    if op == "sub":
        return sub(*args)
    if op == "mul":
        return mul(*args)
    if op == "div":
        return div(*args)
    if op == "neg":
        return neg(args[0])
    if op == "pow":
        return powi(args[0], e.value)
    return func(op, args[0])


def shift_coords(e, offset):
    """Shift every coordinate index by ``offset`` (embeds y-space exprs into
    a larger variable block, e.g. the (U, y) space of a Pfaff system)."""
    op = e.op
    if op == "const":
        return e
    if op == "coord":
        return coord(e.index + offset)
    args = tuple(shift_coords(a, offset) for a in e.args)
    if op == "pow":
        return powi(args[0], e.value)
    if op in _BINOPS:
        return {"add": add, "sub": sub, "mul": mul, "div": div}[op](*args)
    if op == "neg":
        return neg(args[0])
    return func(op, args[0])


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_ATOM_PREC = 5


def _prec(e):
    if e.op in _PREC:
        return _PREC[e.op]
    return _ATOM_PREC  # const, coord, function calls


def _fmt_const(v):
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_string(e):
    """Render source text that parses back to a structurally equal tree."""
    op = e.op
    if op == "const":
        if e.value < 0.0:
            return "-" + _fmt_const(-e.value)
        return _fmt_const(e.value)
    if op == "coord":
        return f"y{e.index}"
    if op == "neg":
        inner = e.args[0]
        s = to_string(inner)
        if _prec(inner) < _PREC["pow"]:
            s = f"({s})"
        return "-" + s
    if op == "pow":
        base = e.args[0]
        bs = to_string(base)
        if _prec(base) < _ATOM_PREC or (base.op == "const" and base.value < 0):
            bs = f"({bs})"
        k = e.value
        if isinstance(k, Fraction):
            raise ExprError("fractional exponents have no grammar form; rewrite via sqrt")
        return f"{bs}^{k}"
    if op in _BINOPS:
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[op]
        p = _PREC[op]
        a, b = e.args
        ls = to_string(a)
        if _prec(a) < p or (a.op == "const" and a.value < 0 and p == 2):
            ls = f"({ls})"
        rs = to_string(b)
        if _prec(b) < p or (_prec(b) == p and b.op in _BINOPS) or (
            b.op == "const" and b.value < 0
        ):
            rs = f"({rs})"
        return f"{ls} {sym} {rs}" if p == 1 else f"{ls}{sym}{rs}"
    return f"{op}({to_string(e.args[0])})"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
#
# Grammar:
#   expr   := term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := atom ('^' int)?
#   atom   := number | 'y' int | func '(' expr ')' | '(' expr ')' | '-' factor
#   func   := exp | ln | sqrt | sin | cos
#
# '-' in an atom applies to a whole factor so that '^' binds tighter than
# unary minus (-y1^2 parses as -(y1^2)).  Whitespace is insignificant.


class _Parser:
    def __init__(self, text, n):
        self.text = text
        self.n = n
        self.pos = 0

    def error(self, message, offset=None):
        raise ParseError(message, self.pos if offset is None else offset)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("unexpected trailing input")
        return e

    def expr(self):
        e = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                e = add(e, self.term())
            elif c == "-":
                self.pos += 1
                e = sub(e, self.term())
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = mul(e, self.factor())
            elif c == "/":
                self.pos += 1
                e = div(e, self.factor())
            else:
                return e

    def factor(self):
        e = self.atom()
        if self.peek() == "^":
            self.pos += 1
            k = self.integer()
            e = powi(e, k)
        return e

    def atom(self):
        c = self.peek()
        if c == "":
            self.error("unexpected end of input")
        if c == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if c == "-":
            self.pos += 1
            return neg(self.factor())
        if c.isdigit() or c == ".":
            return self.number()
        if c.isalpha():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isalnum():
                self.pos += 1
            name = self.text[start : self.pos]
            if name[0] == "y" and name[1:].isdigit():
                idx = int(name[1:])
                if idx < 1 or idx > self.n:
                    self.error(
                        f"coordinate y{idx} out of range for dimension {self.n}", start
                    )
                return coord(idx)
            if name in FUNCS:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return func(name, e)
            self.error(f"unknown identifier {name!r}", start)
        self.error(f"unexpected character {c!r}")

    def integer(self):
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        if self.pos >= len(self.text) or not self.text[self.pos].isdigit():
            self.error("expected integer exponent", start)
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return int(self.text[start : self.pos])

    def number(self):
        start = self.pos
        t = self.text
        while self.pos < len(t) and t[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(t) and t[self.pos] == ".":
            self.pos += 1
            while self.pos < len(t) and t[self.pos].isdigit():
                self.pos += 1
        if self.pos == start or t[start : self.pos] == ".":
            self.error("malformed number", start)
        if self.pos < len(t) and t[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(t) and t[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(t) and t[self.pos].isdigit():
                while self.pos < len(t) and t[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # 'e' belonged to something else; reject later
        return const(float(t[start : self.pos]))


def parse_expr(text, n):
    """Parse ``text`` into an Expr over an n-dimensional chart.

    Coordinate references outside 1..n and syntax errors raise ParseError
    with the byte offset of the offending token.  n must be >= 1.
    """
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"chart dimension must be >= 1, got {n!r}", 0)
    return _Parser(text, n).parse()
