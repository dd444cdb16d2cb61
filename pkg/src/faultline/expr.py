"""Symbolic value expressions over port peeks, bound variables, and constants.

Expressions are immutable trees. Widths are checked at construction: the two
operands of a binary operator must have equal widths, and comparison/logical
operators produce width-1 results. Arithmetic wraps modulo 2**width.

Two width-adjustment nodes, Zext and Trunc, exist beyond the user-facing
operator set. The frontend inserts Zext automatically when a for-loop index
variable (which has the minimal width for its trip count) meets a wider
context, and the backends use both to realize concat/slice primitives.

Python operators build arithmetic and bitwise nodes (``a + b``, ``~a``,
``a << b``); comparisons and logical connectives use named methods (``eq``,
``ult``, ``land``, ...) so that ``==`` keeps its structural-equality meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import HierRef

UNOPS = ("not", "neg", "bitnot")
ARITH_BINOPS = ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr")
CMP_BINOPS = ("eq", "neq", "ult", "ule", "ugt", "uge")
LOGIC_BINOPS = ("land", "lor")
BINOPS = ARITH_BINOPS + CMP_BINOPS + LOGIC_BINOPS

# For-loop index variables carry this prefix; they may be implicitly
# zero-extended where a wider context requires it.
INDEX_VAR_PREFIX = "__fl_i"


class WidthError(ValueError):
    pass


class Expr:
    """Base class; subclasses are frozen dataclasses with a ``width`` field."""

    width: int

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return binop("add", self, other)

    def __radd__(self, other):
        return binop("add", other, self)

    def __sub__(self, other):
        return binop("sub", self, other)

    def __rsub__(self, other):
        return binop("sub", other, self)

    def __mul__(self, other):
        return binop("mul", self, other)

    def __rmul__(self, other):
        return binop("mul", other, self)

    def __and__(self, other):
        return binop("and", self, other)

    def __or__(self, other):
        return binop("or", self, other)

    def __xor__(self, other):
        return binop("xor", self, other)

    def __lshift__(self, other):
        return binop("shl", self, other)

    def __rshift__(self, other):
        return binop("lshr", self, other)

    def __invert__(self):
        return Unop("bitnot", self, self.width)

    def __neg__(self):
        return Unop("neg", self, self.width)

    # -- named comparisons / logic ------------------------------------------

    def eq(self, other):
        return binop("eq", self, other)

    def neq(self, other):
        return binop("neq", self, other)

    def ult(self, other):
        return binop("ult", self, other)

    def ule(self, other):
        return binop("ule", self, other)

    def ugt(self, other):
        return binop("ugt", self, other)

    def uge(self, other):
        return binop("uge", self, other)

    def land(self, other):
        return binop("land", self, other)

    def lor(self, other):
        return binop("lor", self, other)

    def lnot(self):
        return Unop("not", self, 1)

    def zext(self, width: int) -> "Expr":
        if width < self.width:
            raise WidthError(f"cannot zero-extend width {self.width} down to {width}")
        if width == self.width:
            return self
        return Zext(self, width)

    def trunc(self, width: int) -> "Expr":
        if width > self.width:
            raise WidthError(f"cannot truncate width {self.width} up to {width}")
        if width == self.width:
            return self
        return Trunc(self, width)


@dataclass(frozen=True)
class Const(Expr):
    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise WidthError(f"constant width must be >= 1, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise WidthError(f"value {self.value} out of range for {self.width} bits")


@dataclass(frozen=True)
class Peek(Expr):
    """Reference to the value of a circuit signal in the current run state."""

    ref: HierRef
    width: int


@dataclass(frozen=True)
class Var(Expr):
    """Bound variable: assumption/guarantee predicate var or for-loop index."""

    name: str
    width: int

    @property
    def is_index(self) -> bool:
        return self.name.startswith(INDEX_VAR_PREFIX)


@dataclass(frozen=True)
class Unop(Expr):
    op: str
    child: Expr
    width: int

    def __post_init__(self):
        if self.op not in UNOPS:
            raise ValueError(f"unknown unary operator {self.op!r}")
        expected = 1 if self.op == "not" else self.child.width
        if self.width != expected:
            raise WidthError(f"{self.op} result must be {expected} bits, got {self.width}")


@dataclass(frozen=True)
class Binop(Expr):
    op: str
    left: Expr
    right: Expr
    width: int

    def __post_init__(self):
        if self.op not in BINOPS:
            raise ValueError(f"unknown binary operator {self.op!r}")
        if self.left.width != self.right.width:
            raise WidthError(
                f"{self.op} operands must have equal widths "
                f"({self.left.width} vs {self.right.width})"
            )
        expected = 1 if self.op in CMP_BINOPS + LOGIC_BINOPS else self.left.width
        if self.width != expected:
            raise WidthError(f"{self.op} result must be {expected} bits, got {self.width}")


@dataclass(frozen=True)
class Zext(Expr):
    child: Expr
    width: int

    def __post_init__(self):
        if self.width <= self.child.width:
            raise WidthError("zero-extension must increase width")


@dataclass(frozen=True)
class Trunc(Expr):
    child: Expr
    width: int

    def __post_init__(self):
        if not 1 <= self.width < self.child.width:
            raise WidthError("truncation must decrease width")


def coerce(value, width: int) -> Expr:
    """Turn an int into a Const of the given width; pass expressions through.

    An expression of a narrower width is accepted only if it is implicitly
    extendable (a for-loop index variable, possibly already zero-extended).
    """
    if isinstance(value, bool):
        raise TypeError("booleans are ambiguous here; use 0/1 or an expression")
    if isinstance(value, int):
        if not 0 <= value < (1 << width):
            raise WidthError(f"value {value} out of range for {width} bits (0..{(1 << width) - 1})")
        return Const(value, width)
    if isinstance(value, Expr):
        if value.width == width:
            return value
        if value.width < width and _extendable(value):
            return value.zext(width)
        raise WidthError(f"expression is {value.width} bits where {width} bits are required")
    raise TypeError(f"expected int or Expr, got {type(value).__name__}")


def _extendable(e: Expr) -> bool:
    if isinstance(e, Var):
        return e.is_index
    if isinstance(e, Zext):
        return _extendable(e.child)
    return False


def binop(op: str, left, right) -> Expr:
    """Build a binary node, coercing ints and unifying index-var widths."""
    if isinstance(left, int) and isinstance(right, int):
        raise TypeError("at least one operand must be an expression")
    if isinstance(left, int):
        left = Const(left, right.width) if 0 <= left < (1 << right.width) else _bad(left, right.width)
    if isinstance(right, int):
        right = Const(right, left.width) if 0 <= right < (1 << left.width) else _bad(right, left.width)
    if left.width != right.width:
        if left.width < right.width and _extendable(left):
            left = left.zext(right.width)
        elif right.width < left.width and _extendable(right):
            right = right.zext(left.width)
    width = 1 if op in CMP_BINOPS + LOGIC_BINOPS else left.width
    return Binop(op, left, right, width)


def _bad(value: int, width: int):
    raise WidthError(f"value {value} out of range for {width} bits")


def walk(e: Expr):
    """Yield every node of the tree, preorder."""
    yield e
    if isinstance(e, Unop):
        yield from walk(e.child)
    elif isinstance(e, Binop):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, (Zext, Trunc)):
        yield from walk(e.child)


def free_vars(e: Expr) -> dict[str, int]:
    """Names and widths of all Var nodes in the tree."""
    out: dict[str, int] = {}
    for node in walk(e):
        if isinstance(node, Var):
            out[node.name] = node.width
    return out


def has_peek(e: Expr) -> bool:
    return any(isinstance(n, Peek) for n in walk(e))


MASK = lambda w: (1 << w) - 1


def eval_pure(e: Expr, bindings: dict[str, int], peek_fn=None) -> int:
    """Evaluate an expression to an unsigned integer.

    ``bindings`` supplies Var values; ``peek_fn(ref) -> int`` supplies Peek
    values (omit it for peek-free predicates). Arithmetic wraps modulo
    2**width; comparisons and logical operators yield 0/1.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise KeyError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Peek):
        if peek_fn is None:
            raise ValueError(f"cannot evaluate peek of {e.ref} without a simulation state")
        return peek_fn(e.ref)
    if isinstance(e, Zext):
        return eval_pure(e.child, bindings, peek_fn)
    if isinstance(e, Trunc):
        return eval_pure(e.child, bindings, peek_fn) & MASK(e.width)
    if isinstance(e, Unop):
        v = eval_pure(e.child, bindings, peek_fn)
        if e.op == "not":
            return 0 if v else 1
        if e.op == "neg":
            return (-v) & MASK(e.width)
        return (~v) & MASK(e.width)  # bitnot
    assert isinstance(e, Binop)
    a = eval_pure(e.left, bindings, peek_fn)
    b = eval_pure(e.right, bindings, peek_fn)
    w = e.left.width
    op = e.op
    if op == "add":
        return (a + b) & MASK(w)
    if op == "sub":
        return (a - b) & MASK(w)
    if op == "mul":
        return (a * b) & MASK(w)
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "shl":
        return (a << b) & MASK(w) if b < w else 0
    if op == "lshr":
        return a >> b if b < w else 0
    if op == "eq":
        return int(a == b)
    if op == "neq":
        return int(a != b)
    if op == "ult":
        return int(a < b)
    if op == "ule":
        return int(a <= b)
    if op == "ugt":
        return int(a > b)
    if op == "uge":
        return int(a >= b)
    if op == "land":
        return int(bool(a) and bool(b))
    if op == "lor":
        return int(bool(a) or bool(b))
    raise AssertionError(op)
