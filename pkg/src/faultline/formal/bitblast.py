"""Tseitin bit-blasting of bitvector expressions into CNF.

Words are tuples of literals, least-significant bit first. Encodings are the
textbook ones: ripple-carry addition/subtraction, shift-and-add
multiplication (quadratic), barrel stages for shifts by a variable amount,
and MSB-first comparison chains. Variable 1 is reserved as constant true
(pinned by a unit clause), so constant bits are plain literals and no empty
clause can arise during construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import expr as ex


@dataclass
class CnfFormula:
    """CNF under construction: variable count, clauses, and the term map.

    ``term_bits`` maps blasted expression nodes (by identity) to their
    per-bit literals; ``var_bits`` maps free bitvector variables by name.
    """

    nvars: int = 0
    clauses: list = field(default_factory=list)
    var_bits: dict = field(default_factory=dict)  # name -> tuple of literals
    term_bits: dict = field(default_factory=dict)  # id(expr) -> (expr, literals)

    def __post_init__(self):
        if self.nvars == 0:
            self.nvars = 1
            self.clauses.append([1])  # variable 1 is constant true

    @property
    def true_lit(self) -> int:
        return 1

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def add_clause(self, lits) -> None:
        lits = list(lits)
        if not lits:
            raise ValueError("refusing to add an empty clause")
        self.clauses.append(lits)


class Bitblaster:
    """Blasts expressions into a CnfFormula, caching shared subterms."""

    def __init__(self, cnf: CnfFormula | None = None):
        self.cnf = cnf if cnf is not None else CnfFormula()

    # -- boolean gates -------------------------------------------------------

    @property
    def TRUE(self) -> int:
        return self.cnf.true_lit

    @property
    def FALSE(self) -> int:
        return -self.cnf.true_lit

    def gate_and(self, a: int, b: int) -> int:
        if a == self.FALSE or b == self.FALSE or a == -b:
            return self.FALSE
        if a == self.TRUE:
            return b
        if b == self.TRUE or a == b:
            return a
        c = self.cnf.new_var()
        self.cnf.add_clause([-c, a])
        self.cnf.add_clause([-c, b])
        self.cnf.add_clause([c, -a, -b])
        return c

    def gate_or(self, a: int, b: int) -> int:
        return -self.gate_and(-a, -b)

    def gate_xor(self, a: int, b: int) -> int:
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == self.TRUE:
            return -b
        if b == self.TRUE:
            return -a
        if a == b:
            return self.FALSE
        if a == -b:
            return self.TRUE
        c = self.cnf.new_var()
        self.cnf.add_clause([-c, a, b])
        self.cnf.add_clause([-c, -a, -b])
        self.cnf.add_clause([c, a, -b])
        self.cnf.add_clause([c, -a, b])
        return c

    def gate_ite(self, sel: int, t: int, e: int) -> int:
        return self.gate_or(self.gate_and(sel, t), self.gate_and(-sel, e))

    # -- word helpers -----------------------------------------------------------

    def const_bits(self, value: int, width: int) -> tuple[int, ...]:
        return tuple(self.TRUE if (value >> i) & 1 else self.FALSE for i in range(width))

    def declare(self, name: str, width: int) -> tuple[int, ...]:
        """Fresh SAT variables for a named bitvector (cached by name)."""
        if name in self.cnf.var_bits:
            bits = self.cnf.var_bits[name]
            if len(bits) != width:
                raise ValueError(f"variable {name!r} redeclared at width {width}, was {len(bits)}")
            return bits
        bits = tuple(self.cnf.new_var() for _ in range(width))
        self.cnf.var_bits[name] = bits
        return bits

    def bind(self, name: str, bits: tuple[int, ...]) -> None:
        """Bind a name to existing literals (e.g. a next-state definition)."""
        if name in self.cnf.var_bits:
            raise ValueError(f"variable {name!r} already bound")
        self.cnf.var_bits[name] = tuple(bits)

    def _add_words(self, a, b, carry_in: int) -> tuple[int, ...]:
        out = []
        carry = carry_in
        for ai, bi in zip(a, b):
            axb = self.gate_xor(ai, bi)
            out.append(self.gate_xor(axb, carry))
            carry = self.gate_or(self.gate_and(ai, bi), self.gate_and(carry, axb))
        return tuple(out)

    def _mul_words(self, a, b) -> tuple[int, ...]:
        w = len(a)
        acc = self.const_bits(0, w)
        for i, bi in enumerate(b):
            partial = [self.FALSE] * i + [self.gate_and(aj, bi) for aj in a[: w - i]]
            acc = self._add_words(acc, tuple(partial), self.FALSE)
        return acc

    def _shift_words(self, a, amount, left: bool) -> tuple[int, ...]:
        w = len(a)
        result = list(a)
        overflow = self.FALSE  # any amount bit >= width set -> result is 0
        for j, sel in enumerate(amount):
            if (1 << j) >= w:
                overflow = self.gate_or(overflow, sel)
                continue
            k = 1 << j
            if left:
                shifted = [self.FALSE] * k + result[: w - k]
            else:
                shifted = result[k:] + [self.FALSE] * k
            result = [self.gate_ite(sel, s, r) for s, r in zip(shifted, result)]
        return tuple(self.gate_and(r, -overflow) for r in result)

    def _ult_words(self, a, b) -> int:
        lt = self.FALSE
        eq_so_far = self.TRUE
        for ai, bi in zip(reversed(a), reversed(b)):
            lt = self.gate_or(lt, self.gate_and(eq_so_far, self.gate_and(-ai, bi)))
            eq_so_far = self.gate_and(eq_so_far, -self.gate_xor(ai, bi))
        return lt

    def _eq_words(self, a, b) -> int:
        acc = self.TRUE
        for ai, bi in zip(a, b):
            acc = self.gate_and(acc, -self.gate_xor(ai, bi))
        return acc

    def _nonzero(self, a) -> int:
        acc = self.FALSE
        for ai in a:
            acc = self.gate_or(acc, ai)
        return acc

    # -- expression blasting -------------------------------------------------------

    def blast_bits(self, e: ex.Expr) -> tuple[int, ...]:
        """Literals for each bit of the expression (LSB first)."""
        cached = self.cnf.term_bits.get(id(e))
        if cached is not None:
            return cached[1]
        bits = self._blast(e)
        assert len(bits) == e.width, f"blasted {len(bits)} bits for width-{e.width} {e!r}"
        self.cnf.term_bits[id(e)] = (e, bits)
        return bits

    def _blast(self, e: ex.Expr) -> tuple[int, ...]:
        if isinstance(e, ex.Const):
            return self.const_bits(e.value, e.width)
        if isinstance(e, ex.Var):
            return self.declare(e.name, e.width)
        if isinstance(e, ex.Peek):
            raise ValueError(f"cannot bit-blast a peek of {e.ref}; substitute signal expressions first")
        if isinstance(e, ex.Zext):
            child = self.blast_bits(e.child)
            return child + (self.FALSE,) * (e.width - len(child))
        if isinstance(e, ex.Trunc):
            return self.blast_bits(e.child)[: e.width]
        if isinstance(e, ex.Unop):
            child = self.blast_bits(e.child)
            if e.op == "bitnot":
                return tuple(-b for b in child)
            if e.op == "neg":
                inv = tuple(-b for b in child)
                return self._add_words(inv, self.const_bits(0, len(child)), self.TRUE)
            return (-self._nonzero(child),)  # logical not
        assert isinstance(e, ex.Binop)
        a = self.blast_bits(e.left)
        b = self.blast_bits(e.right)
        op = e.op
        if op == "add":
            return self._add_words(a, b, self.FALSE)
        if op == "sub":
            return self._add_words(a, tuple(-x for x in b), self.TRUE)
        if op == "mul":
            return self._mul_words(a, b)
        if op == "and":
            return tuple(self.gate_and(x, y) for x, y in zip(a, b))
        if op == "or":
            return tuple(self.gate_or(x, y) for x, y in zip(a, b))
        if op == "xor":
            return tuple(self.gate_xor(x, y) for x, y in zip(a, b))
        if op == "shl":
            return self._shift_words(a, b, left=True)
        if op == "lshr":
            return self._shift_words(a, b, left=False)
        if op == "eq":
            return (self._eq_words(a, b),)
        if op == "neq":
            return (-self._eq_words(a, b),)
        if op == "ult":
            return (self._ult_words(a, b),)
        if op == "ule":
            return (-self._ult_words(b, a),)
        if op == "ugt":
            return (self._ult_words(b, a),)
        if op == "uge":
            return (-self._ult_words(a, b),)
        if op == "land":
            return (self.gate_and(self._nonzero(a), self._nonzero(b)),)
        if op == "lor":
            return (self.gate_or(self._nonzero(a), self._nonzero(b)),)
        raise AssertionError(op)


def bitblast(f: ex.Expr, ctx: CnfFormula) -> int:
    """Blast a 1-bit formula into the context; the returned literal is
    satisfiability-equivalent to the formula."""
    if f.width != 1:
        raise ValueError(f"bitblast expects a 1-bit formula, got width {f.width}")
    (lit,) = Bitblaster(ctx).blast_bits(f)
    return lit


def decode_bits(bits: tuple[int, ...], model: list[bool]) -> int:
    """Integer value of a blasted word under a SAT model."""
    value = 0
    for i, lit in enumerate(bits):
        v = model[lit] if lit > 0 else not model[-lit]
        if v:
            value |= 1 << i
    return value
