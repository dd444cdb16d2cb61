"""Recording frontend: builds an action program by calling test methods.

A Tester appends actions to a growing program. Host-language control flow
simply calls these methods repeatedly, so loops written in Python unroll into
flat action sequences at recording time. To keep a loop or branch in the
generated program instead, open a scoped sub-builder::

    loop = t.begin_while(t.peek("ready").neq(0))
    loop.expect("ready", 1)
    loop.step(2)
    loop.close()            # or use `with t.begin_while(...) as loop:`
    t.expect("count", 5)

Sub-builders record into their construct's body; the parent keeps recording
into its own sequence. Every sub-builder must be closed before finalize().
"""

from __future__ import annotations

from . import actions as ac
from . import expr as ex
from .circuit import CircuitDecl, HierRef, PortKind, find_ports_by_type, interface_digest, resolve
from .errors import ProgramValidationError, RecordError


def var(name: str, width: int) -> ex.Var:
    """A bound variable for assumption/guarantee predicates."""
    return ex.Var(name, width)


class Tester:
    __test__ = False  # not a pytest class, despite the name

    def __init__(self, circuit: CircuitDecl, clock=None):
        self.circuit = circuit
        self.clock: HierRef | None = None
        if clock is not None:
            self.clock = HierRef.of(clock)
            _, h = resolve(circuit, self.clock)
            if h.ptype is None or h.ptype.kind is not PortKind.CLOCK:
                raise RecordError(f"{self.clock} is not a clock-typed port")
        self._actions: list[ac.Action] = []
        self._root: Tester = self
        self._construct: str | None = None  # None for the root
        self._closed = False
        self._open_children: list[Tester] = []
        self._index_counter = 0  # used on the root only

    # -- internal helpers ----------------------------------------------------

    def _record(self, action: ac.Action) -> None:
        if self._closed:
            raise RecordError(f"cannot record into a closed {self._construct} scope")
        self._actions.append(action)

    def _child(self, construct: str, target: list[ac.Action]) -> "Tester":
        child = Tester.__new__(Tester)
        child.circuit = self.circuit
        child.clock = self.clock
        child._actions = target
        child._root = self._root
        child._construct = construct
        child._closed = False
        child._open_children = []
        child._index_counter = 0
        self._open_children.append(child)
        return child

    def _resolve_input(self, ref) -> tuple[HierRef, int]:
        ref = HierRef.of(ref)
        w, h = resolve(self.circuit, ref)
        if h.is_pin or not h.drives:
            raise RecordError(f"{ref} is not an input port; only inputs can be poked")
        return ref, w

    def _coerce_cond(self, cond) -> ex.Expr:
        if not isinstance(cond, ex.Expr):
            raise RecordError("condition must be an expression (use peek or comparisons)")
        if cond.width != 1:
            raise RecordError(f"condition must be 1 bit wide, got {cond.width} bits")
        return cond

    # -- basic actions --------------------------------------------------------

    def poke(self, ref, value) -> None:
        ref, w = self._resolve_input(ref)
        self._record(ac.Poke(ref, ex.coerce(value, w)))

    def peek(self, ref) -> ex.Expr:
        ref = HierRef.of(ref)
        w, _ = resolve(self.circuit, ref)
        return ex.Peek(ref, w)

    def expect(self, ref, value) -> None:
        ref = HierRef.of(ref)
        w, h = resolve(self.circuit, ref)
        if not h.is_pin and h.drives:
            raise RecordError(f"{ref} is an input port; expect targets outputs or internal signals")
        self._record(ac.Expect(ref, ex.coerce(value, w)))

    def eval(self) -> None:
        self._record(ac.Eval())

    def step(self, n: int = 1) -> None:
        if self.clock is None:
            raise RecordError("step requires a tester constructed with a clock")
        if not isinstance(n, int) or n < 1:
            raise RecordError(f"step count must be a positive integer, got {n!r}")
        self._record(ac.Step(n))

    def print(self, format: str, *args) -> None:
        conv = ac.parse_format(format)  # raises ValueError on bad formats
        if len(conv) != len(args):
            raise RecordError(
                f"format has {len(conv)} placeholder(s) but {len(args)} argument(s) given"
            )
        exprs = []
        for a in args:
            if isinstance(a, int) and not isinstance(a, bool):
                a = ex.Const(a, max(1, a.bit_length()))
            if not isinstance(a, ex.Expr):
                raise RecordError("print arguments must be expressions or integers")
            exprs.append(a)
        self._record(ac.Print(format, tuple(exprs)))

    # -- control flow ----------------------------------------------------------

    def begin_while(self, cond) -> "Tester":
        node = ac.While(self._coerce_cond(cond))
        self._record(node)
        return self._child("while", node.body)

    def begin_if(self, cond) -> tuple["Tester", "Tester"]:
        node = ac.If(self._coerce_cond(cond))
        self._record(node)
        return self._child("if-then", node.then), self._child("if-else", node.orelse)

    def begin_for(self, count: int) -> tuple["Tester", ex.Expr]:
        if not isinstance(count, int) or count < 0:
            raise RecordError(f"for-loop count must be a non-negative integer, got {count!r}")
        width = ac.index_var_width(count)
        name = f"{ex.INDEX_VAR_PREFIX}{self._root._index_counter}"
        self._root._index_counter += 1
        node = ac.For(count, name, width)
        self._record(node)
        return self._child("for", node.body), ex.Var(name, width)

    def close(self) -> None:
        if self._construct is None:
            raise RecordError("the root tester has no scope to close; call finalize()")
        if self._closed:
            raise RecordError(f"{self._construct} scope is already closed")
        for child in self._open_children:
            if not child._closed:
                raise RecordError(f"cannot close {self._construct}: inner {child._construct} scope is still open")
        self._closed = True

    def __enter__(self) -> "Tester":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()

    # -- wait helpers (expand to while+step) -------------------------------------

    def _need_clock(self, what: str) -> None:
        if self.clock is None:
            raise RecordError(f"{what} requires a tester constructed with a clock")

    def wait_until_low(self, ref) -> None:
        self._need_clock("wait_until_low")
        body = self.begin_while(self.peek(ref).neq(0))
        body.step(1)
        body.close()

    def wait_until_posedge(self, ref) -> None:
        """Step until `ref` transitions 0 -> 1 (first reach 0, then leave it)."""
        self._need_clock("wait_until_posedge")
        self.wait_until_low(ref)
        body = self.begin_while(self.peek(ref).eq(0))
        body.step(1)
        body.close()

    def wait_on(self, cond) -> None:
        self._need_clock("wait_on")
        body = self.begin_while(self._coerce_cond(cond).lnot())
        body.step(1)
        body.close()

    # -- constraints ---------------------------------------------------------------

    def assume(self, ref, predicate: ex.Expr) -> None:
        ref, w = self._resolve_input(ref)
        if not isinstance(predicate, ex.Expr) or predicate.width != 1:
            raise RecordError("assumption must be a 1-bit predicate expression")
        if ex.has_peek(predicate):
            raise RecordError("assumption predicates may not peek signals")
        fv = ex.free_vars(predicate)
        if len(fv) > 1:
            raise RecordError(f"assumption may use at most one variable, found {sorted(fv)}")
        if fv and next(iter(fv.values())) != w:
            raise RecordError(
                f"assumption variable is {next(iter(fv.values()))} bits but port {ref} is {w} bits"
            )
        self._record(ac.Assume(ref, predicate))

    def guarantee(self, predicate: ex.Expr) -> None:
        if not isinstance(predicate, ex.Expr) or predicate.width != 1:
            raise RecordError("guarantee must be a 1-bit predicate expression")
        if ex.has_peek(predicate):
            raise RecordError("guarantee predicates may not peek signals; name ports as variables")
        for name, w in ex.free_vars(predicate).items():
            if not self.circuit.has_port(name):
                raise RecordError(f"guarantee variable {name!r} does not name an interface port")
            if self.circuit.port(name).width != w:
                raise RecordError(
                    f"guarantee variable {name!r} is {w} bits but the port is {self.circuit.port(name).width} bits"
                )
        self._record(ac.Guarantee(predicate))

    # -- reuse helpers ----------------------------------------------------------------

    def reset_sequence(self, reset_ref=None) -> None:
        """Pulse an active-low async reset: 1, 0, 1 with an eval after each poke.

        Without an explicit port this discovers the circuit's AsyncResetN port
        (there must be exactly one).
        """
        if reset_ref is None:
            found = find_ports_by_type(self.circuit, PortKind.ASYNC_RESET_N)
            if len(found) != 1:
                raise RecordError(
                    f"reset-port discovery needs exactly one async_reset_n port, found {len(found)}"
                )
            reset_ref = HierRef((found[0].name,))
        for v in (1, 0, 1):
            self.poke(reset_ref, v)
            self.eval()

    # -- finalization ------------------------------------------------------------------

    def _open_descendants(self) -> list[str]:
        out = []
        for child in self._open_children:
            if not child._closed:
                out.append(child._construct)
            out.extend(child._open_descendants())
        return out

    def finalize(self) -> ac.ActionProgram:
        if self._construct is not None:
            raise RecordError("finalize is only valid on the root tester; close() this scope instead")
        open_scopes = self._open_descendants()
        if open_scopes:
            raise RecordError(f"cannot finalize with open scope(s): {', '.join(open_scopes)}")
        p = ac.ActionProgram(
            circuit=self.circuit.name,
            digest=interface_digest(self.circuit),
            clock=self.clock,
            actions=tuple(self._actions),
        )
        diags = ac.validate_program(p, self.circuit)
        if diags:
            raise ProgramValidationError(diags)
        return p
