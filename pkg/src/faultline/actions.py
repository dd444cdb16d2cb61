"""The recorded-action intermediate representation.

A program is an ordered tree of actions: flat poke/expect/eval/step/print
leaves plus control-flow nodes (while/if/for) whose bodies are sub-sequences,
and assume/guarantee constraint markers for the symbolic backends.

Programs carry the name and an interface digest of the circuit they were
recorded against, so running one against a drifted circuit is detected.
Serialization is canonical JSON: structurally equal programs produce
byte-identical text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import expr as ex
from .circuit import CircuitDecl, HierRef, PortKind, interface_digest, resolve
from .errors import ProgramValidationError, RecordError


@dataclass
class Action:
    pass


@dataclass
class Poke(Action):
    ref: HierRef
    value: ex.Expr


@dataclass
class Expect(Action):
    ref: HierRef
    value: ex.Expr


@dataclass
class Eval(Action):
    pass


@dataclass
class Step(Action):
    n: int


@dataclass
class Print(Action):
    format: str
    args: tuple[ex.Expr, ...]


@dataclass
class While(Action):
    cond: ex.Expr
    body: list[Action] = field(default_factory=list)


@dataclass
class If(Action):
    cond: ex.Expr
    then: list[Action] = field(default_factory=list)
    orelse: list[Action] = field(default_factory=list)


@dataclass
class For(Action):
    count: int
    var: str
    var_width: int
    body: list[Action] = field(default_factory=list)


@dataclass
class Assume(Action):
    ref: HierRef
    predicate: ex.Expr


@dataclass
class Guarantee(Action):
    predicate: ex.Expr


@dataclass(frozen=True)
class ActionProgram:
    circuit: str
    digest: str
    clock: HierRef | None
    actions: tuple[Action, ...]


def index_var_width(count: int) -> int:
    """Minimal width of a for-loop index: ceil(log2(max(count, 2))) bits."""
    return max(1, math.ceil(math.log2(max(count, 2))))


def parse_format(fmt: str) -> list[str]:
    """Return the conversion letters of a print format ('d', 'x', 'b').

    '%%' is a literal percent; any other '%' sequence is rejected.
    """
    out = []
    i = 0
    while i < len(fmt):
        if fmt[i] == "%":
            if i + 1 >= len(fmt):
                raise ValueError("format string ends with a bare '%'")
            c = fmt[i + 1]
            if c == "%":
                pass
            elif c in "dxb":
                out.append(c)
            else:
                raise ValueError(f"unsupported conversion '%{c}' (use %d, %x, %b, or %%)")
            i += 2
        else:
            i += 1
    return out


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    path: str
    code: str
    message: str


def validate_program(p: ActionProgram, c: CircuitDecl) -> list[Diagnostic]:
    """Re-check a program against a circuit; empty list iff well-formed.

    The frontend enforces these rules while recording; this pass exists for
    deserialized programs and carries action-path locations.
    """
    diags: list[Diagnostic] = []

    if p.circuit != c.name:
        diags.append(
            Diagnostic("root", "circuit-mismatch", f"program is for {p.circuit!r}, circuit is {c.name!r}")
        )
    if p.digest != interface_digest(c):
        diags.append(
            Diagnostic("root", "digest-mismatch", "circuit interface differs from the one recorded against")
        )
    if p.clock is not None:
        try:
            _, h = resolve(c, p.clock)
            if h.ptype is None or h.ptype.kind is not PortKind.CLOCK:
                diags.append(Diagnostic("root", "bad-clock", f"{p.clock} is not a clock port"))
        except RecordError as e:
            diags.append(Diagnostic("root", "bad-clock", str(e)))

    def check_expr(e: ex.Expr, path: str, bound: dict[str, int], allow_peek=True):
        for node in ex.walk(e):
            if isinstance(node, ex.Peek):
                if not allow_peek:
                    diags.append(Diagnostic(path, "peek-in-predicate", "predicates may not peek signals"))
                    continue
                try:
                    w, _ = resolve(c, node.ref)
                    if w != node.width:
                        diags.append(
                            Diagnostic(path, "width-mismatch", f"peek of {node.ref} has stale width {node.width} (signal is {w})")
                        )
                except RecordError as err:
                    diags.append(Diagnostic(path, "unknown-ref", str(err)))
            elif isinstance(node, ex.Var) and node.name in bound:
                if bound[node.name] != node.width:
                    diags.append(
                        Diagnostic(path, "width-mismatch", f"variable {node.name!r} is {bound[node.name]} bits, used as {node.width}")
                    )

    def free_unbound(e: ex.Expr, bound: dict[str, int]) -> dict[str, int]:
        return {n: w for n, w in ex.free_vars(e).items() if n not in bound}

    def walk_actions(actions, prefix: str, bound: dict[str, int], has_clock: bool):
        for i, a in enumerate(actions):
            path = f"{prefix}[{i}]"
            if isinstance(a, Poke):
                try:
                    w, h = resolve(c, a.ref)
                    if h.is_pin or not h.drives:
                        diags.append(Diagnostic(path, "poke-not-input", f"{a.ref} is not an input port"))
                    elif a.value.width != w:
                        diags.append(
                            Diagnostic(path, "width-mismatch", f"poke value is {a.value.width} bits, port {a.ref} is {w}")
                        )
                except RecordError as e:
                    diags.append(Diagnostic(path, "unknown-ref", str(e)))
                check_expr(a.value, path, bound)
                if free_unbound(a.value, bound):
                    diags.append(Diagnostic(path, "unbound-var", f"unbound variable(s) {sorted(free_unbound(a.value, bound))}"))
            elif isinstance(a, Expect):
                try:
                    w, h = resolve(c, a.ref)
                    if not h.is_pin and h.drives:
                        diags.append(Diagnostic(path, "expect-on-input", f"{a.ref} is an input port"))
                    elif a.value.width != w:
                        diags.append(
                            Diagnostic(path, "width-mismatch", f"expected value is {a.value.width} bits, signal {a.ref} is {w}")
                        )
                except RecordError as e:
                    diags.append(Diagnostic(path, "unknown-ref", str(e)))
                check_expr(a.value, path, bound)
                if free_unbound(a.value, bound):
                    diags.append(Diagnostic(path, "unbound-var", f"unbound variable(s) {sorted(free_unbound(a.value, bound))}"))
            elif isinstance(a, Eval):
                pass
            elif isinstance(a, Step):
                if not has_clock:
                    diags.append(Diagnostic(path, "step-no-clock", "step requires a clock"))
                if a.n < 1:
                    diags.append(Diagnostic(path, "bad-step-count", f"step count must be >= 1, got {a.n}"))
            elif isinstance(a, Print):
                try:
                    conv = parse_format(a.format)
                    if len(conv) != len(a.args):
                        diags.append(
                            Diagnostic(path, "print-arity", f"format has {len(conv)} placeholder(s) but {len(a.args)} argument(s)")
                        )
                except ValueError as e:
                    diags.append(Diagnostic(path, "bad-format", str(e)))
                for arg in a.args:
                    check_expr(arg, path, bound)
                    if free_unbound(arg, bound):
                        diags.append(Diagnostic(path, "unbound-var", f"unbound variable(s) {sorted(free_unbound(arg, bound))}"))
            elif isinstance(a, While):
                if a.cond.width != 1:
                    diags.append(Diagnostic(path, "bad-cond-width", f"loop condition must be 1 bit, got {a.cond.width}"))
                check_expr(a.cond, path, bound)
                walk_actions(a.body, f"{path}.body", bound, has_clock)
            elif isinstance(a, If):
                if a.cond.width != 1:
                    diags.append(Diagnostic(path, "bad-cond-width", f"if condition must be 1 bit, got {a.cond.width}"))
                check_expr(a.cond, path, bound)
                walk_actions(a.then, f"{path}.then", bound, has_clock)
                walk_actions(a.orelse, f"{path}.else", bound, has_clock)
            elif isinstance(a, For):
                if a.count < 0:
                    diags.append(Diagnostic(path, "bad-for-count", f"trip count must be >= 0, got {a.count}"))
                elif a.var_width < index_var_width(a.count):
                    diags.append(
                        Diagnostic(path, "bad-index-width", f"index {a.var!r} needs >= {index_var_width(a.count)} bits, has {a.var_width}")
                    )
                inner = dict(bound)
                inner[a.var] = a.var_width
                walk_actions(a.body, f"{path}.body", inner, has_clock)
            elif isinstance(a, Assume):
                try:
                    w, h = resolve(c, a.ref)
                    if h.is_pin or not h.drives:
                        diags.append(Diagnostic(path, "assume-not-input", f"{a.ref} is not an input port"))
                    else:
                        fv = ex.free_vars(a.predicate)
                        if len(fv) > 1:
                            diags.append(
                                Diagnostic(path, "bad-predicate", f"assumption may use at most one variable, found {sorted(fv)}")
                            )
                        elif fv and next(iter(fv.values())) != w:
                            diags.append(
                                Diagnostic(path, "width-mismatch", f"assumption variable is {next(iter(fv.values()))} bits, port {a.ref} is {w}")
                            )
                except RecordError as e:
                    diags.append(Diagnostic(path, "unknown-ref", str(e)))
                if a.predicate.width != 1:
                    diags.append(Diagnostic(path, "bad-predicate", "assumption must be a 1-bit predicate"))
                check_expr(a.predicate, path, bound, allow_peek=False)
            elif isinstance(a, Guarantee):
                if a.predicate.width != 1:
                    diags.append(Diagnostic(path, "bad-predicate", "guarantee must be a 1-bit predicate"))
                for name, w in ex.free_vars(a.predicate).items():
                    if not c.has_port(name):
                        diags.append(Diagnostic(path, "unknown-port-var", f"no interface port named {name!r}"))
                    elif c.port(name).width != w:
                        diags.append(
                            Diagnostic(path, "width-mismatch", f"variable {name!r} is {w} bits, port is {c.port(name).width}")
                        )
                check_expr(a.predicate, path, bound, allow_peek=False)
            else:
                diags.append(Diagnostic(path, "unknown-action", f"unknown action {type(a).__name__}"))

    walk_actions(p.actions, "root", {}, p.clock is not None)
    return diags


# -- canonical serialization --------------------------------------------------


def _expr_obj(e: ex.Expr):
    if isinstance(e, ex.Const):
        return {"op": "const", "value": e.value, "width": e.width}
    if isinstance(e, ex.Peek):
        return {"op": "peek", "path": e.ref.dotted()}
    if isinstance(e, ex.Var):
        return {"op": "var", "name": e.name, "width": e.width}
    if isinstance(e, ex.Unop):
        return {"op": e.op, "args": [_expr_obj(e.child)]}
    if isinstance(e, ex.Binop):
        return {"op": e.op, "args": [_expr_obj(e.left), _expr_obj(e.right)]}
    if isinstance(e, ex.Zext):
        return {"op": "zext", "width": e.width, "args": [_expr_obj(e.child)]}
    if isinstance(e, ex.Trunc):
        return {"op": "trunc", "width": e.width, "args": [_expr_obj(e.child)]}
    raise TypeError(f"unserializable expression {e!r}")


def _action_obj(a: Action):
    if isinstance(a, Poke):
        return {"kind": "poke", "ref": a.ref.dotted(), "value": _expr_obj(a.value)}
    if isinstance(a, Expect):
        return {"kind": "expect", "ref": a.ref.dotted(), "value": _expr_obj(a.value)}
    if isinstance(a, Eval):
        return {"kind": "eval"}
    if isinstance(a, Step):
        return {"kind": "step", "n": a.n}
    if isinstance(a, Print):
        return {"kind": "print", "format": a.format, "args": [_expr_obj(x) for x in a.args]}
    if isinstance(a, While):
        return {"kind": "while", "cond": _expr_obj(a.cond), "body": [_action_obj(x) for x in a.body]}
    if isinstance(a, If):
        return {
            "kind": "if",
            "cond": _expr_obj(a.cond),
            "then": [_action_obj(x) for x in a.then],
            "else": [_action_obj(x) for x in a.orelse],
        }
    if isinstance(a, For):
        return {
            "kind": "for",
            "count": a.count,
            "var": a.var,
            "width": a.var_width,
            "body": [_action_obj(x) for x in a.body],
        }
    if isinstance(a, Assume):
        return {"kind": "assume", "ref": a.ref.dotted(), "predicate": _expr_obj(a.predicate)}
    if isinstance(a, Guarantee):
        return {"kind": "guarantee", "predicate": _expr_obj(a.predicate)}
    raise TypeError(f"unserializable action {a!r}")


def serialize(p: ActionProgram) -> str:
    doc = {
        "circuit": p.circuit,
        "digest": p.digest,
        "clock": p.clock.dotted() if p.clock is not None else None,
        "actions": [_action_obj(a) for a in p.actions],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


class _Malformed(Exception):
    def __init__(self, path, message):
        self.diag = Diagnostic(path, "malformed", message)
        super().__init__(f"{path}: {message}")


def _expr_from_obj(obj, c: CircuitDecl, path: str) -> ex.Expr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise _Malformed(path, f"expected an expression object, got {obj!r}")
    op = obj["op"]
    try:
        if op == "const":
            return ex.Const(obj["value"], obj["width"])
        if op == "peek":
            ref = HierRef.of(obj["path"])
            w, _ = resolve(c, ref)
            return ex.Peek(ref, w)
        if op == "var":
            return ex.Var(obj["name"], obj["width"])
        args = [_expr_from_obj(x, c, path) for x in obj.get("args", [])]
        if op == "zext":
            return ex.Zext(args[0], obj["width"])
        if op == "trunc":
            return ex.Trunc(args[0], obj["width"])
        if op in ex.UNOPS:
            return ex.Unop(op, args[0], 1 if op == "not" else args[0].width)
        if op in ex.BINOPS:
            return ex.binop(op, args[0], args[1])
    except _Malformed:
        raise
    except (KeyError, IndexError, TypeError) as e:
        raise _Malformed(path, f"bad expression field: {e}") from None
    except (ex.WidthError, RecordError, ValueError) as e:
        raise _Malformed(path, str(e)) from None
    raise _Malformed(path, f"unknown expression operator {op!r}")


def _action_from_obj(obj, c: CircuitDecl, path: str) -> Action:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise _Malformed(path, f"expected an action object, got {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "poke":
            return Poke(HierRef.of(obj["ref"]), _expr_from_obj(obj["value"], c, path))
        if kind == "expect":
            return Expect(HierRef.of(obj["ref"]), _expr_from_obj(obj["value"], c, path))
        if kind == "eval":
            return Eval()
        if kind == "step":
            return Step(obj["n"])
        if kind == "print":
            return Print(obj["format"], tuple(_expr_from_obj(x, c, path) for x in obj["args"]))
        if kind == "while":
            return While(
                _expr_from_obj(obj["cond"], c, path),
                [_action_from_obj(x, c, f"{path}.body[{i}]") for i, x in enumerate(obj["body"])],
            )
        if kind == "if":
            return If(
                _expr_from_obj(obj["cond"], c, path),
                [_action_from_obj(x, c, f"{path}.then[{i}]") for i, x in enumerate(obj["then"])],
                [_action_from_obj(x, c, f"{path}.else[{i}]") for i, x in enumerate(obj["else"])],
            )
        if kind == "for":
            return For(
                obj["count"],
                obj["var"],
                obj["width"],
                [_action_from_obj(x, c, f"{path}.body[{i}]") for i, x in enumerate(obj["body"])],
            )
        if kind == "assume":
            return Assume(HierRef.of(obj["ref"]), _expr_from_obj(obj["predicate"], c, path))
        if kind == "guarantee":
            return Guarantee(_expr_from_obj(obj["predicate"], c, path))
    except _Malformed:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise _Malformed(path, f"bad action field: {e}") from None
    raise _Malformed(path, f"unknown action kind {kind!r}")


def deserialize(text: str, c: CircuitDecl) -> ActionProgram:
    """Parse program JSON and validate it against the circuit.

    Raises ProgramValidationError carrying diagnostics on any defect.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProgramValidationError([Diagnostic("$", "malformed", f"not well-formed JSON: {e}")]) from None
    if not isinstance(doc, dict) or not {"circuit", "digest", "clock", "actions"} <= set(doc):
        raise ProgramValidationError(
            [Diagnostic("$", "malformed", "expected {circuit, digest, clock, actions}")]
        )
    try:
        clock = HierRef.of(doc["clock"]) if doc["clock"] is not None else None
        actions = tuple(
            _action_from_obj(x, c, f"root[{i}]") for i, x in enumerate(doc["actions"])
        )
    except _Malformed as e:
        raise ProgramValidationError([e.diag]) from None
    p = ActionProgram(doc["circuit"], doc["digest"], clock, actions)
    diags = validate_program(p, c)
    if diags:
        raise ProgramValidationError(diags)
    return p


def count_actions(actions) -> dict[str, int]:
    """Static counts of each action kind, recursing into bodies."""
    counts: dict[str, int] = {}

    def visit(acts):
        for a in acts:
            counts[type(a).__name__.lower()] = counts.get(type(a).__name__.lower(), 0) + 1
            if isinstance(a, While):
                visit(a.body)
            elif isinstance(a, If):
                visit(a.then)
                visit(a.orelse)
            elif isinstance(a, For):
                visit(a.body)

    visit(actions)
    return counts
