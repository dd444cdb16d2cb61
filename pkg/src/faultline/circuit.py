"""Introspectable structural circuit descriptions.

A circuit is a flat netlist: typed interface ports, primitive instances, and
point-to-point nets. Circuits are parsed from a small JSON format, validated
eagerly, and immutable afterwards, so they can be shared freely between the
recording frontend and every backend.

Value semantics are unsigned with wraparound at 2**width; comparison
primitives produce width-1 results. There are no unknown (X/Z) values:
registers start at their declared reset value (default 0) and every other
signal starts at 0.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import NetlistError, RecordError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Identifiers generated by the text emitters carry this prefix; user netlists
# must not use it so emitted names can never collide.
RESERVED_PREFIX = "__fl_"


class PortKind(Enum):
    BIT = "bit"
    BV = "bv"
    CLOCK = "clock"
    ASYNC_RESET_N = "async_reset_n"


@dataclass(frozen=True)
class PortType:
    """Port type: kind plus width (only BV carries an explicit width).

    Bit, Clock, and AsyncResetN are all one bit wide for value operations but
    keep their kind for introspection (e.g. reset-port discovery).
    AsyncResetN is active low: asserted while its value is 0.
    """

    kind: PortKind
    width: int = 1

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"port width must be >= 1, got {self.width}")
        if self.kind is not PortKind.BV and self.width != 1:
            raise ValueError(f"{self.kind.value} ports are always 1 bit wide")

    @staticmethod
    def bit() -> "PortType":
        return PortType(PortKind.BIT)

    @staticmethod
    def bv(width: int) -> "PortType":
        return PortType(PortKind.BV, width)

    @staticmethod
    def clock() -> "PortType":
        return PortType(PortKind.CLOCK)

    @staticmethod
    def async_reset_n() -> "PortType":
        return PortType(PortKind.ASYNC_RESET_N)


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # "input" | "output"
    ptype: PortType

    @property
    def width(self) -> int:
        return self.ptype.width


@dataclass(frozen=True)
class Instance:
    name: str
    kind: str
    params: tuple[tuple[str, object], ...]  # sorted (key, value) pairs

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class Net:
    source: tuple[str, ...]
    sinks: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class HierRef:
    """Hierarchical signal reference: a dotted path into the circuit.

    Depth-1 paths name interface ports; depth-2 paths name instance pins
    (netlists are flat, so deeper paths never resolve).
    """

    path: tuple[str, ...]

    def __post_init__(self):
        if not self.path:
            raise ValueError("empty hierarchical reference")

    @staticmethod
    def of(ref) -> "HierRef":
        """Coerce a string ("ff.Q"), sequence, or HierRef into a HierRef."""
        if isinstance(ref, HierRef):
            return ref
        if isinstance(ref, str):
            return HierRef(tuple(ref.split(".")))
        return HierRef(tuple(ref))

    def dotted(self) -> str:
        return ".".join(self.path)

    def __str__(self) -> str:
        return self.dotted()


@dataclass(frozen=True)
class SignalHandle:
    """Resolved signal: what backends use to address a port or instance pin."""

    path: tuple[str, ...]
    width: int
    is_pin: bool  # False: interface port; True: instance pin
    drives: bool  # True if this endpoint sources a net (input port / output pin)
    ptype: PortType | None = None  # set for interface ports only


# Pin tables for every primitive kind. Each entry maps params to
# {pin name: (width, is_output)}.

BINOPS = ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr")
CMPOPS = ("eq", "ult", "ule")
UNOPS = ("not", "neg")

PRIMITIVE_KINDS = (
    ("const",) + BINOPS + CMPOPS + UNOPS + ("mux", "register", "concat", "slice")
)


def primitive_pins(kind: str, params: dict) -> dict[str, tuple[int, bool]]:
    w = params.get("width")
    if kind == "const":
        return {"out": (w, True)}
    if kind in BINOPS:
        return {"in0": (w, False), "in1": (w, False), "out": (w, True)}
    if kind in CMPOPS:
        return {"in0": (w, False), "in1": (w, False), "out": (1, True)}
    if kind in UNOPS:
        return {"in": (w, False), "out": (w, True)}
    if kind == "mux":
        return {"in0": (w, False), "in1": (w, False), "sel": (1, False), "out": (w, True)}
    if kind == "register":
        pins = {"clk": (1, False), "D": (w, False), "Q": (w, True)}
        if params.get("has_async_reset_n"):
            pins["arst_n"] = (1, False)
        return pins
    if kind == "concat":
        w0, w1 = params["width0"], params["width1"]
        return {"in0": (w0, False), "in1": (w1, False), "out": (w0 + w1, True)}
    if kind == "slice":
        return {"in": (w, False), "out": (params["hi"] - params["lo"], True)}
    raise ValueError(f"unknown primitive kind {kind!r}")


def _check_params(kind: str, params: dict, where: str) -> None:
    def need(key, pred, what):
        if key not in params:
            raise NetlistError(f"{where}.{key}", f"missing required parameter for {kind}")
        if not pred(params[key]):
            raise NetlistError(f"{where}.{key}", f"expected {what}, got {params[key]!r}")

    pos_int = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1
    nonneg_int = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0

    if kind == "concat":
        need("width0", pos_int, "a positive integer width")
        need("width1", pos_int, "a positive integer width")
        extra = set(params) - {"width0", "width1"}
    elif kind == "slice":
        need("width", pos_int, "a positive integer width")
        need("lo", nonneg_int, "a non-negative integer")
        need("hi", pos_int, "a positive integer")
        if not params["lo"] < params["hi"] <= params["width"]:
            raise NetlistError(where, f"slice bounds must satisfy 0 <= lo < hi <= width")
        extra = set(params) - {"width", "lo", "hi"}
    elif kind == "const":
        need("width", pos_int, "a positive integer width")
        need("value", nonneg_int, "a non-negative integer")
        if params["value"] >= 1 << params["width"]:
            raise NetlistError(f"{where}.value", f"constant does not fit in {params['width']} bits")
        extra = set(params) - {"width", "value"}
    elif kind == "register":
        need("width", pos_int, "a positive integer width")
        if "has_async_reset_n" in params and not isinstance(params["has_async_reset_n"], bool):
            raise NetlistError(f"{where}.has_async_reset_n", "expected a boolean")
        if "reset_value" in params:
            need("reset_value", nonneg_int, "a non-negative integer")
            if params["reset_value"] >= 1 << params["width"]:
                raise NetlistError(f"{where}.reset_value", "reset value does not fit in width")
        extra = set(params) - {"width", "has_async_reset_n", "reset_value"}
    else:
        need("width", pos_int, "a positive integer width")
        extra = set(params) - {"width"}
    if extra:
        raise NetlistError(f"{where}.{sorted(extra)[0]}", f"unknown parameter for {kind}")


@dataclass(frozen=True)
class CircuitDecl:
    """Validated structural netlist. Immutable and safe to share."""

    name: str
    ports: tuple[Port, ...]
    instances: tuple[Instance, ...]
    nets: tuple[Net, ...]

    # Derived lookups, filled in __post_init__.
    _ports_by_name: dict = field(init=False, repr=False, compare=False)
    _instances_by_name: dict = field(init=False, repr=False, compare=False)
    _driver_of: dict = field(init=False, repr=False, compare=False)
    _pin_widths: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_ports_by_name", {p.name: p for p in self.ports})
        object.__setattr__(self, "_instances_by_name", {i.name: i for i in self.instances})
        pin_widths: dict[tuple[str, ...], tuple[int, bool]] = {}
        for p in self.ports:
            pin_widths[(p.name,)] = (p.width, p.direction == "input")
        for inst in self.instances:
            for pin, (w, is_out) in primitive_pins(inst.kind, dict(inst.params)).items():
                pin_widths[(inst.name, pin)] = (w, is_out)
        driver_of = {}
        for net in self.nets:
            for sink in net.sinks:
                driver_of[sink] = net.source
        object.__setattr__(self, "_pin_widths", pin_widths)
        object.__setattr__(self, "_driver_of", driver_of)

    # -- interface queries ------------------------------------------------

    def port(self, name: str) -> Port:
        try:
            return self._ports_by_name[name]
        except KeyError:
            raise RecordError(f"circuit {self.name!r} has no port {name!r}") from None

    def instance(self, name: str) -> Instance:
        return self._instances_by_name[name]

    def has_port(self, name: str) -> bool:
        return name in self._ports_by_name

    def endpoint_width(self, endpoint: tuple[str, ...]) -> int:
        return self._pin_widths[endpoint][0]

    def driver_of(self, sink: tuple[str, ...]) -> tuple[str, ...] | None:
        return self._driver_of.get(sink)

    @property
    def clock_ports(self) -> list[Port]:
        return [p for p in self.ports if p.ptype.kind is PortKind.CLOCK]

    @property
    def registers(self) -> list[Instance]:
        return [i for i in self.instances if i.kind == "register"]


def port_width(c: CircuitDecl, name: str) -> int:
    """Width in bits of an interface port (Clock/AsyncResetN/Bit are 1)."""
    return c.port(name).width


def find_ports_by_type(c: CircuitDecl, kind: PortKind) -> list[Port]:
    """All interface ports of the given kind, in declaration order."""
    return [p for p in c.ports if p.ptype.kind is kind]


def resolve(c: CircuitDecl, ref) -> tuple[int, SignalHandle]:
    """Resolve a hierarchical reference to (width, signal handle).

    Raises RecordError naming the first missing path segment.
    """
    ref = HierRef.of(ref)
    path = ref.path
    head = path[0]
    if len(path) == 1:
        if not c.has_port(head):
            raise RecordError(
                f"cannot resolve {ref}: no port or instance named {head!r} in {c.name}"
            )
        p = c.port(head)
        return p.width, SignalHandle(
            path=path,
            width=p.width,
            is_pin=False,
            drives=p.direction == "input",
            ptype=p.ptype,
        )
    if head not in c._instances_by_name:
        raise RecordError(
            f"cannot resolve {ref}: no port or instance named {head!r} in {c.name}"
        )
    if len(path) > 2:
        raise RecordError(
            f"cannot resolve {ref}: {path[1]!r} is a pin of {head!r}, not an instance"
        )
    inst = c.instance(head)
    pins = primitive_pins(inst.kind, dict(inst.params))
    if path[1] not in pins:
        raise RecordError(
            f"cannot resolve {ref}: instance {head!r} ({inst.kind}) has no pin {path[1]!r}"
        )
    w, is_out = pins[path[1]]
    return w, SignalHandle(path=path, width=w, is_pin=True, drives=is_out)


def interface_digest(c: CircuitDecl) -> str:
    """Hash of the ordered interface so programs detect circuit drift."""
    rows = [(p.name, p.direction, p.ptype.kind.value, p.width) for p in c.ports]
    blob = json.dumps(rows, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# -- JSON ingestion ---------------------------------------------------------


def _ident(value, where: str) -> str:
    if not isinstance(value, str) or not IDENT_RE.match(value):
        raise NetlistError(where, f"expected an identifier, got {value!r}")
    if value.startswith(RESERVED_PREFIX):
        raise NetlistError(where, f"identifiers may not start with reserved prefix {RESERVED_PREFIX!r}")
    return value


def _parse_port_type(obj, where: str) -> PortType:
    if obj == "bit":
        return PortType.bit()
    if obj == "clock":
        return PortType.clock()
    if obj == "async_reset_n":
        return PortType.async_reset_n()
    if isinstance(obj, dict) and set(obj) == {"bv"}:
        w = obj["bv"]
        if not isinstance(w, int) or isinstance(w, bool) or w < 1:
            raise NetlistError(f"{where}.bv", f"bit-vector width must be a positive integer, got {w!r}")
        return PortType.bv(w)
    raise NetlistError(where, f"expected \"bit\", \"clock\", \"async_reset_n\", or {{\"bv\": width}}, got {obj!r}")


def _parse_endpoint(text, known, where: str) -> tuple[str, ...]:
    if not isinstance(text, str) or not text:
        raise NetlistError(where, f"expected a '.'-separated pin path, got {text!r}")
    path = tuple(text.split("."))
    for seg in path:
        if not IDENT_RE.match(seg):
            raise NetlistError(where, f"bad path segment {seg!r} in {text!r}")
    if path not in known:
        raise NetlistError(where, f"endpoint {text!r} does not name a port or instance pin")
    return path


def parse_netlist(text: str) -> CircuitDecl:
    """Parse and validate a netlist JSON document.

    Every CircuitDecl invariant is checked here; errors carry the JSON path
    of the offending element.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError("$", f"not well-formed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise NetlistError("$", "top level must be an object")
    unknown = set(doc) - {"name", "ports", "instances", "nets"}
    if unknown:
        raise NetlistError(sorted(unknown)[0], "unknown top-level key")
    if "name" not in doc:
        raise NetlistError("name", "missing circuit name")
    name = _ident(doc["name"], "name")

    ports_doc = doc.get("ports")
    if not isinstance(ports_doc, list):
        raise NetlistError("ports", "expected a list of port objects")
    ports: list[Port] = []
    seen = set()
    n_clocks = 0
    for i, pd in enumerate(ports_doc):
        where = f"ports[{i}]"
        if not isinstance(pd, dict) or set(pd) != {"name", "dir", "type"}:
            raise NetlistError(where, "expected {\"name\", \"dir\", \"type\"}")
        pname = _ident(pd["name"], f"{where}.name")
        if pname in seen:
            raise NetlistError(f"{where}.name", f"duplicate port name {pname!r}")
        seen.add(pname)
        if pd["dir"] not in ("input", "output"):
            raise NetlistError(f"{where}.dir", f"expected \"input\" or \"output\", got {pd['dir']!r}")
        ptype = _parse_port_type(pd["type"], f"{where}.type")
        if ptype.kind in (PortKind.CLOCK, PortKind.ASYNC_RESET_N) and pd["dir"] != "input":
            raise NetlistError(f"{where}.dir", f"{ptype.kind.value} ports must be inputs")
        if ptype.kind is PortKind.CLOCK:
            n_clocks += 1
            if n_clocks > 1:
                raise NetlistError(f"{where}.name", "at most one clock port is permitted")
        ports.append(Port(pname, pd["dir"], ptype))

    insts_doc = doc.get("instances", [])
    if not isinstance(insts_doc, list):
        raise NetlistError("instances", "expected a list of instance objects")
    instances: list[Instance] = []
    for i, idoc in enumerate(insts_doc):
        where = f"instances[{i}]"
        if not isinstance(idoc, dict) or not {"name", "kind"} <= set(idoc) or set(idoc) - {"name", "kind", "params"}:
            raise NetlistError(where, "expected {\"name\", \"kind\", \"params\"}")
        iname = _ident(idoc["name"], f"{where}.name")
        if iname in seen:
            raise NetlistError(f"{where}.name", f"name {iname!r} already used by a port or instance")
        seen.add(iname)
        kind = idoc["kind"]
        if kind not in PRIMITIVE_KINDS:
            raise NetlistError(f"{where}.kind", f"unknown primitive kind {kind!r}")
        params = idoc.get("params", {})
        if not isinstance(params, dict):
            raise NetlistError(f"{where}.params", "expected an object")
        _check_params(kind, params, f"{where}.params")
        instances.append(Instance(iname, kind, tuple(sorted(params.items()))))

    # Endpoint tables: width plus whether the endpoint sources a net.
    sources: dict[tuple[str, ...], int] = {}
    sinks: dict[tuple[str, ...], int] = {}
    for p in ports:
        (sources if p.direction == "input" else sinks)[(p.name,)] = p.width
    for inst in instances:
        for pin, (w, is_out) in primitive_pins(inst.kind, dict(inst.params)).items():
            (sources if is_out else sinks)[(inst.name, pin)] = w
    known = set(sources) | set(sinks)

    nets_doc = doc.get("nets", [])
    if not isinstance(nets_doc, list):
        raise NetlistError("nets", "expected a list of net objects")
    nets: list[Net] = []
    driven: dict[tuple[str, ...], str] = {}
    for i, nd in enumerate(nets_doc):
        where = f"nets[{i}]"
        if not isinstance(nd, dict) or set(nd) != {"from", "to"}:
            raise NetlistError(where, "expected {\"from\", \"to\"}")
        src = _parse_endpoint(nd["from"], known, f"{where}.from")
        if src not in sources:
            raise NetlistError(f"{where}.from", f"{'.'.join(src)} cannot drive a net (it is a sink)")
        to = nd["to"]
        if not isinstance(to, list) or not to:
            raise NetlistError(f"{where}.to", "expected a non-empty list of pin paths")
        net_sinks = []
        for j, sd in enumerate(to):
            swhere = f"{where}.to[{j}]"
            snk = _parse_endpoint(sd, known, swhere)
            if snk not in sinks:
                raise NetlistError(swhere, f"{'.'.join(snk)} cannot be driven (it is a source)")
            if sinks[snk] != sources[src]:
                raise NetlistError(
                    swhere,
                    f"width mismatch: {'.'.join(src)} is {sources[src]} bits "
                    f"but {'.'.join(snk)} is {sinks[snk]} bits",
                )
            if snk in driven:
                raise NetlistError(swhere, f"{'.'.join(snk)} has multiple drivers (also driven by {driven[snk]})")
            driven[snk] = ".".join(src)
            net_sinks.append(snk)
        nets.append(Net(src, tuple(net_sinks)))

    for snk in sinks:
        if snk not in driven:
            raise NetlistError("nets", f"sink {'.'.join(snk)} is undriven")

    # Clock and async-reset discipline for registers.
    clock_port = next((p for p in ports if p.ptype.kind is PortKind.CLOCK), None)
    reset_names = {p.name for p in ports if p.ptype.kind is PortKind.ASYNC_RESET_N}
    for inst in instances:
        if inst.kind != "register":
            continue
        drv = driven.get((inst.name, "clk"))
        if clock_port is None or drv != clock_port.name:
            raise NetlistError(
                "nets", f"register {inst.name!r} clock pin must be driven by a clock-typed port"
            )
        if inst.param("has_async_reset_n"):
            rdrv = driven.get((inst.name, "arst_n"))
            if rdrv not in reset_names:
                raise NetlistError(
                    "nets",
                    f"register {inst.name!r} async-reset pin must be driven by an async_reset_n port",
                )
    # Clock and reset ports may only feed their dedicated register pins.
    port_lookup = {p.name: p for p in ports}
    for net in nets:
        src_port = port_lookup.get(net.source[0]) if len(net.source) == 1 else None
        if src_port is None:
            continue
        if src_port.ptype.kind is PortKind.CLOCK:
            for snk in net.sinks:
                if len(snk) != 2 or snk[1] != "clk":
                    raise NetlistError("nets", f"clock port {src_port.name!r} may only drive register clk pins")
        if src_port.ptype.kind is PortKind.ASYNC_RESET_N:
            for snk in net.sinks:
                if len(snk) != 2 or snk[1] != "arst_n":
                    raise NetlistError(
                        "nets", f"async_reset_n port {src_port.name!r} may only drive register arst_n pins"
                    )

    return CircuitDecl(name, tuple(ports), tuple(instances), tuple(nets))


def serialize_netlist(c: CircuitDecl) -> str:
    """Canonical JSON for a circuit; reparsing yields a structurally equal one."""

    def type_doc(pt: PortType):
        if pt.kind is PortKind.BV:
            return {"bv": pt.width}
        return pt.kind.value

    doc = {
        "name": c.name,
        "ports": [
            {"name": p.name, "dir": p.direction, "type": type_doc(p.ptype)} for p in c.ports
        ],
        "instances": [
            {"name": i.name, "kind": i.kind, "params": dict(i.params)} for i in c.instances
        ],
        "nets": [
            {"from": ".".join(n.source), "to": [".".join(s) for s in n.sinks]} for n in c.nets
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
