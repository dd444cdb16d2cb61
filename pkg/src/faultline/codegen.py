"""Deterministic testbench emitters: SystemVerilog and Verilator-style C++.

Emission is a pure function of (program, circuit, dialect/options); identical
inputs produce byte-identical text with LF newlines. Every generated
identifier either names a circuit object or carries the reserved "__fl_"
prefix, which netlist identifiers may not use.

Programs containing assume/guarantee actions must be lowered to concrete
pokes/expects (via the constrained-random engine) before emission.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from . import actions as ac
from . import expr as ex
from .circuit import CircuitDecl
from .errors import CodegenError

_TEMPLATE_FIELD_RE = re.compile(r"\{([^{}]*)\}")


@dataclass(frozen=True)
class SvDialect:
    """Per-simulator quirks: waveform command, file API style, timescale.

    waveform_command is a template whose only placeholder is {top}; use "" to
    skip waveform dumping entirely.
    """

    name: str
    waveform_command: str
    file_io_style: str = "standard"  # or "nonstandard-iverilog"
    timescale: str = "1ns/1ps"

    def __post_init__(self):
        if self.file_io_style not in ("standard", "nonstandard-iverilog"):
            raise ValueError(f"unknown file_io_style {self.file_io_style!r}")
        fields = set(_TEMPLATE_FIELD_RE.findall(self.waveform_command))
        if not fields <= {"top"}:
            raise ValueError(f"waveform_command uses undeclared placeholder(s) {sorted(fields - {'top'})}")


BUILTIN_DIALECTS = {
    "generic": SvDialect(
        name="generic",
        waveform_command='$dumpfile("{top}.vcd");\n$dumpvars(0, {top});',
    ),
    "iverilog": SvDialect(
        name="iverilog",
        waveform_command='$dumpfile("{top}.vcd");\n$dumpvars(0, {top});',
        file_io_style="nonstandard-iverilog",
    ),
    "commercial-a": SvDialect(
        name="commercial-a",
        waveform_command='$fsdbDumpfile("{top}.fsdb");\n$fsdbDumpvars(0, {top});',
        timescale="1ns/10ps",
    ),
    "commercial-b": SvDialect(
        name="commercial-b",
        waveform_command='$shm_open("{top}.shm");\n$shm_probe({top}, "AS");',
        timescale="1ns/100ps",
    ),
}


def load_dialects(path: str) -> dict[str, SvDialect]:
    """Load dialect definitions from a JSON or TOML file.

    The document maps dialect names to {waveform_command, file_io_style,
    timescale} objects; missing fields take the generic defaults.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        doc = tomllib.loads(raw.decode())
    else:
        doc = json.loads(raw.decode())
    out = {}
    for name, fields in doc.items():
        out[name] = SvDialect(
            name=name,
            waveform_command=fields.get("waveform_command", ""),
            file_io_style=fields.get("file_io_style", "standard"),
            timescale=fields.get("timescale", "1ns/1ps"),
        )
    return out


@dataclass(frozen=True)
class EmittedTestbench:
    text: str
    language: str  # "systemverilog" | "cxx" | "verilog" | "spice"
    entry: str


def _check_no_constraints(p: ac.ActionProgram) -> None:
    def visit(actions):
        for a in actions:
            if isinstance(a, (ac.Assume, ac.Guarantee)):
                raise CodegenError(
                    "program contains assume/guarantee actions; lower them to concrete "
                    "pokes/expects (constrained-random engine) before emitting a testbench"
                )
            if isinstance(a, ac.While):
                visit(a.body)
            elif isinstance(a, ac.If):
                visit(a.then)
                visit(a.orelse)
            elif isinstance(a, ac.For):
                visit(a.body)

    visit(p.actions)


def _collect_for_vars(actions) -> list[tuple[str, int]]:
    out = []
    def visit(acts):
        for a in acts:
            if isinstance(a, ac.For):
                out.append((a.var, a.count))
                visit(a.body)
            elif isinstance(a, ac.While):
                visit(a.body)
            elif isinstance(a, ac.If):
                visit(a.then)
                visit(a.orelse)
    visit(actions)
    return out


# -- SystemVerilog ------------------------------------------------------------


def _sv_const(value: int, width: int) -> str:
    return f"{width}'d{value}"


def _sv_ref(ref, c: CircuitDecl) -> str:
    if len(ref.path) == 1:
        return ref.path[0]
    return "__fl_dut." + ".".join(ref.path)


def _sv_expr(e: ex.Expr, c: CircuitDecl) -> str:
    if isinstance(e, ex.Const):
        return _sv_const(e.value, e.width)
    if isinstance(e, ex.Peek):
        return _sv_ref(e.ref, c)
    if isinstance(e, ex.Var):
        return e.name
    if isinstance(e, ex.Zext):
        return _sv_expr(e.child, c)  # verilog zero-extends in wider contexts
    if isinstance(e, ex.Trunc):
        mask = (1 << e.width) - 1
        return f"(({_sv_expr(e.child, c)}) & {e.child.width}'h{mask:x})"
    if isinstance(e, ex.Unop):
        op = {"not": "!", "neg": "-", "bitnot": "~"}[e.op]
        return f"({op}{_sv_expr(e.child, c)})"
    assert isinstance(e, ex.Binop)
    op = {
        "add": "+", "sub": "-", "mul": "*", "and": "&", "or": "|", "xor": "^",
        "shl": "<<", "lshr": ">>", "eq": "==", "neq": "!=", "ult": "<",
        "ule": "<=", "ugt": ">", "uge": ">=", "land": "&&", "lor": "||",
    }[e.op]
    return f"({_sv_expr(e.left, c)} {op} {_sv_expr(e.right, c)})"


def emit_sv(
    p: ac.ActionProgram, c: CircuitDecl, d: SvDialect, *, fail_fast: bool = False
) -> EmittedTestbench:
    """Lower a program to a SystemVerilog testbench driving the DUT from an
    initial block inside the top-level module."""
    _check_no_constraints(p)
    top = f"{c.name}_tb"
    inputs = [pt for pt in c.ports if pt.direction == "input"]
    outputs = [pt for pt in c.ports if pt.direction == "output"]

    lines: list[str] = []
    w = lines.append
    w(f"// Generated testbench for {c.name}; do not edit.")
    w(f"`timescale {d.timescale}")
    w("")
    w(f"module {top};")
    for pt in inputs:
        rng = f" [{pt.width - 1}:0]" if pt.width > 1 else ""
        w(f"  reg{rng} {pt.name};")
    for pt in outputs:
        rng = f" [{pt.width - 1}:0]" if pt.width > 1 else ""
        w(f"  wire{rng} {pt.name};")
    w("  integer __fl_failures;")
    w("  integer __fl_fd;")
    for name, _count in _collect_for_vars(p.actions):
        w(f"  integer {name};")
    w("")
    conns = ",\n".join(f"    .{pt.name}({pt.name})" for pt in c.ports)
    w(f"  {c.name} __fl_dut (")
    w(conns)
    w("  );")
    w("")
    w("  initial begin")
    if d.waveform_command:
        for cmd_line in d.waveform_command.format(top=top).split("\n"):
            w(f"    {cmd_line}")
    w("    __fl_failures = 0;")
    for pt in inputs:
        w(f"    {pt.name} = {_sv_const(0, pt.width)};")

    def emit_actions(actions, indent: str):
        for a in actions:
            if isinstance(a, ac.Poke):
                w(f"{indent}{_sv_ref(a.ref, c)} = {_sv_expr(a.value, c)};")
            elif isinstance(a, ac.Eval):
                w(f"{indent}#1;")
            elif isinstance(a, ac.Step):
                clk = p.clock.path[0]
                body = f"{clk} = ~{clk}; #1;"
                if a.n == 1:
                    w(f"{indent}{body}")
                else:
                    w(f"{indent}repeat ({a.n}) begin {body} end")
            elif isinstance(a, ac.Expect):
                obs = _sv_ref(a.ref, c)
                exp = _sv_expr(a.value, c)
                w(f"{indent}if ({obs} !== {exp}) begin")
                w(f'{indent}  $error("expect failed: {obs} is %0d, expected %0d", {obs}, {exp});')
                w(f"{indent}  __fl_failures = __fl_failures + 1;")
                if fail_fast:
                    w(f"{indent}  $fatal(1);")
                w(f"{indent}end")
            elif isinstance(a, ac.Print):
                fmt = _sv_escape(_map_sv_format(a.format))
                args = "".join(f", {_sv_expr(x, c)}" for x in a.args)
                w(f'{indent}$write("{fmt}"{args});')
            elif isinstance(a, ac.While):
                w(f"{indent}while ({_sv_expr(a.cond, c)}) begin")
                emit_actions(a.body, indent + "  ")
                w(f"{indent}end")
            elif isinstance(a, ac.If):
                w(f"{indent}if ({_sv_expr(a.cond, c)}) begin")
                emit_actions(a.then, indent + "  ")
                w(f"{indent}end else begin")
                emit_actions(a.orelse, indent + "  ")
                w(f"{indent}end")
            elif isinstance(a, ac.For):
                v = a.var
                w(f"{indent}for ({v} = 0; {v} < {a.count}; {v} = {v} + 1) begin")
                emit_actions(a.body, indent + "  ")
                w(f"{indent}end")
            else:
                raise AssertionError(type(a).__name__)

    emit_actions(p.actions, "    ")
    w('    if (__fl_failures != 0) $display("FAULTLINE FAIL: %0d expect(s) failed", __fl_failures);')
    w('    else $display("FAULTLINE PASS");')
    if d.file_io_style == "nonstandard-iverilog":
        w(f'    __fl_fd = $fopen("{top}_results.txt");')
    else:
        w(f'    __fl_fd = $fopen("{top}_results.txt", "w");')
    w('    $fdisplay(__fl_fd, "%0d", __fl_failures);')
    w("    $fclose(__fl_fd);")
    w("    if (__fl_failures != 0) $fatal(1);")
    w("    $finish;")
    w("  end")
    w("endmodule")
    return EmittedTestbench("\n".join(lines) + "\n", "systemverilog", top)


def _map_sv_format(fmt: str) -> str:
    return fmt.replace("%d", "%0d")


def _sv_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


# -- C++ (Verilator-style harness) ------------------------------------------------


def _cxx_mask(width: int) -> str:
    return f"0x{(1 << width) - 1:x}ull"


def _cxx_ref(ref, c: CircuitDecl) -> str:
    if len(ref.path) == 1:
        return f"__fl_top->{ref.path[0]}"
    return f"__fl_top->rootp->{c.name}__DOT__" + "__DOT__".join(ref.path)


def _cxx_expr(e: ex.Expr, c: CircuitDecl) -> str:
    if isinstance(e, ex.Const):
        return f"0x{e.value:x}ull"
    if isinstance(e, ex.Peek):
        return f"(uint64_t){_cxx_ref(e.ref, c)}"
    if isinstance(e, ex.Var):
        return f"(uint64_t){e.name}"
    if isinstance(e, ex.Zext):
        return _cxx_expr(e.child, c)
    if isinstance(e, ex.Trunc):
        return f"({_cxx_expr(e.child, c)} & {_cxx_mask(e.width)})"
    if isinstance(e, ex.Unop):
        child = _cxx_expr(e.child, c)
        if e.op == "not":
            return f"(uint64_t)({child} == 0)"
        if e.op == "neg":
            return f"((0 - {child}) & {_cxx_mask(e.width)})"
        return f"((~{child}) & {_cxx_mask(e.width)})"
    assert isinstance(e, ex.Binop)
    a, b = _cxx_expr(e.left, c), _cxx_expr(e.right, c)
    w = e.width
    op = e.op
    if op in ("add", "sub", "mul"):
        sym = {"add": "+", "sub": "-", "mul": "*"}[op]
        return f"(({a} {sym} {b}) & {_cxx_mask(w)})"
    if op in ("and", "or", "xor"):
        sym = {"and": "&", "or": "|", "xor": "^"}[op]
        return f"({a} {sym} {b})"
    if op == "shl":
        return f"({b} < {e.left.width} ? (({a} << {b}) & {_cxx_mask(w)}) : 0)"
    if op == "lshr":
        return f"({b} < {e.left.width} ? ({a} >> {b}) : 0)"
    sym = {
        "eq": "==", "neq": "!=", "ult": "<", "ule": "<=", "ugt": ">", "uge": ">=",
    }.get(op)
    if sym is not None:
        return f"(uint64_t)({a} {sym} {b})"
    if op == "land":
        return f"(uint64_t)(({a} != 0) && ({b} != 0))"
    return f"(uint64_t)(({a} != 0) || ({b} != 0))"  # lor


def emit_cxx(p: ac.ActionProgram, c: CircuitDecl) -> EmittedTestbench:
    """Lower a program to a C++ harness against a Verilated model object."""
    _check_no_constraints(p)
    for pt in c.ports:
        if pt.width > 64:
            raise CodegenError(
                f"port {pt.name!r} is {pt.width} bits; the C++ harness emitter supports widths up to 64"
            )
    top = f"{c.name}_tb"
    lines: list[str] = []
    w = lines.append
    w(f"// Generated Verilator-style harness for {c.name}; do not edit.")
    w("#include <cstdint>")
    w("#include <cstdio>")
    w("")
    w(f'#include "V{c.name}.h"')
    w('#include "verilated.h"')
    w("")
    w("static int __fl_failures = 0;")
    w("")
    w("static void __fl_check(const char* signal, uint64_t observed, uint64_t expected) {")
    w("  if (observed != expected) {")
    w('    std::fprintf(stderr, "expect failed: %s is %llu, expected %llu\\n", signal,')
    w("                 (unsigned long long)observed, (unsigned long long)expected);")
    w("    ++__fl_failures;")
    w("  }")
    w("}")
    if _uses_binary_print(p.actions):
        w("")
        w("static void __fl_print_bin(uint64_t value, int width) {")
        w("  for (int i = width - 1; i >= 0; --i) std::putchar(((value >> i) & 1) ? '1' : '0');")
        w("}")
    w("")
    w("int main(int argc, char** argv) {")
    w("  Verilated::commandArgs(argc, argv);")
    w(f"  V{c.name}* __fl_top = new V{c.name};")

    def emit_actions(actions, indent: str):
        for a in actions:
            if isinstance(a, ac.Poke):
                w(f"{indent}{_cxx_ref(a.ref, c)} = {_cxx_expr(a.value, c)};")
            elif isinstance(a, ac.Eval):
                w(f"{indent}__fl_top->eval();")
            elif isinstance(a, ac.Step):
                clk = _cxx_ref(p.clock, c)
                for _ in range(a.n):
                    w(f"{indent}{clk} = !{clk}; __fl_top->eval();")
            elif isinstance(a, ac.Expect):
                obs = _cxx_ref(a.ref, c)
                w(
                    f'{indent}__fl_check("{a.ref.dotted()}", (uint64_t){obs}, {_cxx_expr(a.value, c)});'
                )
            elif isinstance(a, ac.Print):
                _emit_cxx_print(w, indent, a, c)
            elif isinstance(a, ac.While):
                w(f"{indent}while ({_cxx_expr(a.cond, c)}) {{")
                emit_actions(a.body, indent + "  ")
                w(f"{indent}}}")
            elif isinstance(a, ac.If):
                w(f"{indent}if ({_cxx_expr(a.cond, c)}) {{")
                emit_actions(a.then, indent + "  ")
                w(f"{indent}}} else {{")
                emit_actions(a.orelse, indent + "  ")
                w(f"{indent}}}")
            elif isinstance(a, ac.For):
                v = a.var
                w(f"{indent}for (uint64_t {v} = 0; {v} < {a.count}; ++{v}) {{")
                emit_actions(a.body, indent + "  ")
                w(f"{indent}}}")
            else:
                raise AssertionError(type(a).__name__)

    emit_actions(p.actions, "  ")
    w("  __fl_top->final();")
    w("  delete __fl_top;")
    w('  if (__fl_failures != 0) std::fprintf(stderr, "%d expect(s) failed\\n", __fl_failures);')
    w("  return __fl_failures;")
    w("}")
    return EmittedTestbench("\n".join(lines) + "\n", "cxx", top)


def _uses_binary_print(actions) -> bool:
    for a in actions:
        if isinstance(a, ac.Print) and "%b" in a.format:
            return True
        if isinstance(a, ac.While) and _uses_binary_print(a.body):
            return True
        if isinstance(a, ac.If) and (_uses_binary_print(a.then) or _uses_binary_print(a.orelse)):
            return True
        if isinstance(a, ac.For) and _uses_binary_print(a.body):
            return True
    return False


def _emit_cxx_print(w, indent: str, a: ac.Print, c: CircuitDecl) -> None:
    """Split the format at %b boundaries: printf segments + binary helper calls."""
    segments: list[tuple[str, list]] = [("", [])]  # (format text, args)
    binary: list = []  # exprs printed via __fl_print_bin, interleaved
    i = 0
    ai = 0
    fmt = a.format
    while i < len(fmt):
        ch = fmt[i]
        if ch == "%":
            conv = fmt[i + 1]
            if conv == "%":
                segments[-1] = (segments[-1][0] + "%%", segments[-1][1])
            elif conv == "b":
                binary.append(a.args[ai])
                ai += 1
                segments.append(("", []))
            else:
                arg = a.args[ai]
                ai += 1
                if conv == "d":
                    segments[-1] = (segments[-1][0] + "%llu", segments[-1][1] + [arg])
                else:  # %x, zero-padded to the hex width of the argument
                    digits = (arg.width + 3) // 4
                    segments[-1] = (segments[-1][0] + f"%0{digits}llx", segments[-1][1] + [arg])
            i += 2
        else:
            segments[-1] = (segments[-1][0] + ch, segments[-1][1])
            i += 1
    for si, (text, args) in enumerate(segments):
        if text:
            rendered = "".join(
                f", (unsigned long long){_cxx_expr(x, c)}" for x in args
            )
            w(f'{indent}std::printf("{_sv_escape(text)}"{rendered});')
        elif args:
            raise AssertionError("printf segment with args but no text")
        if si < len(binary):
            e = binary[si]
            w(f"{indent}__fl_print_bin({_cxx_expr(e, c)}, {e.width});")


# -- minimal structural Verilog for the DUT itself ----------------------------------


def emit_dut_verilog(c: CircuitDecl) -> EmittedTestbench:
    """Structural Verilog for the netlist, for manual end-to-end runs.

    No timing constructs: combinational assigns plus one always block per
    register (with an initial block seeding the reset value).
    """
    from .circuit import primitive_pins

    name_of: dict[tuple[str, ...], str] = {}
    for pt in c.ports:
        name_of[(pt.name,)] = pt.name
    for inst in c.instances:
        for pin, (wd, is_out) in primitive_pins(inst.kind, dict(inst.params)).items():
            if is_out:
                name_of[(inst.name, pin)] = f"__fl_{inst.name}_{pin}"

    def src(endpoint) -> str:
        drv = c.driver_of(endpoint)
        return name_of[drv]

    lines: list[str] = []
    w = lines.append
    w(f"// Structural model of {c.name}; generated, do not edit.")
    w(f"module {c.name}(")
    decls = []
    for pt in c.ports:
        rng = f" [{pt.width - 1}:0]" if pt.width > 1 else ""
        decls.append(f"  {pt.direction}{rng} {pt.name}")
    w(",\n".join(decls))
    w(");")
    for inst in c.instances:
        pins = primitive_pins(inst.kind, dict(inst.params))
        for pin, (wd, is_out) in pins.items():
            if not is_out:
                continue
            rng = f" [{wd - 1}:0]" if wd > 1 else ""
            kind = "reg" if inst.kind == "register" else "wire"
            w(f"  {kind}{rng} {name_of[(inst.name, pin)]};")
    w("")
    for inst in c.instances:
        params = dict(inst.params)
        k = inst.kind
        out = name_of[(inst.name, "out")] if k != "register" else None
        if k == "const":
            w(f"  assign {out} = {params['width']}'d{params['value']};")
        elif k in ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr"):
            sym = {"add": "+", "sub": "-", "mul": "*", "and": "&", "or": "|",
                   "xor": "^", "shl": "<<", "lshr": ">>"}[k]
            w(f"  assign {out} = {src((inst.name, 'in0'))} {sym} {src((inst.name, 'in1'))};")
        elif k in ("eq", "ult", "ule"):
            sym = {"eq": "==", "ult": "<", "ule": "<="}[k]
            w(f"  assign {out} = {src((inst.name, 'in0'))} {sym} {src((inst.name, 'in1'))};")
        elif k == "not":
            w(f"  assign {out} = ~{src((inst.name, 'in'))};")
        elif k == "neg":
            w(f"  assign {out} = -{src((inst.name, 'in'))};")
        elif k == "mux":
            w(
                f"  assign {out} = {src((inst.name, 'sel'))} ? "
                f"{src((inst.name, 'in1'))} : {src((inst.name, 'in0'))};"
            )
        elif k == "concat":
            w(f"  assign {out} = {{{src((inst.name, 'in1'))}, {src((inst.name, 'in0'))}}};")
        elif k == "slice":
            lo, hi = params["lo"], params["hi"]
            sel = f"[{hi - 1}:{lo}]" if hi - lo > 1 else f"[{lo}]"
            w(f"  assign {out} = {src((inst.name, 'in'))}{sel};")
        else:
            assert k == "register"
            q = name_of[(inst.name, "Q")]
            reset_value = params.get("reset_value", 0)
            width = params["width"]
            w(f"  initial {q} = {width}'d{reset_value};")
            if params.get("has_async_reset_n"):
                rst = src((inst.name, "arst_n"))
                w(f"  always @(posedge {src((inst.name, 'clk'))} or negedge {rst})")
                w(f"    if (!{rst}) {q} <= {width}'d{reset_value};")
                w(f"    else {q} <= {src((inst.name, 'D'))};")
            else:
                w(f"  always @(posedge {src((inst.name, 'clk'))})")
                w(f"    {q} <= {src((inst.name, 'D'))};")
    w("")
    for pt in c.ports:
        if pt.direction == "output":
            w(f"  assign {pt.name} = {src((pt.name,))};")
    w("endmodule")
    return EmittedTestbench("\n".join(lines) + "\n", "verilog", c.name)
