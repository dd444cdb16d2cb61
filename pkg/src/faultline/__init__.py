"""faultline: record a hardware test once, run it everywhere.

A test is a sequence of recorded actions (poke/peek/expect/eval/step plus
preserved control flow and assume/guarantee constraints) against an
introspectable netlist. The same program runs on the in-process interpreter,
lowers to SystemVerilog and C++ testbenches, feeds a SAT-based bounded model
checker and k-induction prover, drives constrained-random campaigns, and
compiles to SPICE PWL waveform testbenches.
"""

from .actions import ActionProgram, deserialize, serialize, validate_program
from .circuit import (
    CircuitDecl,
    HierRef,
    PortKind,
    PortType,
    find_ports_by_type,
    interface_digest,
    parse_netlist,
    port_width,
    resolve,
    serialize_netlist,
)
from .errors import (
    CodegenError,
    FaultlineError,
    FormalError,
    NetlistError,
    ProgramValidationError,
    RecordError,
    SamplingError,
    SpiceError,
    UnsatConstraintsError,
)
from .expr import Const, Expr, Peek, Var
from .report import TestReport
from .sim import SimModel, Simulation, compile_sim, eval_expr, run
from .tester import Tester, var

__all__ = [
    "ActionProgram",
    "CircuitDecl",
    "CodegenError",
    "Const",
    "Expr",
    "FaultlineError",
    "FormalError",
    "HierRef",
    "NetlistError",
    "Peek",
    "PortKind",
    "PortType",
    "ProgramValidationError",
    "RecordError",
    "SamplingError",
    "SimModel",
    "Simulation",
    "SpiceError",
    "TestReport",
    "Tester",
    "UnsatConstraintsError",
    "Var",
    "compile_sim",
    "deserialize",
    "eval_expr",
    "find_ports_by_type",
    "interface_digest",
    "parse_netlist",
    "port_width",
    "resolve",
    "run",
    "serialize",
    "serialize_netlist",
    "validate_program",
    "var",
]

__version__ = "0.1.0"
