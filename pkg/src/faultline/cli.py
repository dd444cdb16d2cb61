"""Command-line driver: run bundles, emit testbenches, validate programs.

A bundle is a (netlist.json, program.json) pair. Exit codes are part of the
contract: 0 for pass/proved/no-counterexample, 1 for fail/counterexample
(and inconclusive or aborted runs), 2 for usage or validation errors.
The FAULTLINE_OUT environment variable overrides the default output
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import actions as ac
from .circuit import parse_netlist
from .codegen import BUILTIN_DIALECTS, emit_cxx, emit_dut_verilog, emit_sv, load_dialects
from .errors import FaultlineError, ProgramValidationError
from .formal import bmc, emit_smt2, encode_ts, k_induction, lower_prefix, replay_counterexample
from .formal.check import Counterexample
from .random_engine import run_constrained_random
from .report import Failure, TestReport
from .sim import compile_sim, run
from .spice import AnalogTiming, WaveformTable, check_results, compile_pwl, emit_spice_tb

RUN_TARGETS = ("interp", "formal", "random", "spice-check")
EMIT_TARGETS = ("sv", "cxx", "spice-emit", "formal")


@dataclass
class RunConfig:
    netlist: str
    program: str
    target: str
    out: str = "."
    dialect: str = "generic"
    dialect_config: str | None = None
    bound: int = 10
    k: int | None = None
    samples: int = 100
    seed: int = 0
    strategy: str = "rejection"
    timing: str | None = None
    clock_period: float | None = None
    vdd: float | None = None
    data: str | None = None
    fail_fast: bool = False
    max_loop_iters: int = 1_000_000
    trace: bool = False
    spice_include: str | None = None
    with_dut: bool = False
    extra: dict = field(default_factory=dict)


def _load_bundle(cfg: RunConfig):
    with open(cfg.netlist, "r", encoding="utf-8") as fh:
        circuit = parse_netlist(fh.read())
    with open(cfg.program, "r", encoding="utf-8") as fh:
        program = ac.deserialize(fh.read(), circuit)
    return circuit, program


def _timing(cfg: RunConfig) -> AnalogTiming:
    fields = {}
    if cfg.timing:
        with open(cfg.timing, "r", encoding="utf-8") as fh:
            fields.update(json.load(fh))
    if cfg.clock_period is not None:
        fields["clock_period"] = cfg.clock_period
    if cfg.vdd is not None:
        fields["vdd"] = cfg.vdd
    return AnalogTiming(**fields)


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _finish_run(cfg: RunConfig, report: TestReport) -> int:
    path = os.path.join(cfg.out, "report.json")
    _write(path, report.to_json() + "\n")
    print(f"{report.verdict}: report written to {path}")
    return 0 if report.verdict == "pass" else 1


def cmd_run(cfg: RunConfig) -> int:
    circuit, program = _load_bundle(cfg)
    if cfg.target == "interp":
        report = run(
            program,
            compile_sim(circuit),
            fail_fast=cfg.fail_fast,
            max_loop_iters=cfg.max_loop_iters,
            trace=cfg.trace,
        )
        return _finish_run(cfg, report)
    if cfg.target == "formal":
        ts = lower_prefix(program, encode_ts(circuit))
        report = TestReport()
        if cfg.k is not None:
            result = k_induction(ts, cfg.k)
            report.extra["mode"] = "k-induction"
            report.extra["k"] = cfg.k
            if result == "proved":
                report.extra["result"] = "proved"
            elif result == "unknown":
                report.extra["result"] = "unknown"
                report.errors.append(f"k-induction inconclusive at k={cfg.k}")
            else:
                _attach_cex(report, result, circuit, program)
        else:
            report.extra["mode"] = "bmc"
            report.extra["bound"] = cfg.bound
            cex = bmc(ts, cfg.bound)
            if cex is None:
                report.extra["result"] = "no-counterexample-up-to-bound"
            else:
                _attach_cex(report, cex, circuit, program)
        return _finish_run(cfg, report)
    if cfg.target == "random":
        report = run_constrained_random(
            program, compile_sim(circuit), cfg.samples, cfg.seed, cfg.strategy
        )
        return _finish_run(cfg, report)
    if cfg.target == "spice-check":
        if not cfg.data:
            raise FaultlineError("spice-check needs --data with the waveform CSV")
        with open(cfg.data, "r", encoding="utf-8") as fh:
            table = WaveformTable.from_csv(fh.read())
        report = check_results(table, program, circuit, _timing(cfg))
        return _finish_run(cfg, report)
    raise FaultlineError(f"unknown run target {cfg.target!r} (expected one of {RUN_TARGETS})")


def _attach_cex(report: TestReport, cex: Counterexample, circuit, program) -> None:
    report.extra["result"] = "counterexample"
    report.extra["counterexample"] = cex.to_obj()
    report.extra["replay_confirmed"] = replay_counterexample(circuit, program, cex)
    report.failures.append(
        Failure(
            "formal",
            "guarantee-violated",
            f"property {cex.property_index} violated at depth {cex.depth}",
            bindings=cex.inputs[cex.depth],
        )
    )


def cmd_emit(cfg: RunConfig) -> int:
    circuit, program = _load_bundle(cfg)
    written: list[str] = []

    def save(name: str, text: str) -> None:
        path = os.path.join(cfg.out, name)
        _write(path, text)
        written.append(path)

    if cfg.target == "sv":
        dialects = dict(BUILTIN_DIALECTS)
        if cfg.dialect_config:
            dialects.update(load_dialects(cfg.dialect_config))
        if cfg.dialect not in dialects:
            raise FaultlineError(f"unknown dialect {cfg.dialect!r} (have {sorted(dialects)})")
        tb = emit_sv(program, circuit, dialects[cfg.dialect], fail_fast=cfg.fail_fast)
        save(f"{circuit.name}_tb.sv", tb.text)
    elif cfg.target == "cxx":
        save(f"{circuit.name}_tb.cpp", emit_cxx(program, circuit).text)
    elif cfg.target == "spice-emit":
        timing = _timing(cfg)
        include = cfg.spice_include or f"{circuit.name}.sp"
        waves = compile_pwl(program, circuit, timing)
        save(f"{circuit.name}_tb.sp", emit_spice_tb(waves, circuit, timing, include).text)
    elif cfg.target == "formal":
        ts = lower_prefix(program, encode_ts(circuit))
        for i in range(len(ts.properties)):
            save(f"{circuit.name}_p{i}.smt2", emit_smt2(ts, cfg.bound, i))
    else:
        raise FaultlineError(f"unknown emit target {cfg.target!r} (expected one of {EMIT_TARGETS})")
    if cfg.with_dut:
        save(f"{circuit.name}.v", emit_dut_verilog(circuit).text)
    for path in written:
        print(path)
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    circuit, program = _load_bundle(cfg)  # deserialize validates
    n = len(program.actions)
    print(f"ok: {cfg.program} is a valid program for {circuit.name} ({n} top-level actions)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultline",
        description="Run recorded hardware test programs on interpreter, formal, random, and analog backends.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--netlist", required=True, help="circuit netlist JSON")
        sp.add_argument("--program", required=True, help="action program JSON")
        sp.add_argument("--out", default=None, help="output directory (default: $FAULTLINE_OUT or .)")

    p_run = sub.add_parser("run", help="execute a program and write a report")
    common(p_run)
    p_run.add_argument("--target", default="interp", choices=RUN_TARGETS)
    p_run.add_argument("--bound", type=int, default=10, help="BMC unrolling bound")
    p_run.add_argument("--k", type=int, default=None, help="use k-induction with this k")
    p_run.add_argument("--samples", type=int, default=100, help="constrained-random sample count")
    p_run.add_argument("--seed", type=int, default=0, help="constrained-random seed")
    p_run.add_argument("--strategy", default="rejection", choices=("rejection", "solver"))
    p_run.add_argument("--timing", default=None, help="analog timing config JSON")
    p_run.add_argument("--clock-period", type=float, default=None)
    p_run.add_argument("--vdd", type=float, default=None)
    p_run.add_argument("--data", default=None, help="waveform CSV for spice-check")
    p_run.add_argument("--fail-fast", action="store_true")
    p_run.add_argument("--max-loop-iters", type=int, default=1_000_000)
    p_run.add_argument("--trace", action="store_true", help="record a value-change log in the report")

    p_emit = sub.add_parser("emit", help="lower a program to testbench/solver inputs")
    common(p_emit)
    p_emit.add_argument("--target", required=True, choices=EMIT_TARGETS)
    p_emit.add_argument("--dialect", default="generic")
    p_emit.add_argument("--dialect-config", default=None, help="extra dialects (JSON or TOML)")
    p_emit.add_argument("--bound", type=int, default=10, help="unrolling bound for SMT emission")
    p_emit.add_argument("--timing", default=None)
    p_emit.add_argument("--clock-period", type=float, default=None)
    p_emit.add_argument("--vdd", type=float, default=None)
    p_emit.add_argument("--fail-fast", action="store_true")
    p_emit.add_argument("--spice-include", default=None, help="DUT subcircuit include path for the deck")
    p_emit.add_argument("--with-dut", action="store_true", help="also write structural Verilog for the DUT")

    p_val = sub.add_parser("validate", help="check a bundle without running it")
    common(p_val)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    out = args.out if args.out is not None else os.environ.get("FAULTLINE_OUT", ".")
    cfg = RunConfig(netlist=args.netlist, program=args.program, target=getattr(args, "target", ""), out=out)
    for name in (
        "dialect", "dialect_config", "bound", "k", "samples", "seed", "strategy",
        "timing", "clock_period", "vdd", "data", "fail_fast", "max_loop_iters",
        "trace", "spice_include", "with_dut",
    ):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config_from_args(args)
    handlers = {"run": cmd_run, "emit": cmd_emit, "validate": cmd_validate}
    try:
        return handlers[args.command](cfg)
    except ProgramValidationError as e:
        for d in e.diagnostics:
            print(f"error: {d.path}: [{d.code}] {d.message}", file=sys.stderr)
        return 2
    except (FaultlineError, OSError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
