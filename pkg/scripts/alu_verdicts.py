#!/usr/bin/env python3
"""Unified constrained-random vs. formal comparison on the small ALU.

Runs the same recorded program (configure opcode register for add, assume
both operands below half range, guarantee result >= both operands) through
every verification engine, on the correct design and on one with the
add/sub opcodes swapped. Reports verdicts; timing is machine-specific noise,
so only verdicts matter here.
"""

from __future__ import annotations

import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from faultline import compile_sim
from faultline import fixtures as fx
from faultline.formal import bmc, encode_ts, k_induction, lower_prefix, replay_counterexample
from faultline.random_engine import run_constrained_random

SEED = 20260811
SAMPLES = 100
BOUND = 4


def engine_rows(circuit, program):
    ts = lower_prefix(program, encode_ts(circuit))
    model = compile_sim(circuit)
    rows = []

    t0 = time.perf_counter()
    result = k_induction(ts, 1)
    verdict = result if isinstance(result, str) else "counterexample"
    rows.append(("k-induction (k=1)", verdict, time.perf_counter() - t0))

    t0 = time.perf_counter()
    cex = bmc(ts, BOUND)
    verdict = f"no-cex-up-to-{BOUND}" if cex is None else f"counterexample@{cex.depth}"
    rows.append((f"bmc (bound {BOUND})", verdict, time.perf_counter() - t0))
    if cex is not None:
        ok = replay_counterexample(circuit, program, cex)
        rows.append(("  replay on interpreter", "violates" if ok else "DOES NOT REPRODUCE", 0.0))

    for strategy in ("rejection", "solver"):
        t0 = time.perf_counter()
        report = run_constrained_random(program, model, SAMPLES, SEED, strategy)
        note = f"{report.verdict} ({report.extra['samples']} samples"
        if report.failures:
            note += f", {len(report.failures)} violations"
        note += ")"
        rows.append((f"random ({strategy})", note, time.perf_counter() - t0))
    return rows


def main() -> None:
    for label, swap in (("correct ALU", False), ("opcode-swapped ALU", True)):
        circuit = fx.alu(swap_add_sub=swap)
        program = fx.alu_program(circuit)
        print(f"== {label} ==")
        for name, verdict, dt in engine_rows(circuit, program):
            timing = f"{dt * 1000:7.1f} ms" if dt else ""
            print(f"  {name:24s} {verdict:32s} {timing}")
        print()


if __name__ == "__main__":
    main()
