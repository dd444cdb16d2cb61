#!/usr/bin/env python3
"""Regenerate the emission golden files under tests/goldens/.

Run only when an intentional emitter change is reviewed; tests compare
emitted text byte-for-byte against these files.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from faultline import fixtures as fx
from faultline.codegen import BUILTIN_DIALECTS, emit_cxx, emit_dut_verilog, emit_sv
from faultline.spice import AnalogTiming, compile_pwl, emit_spice_tb
from faultline.tester import Tester

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "goldens")


def write(rel: str, text: str) -> None:
    path = os.path.join(ROOT, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {rel}")


def emission_fixtures():
    add = fx.add16()
    rl = fx.ready_loop()
    return {
        "add16": (add, fx.add16_program(add)),
        "while_loop": (rl, fx.ready_loop_program(rl)),
        "print": (add, fx.print_program(add)),
    }


def main() -> None:
    for name, (circuit, program) in emission_fixtures().items():
        for dialect in sorted(BUILTIN_DIALECTS):
            tb = emit_sv(program, circuit, BUILTIN_DIALECTS[dialect])
            write(f"sv/{name}__{dialect}.sv", tb.text)
        write(f"cxx/{name}.cpp", emit_cxx(program, circuit).text)

    inv = fx.inverter()
    t = Tester(inv)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    t.poke("I", 0)
    t.eval()
    t.expect("O", 1)
    p = t.finalize()
    timing = AnalogTiming()
    write("spice/inverter_tb.sp", emit_spice_tb(compile_pwl(p, inv, timing), inv, timing, "Inv.sp").text)

    write("verilog/add16_dut.v", emit_dut_verilog(fx.add16()).text)
    write("verilog/ready_loop_dut.v", emit_dut_verilog(fx.ready_loop()).text)


if __name__ == "__main__":
    main()
