#!/usr/bin/env python3
"""Regenerate the shipped bundles under fixtures/.

Each bundle is a (netlist.json, program.json) pair in canonical serialized
form, runnable straight from the CLI, e.g.:

    faultline run --netlist fixtures/add16/netlist.json \
                  --program fixtures/add16/program.json --target interp
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from faultline import fixtures as fx
from faultline.actions import serialize
from faultline.circuit import serialize_netlist

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")


def write(bundle: str, circuit, program) -> None:
    d = os.path.join(ROOT, bundle)
    os.makedirs(d, exist_ok=True)
    with open(os.path.join(d, "netlist.json"), "w", newline="\n") as fh:
        fh.write(serialize_netlist(circuit) + "\n")
    with open(os.path.join(d, "program.json"), "w", newline="\n") as fh:
        fh.write(serialize(program) + "\n")
    print(f"wrote {d}")


def main() -> None:
    add = fx.add16()
    write("add16", add, fx.add16_program(add))
    write("print", add, fx.print_program(add))

    rr = fx.reset_reg()
    write("reset", rr, fx.reset_program(rr, explicit=True))

    rl = fx.ready_loop()
    write("ready_loop", rl, fx.ready_loop_program(rl))

    alu = fx.alu()
    write("alu", alu, fx.alu_program(alu))
    alub = fx.alu(swap_add_sub=True)
    write("alu_buggy", alub, fx.alu_program(alub))

    inv = fx.inverter()
    from faultline.tester import Tester

    t = Tester(inv)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    t.poke("I", 0)
    t.eval()
    t.expect("O", 1)
    write("inverter", inv, t.finalize())


if __name__ == "__main__":
    main()
