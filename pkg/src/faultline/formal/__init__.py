"""SAT-based formal backend: bit-blasting, CDCL solving, BMC, k-induction."""

from .bitblast import Bitblaster, CnfFormula, bitblast
from .check import Counterexample, bmc, emit_smt2, k_induction, replay_counterexample
from .sat import Solver, sat_solve
from .ts import TransitionSystem, encode_ts, lower_prefix

__all__ = [
    "Bitblaster",
    "CnfFormula",
    "Counterexample",
    "Solver",
    "TransitionSystem",
    "bitblast",
    "bmc",
    "emit_smt2",
    "encode_ts",
    "k_induction",
    "lower_prefix",
    "replay_counterexample",
    "sat_solve",
]
