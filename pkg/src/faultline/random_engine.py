"""Constrained-random stimulus: lower assume/guarantee programs to concrete runs.

Two sampling strategies:

* rejection: draw uniformly from the full width range and retry until the
  per-port predicate holds (bounded by max_tries per value);
* solver: bit-blast the assumption conjunction and enumerate satisfying
  assignments with randomized decision polarity, blocking each emitted
  sample, so samples are pairwise distinct.

The PRNG is pinned so sample streams are reproducible everywhere: splitmix64.
State update per draw: ``s += 0x9E3779B97F4A7C15``; output mixing:
``z = s; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)`` (all mod
2**64). An n-bit draw takes the top n bits of one 64-bit output (little-endian
chains of 64-bit words for n > 64). Splitting draws one output as the child
seed.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import actions as ac
from . import expr as ex
from .errors import FormalError, SamplingError, UnsatConstraintsError
from .formal.bitblast import Bitblaster, decode_bits
from .formal.sat import Solver
from .formal.ts import _split_program
from .report import Failure, TestReport
from .sim import SimModel, Simulation

_MASK64 = (1 << 64) - 1


class Rng:
    """Deterministic 64-bit generator (splitmix64); see module docstring."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def bits(self, n: int) -> int:
        """Uniform n-bit value."""
        if n <= 64:
            return self.next_u64() >> (64 - n)
        value = 0
        for i in range((n + 63) // 64):
            value |= self.next_u64() << (64 * i)
        return value & ((1 << n) - 1)

    def split(self) -> "Rng":
        return Rng(self.next_u64())


@dataclass
class SamplingPlan:
    """What to sample: per-input-port predicates plus the sample count."""

    assumptions: list[tuple[str, int, ex.Expr]]  # (port, width, predicate)
    count: int
    max_tries: int = 1000

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"sample count must be >= 1, got {self.count}")
        for port, width, pred in self.assumptions:
            if len(ex.free_vars(pred)) > 1:
                raise ValueError(f"predicate for {port!r} may use at most one variable")


def plan_from_program(p, c, count: int, max_tries: int = 1000) -> SamplingPlan:
    """Collect the program's assumptions into a sampling plan."""
    _, assumes, guarantees = _split_program(p)
    if not assumes or not guarantees:
        raise FormalError("constrained-random programs need at least one assume and one guarantee")
    seen = {}
    for a in assumes:
        port = a.ref.path[0]
        seen[port] = (c.port(port).width, a.predicate)
    return SamplingPlan([(port, w, pred) for port, (w, pred) in seen.items()], count, max_tries)


def sample_rejection(plan: SamplingPlan, rng: Rng) -> list[dict[str, int]]:
    """Uniform draw per port, retried until its predicate holds."""
    samples = []
    attempts = 0
    accepted = 0
    for _ in range(plan.count):
        assignment = {}
        for port, width, pred in plan.assumptions:
            fv = ex.free_vars(pred)
            var = next(iter(fv)) if fv else None
            for _try in range(plan.max_tries):
                attempts += 1
                v = rng.bits(width)
                if ex.eval_pure(pred, {var: v} if var else {}):
                    accepted += 1
                    assignment[port] = v
                    break
            else:
                rate = accepted / attempts if attempts else 0.0
                raise SamplingError(
                    f"rejection sampling for {port!r} exhausted max_tries={plan.max_tries}"
                    f" (observed acceptance rate {rate:.3g} over {attempts} draws)",
                    acceptance_estimate=rate,
                )
        samples.append(assignment)
    return samples


def sample_solver(plan: SamplingPlan, rng: Rng) -> list[dict[str, int]]:
    """Enumerate satisfying assignments of the assumption conjunction.

    Decision polarity is randomized by the rng; each sample is blocked, so
    results are pairwise distinct. If the space holds fewer than the requested
    count, all solutions are returned.
    """
    blaster = Bitblaster()
    ordered = [(port, width) for port, width, _ in plan.assumptions]
    for port, width in ordered:
        blaster.declare(port, width)
    for port, width, pred in plan.assumptions:
        fv = ex.free_vars(pred)
        renamed = _rename_var(pred, next(iter(fv)), port, width) if fv else pred
        blaster.cnf.add_clause([blaster.blast_bits(renamed)[0]])
    solver = Solver(blaster.cnf)
    samples: list[dict[str, int]] = []
    while len(samples) < plan.count:
        model = solver.solve(decision_rng=rng)
        if model is None:
            if not samples:
                raise UnsatConstraintsError("assumption constraints have no solutions")
            break  # space exhausted; return every distinct solution
        assignment = {
            port: decode_bits(blaster.cnf.var_bits[port], model) for port, _ in ordered
        }
        samples.append(assignment)
        blocking = []
        for port, _ in ordered:
            for lit in blaster.cnf.var_bits[port]:
                v = model[lit] if lit > 0 else not model[-lit]
                blocking.append(-lit if v else lit)
        solver.add_clause(blocking)
    return samples


def _rename_var(pred: ex.Expr, old: str, new: str, width: int) -> ex.Expr:
    from .formal.ts import subst_vars

    return subst_vars(pred, {old: ex.Var(new, width)})


def run_constrained_random(
    p,
    m: SimModel,
    n: int,
    seed: int,
    strategy: str = "rejection",
    max_tries: int = 1000,
) -> TestReport:
    """Run the concrete prefix once, then check every guarantee on n samples.

    Each sample pokes the constrained inputs, evaluates, and checks the
    guarantees with variables bound to current port values. The seed is
    recorded in the report; identical (plan, seed, strategy) reproduce it.
    """
    if strategy not in ("rejection", "solver"):
        raise ValueError(f"unknown strategy {strategy!r} (use 'rejection' or 'solver')")
    plan = plan_from_program(p, m.circuit, n, max_tries)
    rng = Rng(seed)
    samples = sample_rejection(plan, rng) if strategy == "rejection" else sample_solver(plan, rng)

    prefix, _, guarantees = _split_program(p)
    guarantee_paths = [f"root[{i}]" for i, a in enumerate(p.actions) if isinstance(a, ac.Guarantee)]

    sim = Simulation(m)
    for a in prefix:
        if isinstance(a, ac.Poke):
            sim.poke(a.ref, ex.eval_pure(a.value, {}))
        elif isinstance(a, ac.Eval):
            sim.do_eval()
        elif isinstance(a, ac.Step):
            sim.do_step(a.n)

    report = TestReport(seed=seed)
    report.extra["strategy"] = strategy
    report.extra["samples"] = len(samples)
    for si, assignment in enumerate(samples):
        for port, value in assignment.items():
            sim.poke((port,), value)
        sim.do_eval()
        for gi, g in enumerate(guarantees):
            bindings = {
                name: sim.peek((name,)) for name in ex.free_vars(g.predicate)
            }
            if not ex.eval_pure(g.predicate, bindings):
                report.failures.append(
                    Failure(
                        guarantee_paths[gi],
                        "guarantee-violated",
                        f"guarantee failed on sample {si}",
                        sample=si,
                        bindings=bindings,
                    )
                )
    report.action_counts = {"samples": len(samples)}
    return report
