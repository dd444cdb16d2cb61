"""Analog testbench path: pokes become PWL voltage sources, expects become
post-processing checks over simulated waveform data.

Time model (shared by waveform compilation and result checking): a virtual
cursor starts at 0 and advances by one settle window (= clock_period) per
Eval and by half a clock_period per Step unit. Pokes are pending until the
next advance; at the advance they insert a hold point at the new cursor time
and a ramp of transition_time to the new level (mirroring the digital rule
that pokes propagate at eval). Step also toggles the clock input the same
way. An expect samples each output bit at cursor + settle_fraction * half
clock_period, which always lands strictly before the next possible change.

Only flat poke/eval/step/expect programs compile; poke and expect values must
be constants. Expected signals must be interface output ports. Waveform data
comes in as CSV with a header row, time (seconds) in the first column.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from . import actions as ac
from . import expr as ex
from .circuit import CircuitDecl
from .errors import ProgramValidationError, SpiceError
from .report import Failure, TestReport
from .sim import Simulation, compile_sim


@dataclass(frozen=True)
class AnalogTiming:
    clock_period: float = 10e-9
    transition_time: float = 0.1e-9
    settle_fraction: float = 0.9
    vdd: float = 1.0
    vil: float | None = None  # input low threshold; default 0.3*vdd
    vih: float | None = None  # input high threshold; default 0.7*vdd
    vol_max: float | None = None  # output reads 0 at or below; default 0.1*vdd
    voh_min: float | None = None  # output reads 1 at or above; default 0.9*vdd

    def __post_init__(self):
        object.__setattr__(self, "vil", self.vil if self.vil is not None else 0.3 * self.vdd)
        object.__setattr__(self, "vih", self.vih if self.vih is not None else 0.7 * self.vdd)
        object.__setattr__(self, "vol_max", self.vol_max if self.vol_max is not None else 0.1 * self.vdd)
        object.__setattr__(self, "voh_min", self.voh_min if self.voh_min is not None else 0.9 * self.vdd)
        if not 0 < self.transition_time < self.clock_period / 2:
            raise ValueError("transition_time must be positive and below half a clock period")
        if not 0 <= self.vol_max < self.voh_min <= self.vdd:
            raise ValueError("need 0 <= vol_max < voh_min <= vdd")
        if not 0 < self.settle_fraction < 1:
            raise ValueError("settle_fraction must be strictly between 0 and 1")


@dataclass
class PwlWaveform:
    points: list[tuple[float, float]] = field(default_factory=list)


def node_name(port: str, bit: int, width: int) -> str:
    return port if width == 1 else f"{port}_{bit}"


@dataclass(frozen=True)
class _ExpectCheck:
    path: str
    port: str
    width: int
    expected: int
    sample_time: float


def _timeline(p: ac.ActionProgram, c: CircuitDecl, t: AnalogTiming):
    """Walk the program once, producing PWL waveforms and expect schedules."""
    diags = ac.validate_program(p, c)
    if diags:
        raise ProgramValidationError(diags)
    input_bits: list[tuple[str, int]] = []
    for pt in c.ports:
        if pt.direction == "input":
            input_bits.extend((pt.name, i) for i in range(pt.width))
    waves = {key: PwlWaveform([(0.0, 0.0)]) for key in input_bits}
    level = {key: 0 for key in input_bits}
    pending: dict[tuple[str, int], int] = {}
    clock = c.clock_ports[0].name if c.clock_ports else None
    cursor = 0.0
    expects: list[_ExpectCheck] = []
    advances: list[float] = []

    def apply_pending(at: float) -> None:
        advances.append(at)
        for key in input_bits:  # declaration order keeps output deterministic
            if key not in pending:
                continue
            new = pending[key]
            if new != level[key]:
                wave = waves[key]
                volts = t.vdd * new
                wave.points.append((at, t.vdd * level[key]))
                wave.points.append((at + t.transition_time, volts))
                level[key] = new
        pending.clear()

    for i, a in enumerate(p.actions):
        path = f"root[{i}]"
        if isinstance(a, ac.Poke):
            if not isinstance(a.value, ex.Const):
                raise SpiceError(f"{path}: analog pokes must use constant values")
            port = a.ref.path[0]
            width = c.port(port).width
            for b in range(width):
                pending[(port, b)] = (a.value.value >> b) & 1
        elif isinstance(a, ac.Eval):
            cursor += t.clock_period
            apply_pending(cursor)
        elif isinstance(a, ac.Step):
            for _ in range(a.n):
                cursor += t.clock_period / 2
                pending[(clock, 0)] = 1 - level[(clock, 0)]
                apply_pending(cursor)
        elif isinstance(a, ac.Expect):
            if not isinstance(a.value, ex.Const):
                raise SpiceError(f"{path}: analog expects must use constant values")
            port = a.ref.path[0]
            if len(a.ref.path) != 1 or not c.has_port(port) or c.port(port).direction != "output":
                raise SpiceError(f"{path}: analog expects must target interface output ports")
            expects.append(
                _ExpectCheck(
                    path,
                    port,
                    c.port(port).width,
                    a.value.value,
                    cursor + t.settle_fraction * (t.clock_period / 2),
                )
            )
        else:
            raise SpiceError(
                f"{path}: {type(a).__name__} is not supported in the analog path "
                "(only poke/eval/step/expect)"
            )
    return waves, expects, cursor, advances


def compile_pwl(
    p: ac.ActionProgram, c: CircuitDecl, t: AnalogTiming
) -> dict[tuple[str, int], PwlWaveform]:
    """Piecewise-linear waveform per input port bit."""
    waves, _, _, _ = _timeline(p, c, t)
    return waves


def expect_schedule(p: ac.ActionProgram, c: CircuitDecl, t: AnalogTiming):
    """The (path, port, width, expected, sample time) list for a program."""
    _, expects, _, _ = _timeline(p, c, t)
    return expects


# -- deck emission ------------------------------------------------------------------


def emit_spice_tb(
    waves: dict[tuple[str, int], PwlWaveform],
    c: CircuitDecl,
    t: AnalogTiming,
    netlist_include_path: str,
) -> "EmittedTestbench":
    """SPICE deck: DUT include, VDD, one PWL source per input bit, transient
    analysis covering the full cursor span, and saves for the output nodes."""
    from .codegen import EmittedTestbench

    lines = [f"* Testbench for {c.name}; generated, do not edit."]
    lines.append(f'.include "{netlist_include_path}"')
    lines.append(f"VDD __fl_vdd 0 DC {t.vdd:.9g}")
    end_time = 0.0
    for (port, bit), wave in waves.items():
        width = c.port(port).width
        node = node_name(port, bit, width)
        pts = " ".join(f"{tm:.9e} {v:.9e}" for tm, v in wave.points)
        lines.append(f"V__fl_{node} {node} 0 PWL({pts})")
        end_time = max(end_time, wave.points[-1][0])
    dut_nodes = []
    for pt in c.ports:
        dut_nodes.extend(node_name(pt.name, b, pt.width) for b in range(pt.width))
    lines.append(f"X__fl_dut {' '.join(dut_nodes)} __fl_vdd 0 {c.name}")
    for pt in c.ports:
        if pt.direction == "output":
            for b in range(pt.width):
                lines.append(f".save v({node_name(pt.name, b, pt.width)})")
    stop = end_time + 2 * t.clock_period
    lines.append(f".tran {t.transition_time / 2:.9e} {stop:.9e}")
    lines.append(".end")
    return EmittedTestbench("\n".join(lines) + "\n", "spice", f"{c.name}_tb")


# -- result checking -------------------------------------------------------------------


@dataclass
class WaveformTable:
    """Sampled voltages: a time column plus named signal columns."""

    times: list[float]
    columns: dict[str, list[float]]

    def __post_init__(self):
        for a, b in zip(self.times, self.times[1:]):
            if b < a:
                raise SpiceError("waveform rows must be time-sorted")
        for name, col in self.columns.items():
            if len(col) != len(self.times):
                raise SpiceError(f"column {name!r} has {len(col)} rows, time has {len(self.times)}")

    @classmethod
    def from_csv(cls, text: str) -> "WaveformTable":
        rows = [line.split(",") for line in text.strip().splitlines() if line.strip()]
        if len(rows) < 2:
            raise SpiceError("waveform CSV needs a header row and at least one data row")
        header = [h.strip() for h in rows[0]]
        data = [[float(x) for x in row] for row in rows[1:]]
        times = [row[0] for row in data]
        columns = {name: [row[i] for row in data] for i, name in enumerate(header) if i > 0}
        return cls(times, columns)

    def to_csv(self) -> str:
        names = list(self.columns)
        lines = ["time," + ",".join(names)]
        for i, tm in enumerate(self.times):
            lines.append(f"{tm:.9e}," + ",".join(f"{self.columns[n][i]:.9e}" for n in names))
        return "\n".join(lines) + "\n"

    def sample(self, column: str, at: float) -> float:
        """Linear interpolation between the surrounding rows."""
        col = self.columns[column]
        if not self.times or at < self.times[0] or at > self.times[-1]:
            raise SpiceError(f"sample time {at:.3e}s is outside the data range")
        i = bisect.bisect_left(self.times, at)
        if i < len(self.times) and self.times[i] == at:
            return col[i]
        t0, t1 = self.times[i - 1], self.times[i]
        v0, v1 = col[i - 1], col[i]
        return v0 + (v1 - v0) * (at - t0) / (t1 - t0)


def check_results(
    data: WaveformTable, p: ac.ActionProgram, c: CircuitDecl, t: AnalogTiming
) -> TestReport:
    """Evaluate every expect against the waveform table.

    Each output bit samples at its scheduled time; at or above voh_min reads
    1, at or below vol_max reads 0, anything between is an indeterminate
    level and fails with its own code. Missing columns or sample times beyond
    the data range give an error verdict.
    """
    report = TestReport()
    expects = expect_schedule(p, c, t)
    for chk in expects:
        word = 0
        indeterminate = []
        try:
            for b in range(chk.width):
                node = node_name(chk.port, b, chk.width)
                if node not in data.columns:
                    raise SpiceError(f"{chk.path}: waveform data has no column {node!r}")
                v = data.sample(node, chk.sample_time)
                if v >= t.voh_min:
                    word |= 1 << b
                elif v > t.vol_max:
                    indeterminate.append((node, v))
        except SpiceError as e:
            report.errors.append(str(e))
            continue
        if indeterminate:
            detail = ", ".join(f"{n}={v:.3f}V" for n, v in indeterminate)
            report.failures.append(
                Failure(
                    chk.path,
                    "indeterminate-level",
                    f"{chk.port} has bit(s) between vol_max and voh_min at "
                    f"{chk.sample_time:.3e}s: {detail}",
                    expected=chk.expected,
                )
            )
        elif word != chk.expected:
            report.failures.append(
                Failure(
                    chk.path,
                    "expect-mismatch",
                    f"{chk.port} reads {word} at {chk.sample_time:.3e}s, expected {chk.expected}",
                    observed=word,
                    expected=chk.expected,
                )
            )
    report.action_counts = {"expect": len(expects)}
    return report


def ideal_waveform_table(p: ac.ActionProgram, c: CircuitDecl, t: AnalogTiming) -> WaveformTable:
    """Behavioral waveform data: the interpreter's values as 0/vdd levels with
    instant settling, on the same time grid the PWL compiler uses. Useful for
    dry-running check_results without an analog simulator."""
    sim = Simulation(compile_sim(c))
    out_nodes = []
    for pt in c.ports:
        if pt.direction == "output":
            out_nodes.extend((node_name(pt.name, b, pt.width), pt.name, b) for b in range(pt.width))

    times = [0.0]
    columns: dict[str, list[float]] = {n: [0.0] for n, _, _ in out_nodes}

    def snapshot(at: float) -> None:
        times.append(at)
        for node, port, bit in out_nodes:
            columns[node].append(t.vdd * ((sim.peek((port,)) >> bit) & 1))

    cursor = 0.0
    for a in p.actions:
        if isinstance(a, ac.Poke):
            if not isinstance(a.value, ex.Const):
                raise SpiceError("analog pokes must use constant values")
            sim.poke(a.ref, a.value.value)
        elif isinstance(a, ac.Eval):
            cursor += t.clock_period
            snapshot(cursor)  # hold old values up to the change
            sim.do_eval()
            snapshot(cursor + t.transition_time)
        elif isinstance(a, ac.Step):
            for _ in range(a.n):
                cursor += t.clock_period / 2
                snapshot(cursor)
                sim.do_step(1)
                snapshot(cursor + t.transition_time)
        elif isinstance(a, ac.Expect):
            pass
        else:
            raise SpiceError(f"{type(a).__name__} is not supported in the analog path")
    snapshot(cursor + 2 * t.clock_period)
    return WaveformTable(times, columns)
