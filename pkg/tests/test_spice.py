from pathlib import Path

import pytest

from faultline import compile_sim, run
from faultline import fixtures as fx
from faultline.errors import SpiceError
from faultline.random_engine import Rng
from faultline.spice import (
    AnalogTiming,
    WaveformTable,
    check_results,
    compile_pwl,
    emit_spice_tb,
    expect_schedule,
    ideal_waveform_table,
)
from faultline.tester import Tester

from helpers import circuit_from_doc, dag_eval, random_comb_doc

GOLDENS = Path(__file__).parent / "goldens"


def two_poke_program(c=None):
    c = c or fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.poke("I", 0)
    t.eval()
    return c, t.finalize()


def test_timing_invariants():
    AnalogTiming()
    with pytest.raises(ValueError):
        AnalogTiming(transition_time=6e-9)  # >= half period
    with pytest.raises(ValueError):
        AnalogTiming(vol_max=0.95, voh_min=0.9)
    with pytest.raises(ValueError):
        AnalogTiming(settle_fraction=1.5)


def test_two_poke_point_list_hand_derived():
    c, p = two_poke_program()
    t = AnalogTiming(transition_time=1e-9)  # settle window 10ns (clock period)
    waves = compile_pwl(p, c, t)
    t1, t2 = 1e-8, 2e-8
    assert waves[("I", 0)].points == [
        (0.0, 0.0),
        (t1, 0.0),
        (t1 + 1e-9, 1.0),
        (t2, 1.0),
        (t2 + 1e-9, 0.0),
    ]
    assert t2 - t1 == pytest.approx(1e-8)


def test_no_pokes_single_origin_point():
    c = fx.inverter()
    t = Tester(c)
    t.eval()
    waves = compile_pwl(t.finalize(), c, AnalogTiming())
    assert waves[("I", 0)].points == [(0.0, 0.0)]


def test_multibit_poke_expands_bitwise():
    c = fx.passthrough(2)
    t = Tester(c)
    t.poke("I", 0b10)
    t.eval()
    waves = compile_pwl(t.finalize(), c, AnalogTiming())
    assert waves[("I", 0)].points == [(0.0, 0.0)]  # bit 0 stays low
    assert len(waves[("I", 1)].points) == 3  # hold + ramp for bit 1


def test_pwl_monotonic_on_random_programs():
    rng = Rng(5)
    timing = AnalogTiming()
    for _ in range(10):
        doc = random_comb_doc(rng, max_total_in=6, max_nodes=6)
        c = circuit_from_doc(doc)
        t = Tester(c)
        in_ports = [p for p in c.ports if p.direction == "input"]
        for _k in range(6):
            for p in in_ports:
                t.poke(p.name, rng.bits(p.width))
            t.eval()
        waves = compile_pwl(t.finalize(), c, timing)
        for wave in waves.values():
            times = [pt[0] for pt in wave.points]
            assert times == sorted(times)
            assert len(set(times)) == len(times)  # strictly increasing


def test_dynamic_control_flow_rejected():
    c = fx.ready_loop()
    p = fx.ready_loop_program(c)
    with pytest.raises(SpiceError):
        compile_pwl(p, c, AnalogTiming())


def test_deck_golden():
    c, _ = two_poke_program()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    t.poke("I", 0)
    t.eval()
    t.expect("O", 1)
    p = t.finalize()
    timing = AnalogTiming()
    deck = emit_spice_tb(compile_pwl(p, c, timing), c, timing, "Inv.sp").text
    assert deck.encode() == (GOLDENS / "spice" / "inverter_tb.sp").read_bytes()


def test_deck_has_bit_suffixed_sources():
    c = fx.passthrough(16)
    t = Tester(c)
    t.poke("I", 0xBEEF)
    t.eval()
    p = t.finalize()
    timing = AnalogTiming()
    deck = emit_spice_tb(compile_pwl(p, c, timing), c, timing, "pass16.sp").text
    for b in range(16):
        assert f"V__fl_I_{b} I_{b} 0 PWL(" in deck
    assert ".tran" in deck and deck.rstrip().endswith(".end")


def test_empty_program_minimal_deck(add16):
    p = Tester(add16).finalize()
    timing = AnalogTiming()
    deck = emit_spice_tb(compile_pwl(p, add16, timing), add16, timing, "add16.sp").text
    assert ".tran" in deck
    assert deck.count("PWL(0.000000000e+00 0.000000000e+00)") == 32  # DC-flat inputs


def _synthetic_table(c, p, timing, out_level):
    """One-output table holding a constant voltage on O."""
    sched = expect_schedule(p, c, timing)
    end = max(chk.sample_time for chk in sched) + timing.clock_period
    return WaveformTable([0.0, end], {"O": [out_level, out_level]})


def test_check_results_pass_and_logic_fail():
    c = fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    p = t.finalize()
    timing = AnalogTiming()
    low = _synthetic_table(c, p, timing, 0.02)  # 0.02*vdd: solid logic 0
    assert check_results(low, p, c, timing).verdict == "pass"
    high = _synthetic_table(c, p, timing, 0.98)
    report = check_results(high, p, c, timing)
    assert report.verdict == "fail"
    assert report.failures[0].code == "expect-mismatch"
    assert report.failures[0].observed == 1 and report.failures[0].expected == 0


def test_check_results_indeterminate_level():
    c = fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    p = t.finalize()
    timing = AnalogTiming()
    mid = _synthetic_table(c, p, timing, 0.5)
    report = check_results(mid, p, c, timing)
    assert report.verdict == "fail"
    assert report.failures[0].code == "indeterminate-level"


def test_check_results_missing_signal():
    c = fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    p = t.finalize()
    timing = AnalogTiming()
    table = WaveformTable([0.0, 1.0], {"X": [0.0, 0.0]})
    report = check_results(table, p, c, timing)
    assert report.verdict == "error"
    assert "no column 'O'" in report.errors[0]


def test_check_results_time_beyond_range():
    c = fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    p = t.finalize()
    timing = AnalogTiming()
    table = WaveformTable([0.0, 1e-9], {"O": [0.0, 0.0]})
    report = check_results(table, p, c, timing)
    assert report.verdict == "error"
    assert "outside the data range" in report.errors[0]


def test_csv_roundtrip():
    text = "time,O,count_0\n0.0,0.0,1.0\n1e-8,1.0,0.5\n"
    table = WaveformTable.from_csv(text)
    assert table.times == [0.0, 1e-8]
    assert table.sample("O", 0.5e-8) == pytest.approx(0.5)
    with pytest.raises(SpiceError):
        WaveformTable.from_csv("time,O\n2.0,1.0\n1.0,0.0\n")  # unsorted


def test_schedule_shared_with_compile():
    c, p = two_poke_program()
    timing = AnalogTiming()
    # expect right after the first eval samples inside the first settle window
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    sched = expect_schedule(t.finalize(), c, timing)
    assert sched[0].sample_time == pytest.approx(1e-8 + 0.9 * 5e-9)


def test_digital_equivalence_on_random_programs():
    rng = Rng(31337)
    timing = AnalogTiming()
    for _ in range(10):
        doc = random_comb_doc(rng, max_total_in=6, max_nodes=6)
        c = circuit_from_doc(doc)
        m = compile_sim(c)
        in_ports = [p for p in c.ports if p.direction == "input"]
        out_ports = [p for p in c.ports if p.direction == "output"]
        t = Tester(c)
        values = {}
        for step in range(4):
            for p in in_ports:
                values[p.name] = rng.bits(p.width)
                t.poke(p.name, values[p.name])
            t.eval()
            want = dag_eval(doc, values)
            for p in out_ports:
                # half the expects are deliberately wrong so both verdicts occur
                wrong = rng.bits(1)
                expected = want[p.name] ^ wrong
                if expected < (1 << p.width):
                    t.expect(p.name, expected)
        program = t.finalize()
        sim_verdict = run(program, m).verdict
        table = ideal_waveform_table(program, c, timing)
        spice_verdict = check_results(table, program, c, timing).verdict
        assert spice_verdict == sim_verdict, doc["name"]
