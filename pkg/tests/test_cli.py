import json
from pathlib import Path

import jsonschema
import pytest

from faultline import fixtures as fx
from faultline.actions import serialize
from faultline.circuit import serialize_netlist
from faultline.cli import main
from faultline.report import REPORT_SCHEMA
from faultline.spice import AnalogTiming, ideal_waveform_table
from faultline.tester import Tester

FIXTURES = Path(__file__).parent.parent / "fixtures"


def bundle(name):
    d = FIXTURES / name
    return str(d / "netlist.json"), str(d / "program.json")


def run_cli(*argv):
    return main(list(argv))


def report_of(out: Path) -> dict:
    doc = json.loads((out / "report.json").read_text())
    jsonschema.validate(doc, REPORT_SCHEMA)
    return doc


def test_run_interp_add16_exit0(tmp_path):
    net, prog = bundle("add16")
    assert run_cli("run", "--netlist", net, "--program", prog, "--target", "interp", "--out", str(tmp_path)) == 0
    assert report_of(tmp_path)["verdict"] == "pass"


def test_run_interp_failing_program_exit1(tmp_path):
    c = fx.add16()
    p = fx.add16_program(c, expected=6)
    net = tmp_path / "netlist.json"
    prog = tmp_path / "program.json"
    net.write_text(serialize_netlist(c))
    prog.write_text(serialize(p))
    code = run_cli("run", "--netlist", str(net), "--program", str(prog), "--out", str(tmp_path))
    assert code == 1
    doc = report_of(tmp_path)
    assert doc["verdict"] == "fail"
    assert doc["failures"][0]["observed"] == 5


def test_run_formal_buggy_alu_counterexample(tmp_path):
    net, prog = bundle("alu_buggy")
    code = run_cli(
        "run", "--netlist", net, "--program", prog, "--target", "formal",
        "--bound", "4", "--out", str(tmp_path),
    )
    assert code == 1
    doc = report_of(tmp_path)
    assert doc["result"] == "counterexample"
    assert doc["replay_confirmed"] is True
    assert doc["counterexample"]["depth"] == 0


def test_run_formal_correct_alu_proved(tmp_path):
    net, prog = bundle("alu")
    assert run_cli(
        "run", "--netlist", net, "--program", prog, "--target", "formal",
        "--k", "1", "--out", str(tmp_path),
    ) == 0
    assert report_of(tmp_path)["result"] == "proved"


def test_run_random_seed_recorded(tmp_path):
    net, prog = bundle("alu")
    assert run_cli(
        "run", "--netlist", net, "--program", prog, "--target", "random",
        "--samples", "20", "--seed", "77", "--out", str(tmp_path),
    ) == 0
    doc = report_of(tmp_path)
    assert doc["seed"] == 77 and doc["strategy"] == "rejection"


def test_missing_netlist_exit2(tmp_path):
    _, prog = bundle("add16")
    assert run_cli("run", "--netlist", str(tmp_path / "nope.json"), "--program", prog) == 2


def test_invalid_program_exit2(tmp_path, capsys):
    net, _ = bundle("add16")
    bad = tmp_path / "program.json"
    doc = json.loads((FIXTURES / "add16" / "program.json").read_text())
    doc["actions"][0]["ref"] = "bogus"
    bad.write_text(json.dumps(doc))
    assert run_cli("validate", "--netlist", net, "--program", str(bad)) == 2
    assert "error:" in capsys.readouterr().err


def test_validate_ok(capsys):
    net, prog = bundle("ready_loop")
    assert run_cli("validate", "--netlist", net, "--program", prog) == 0
    assert "ok:" in capsys.readouterr().out


def test_emit_sv_iverilog_dialect(tmp_path, capsys):
    net, prog = bundle("add16")
    assert run_cli(
        "emit", "--netlist", net, "--program", prog, "--target", "sv",
        "--dialect", "iverilog", "--out", str(tmp_path),
    ) == 0
    text = (tmp_path / "Add16_tb.sv").read_text()
    assert '$fopen("Add16_tb_results.txt")' in text  # nonstandard single-arg form
    assert str(tmp_path / "Add16_tb.sv") in capsys.readouterr().out


def test_emit_cxx_and_dut(tmp_path):
    net, prog = bundle("add16")
    assert run_cli(
        "emit", "--netlist", net, "--program", prog, "--target", "cxx",
        "--with-dut", "--out", str(tmp_path),
    ) == 0
    assert (tmp_path / "Add16_tb.cpp").exists()
    assert (tmp_path / "Add16.v").exists()


def test_emit_spice_deck(tmp_path):
    net, prog = bundle("inverter")
    assert run_cli(
        "emit", "--netlist", net, "--program", prog, "--target", "spice-emit",
        "--out", str(tmp_path),
    ) == 0
    deck = (tmp_path / "Inv_tb.sp").read_text()
    assert "PWL(" in deck and ".tran" in deck


def test_emit_smt_per_property(tmp_path):
    net, prog = bundle("alu")
    assert run_cli(
        "emit", "--netlist", net, "--program", prog, "--target", "formal",
        "--bound", "2", "--out", str(tmp_path),
    ) == 0
    text = (tmp_path / "Alu_p0.smt2").read_text()
    assert "(set-logic QF_BV)" in text and "(check-sat)" in text


def test_spice_check_roundtrip(tmp_path):
    net, prog = bundle("inverter")
    c = fx.inverter()
    t = Tester(c)
    t.poke("I", 1)
    t.eval()
    t.expect("O", 0)
    t.poke("I", 0)
    t.eval()
    t.expect("O", 1)
    p = t.finalize()
    data = tmp_path / "waves.csv"
    data.write_text(ideal_waveform_table(p, c, AnalogTiming()).to_csv())
    assert run_cli(
        "run", "--netlist", net, "--program", prog, "--target", "spice-check",
        "--data", str(data), "--out", str(tmp_path),
    ) == 0
    assert report_of(tmp_path)["verdict"] == "pass"


def test_spice_check_needs_data(tmp_path):
    net, prog = bundle("inverter")
    assert run_cli(
        "run", "--netlist", net, "--program", prog, "--target", "spice-check",
        "--out", str(tmp_path),
    ) == 2


def test_faultline_out_env(tmp_path, monkeypatch):
    net, prog = bundle("add16")
    monkeypatch.setenv("FAULTLINE_OUT", str(tmp_path / "envdir"))
    assert run_cli("run", "--netlist", net, "--program", prog) == 0
    assert (tmp_path / "envdir" / "report.json").exists()


def test_runaway_loop_maps_to_exit1(tmp_path):
    net, prog = bundle("ready_loop")
    code = run_cli(
        "run", "--netlist", net, "--program", prog, "--max-loop-iters", "3",
        "--out", str(tmp_path),
    )
    assert code == 1
    assert report_of(tmp_path)["verdict"] == "error"


def _walk_outputs(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.parametrize(
    "bundle_name,argv",
    [
        ("add16", ["run", "--target", "interp"]),
        ("alu", ["run", "--target", "formal", "--bound", "3"]),
        ("alu_buggy", ["run", "--target", "random", "--samples", "25", "--seed", "9"]),
        ("add16", ["emit", "--target", "sv", "--dialect", "commercial-a"]),
        ("add16", ["emit", "--target", "cxx"]),
        ("inverter", ["emit", "--target", "spice-emit"]),
        ("alu", ["emit", "--target", "formal", "--bound", "2"]),
    ],
)
def test_cli_invocations_bit_identical(tmp_path, bundle_name, argv):
    net, prog = bundle(bundle_name)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        code = main(argv + ["--netlist", net, "--program", prog, "--out", str(out)])
        assert code in (0, 1)
        files = _walk_outputs(out)
        assert files  # something was produced
        outs.append(files)
    assert outs[0] == outs[1]
