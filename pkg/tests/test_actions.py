import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultline import actions as ac
from faultline import expr as ex
from faultline import fixtures as fx
from faultline.circuit import HierRef, interface_digest
from faultline.errors import ProgramValidationError
from faultline.tester import Tester


def test_add16_program_serializes_in_order(add16):
    p = fx.add16_program(add16)
    doc = json.loads(ac.serialize(p))
    assert [a["kind"] for a in doc["actions"]] == ["poke", "poke", "eval", "expect"]
    assert doc["circuit"] == "Add16"
    assert doc["digest"] == interface_digest(add16)


def test_serialize_idempotent(add16):
    p = fx.add16_program(add16)
    text = ac.serialize(p)
    assert ac.serialize(ac.deserialize(text, add16)) == text


def test_roundtrip_structural_equality(add16):
    p = fx.ready_loop_program()
    c = fx.ready_loop()
    assert ac.deserialize(ac.serialize(p), c) == p


def test_nested_while_in_if_roundtrips():
    c = fx.ready_loop()
    t = Tester(c, clock="clk")
    t.eval()
    then_b, else_b = t.begin_if(t.peek("ready"))
    loop = then_b.begin_while(t.peek("ready"))
    loop.step(2)
    loop.close()
    then_b.close()
    else_b.eval()
    else_b.close()
    p = t.finalize()
    p2 = ac.deserialize(ac.serialize(p), c)
    assert p2 == p
    node = p2.actions[1]
    assert isinstance(node, ac.If)
    assert isinstance(node.then[0], ac.While)
    assert isinstance(node.then[0].body[0], ac.Step)


def test_validate_clean_program(add16):
    assert ac.validate_program(fx.add16_program(add16), add16) == []


def test_step_without_clock_diagnostic(add16):
    p = fx.add16_program(add16)
    tampered = ac.ActionProgram(p.circuit, p.digest, None, p.actions + (ac.Step(2),))
    diags = ac.validate_program(tampered, add16)
    assert any(d.code == "step-no-clock" and d.path == "root[4]" for d in diags)


def test_deserialized_width_mismatch_diagnostic(add16):
    doc = json.loads(ac.serialize(fx.add16_program(add16)))
    doc["actions"][0]["value"] = {"op": "const", "value": 3, "width": 32}
    with pytest.raises(ProgramValidationError) as exc:
        ac.deserialize(json.dumps(doc), add16)
    assert any(d.code == "width-mismatch" and d.path == "root[0]" for d in exc.value.diagnostics)


def test_digest_mismatch_diagnostic(add16):
    p = fx.add16_program(add16)
    tampered = ac.ActionProgram(p.circuit, "0" * 64, p.clock, p.actions)
    diags = ac.validate_program(tampered, add16)
    assert any(d.code == "digest-mismatch" for d in diags)


def test_diagnostic_paths_reach_into_bodies():
    c = fx.ready_loop()
    p = fx.ready_loop_program(c)
    # break the step inside the while body
    doc = json.loads(ac.serialize(p))
    doc["actions"][1]["body"][1]["n"] = 0
    with pytest.raises(ProgramValidationError) as exc:
        ac.deserialize(json.dumps(doc), c)
    assert any(d.path == "root[1].body[1]" and d.code == "bad-step-count" for d in exc.value.diagnostics)


def test_malformed_program_document(add16):
    with pytest.raises(ProgramValidationError):
        ac.deserialize("{", add16)
    with pytest.raises(ProgramValidationError):
        ac.deserialize("{}", add16)


def test_unknown_ref_in_deserialized_program(add16):
    doc = json.loads(ac.serialize(fx.add16_program(add16)))
    doc["actions"][0]["ref"] = "bogus"
    with pytest.raises(ProgramValidationError) as exc:
        ac.deserialize(json.dumps(doc), add16)
    assert exc.value.diagnostics[0].code in ("malformed", "unknown-ref")


def test_index_var_width_rule():
    assert ac.index_var_width(0) == 1
    assert ac.index_var_width(1) == 1
    assert ac.index_var_width(2) == 1
    assert ac.index_var_width(3) == 2
    assert ac.index_var_width(4) == 2
    assert ac.index_var_width(5) == 3
    assert ac.index_var_width(32) == 5


def test_parse_format():
    assert ac.parse_format("a=%d b=%x c=%b 100%%\n") == ["d", "x", "b"]
    with pytest.raises(ValueError):
        ac.parse_format("bad %q")
    with pytest.raises(ValueError):
        ac.parse_format("dangling %")


# -- canonical serialization property ------------------------------------------------

_DFF = fx.dff(4)


def _programs():
    leaf = st.sampled_from(["poke", "expect", "eval", "step", "print"])

    def build_leaf(kind, value, n):
        if kind == "poke":
            return ac.Poke(HierRef.of("D"), ex.Const(value % 16, 4))
        if kind == "expect":
            return ac.Expect(HierRef.of("Q"), ex.Const(value % 16, 4))
        if kind == "eval":
            return ac.Eval()
        if kind == "step":
            return ac.Step(n)
        return ac.Print("q=%d\n", (ex.Peek(HierRef.of("Q"), 4),))

    leaves = st.builds(build_leaf, leaf, st.integers(0, 255), st.integers(1, 3))

    def extend(children):
        cond = ex.Peek(HierRef.of("Q"), 4).eq(ex.Const(3, 4))
        return st.one_of(
            st.builds(lambda body: ac.While(cond, list(body)), st.lists(children, max_size=3)),
            st.builds(
                lambda t, e: ac.If(cond, list(t), list(e)),
                st.lists(children, max_size=2),
                st.lists(children, max_size=2),
            ),
        )

    actions = st.recursive(leaves, extend, max_leaves=12)
    return st.lists(actions, max_size=8).map(
        lambda acts: ac.ActionProgram(
            _DFF.name, interface_digest(_DFF), HierRef.of("clk"), tuple(acts)
        )
    )


@settings(max_examples=60, deadline=None)
@given(_programs())
def test_canonical_serialization_property(p):
    assert ac.validate_program(p, _DFF) == []
    text = ac.serialize(p)
    p2 = ac.deserialize(text, _DFF)
    assert p2 == p
    assert ac.serialize(p2) == text
    assert "\n" not in text  # no insignificant whitespace


def test_unbound_index_var_diagnostic():
    c = fx.passthrough(4)
    import faultline.circuit as circ

    p = ac.ActionProgram(
        c.name,
        circ.interface_digest(c),
        None,
        (ac.Poke(HierRef.of("I"), ex.Var("__fl_i0", 4)),),
    )
    diags = ac.validate_program(p, c)
    assert any(d.code == "unbound-var" for d in diags)
