import pytest
from hypothesis import given
from hypothesis import strategies as st

from faultline import expr as ex


def test_const_range_checked():
    ex.Const(255, 8)
    with pytest.raises(ex.WidthError):
        ex.Const(256, 8)
    with pytest.raises(ex.WidthError):
        ex.Const(-1, 8)


def test_binop_width_discipline():
    a = ex.Var("a", 8)
    b = ex.Var("b", 8)
    assert (a + b).width == 8
    assert a.ult(b).width == 1
    with pytest.raises(ex.WidthError):
        ex.binop("add", a, ex.Var("c", 4))


def test_int_coercion_uses_other_operand_width():
    a = ex.Var("a", 8)
    e = a + 3
    assert isinstance(e.right, ex.Const) and e.right.width == 8
    with pytest.raises(ex.WidthError):
        a + 256


def test_index_vars_zero_extend():
    idx = ex.Var(f"{ex.INDEX_VAR_PREFIX}0", 2)
    a = ex.Var("a", 8)
    e = a + idx
    assert isinstance(e.right, ex.Zext) and e.right.width == 8
    # ordinary variables do not silently extend
    with pytest.raises(ex.WidthError):
        a + ex.Var("b", 2)


def test_comparisons_are_methods_eq_stays_structural():
    a = ex.Var("a", 4)
    assert (a == ex.Var("a", 4)) is True  # dataclass equality
    assert a.eq(ex.Var("b", 4)).op == "eq"


@given(st.integers(0, 255), st.integers(0, 255))
def test_eval_matches_python_ints(x, y):
    a, b = ex.Const(x, 8), ex.Const(y, 8)
    cases = {
        "add": (x + y) & 0xFF,
        "sub": (x - y) & 0xFF,
        "mul": (x * y) & 0xFF,
        "and": x & y,
        "or": x | y,
        "xor": x ^ y,
        "eq": int(x == y),
        "neq": int(x != y),
        "ult": int(x < y),
        "ule": int(x <= y),
        "ugt": int(x > y),
        "uge": int(x >= y),
    }
    for op, expected in cases.items():
        assert ex.eval_pure(ex.binop(op, a, b), {}) == expected


@given(st.integers(0, 255), st.integers(0, 15))
def test_eval_shifts(x, s):
    a, b = ex.Const(x, 8), ex.Const(s, 8)
    assert ex.eval_pure(a << b, {}) == ((x << s) & 0xFF if s < 8 else 0)
    assert ex.eval_pure(a >> b, {}) == (x >> s if s < 8 else 0)


def test_eval_wraparound_16bit():
    a = ex.Const(65535, 16)
    assert ex.eval_pure(a + 1, {}) == 0
    assert ex.eval_pure(ex.Const(3, 16) + ex.Const(2, 16), {}) == 5


def test_eval_unops():
    assert ex.eval_pure(~ex.Const(0, 1), {}) == 1
    assert ex.eval_pure(-ex.Const(1, 4), {}) == 15
    assert ex.eval_pure(ex.Const(7, 4).lnot(), {}) == 0
    assert ex.eval_pure(ex.Const(0, 4).lnot(), {}) == 1


def test_unbound_variable():
    with pytest.raises(KeyError):
        ex.eval_pure(ex.Var("a", 4), {})


def test_free_vars_and_peeks():
    from faultline.circuit import HierRef

    e = ex.Var("a", 4).uge(ex.Var("b", 4)).land(ex.Var("a", 4).eq(ex.Const(1, 4)))
    assert ex.free_vars(e) == {"a": 4, "b": 4}
    assert not ex.has_peek(e)
    assert ex.has_peek(ex.Peek(HierRef.of("out"), 4))
