import re

import pytest
from grammar import formulas
from hypothesis import given

from formula_gcl.errors import FormulaSyntaxError
from formula_gcl.formula.parser import (
    BINARY_OP,
    FRACTION,
    GROUP,
    NUMBER,
    SCRIPT,
    SQRT,
    UNARY_FUNC,
    VARIABLE,
    Ast,
    binop,
    num,
    parse_formula,
    script,
    tokenize,
    unparse,
    var,
    walk,
)

ARITY = {VARIABLE: 0, NUMBER: 0, BINARY_OP: 2, UNARY_FUNC: 1, FRACTION: 2, SQRT: 1, GROUP: 1}


def test_sum():
    assert parse_formula("x+y") == binop("+", var("x"), var("y"))


def test_script_binds_tighter_than_plus():
    assert parse_formula("x^{2}+1") == binop("+", script(var("x"), sup=num("2")), num("1"))


def test_fraction():
    assert parse_formula("\\frac{a}{b+c}") == Ast(FRACTION, "\\frac", (var("a"), binop("+", var("b"), var("c"))))


def test_left_associative():
    assert parse_formula("a-b-c") == binop("-", binop("-", var("a"), var("b")), var("c"))
    assert parse_formula("a b c") == binop("", binop("", var("a"), var("b")), var("c"))


def test_product_binds_tighter_than_sum():
    assert parse_formula("a+b*c") == binop("+", var("a"), binop("*", var("b"), var("c")))
    assert parse_formula("2 x+1") == binop("+", binop("", num("2"), var("x")), num("1"))


def test_both_scripts():
    node = parse_formula("x^{n}_{i}")
    assert node.kind == SCRIPT
    assert node.base == var("x") and node.sup == var("n") and node.sub == var("i")
    sub_only = parse_formula("x_{i}")
    assert sub_only.sup is None and sub_only.sub == var("i")


def test_greek_function_group_sqrt():
    node = parse_formula("\\sin((\\alpha))+\\sqrt{3.25}")
    assert node.children[0] == Ast(UNARY_FUNC, "\\sin", (Ast(GROUP, "()", (var("\\alpha"),)),))
    assert node.children[1] == Ast(SQRT, "\\sqrt", (num("3.25"),))


def test_tokenize_offsets_are_bytes():
    toks = tokenize("\\alpha + 12.5")
    assert [(t.text, t.offset) for t in toks] == [("\\alpha", 0), ("+", 7), ("12.5", 9)]


@pytest.mark.parametrize(
    "text, offset",
    [
        ("x+", 2),
        ("(x+y", 4),
        ("x+y)", 3),
        ("\\frac{a}", 8),
        ("x^2", 2),
        ("\\foo", 0),
        ("x # y", 2),
        ("", 0),
        ("\\sin x", 5),
        ("x_{1}^{2}", 5),
    ],
)
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.offset == offset


def test_offset_counts_utf8_bytes():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("x+é")
    assert info.value.offset == 2


@given(formulas())
def test_unparse_parse_fixpoint(text):
    ast = parse_formula(text)
    assert parse_formula(unparse(ast)) == ast


@given(formulas())
def test_ast_shape_invariants(text):
    for node in walk(parse_formula(text)):
        if node.kind == SCRIPT:
            assert len(node.children) == 1 + len(node.lexeme)
        else:
            assert len(node.children) == ARITY[node.kind]
        if node.kind == NUMBER:
            assert re.fullmatch(r"[0-9]+(\.[0-9]+)?", node.lexeme)
        if node.kind == VARIABLE:
            assert re.fullmatch(r"[A-Za-z]|\\[a-z]+", node.lexeme)
