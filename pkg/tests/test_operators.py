import pytest

from ruleforge.errors import ParseError
from ruleforge.operators import (
    OperatorDef, OperatorKind, apply_operator, format_operator, meta_delete, meta_insert, meta_replace,
    one_step_rew, parse_operator_decl,
)
from ruleforge.syntax import parse_position, parse_rule, parse_template, parse_term
from ruleforge.terms import FreshVar, RulePosition


def replace(position, template):
    return meta_replace(parse_position(position), parse_template(template))


def test_replace_with_fresh_variable():
    """Test generalising a list tail to a variable."""
    rule = parse_rule("last([a,b,c]) -> c")
    results = apply_operator(replace("L1.2", "V_Tail"), rule)
    assert results == [parse_rule("last([a|V_Tail]) -> c")]


def test_replace_with_position_reference():
    """Test a template that copies a subpart of the input rule."""
    rule = parse_rule("last([a|V_Tail]) -> c")
    results = apply_operator(replace("Rt1", "last(L1.2)"), rule)
    assert results == [parse_rule("last([a|V_Tail]) -> last(V_Tail)")]


def test_missing_position_is_not_applicable():
    """Test an operator whose position does not exist yields nothing."""
    rule = parse_rule("last([c]) -> c")
    assert apply_operator(replace("L1.3", "V_X"), rule) == []
    assert apply_operator(meta_delete(parse_position("G1")), rule) == []


def test_insert_and_delete_guards():
    """Test the insert and delete meta-operators on guards."""
    rule = parse_rule("f(a) -> b")
    guarded = apply_operator(meta_insert(parse_position("G1"), parse_template("eq(L1, L1)")), rule)
    assert guarded == [parse_rule("f(a) when eq(a, a) -> b")]
    assert apply_operator(meta_delete(parse_position("G1")), guarded[0]) == [rule]


def test_one_step_rewriting():
    """Test one step of rewriting inside the Right sequence."""
    rule = parse_rule('trans("trade") -> oneSust("trade", "trace")')
    results = apply_operator(one_step_rew(), rule)
    assert results == [parse_rule('trans("trade") -> map(d=>c, "trade")')]


def test_one_step_rewriting_skips_recursive_calls():
    """Test calls to the rule's own functor are left alone."""
    rule = parse_rule("last([a,b]) -> last(tail([a,b]))")
    results = apply_operator(one_step_rew(), rule)
    assert results == [parse_rule("last([a,b]) -> last([b])")]


def test_multi_valued_template_expands():
    """Test a multi-valued background call gives one rule per alternative."""
    rule = parse_rule('trans("abc") -> "adec"')
    results = apply_operator(replace("Rt1", "nSust(L1, Rt1)"), rule)
    assert results == [
        parse_rule('trans("abc") -> map(b=>"de", "abc")'),
        parse_rule('trans("abc") -> map(b=>"dec", "abc")'),
    ]


def test_parse_operator_declarations():
    """Test a position selector expands into consecutive ids."""
    ops = parse_operator_decl("replace(L1 | Rt1.2, V_X)", 5)
    assert [op.id for op in ops] == [5, 6]
    assert [op.pos for op in ops] == [RulePosition("L", (1,)), RulePosition("Rt", (1, 2))]
    assert all(op.template == FreshVar("V_X") for op in ops)

    assert parse_operator_decl("one_step_rew", 3) == [one_step_rew(3)]
    assert parse_operator_decl("delete(G1)", 1) == [meta_delete(RulePosition("G", (1,)), 1)]


def test_parse_operator_errors():
    """Test malformed operator declarations."""
    with pytest.raises(ParseError):
        parse_operator_decl("swap(L1)", 1)
    with pytest.raises(ParseError):
        parse_operator_decl("replace(L1)", 1)
    with pytest.raises(ParseError) as excinfo:
        parse_operator_decl("replace(X1, a)", 1, line=4)
    assert excinfo.value.line == 4


def test_format_operator():
    """Test operators print in declaration syntax."""
    op = replace("Rt1", "last(L1.1)")
    assert format_operator(op) == "replace(Rt1, last(L1.1))"
    assert str(one_step_rew()) == "one_step_rew"
    assert parse_operator_decl(format_operator(op), 0) == [op]


def test_operator_definition_validation():
    """Test templates and positions are required where they apply."""
    with pytest.raises(ValueError):
        OperatorDef(1, OperatorKind.REPLACE, RulePosition("L"), None)
    with pytest.raises(ValueError):
        OperatorDef(1, OperatorKind.ONE_STEP_REW, RulePosition("L"))
    with pytest.raises(ValueError):
        OperatorDef(1, OperatorKind.DELETE, RulePosition("G", (1,)), parse_term("a"))
