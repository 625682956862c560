import pytest

from ruleforge.errors import ParseError
from ruleforge.syntax import (
    EQUATION, format_rule, format_term, parse_position, parse_rule, parse_template, parse_term, tokenize,
)
from ruleforge.terms import (
    NIL, Apply, Atom, BKRef, Cons, FreshVar, Integer, Mapping, PositionRef, Rule, RulePosition, Tuple, Variable,
    string_term,
)


def test_parse_atoms_variables_integers():
    """Test leaf syntax."""
    assert parse_term("abc") == Atom("abc")
    assert parse_term("'A b'") == Atom("A b")
    assert parse_term("V_List") == Variable("V_List")
    assert parse_term("_Tmp") == Variable("_Tmp")
    assert parse_term("-45") == Integer(-45)


def test_parse_lists_and_tuples():
    """Test list, tail and tuple syntax."""
    assert parse_term("[]") == NIL
    assert parse_term("[a,b|T]") == Cons(Atom("a"), Cons(Atom("b"), Variable("T")))
    assert parse_term('"ab"') == string_term("ab")
    assert parse_term("{a, 1}") == Tuple((Atom("a"), Integer(1)))


def test_parse_apply_mapping_reference():
    """Test applications, mappings and function references."""
    assert parse_term("f(a, X)") == Apply("f", (Atom("a"), Variable("X")))
    assert parse_term("d=>c") == Mapping(Atom("d"), Atom("c"))
    assert parse_term("map(&hamming, L)") == Apply("map", (BKRef("hamming"), Variable("L")))


def test_parse_rule_with_guards_and_body():
    """Test the full rule syntax."""
    rule = parse_rule("f(X) when gt(X, 0), lt(X, 9) -> Y = g(X), h(Y)")
    assert rule.lhs == parse_term("f(X)")
    assert rule.guards == (parse_term("gt(X, 0)"), parse_term("lt(X, 9)"))
    assert rule.body == (Apply(EQUATION, (Variable("Y"), parse_term("g(X)"))),)
    assert rule.rhs == parse_term("h(Y)")


def test_rule_round_trip():
    """Test printing then parsing gives the same rule."""
    for text in ("last([H|T]) -> last(T)",
                 "f(X) when gt(X, 0) -> Y = g(X), h(Y)",
                 "trans(V) -> map(d=>\"pez\", V)",
                 "ooo(V) -> distinct(map(&hamming, V))",
                 "g({a, 'B'}) -> []"):
        rule = parse_rule(text)
        assert parse_rule(format_rule(rule)) == rule


def test_nested_equation_round_trip():
    """Test an equation inside a term prints prefix and re-parses to the same term."""
    nested = Apply("f", (Apply(EQUATION, (Atom("a"), Atom("b"))),))
    assert format_term(nested) == "f('='(a,b))"
    assert parse_term(format_term(nested)) == nested
    rule = parse_rule("g(X) -> Y = h(X), k(Y)")
    rule = Rule(rule.lhs, body=rule.body, rhs=nested)
    assert format_rule(rule) == "g(X) -> Y = h(X), f('='(a,b))"
    assert parse_rule(format_rule(rule)) == rule


def test_format_strings_print_as_lists():
    """Test strings print as character lists."""
    assert format_term(parse_term('"abc"')) == "[a,b,c]"
    assert format_term(parse_term("[a|T]")) == "[a|T]"


def test_format_quotes_non_plain_names():
    """Test atoms that would not re-parse as atoms are quoted."""
    assert format_term(Atom("A")) == "'A'"
    assert format_term(Atom("when")) == "'when'"
    assert format_term(Atom("square")) == "square"


def test_parse_template_positions_and_fresh_variables():
    """Test template mode."""
    template = parse_template("last(L1.1)")
    assert template == Apply("last", (PositionRef(RulePosition("L", (1, 1))),))
    assert parse_template("V_List") == FreshVar("V_List")
    assert parse_term("L1") == Variable("L1")


def test_parse_position_alias():
    """Test R is an alias of Rt."""
    assert parse_position("R1") == RulePosition("Rt", (1,))
    assert parse_position("Rt1.2") == RulePosition("Rt", (1, 2))
    assert parse_position("G") == RulePosition("G")
    with pytest.raises(ParseError):
        parse_position("X1")


def test_parse_errors_carry_location():
    """Test parse errors report line and column."""
    with pytest.raises(ParseError) as excinfo:
        parse_term("f(a")
    assert excinfo.value.column == 4

    with pytest.raises(ParseError) as excinfo:
        parse_rule("f(a) => b", line=7)
    assert excinfo.value.line == 7

    with pytest.raises(ParseError):
        parse_term("f()")
    with pytest.raises(ParseError):
        tokenize("a $ b")


def test_trailing_input_is_an_error():
    """Test a complete term followed by more tokens."""
    with pytest.raises(ParseError, match="trailing"):
        parse_term("a b")
