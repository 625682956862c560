import logging

import pytest

from ruleforge.corpus import LAST_SOLUTION
from ruleforge.errors import BudgetExceeded
from ruleforge.rewriting import (
    EvalBudget, Evaluator, coverage_counts, covers, eval_guards, example_base, normal_form, order_program,
)
from ruleforge.syntax import parse_rule, parse_term
from ruleforge.terms import Atom, Integer


def rules(*texts):
    return [parse_rule(t) for t in texts]


def test_budget_validation():
    """Test budget limits must be positive."""
    with pytest.raises(ValueError):
        EvalBudget(max_rewrite_steps=0)


def test_order_program_puts_specific_rules_first():
    """Test rules with fewer lhs variables are tried first."""
    general, specific = rules("last([H|T]) -> last(T)", "last([H]) -> H")
    assert order_program([general, specific]) == [specific, general]


def test_normal_form_with_background_functions():
    """Test innermost reduction through built-in functions."""
    assert normal_form(parse_term("last(init([a,b,c]))")) == Atom("b")
    assert normal_form(parse_term("length(append([a],[b]))")) == Integer(2)


def test_normal_form_with_program():
    """Test the recursive last program."""
    program = rules(*LAST_SOLUTION)
    assert normal_form(parse_term("last([a,b,c,d])"), program) == Atom("d")


def test_stuck_terms_stay_put():
    """Test unknown functions and domain errors leave the redex in place."""
    assert normal_form(parse_term("g(a)")) == parse_term("g(a)")
    assert normal_form(parse_term("head([])")) == parse_term("head([])")


def test_program_shadows_background_function():
    """Test a rule-defined functor hides the built-in of the same name."""
    program = rules("head([a,b]) -> z")
    assert normal_form(parse_term("head([a,b])"), program) == Atom("z")
    assert normal_form(parse_term("head([c])"), program) == parse_term("head([c])")


def test_body_equations_bind_variables():
    """Test a body equation binds its pattern before the rhs."""
    program = rules("f(X) -> Y = head(X), g(Y)")
    assert normal_form(parse_term("f([a,b])"), program) == parse_term("g(a)")


def test_guards_select_rules():
    """Test guarded rules fire only when their guards hold."""
    program = rules("sign(X) when gt(X, 0) -> pos", "sign(X) when lt(X, 0) -> neg")
    assert normal_form(parse_term("sign(3)"), program) == Atom("pos")
    assert normal_form(parse_term("sign(-3)"), program) == Atom("neg")
    assert normal_form(parse_term("sign(0)"), program) == parse_term("sign(0)")


def test_eval_guards():
    """Test guard evaluation under a substitution."""
    guards = [parse_term("gt(X, 1)")]
    assert eval_guards(guards, {"X": Integer(3)})
    assert not eval_guards(guards, {"X": Integer(0)})


def test_non_boolean_guard_fails_with_warning(caplog):
    """Test a guard that does not reduce to a boolean."""
    with caplog.at_level(logging.WARNING):
        assert not eval_guards([parse_term("g(a)")], {})
    assert "non-boolean" in caplog.text


def test_budget_exhaustion():
    """Test a looping program exhausts the rewrite budget."""
    program = rules("f(X) -> f(X)")
    budget = EvalBudget(max_rewrite_steps=10)
    with pytest.raises(BudgetExceeded):
        normal_form(parse_term("f(a)"), program, budget=budget)
    example = parse_rule("f(a) -> a")
    assert not covers(program, [], [], example, budget)


def test_rewrite_once_collects_every_result():
    """Test one-step rewriting with overlapping rules and a multi-valued function."""
    evaluator = Evaluator(rules("f(X) -> a", "f(b) -> c"))
    assert evaluator.rewrite_once(parse_term("f(b)")) == [Atom("c"), Atom("a")]
    assert len(Evaluator().rewrite_once(parse_term('nSust("abc", "adec")'))) == 2
    assert Evaluator().rewrite_once(Atom("a")) == []


def test_example_base_first_wins():
    """Test a repeated lhs keeps its first rhs."""
    base = example_base(rules("f(a) -> b", "f(a) -> c"))
    assert base == {parse_term("f(a)"): Atom("b")}


def test_coverage_of_the_solution(last_problem, budget, registry):
    """Test the recursive last program is complete and consistent."""
    report = coverage_counts(rules(*LAST_SOLUTION), last_problem.positives, last_problem.negatives,
                             budget=budget, registry=registry)
    assert report.pos == len(last_problem.positives)
    assert report.neg == 0


def test_coverage_leaves_the_example_out(last_problem, budget, registry):
    """Test an example is never proved by itself in the base."""
    report = coverage_counts([], last_problem.positives, last_problem.negatives, budget=budget, registry=registry)
    assert report.pos == 0
    assert report.neg == 0


def test_coverage_uses_other_positives(last_problem, budget, registry):
    """Test recursion bottoms out on other positive examples."""
    program = rules("last([H|T]) -> last(T)")
    report = coverage_counts(program, last_problem.positives, last_problem.negatives,
                             budget=budget, registry=registry)
    assert report.covered_pos == {3, 5, 7}
    assert report.covered_neg == set()


def test_covers_single_example(last_problem, budget):
    """Test the single-example coverage check."""
    example = parse_rule("last([x,y,c]) -> c")
    program = rules("last([H|T]) -> last(T)")
    assert covers(program, [], last_problem.positives, example, budget)
    assert not covers(program, [], last_problem.positives, parse_rule("last([x,y,c]) -> y"), budget)
