"""
Bounded innermost-leftmost rewriting and extensional coverage.

Rules are tried in this order: the extensional base (ground positive
examples, minus the one being proved), the program in specificity order,
background rules, then built-in background functions. A functor defined by
any rule shadows the built-in function of the same name and arity.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .background import BKRegistry, default_registry
from .config import DEFAULT_BUDGET_DEPTH, DEFAULT_BUDGET_STEPS
from .errors import BackgroundError, BudgetExceeded
from .syntax import EQUATION, format_rule, format_term
from .terms import (
    TRUE, FALSE, Apply, Cons, Example, Mapping, Rule, Substitution, Term, Tuple, Variable,
    children, from_list, match, split_list, substitute, walk, with_children,
)


@dataclass(frozen=True, slots=True)
class EvalBudget:
    max_rewrite_steps: int = DEFAULT_BUDGET_STEPS
    max_term_depth: int = DEFAULT_BUDGET_DEPTH

    def __post_init__(self):
        if self.max_rewrite_steps < 1 or self.max_term_depth < 1:
            raise ValueError("evaluation budget limits must be at least 1")


@dataclass(slots=True)
class CoverageReport:
    covered_pos: set[int] = field(default_factory=set)
    covered_neg: set[int] = field(default_factory=set)
    budget_hits: int = 0

    @property
    def pos(self) -> int:
        return len(self.covered_pos)

    @property
    def neg(self) -> int:
        return len(self.covered_neg)


@lru_cache(maxsize=65536)
def specificity_key(rule: Rule) -> tuple:
    """More specific rules sort first: fewer lhs variables, more guards, bigger lhs."""
    lhs_nodes = list(walk(rule.lhs))
    var_count = sum(1 for node in lhs_nodes if isinstance(node, Variable))
    return (var_count, -len(rule.guards), -len(lhs_nodes), format_rule(rule))


def order_program(rules: Iterable[Rule]) -> list[Rule]:
    return sorted(rules, key=specificity_key)


class Evaluator:
    """Normalizes terms against one program; a fresh step counter per ``normal_form`` call."""

    def __init__(
        self,
        program: Iterable[Rule] = (),
        background: Iterable[Rule] = (),
        registry: BKRegistry | None = None,
        budget: EvalBudget | None = None,
        base: dict[Term, Term] | None = None,
        excluded: Term | None = None,
    ):
        self.rules = order_program(program) + list(background)
        self.registry = registry if registry is not None else default_registry()
        self.budget = budget or EvalBudget()
        self.base = base or {}
        self.excluded = excluded
        self.defined = {(r.functor, r.lhs.arity) for r in self.rules}
        self.defined |= {(lhs.functor, lhs.arity) for lhs in self.base if isinstance(lhs, Apply)}
        self._steps = 0

    # -- public ------------------------------------------------------------
    def normal_form(self, term: Term) -> Term:
        """Normal form of ``term``; raises BudgetExceeded."""
        self._steps = 0
        try:
            return self._normalize(term, 1)
        except RecursionError:
            raise BudgetExceeded("term nesting exceeded the interpreter stack") from None

    def eval_guards(self, guards: Sequence[Term], subst: Substitution) -> bool:
        self._steps = 0
        try:
            return self._guards_hold(guards, subst, 1)
        except RecursionError:
            raise BudgetExceeded("term nesting exceeded the interpreter stack") from None

    def rewrite_once(self, term: Term) -> list[Term]:
        """Every result of one rewrite step at the root of ``term``."""
        if not isinstance(term, Apply):
            return []
        results: list[Term] = []
        for rule in self._candidates(term):
            self._steps = 0
            try:
                theta = self._fire(rule, term, 1)
            except BudgetExceeded:
                continue
            if theta is not None:
                results.append(substitute(rule.rhs, theta))
        if (term.functor, term.arity) not in self.defined and term.functor in self.registry:
            try:
                results.extend(self.registry.eval_bk(term.functor, term.args))
            except BackgroundError:
                pass
        return list(dict.fromkeys(results))

    # -- reduction ---------------------------------------------------------
    def _normalize(self, term: Term, depth: int) -> Term:
        if depth > self.budget.max_term_depth:
            raise BudgetExceeded(f"term depth exceeded {self.budget.max_term_depth}")
        match term:
            case Cons():
                items, tail = split_list(term)
                return from_list([self._normalize(item, depth + 1) for item in items],
                                 self._normalize(tail, depth + 1))
            case Tuple() | Mapping():
                return with_children(term, tuple(self._normalize(c, depth + 1) for c in children(term)))
            case Apply(functor, args):
                reduced = Apply(functor, tuple(self._normalize(a, depth + 1) for a in args))
                result = self._step(reduced, depth)
                if result is None:
                    return reduced
                self._steps += 1
                if self._steps > self.budget.max_rewrite_steps:
                    raise BudgetExceeded(f"more than {self.budget.max_rewrite_steps} rewrite steps")
                return self._normalize(result, depth + 1)
            case _:
                return term

    def _candidates(self, term: Apply) -> Iterable[Rule]:
        return (r for r in self.rules if r.functor == term.functor and r.lhs.arity == term.arity)

    def _step(self, term: Apply, depth: int) -> Term | None:
        if term != self.excluded and term in self.base:
            return self.base[term]
        for rule in self._candidates(term):
            theta = self._fire(rule, term, depth)
            if theta is not None:
                return substitute(rule.rhs, theta)
        if (term.functor, term.arity) in self.defined or term.functor not in self.registry:
            return None
        try:
            return self.registry.eval_bk(term.functor, term.args)[0]
        except BackgroundError:
            return None

    def _fire(self, rule: Rule, term: Apply, depth: int) -> Substitution | None:
        theta = match(rule.lhs, term)
        if theta is None or not self._guards_hold(rule.guards, theta, depth):
            return None
        for item in rule.body:
            if isinstance(item, Apply) and item.functor == EQUATION and item.arity == 2:
                value = self._normalize(substitute(item.args[1], theta), depth + 1)
                theta = match(substitute(item.args[0], theta), value, theta)
                if theta is None:
                    return None
            else:
                self._normalize(substitute(item, theta), depth + 1)
        return theta

    def _guards_hold(self, guards: Sequence[Term], theta: Substitution, depth: int) -> bool:
        for guard in guards:
            value = self._normalize(substitute(guard, theta), depth + 1)
            if value == TRUE:
                continue
            if value != FALSE:
                logging.warning(f"Guard {format_term(guard)} has non-boolean normal form {format_term(value)}")
            return False
        return True


# ---------------------------------------------------------------------------
# Functional surface
# ---------------------------------------------------------------------------
def normal_form(term: Term, program: Iterable[Rule] = (), background: Iterable[Rule] = (),
                budget: EvalBudget | None = None, registry: BKRegistry | None = None) -> Term:
    return Evaluator(program, background, registry, budget).normal_form(term)


def eval_guards(guards: Sequence[Term], subst: Substitution, background: Iterable[Rule] = (),
                budget: EvalBudget | None = None, registry: BKRegistry | None = None) -> bool:
    """True iff every guard normalizes to ``true``; an exhausted budget fails the guards."""
    try:
        return Evaluator((), background, registry, budget).eval_guards(guards, subst)
    except BudgetExceeded:
        return False


def example_base(examples: Iterable[Example]) -> dict[Term, Term]:
    """Ground examples as an lhs → rhs table; the first example wins on a repeated lhs."""
    base: dict[Term, Term] = {}
    for example in examples:
        base.setdefault(example.lhs, example.rhs)
    return base


def _proves(evaluator: Evaluator, example: Example) -> bool:
    return evaluator.normal_form(example.lhs) == evaluator.normal_form(example.rhs)


def covers(program: Iterable[Rule], background: Iterable[Rule], base: Iterable[Example], example: Example,
           budget: EvalBudget | None = None, registry: BKRegistry | None = None) -> bool:
    """Extensional coverage: lhs and rhs of ``example`` share a normal form under program ∪ K ∪ base."""
    evaluator = Evaluator(program, background, registry, budget, example_base(base))
    try:
        return _proves(evaluator, example)
    except BudgetExceeded:
        return False


def coverage_counts(program: Iterable[Rule], positives: Sequence[Example], negatives: Sequence[Example],
                    background: Iterable[Rule] = (), budget: EvalBudget | None = None,
                    registry: BKRegistry | None = None) -> CoverageReport:
    """Covered positive ids (base E⁺ minus the example) and negative ids (base E⁺)."""
    program = order_program(program)
    background = list(background)
    registry = registry if registry is not None else default_registry()
    base = example_base(positives)
    report = CoverageReport()
    for covered, examples, leave_out in ((report.covered_pos, positives, True),
                                         (report.covered_neg, negatives, False)):
        for index, example in enumerate(examples):
            excluded = example.lhs if leave_out else None
            evaluator = Evaluator(program, background, registry, budget, base, excluded)
            try:
                if _proves(evaluator, example):
                    covered.add(index)
            except BudgetExceeded:
                report.budget_hits += 1
    return report
