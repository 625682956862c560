"""
Rule-transformation operators built by the meta-operators replace, insert
and delete, plus the one-step rewriting operator.
"""

import logging
import re
from dataclasses import dataclass
from enum import StrEnum
from typing import Iterable, Iterator

from .background import BKRegistry, default_registry
from .errors import BackgroundError, InvalidPosition, ParseError
from .rewriting import EvalBudget, Evaluator
from .syntax import format_term, parse_position, parse_template
from .terms import (
    Apply, FreshVar, PositionRef, Rule, RulePosition, Term, Variable,
    children, is_ground, positions, splice, subpart, with_children,
)


class OperatorKind(StrEnum):
    REPLACE = "replace"
    INSERT = "insert"
    DELETE = "delete"
    ONE_STEP_REW = "one_step_rew"


@dataclass(frozen=True, slots=True)
class OperatorDef:
    id: int
    kind: OperatorKind
    pos: RulePosition | None = None
    template: Term | None = None

    def __post_init__(self):
        needs_template = self.kind in (OperatorKind.REPLACE, OperatorKind.INSERT)
        if needs_template != (self.template is not None):
            raise ValueError(f"{self.kind} operator {self.id}: template presence is wrong")
        if (self.kind == OperatorKind.ONE_STEP_REW) != (self.pos is None):
            raise ValueError(f"{self.kind} operator {self.id}: position presence is wrong")

    def __str__(self) -> str:
        return format_operator(self)


def meta_replace(pos: RulePosition, template: Term, op_id: int = 0) -> OperatorDef:
    return OperatorDef(op_id, OperatorKind.REPLACE, pos, template)


def meta_insert(pos: RulePosition, template: Term, op_id: int = 0) -> OperatorDef:
    return OperatorDef(op_id, OperatorKind.INSERT, pos, template)


def meta_delete(pos: RulePosition, op_id: int = 0) -> OperatorDef:
    return OperatorDef(op_id, OperatorKind.DELETE, pos)


def one_step_rew(op_id: int = 0) -> OperatorDef:
    return OperatorDef(op_id, OperatorKind.ONE_STEP_REW)


# ---------------------------------------------------------------------------
# Template instantiation
# ---------------------------------------------------------------------------
def instantiate(template: Term, rule: Rule) -> Term:
    """Resolve PositionRefs against ``rule``; FreshVars become variables of the same name."""
    match template:
        case PositionRef(pos):
            return subpart(rule, pos)
        case FreshVar(name):
            return Variable(name)
    kids = children(template)
    if not kids:
        return template
    return with_children(template, tuple(instantiate(kid, rule) for kid in kids))


def _subterms(term: Term, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Term]]:
    yield path, term
    for index, kid in enumerate(children(term), start=1):
        yield from _subterms(kid, path + (index,))


def _replace_path(term: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    kids = list(children(term))
    kids[path[0] - 1] = _replace_path(kids[path[0] - 1], path[1:], new)
    return with_children(term, tuple(kids))


def expand_alternatives(term: Term, registry: BKRegistry) -> list[Term]:
    """Expand ground calls to multi-valued background functions, one term per alternative."""
    for path, node in _subterms(term):
        if not (isinstance(node, Apply) and node.functor in registry and is_ground(node)):
            continue
        if not registry.get(node.functor).multi_valued:
            continue
        try:
            alternatives = registry.eval_bk(node.functor, node.args)
        except BackgroundError:
            # Stuck calls stay symbolic.
            return [term]
        expanded = []
        for alternative in alternatives:
            expanded.extend(expand_alternatives(_replace_path(term, path, alternative), registry))
        return expanded
    return [term]


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------
def _one_step_results(rule: Rule, evaluator: Evaluator) -> list[Rule]:
    results = []
    for pos in positions(rule):
        if pos.root != "Rt" or not pos.path:
            continue
        sub = subpart(rule, pos)
        if not isinstance(sub, Apply) or sub.functor == rule.functor:
            continue
        for rewritten in evaluator.rewrite_once(sub):
            results.append(splice(rule, pos, "replace", rewritten))
    return results


def apply_operator(op: OperatorDef, rule: Rule, program: Iterable[Rule] = (), background: Iterable[Rule] = (),
                   registry: BKRegistry | None = None, budget: EvalBudget | None = None) -> list[Rule]:
    """Rules produced by ``op`` from ``rule``; empty when the operator does not apply."""
    registry = registry if registry is not None else default_registry()
    try:
        if op.kind == OperatorKind.ONE_STEP_REW:
            results = _one_step_results(rule, Evaluator(program, background, registry, budget))
        elif op.kind == OperatorKind.DELETE:
            results = [splice(rule, op.pos, "delete")]
        else:
            instance = instantiate(op.template, rule)
            results = [splice(rule, op.pos, op.kind.value, alternative)
                       for alternative in expand_alternatives(instance, registry)]
    except InvalidPosition as e:
        logging.debug(f"Operator {op.id} not applicable: {e}")
        return []
    return list(dict.fromkeys(results))


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------
_DECL_RE = re.compile(r"(replace|insert|delete)\s*\((.*)\)\s*\Z", re.DOTALL)


def parse_operator_decl(text: str, first_id: int, line: int | None = None) -> list[OperatorDef]:
    """Parse ``replace(P1 | P2, tmpl)``, ``insert(P, tmpl)``, ``delete(P)`` or ``one_step_rew``.

    Each alternative position yields its own operator, numbered from ``first_id``.
    """
    text = text.strip()
    if text == "one_step_rew":
        return [one_step_rew(first_id)]
    found = _DECL_RE.match(text)
    if found is None:
        raise ParseError(f"not an operator declaration: {text!r}", line)
    kind = OperatorKind(found.group(1))
    inner = found.group(2)
    template = None
    if kind == OperatorKind.DELETE:
        position_text = inner
    else:
        if "," not in inner:
            raise ParseError(f"{kind} needs a position and a template", line)
        position_text, template_text = inner.split(",", 1)
        template = parse_template(template_text.strip(), line)
    try:
        selected = [parse_position(alternative) for alternative in position_text.split("|")]
    except ParseError as e:
        raise ParseError(str(e), line) from None
    return [OperatorDef(first_id + i, kind, pos, template) for i, pos in enumerate(selected)]


def format_operator(op: OperatorDef) -> str:
    if op.kind == OperatorKind.ONE_STEP_REW:
        return "one_step_rew"
    if op.kind == OperatorKind.DELETE:
        return f"delete({op.pos})"
    return f"{op.kind.value}({op.pos}, {format_term(op.template)})"
