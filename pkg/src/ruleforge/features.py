"""
Fixed-length abstractions of rules and learner states.

A rule is described by eight numbers (size in bits, positive and negative
coverage of its unit program, variable/constant/function/structure counts,
recursion flag); a state by the population's mean optimality, mean rule size
and mean program cardinality. Keys are rounded so that equal abstractions
compare equal after a CSV round trip.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .background import BKRegistry
from .errors import EmptyPopulation
from .rewriting import EvalBudget, coverage_counts
from .scoring import ScoringConfig, evidence_bits, msg_len_rule, optimality_from_bits
from .terms import (
    NIL, Apply, Atom, BKRef, Cons, Example, Integer, Nil, Rule, Signature, Term, Tuple,
    Variable, children, is_recursive, split_list,
)

KEY_DIGITS = 9


def round_key(value: float) -> float:
    return float(f"{value:.{KEY_DIGITS}g}")


@dataclass(frozen=True, slots=True)
class StructureCounts:
    variables: int = 0
    constants: int = 0
    functions: int = 0
    structures: int = 0


def structure_counts(terms: Iterable[Term]) -> StructureCounts:
    """Classify every symbol once; a maximal list or a tuple counts as one structure."""
    v = c = f = s = 0
    stack = list(terms)
    while stack:
        node = stack.pop()
        match node:
            case Variable():
                v += 1
            case Atom() | Integer():
                c += 1
            case Nil():
                s += 1
            case Cons():
                s += 1
                items, tail = split_list(node)
                stack.extend(items)
                if tail != NIL:
                    stack.append(tail)
            case Tuple(elements):
                s += 1
                stack.extend(elements)
            case Apply(_, args):
                f += 1
                stack.extend(args)
            case BKRef():
                f += 1
            case _:
                stack.extend(children(node))
    return StructureCounts(v, c, f, s)


@dataclass(frozen=True, slots=True)
class RuleFeatures:
    size: float
    pos_cov: int
    neg_cov: int
    num_vars: int
    num_cons: int
    num_funcs: int
    num_structs: int
    is_rec: int
    opt: float

    def vector(self) -> tuple[float, ...]:
        return (self.size, self.pos_cov, self.neg_cov, self.num_vars, self.num_cons,
                self.num_funcs, self.num_structs, self.is_rec)

    def key(self) -> tuple[float, ...]:
        return tuple(round_key(x) for x in self.vector())


@dataclass(frozen=True, slots=True)
class StateFeatures:
    global_opt: float
    avg_rule_size: float
    avg_prog_size: float

    def vector(self) -> tuple[float, float, float]:
        return (self.global_opt, self.avg_rule_size, self.avg_prog_size)

    def key(self) -> tuple[float, ...]:
        return tuple(round_key(x) for x in self.vector())


def abstract_rule(rule: Rule, positives: Sequence[Example], negatives: Sequence[Example],
                  background: Iterable[Rule], budget: EvalBudget | None, sig: Signature,
                  cfg: ScoringConfig | None = None, registry: BKRegistry | None = None) -> RuleFeatures:
    report = coverage_counts([rule], positives, negatives, background, budget, registry)
    size = msg_len_rule(rule, sig)
    counts = structure_counts(rule.terms())
    return RuleFeatures(
        size=size,
        pos_cov=report.pos,
        neg_cov=report.neg,
        num_vars=counts.variables,
        num_cons=counts.constants,
        num_funcs=counts.functions,
        num_structs=counts.structures,
        is_rec=int(is_recursive(rule)),
        opt=optimality_from_bits(size, evidence_bits(report, positives, negatives, sig), cfg),
    )


def abstract_state(rule_sizes: Iterable[float], programs: Iterable[tuple[float, int]]) -> StateFeatures:
    """State from the rule sizes in R and the (optimality, cardinality) of every program in P."""
    sizes = list(rule_sizes)
    programs = list(programs)
    if not sizes or not programs:
        raise EmptyPopulation("state abstraction needs at least one rule and one program")
    return StateFeatures(
        global_opt=math.fsum(opt for opt, _ in programs) / len(programs),
        avg_rule_size=math.fsum(sizes) / len(sizes),
        avg_prog_size=sum(card for _, card in programs) / len(programs),
    )
