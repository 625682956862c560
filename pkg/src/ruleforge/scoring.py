"""
Message-length scoring of rules and programs.

A rule costs f·log2(n_f+1) + c·log2(n_c+1) + v·log2(n_v+1) bits, where f, c
and v count functor, constant and variable occurrences and the n's are the
vocabulary sizes of the problem. A program's optimality is
-(beta1·program bits + beta2·bits of the evidence it fails to explain).
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .background import BKRegistry
from .config import DEFAULT_BETA1, DEFAULT_BETA2
from .errors import EmptyPopulation
from .rewriting import CoverageReport, EvalBudget, coverage_counts
from .terms import (
    Apply, Atom, BKRef, Cons, Example, FreshVar, Integer, Mapping, Nil, Rule,
    Signature, Term, Tuple, Variable, walk,
)


@dataclass(frozen=True, slots=True)
class ScoringConfig:
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2

    def __post_init__(self):
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise ValueError("scoring weights must be positive")


@dataclass(frozen=True, slots=True)
class SymbolCounts:
    functors: int = 0
    constants: int = 0
    variables: int = 0

    def __add__(self, other: "SymbolCounts") -> "SymbolCounts":
        return SymbolCounts(self.functors + other.functors, self.constants + other.constants,
                            self.variables + other.variables)


def symbol_counts(term: Term) -> SymbolCounts:
    """Occurrences of functors (Apply, cons cells, tuples, &refs), constants and variables.

    A mapping contributes only what its two endpoints contain.
    """
    f = c = v = 0
    for node in walk(term):
        match node:
            case Apply() | Cons() | Tuple() | BKRef():
                f += 1
            case Atom() | Integer() | Nil():
                c += 1
            case Variable() | FreshVar():
                v += 1
            case Mapping():
                pass
    return SymbolCounts(f, c, v)


def rule_symbol_counts(rule: Rule) -> SymbolCounts:
    total = SymbolCounts()
    for term in rule.terms():
        total = total + symbol_counts(term)
    return total


def msg_len_rule(rule: Rule, sig: Signature) -> float:
    counts = rule_symbol_counts(rule)
    return (counts.functors * math.log2(sig.n_f + 1)
            + counts.constants * math.log2(sig.n_c + 1)
            + counts.variables * math.log2(sig.n_v + 1))


def msg_len_program(program: Iterable[Rule], sig: Signature) -> float:
    return sum(msg_len_rule(rule, sig) for rule in program)


def evidence_bits(report: CoverageReport, positives: Sequence[Example], negatives: Sequence[Example],
                  sig: Signature) -> float:
    """Bits for the positives left uncovered plus the negatives wrongly covered."""
    missed = (e for i, e in enumerate(positives) if i not in report.covered_pos)
    wrong = (negatives[i] for i in report.covered_neg)
    return msg_len_program(missed, sig) + msg_len_program(wrong, sig)


def msg_len_evidence(program: Iterable[Rule], positives: Sequence[Example], negatives: Sequence[Example],
                     background: Iterable[Rule], budget: EvalBudget | None, sig: Signature,
                     registry: BKRegistry | None = None) -> float:
    report = coverage_counts(program, positives, negatives, background, budget, registry)
    return evidence_bits(report, positives, negatives, sig)


def optimality_from_bits(program_bits: float, residual_bits: float, cfg: ScoringConfig | None = None) -> float:
    cfg = cfg or ScoringConfig()
    return -cfg.beta1 * program_bits - cfg.beta2 * residual_bits


def optimality(program: Iterable[Rule], positives: Sequence[Example], negatives: Sequence[Example],
               background: Iterable[Rule], budget: EvalBudget | None, sig: Signature,
               cfg: ScoringConfig | None = None, registry: BKRegistry | None = None) -> float:
    program = list(program)
    return optimality_from_bits(
        msg_len_program(program, sig),
        msg_len_evidence(program, positives, negatives, background, budget, sig, registry),
        cfg,
    )


def global_optimality(optimalities: Iterable[float]) -> float:
    """Mean optimality of a program population."""
    values = list(optimalities)
    if not values:
        raise EmptyPopulation("global optimality of an empty program population")
    return math.fsum(values) / len(values)


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------
def compute_signature(positives: Iterable[Example], negatives: Iterable[Example] = (),
                      background: Iterable[Rule] = (), templates: Iterable[Term] = ()) -> Signature:
    """Distinct functor, constant and variable names across evidence, background and templates."""
    functors: set[str] = set()
    constants: set[Term] = set()
    names: set[str] = set()
    terms: list[Term] = []
    for rule in [*positives, *negatives, *background]:
        terms.extend(rule.terms())
    terms.extend(templates)
    for term in terms:
        for node in walk(term):
            match node:
                case Apply(functor, _):
                    functors.add(functor)
                case Cons():
                    functors.add(".")
                case Tuple():
                    functors.add("{}")
                case BKRef(name):
                    functors.add(name)
                case Atom() | Integer() | Nil():
                    constants.add(node)
                case Variable(name) | FreshVar(name):
                    names.add(name)
    return Signature(len(functors), len(constants), len(names))
