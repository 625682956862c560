import math

import numpy as np
import pytest

from ruleforge.corpus import LAST_SOLUTION
from ruleforge.errors import EmptyPopulation
from ruleforge.rewriting import CoverageReport
from ruleforge.scoring import (
    ScoringConfig, SymbolCounts, compute_signature, evidence_bits, global_optimality, msg_len_evidence,
    msg_len_program, msg_len_rule, optimality, optimality_from_bits, symbol_counts,
)
from ruleforge.syntax import parse_rule, parse_template, parse_term
from ruleforge.terms import Apply, Atom, Integer, Rule, Signature, Tuple, Variable, from_list


def test_symbol_counts():
    """Test functor, constant and variable occurrences."""
    assert symbol_counts(parse_term("f([a,b], {X}, &g)")) == SymbolCounts(5, 3, 1)
    assert symbol_counts(parse_term("d=>c")) == SymbolCounts(0, 2, 0)


def test_msg_len_rule():
    """Test the bit cost of a small rule."""
    assert msg_len_rule(parse_rule("f(X) -> X"), Signature(1, 1, 1)) == pytest.approx(3.0)


def test_msg_len_matches_closed_form_for_random_signatures():
    """Test rule cost against the per-symbol log formula."""
    rng = np.random.default_rng(7)
    rule = parse_rule("f(X, a) -> g(X, [b])")
    # f, g and one cons cell; a, b and []; X twice
    for n_f, n_c, n_v in rng.integers(0, 50, size=(20, 3)):
        sig = Signature(int(n_f), int(n_c), int(n_v))
        expected = 3 * math.log2(n_f + 1) + 3 * math.log2(n_c + 1) + 2 * math.log2(n_v + 1)
        assert msg_len_rule(rule, sig) == pytest.approx(expected)


def random_term(rng, depth):
    """A random term together with its functor, constant and variable counts."""
    kind = rng.integers(0, 3 if depth == 0 else 6)
    if kind == 0:
        return Atom(f"a{rng.integers(5)}"), (0, 1, 0)
    if kind == 1:
        return Variable(f"X{rng.integers(5)}"), (0, 0, 1)
    if kind == 2:
        return Integer(int(rng.integers(-9, 9))), (0, 1, 0)
    parts = [random_term(rng, depth - 1) for _ in range(rng.integers(1, 4))]
    totals = tuple(sum(p[1][i] for p in parts) for i in range(3))
    terms = [p[0] for p in parts]
    if kind == 3:
        return Apply(f"f{rng.integers(3)}", tuple(terms)), (totals[0] + 1, totals[1], totals[2])
    if kind == 4:
        # one cons cell per element plus the closing []
        return from_list(terms), (totals[0] + len(terms), totals[1] + 1, totals[2])
    return Tuple(tuple(terms)), (totals[0] + 1, totals[1], totals[2])


def test_msg_len_matches_occurrence_counts_on_random_rules():
    """Test rule cost against counts tallied while building random rules."""
    rng = np.random.default_rng(2024)
    for _ in range(50):
        args, counts = zip(*(random_term(rng, 3) for _ in range(rng.integers(1, 3))))
        rhs, rhs_counts = random_term(rng, 3)
        rule = Rule(Apply("target", tuple(args)), rhs=rhs)
        f = 1 + sum(k[0] for k in counts) + rhs_counts[0]
        c = sum(k[1] for k in counts) + rhs_counts[1]
        v = sum(k[2] for k in counts) + rhs_counts[2]
        sig = Signature(*(int(n) for n in rng.integers(1, 40, size=3)))
        expected = f * math.log2(sig.n_f + 1) + c * math.log2(sig.n_c + 1) + v * math.log2(sig.n_v + 1)
        assert msg_len_rule(rule, sig) == pytest.approx(expected, abs=1e-9)


def test_msg_len_program_is_additive():
    """Test program cost is the sum of rule costs."""
    sig = Signature(3, 4, 2)
    program = [parse_rule(t) for t in LAST_SOLUTION]
    assert msg_len_program(program, sig) == pytest.approx(sum(msg_len_rule(r, sig) for r in program))
    assert msg_len_program([], sig) == 0


def test_optimality_from_bits():
    """Test the weighted optimality."""
    assert optimality_from_bits(3, 2) == -5
    assert optimality_from_bits(3, 2, ScoringConfig(beta1=2.0)) == -8


def test_scoring_config_validation():
    """Test weights must be positive."""
    with pytest.raises(ValueError):
        ScoringConfig(beta1=0)


def test_evidence_bits_counts_missed_and_wrong():
    """Test residual bits for uncovered positives and covered negatives."""
    positives = [parse_rule("f(a) -> b"), parse_rule("f(c) -> d")]
    negatives = [parse_rule("f(a) -> c")]
    report = CoverageReport(covered_pos={0}, covered_neg={0})
    assert evidence_bits(report, positives, negatives, Signature(1, 1, 1)) == pytest.approx(6.0)


def test_optimality_of_the_solution(last_problem, budget, registry):
    """Test a complete and consistent program pays only for itself."""
    program = [parse_rule(t) for t in LAST_SOLUTION]
    sig = last_problem.signature
    opt = optimality(program, last_problem.positives, last_problem.negatives, [], budget, sig, registry=registry)
    assert opt == pytest.approx(-msg_len_program(program, sig))

    empty = optimality([], last_problem.positives, last_problem.negatives, [], budget, sig, registry=registry)
    assert empty == pytest.approx(-msg_len_program(last_problem.positives, sig))


def test_global_optimality():
    """Test the mean over a population."""
    assert global_optimality([-1.0, -3.0]) == -2.0
    with pytest.raises(EmptyPopulation):
        global_optimality([])


def test_compute_signature():
    """Test vocabulary sizes over evidence and templates."""
    sig = compute_signature([parse_rule("f(a) -> b")], [parse_rule("f(c) -> b")],
                            templates=[parse_template("g(V_X, L1)")])
    assert sig == Signature(2, 3, 1)


def test_msg_len_evidence(last_problem, budget, registry):
    """Test residual bits for a complete program and for the empty one."""
    sig = last_problem.signature
    program = [parse_rule(t) for t in LAST_SOLUTION]
    args = (last_problem.positives, last_problem.negatives, [], budget, sig)
    assert msg_len_evidence(program, *args, registry=registry) == 0
    assert msg_len_evidence([], *args, registry=registry) == pytest.approx(
        msg_len_program(last_problem.positives, sig))
