"""
End-to-end learning runs on the bundled problems.

These run the full learner for up to a few thousand steps over several seeds
and are excluded from the default test run. Run them explicitly with:

    pytest tests/test_e2e_learning.py -m e2e -v -s
"""

import csv

import numpy as np
import pytest

from ruleforge.cli import held_out_verdicts, main
from ruleforge.corpus import WORKED_ANSWER, WORKED_CANDIDATES, load_bundled, transfer_problem
from ruleforge.policy import RLConfig
from ruleforge.rewriting import coverage_counts
from ruleforge.search import LearnConfig, best_solution, run

SEEDS = range(5)
MIN_SOLVED = 4

# Acceptance runs skip already-applied pairs and fit per-operator rule weights.
SEARCH_FLAGS = ["--skip-applied", "--op-interactions"]


def search_config(**kwargs):
    return LearnConfig(skip_applied=True, rl=RLConfig(op_interactions=True), stop_on_solution=True, **kwargs)


def solve(problem, max_steps=2000, seed=0, initial_table=None):
    cfg = search_config(max_steps=max_steps, seed=seed)
    result = run(problem, cfg, initial_table)
    rules = result.program_rules(best_solution(result))
    report = coverage_counts(rules, problem.positives, problem.negatives, problem.background, cfg.budget,
                             problem.registry())
    return result, rules, report


def is_solved(problem, report):
    return report.pos == len(problem.positives) and report.neg == 0


def assert_mostly_solved(name, outcomes):
    solved = [seed for seed, ok in outcomes.items() if ok]
    assert len(solved) >= MIN_SOLVED, f"{name}: solved for seeds {solved} of {list(outcomes)}"


@pytest.mark.e2e
@pytest.mark.timeout(3000)
def test_learns_last_element():
    """Test the recursive last program is found for most seeds."""
    problem = load_bundled("last")
    outcomes = {}
    for seed in SEEDS:
        result, _, report = solve(problem, seed=seed)
        outcomes[seed] = is_solved(problem, report) and result.solved_at is not None
    assert_mostly_solved(problem.name, outcomes)


@pytest.mark.e2e
@pytest.mark.timeout(3000)
@pytest.mark.parametrize("number", [1, 5, 13])
def test_learns_letter_series(number):
    """Test series with one rule, a deeper rule and a circular alphabet."""
    problem = load_bundled(f"thurstone-{number}")
    outcomes = {seed: is_solved(problem, solve(problem, seed=seed)[2]) for seed in SEEDS}
    assert_mostly_solved(problem.name, outcomes)


@pytest.mark.e2e
@pytest.mark.timeout(3000)
def test_learns_worked_matrix_and_picks_the_answer():
    """Test the learned matrix program selects the right candidate."""
    problem = load_bundled("raven-worked")
    n = len(WORKED_CANDIDATES)
    outcomes = {}
    for seed in SEEDS:
        _, rules, report = solve(problem, seed=seed)
        verdicts = held_out_verdicts(rules, problem, LearnConfig().budget)
        picks_answer = verdicts[WORKED_ANSWER - 1] or verdicts[n + WORKED_ANSWER - 1]
        outcomes[seed] = is_solved(problem, report) and picks_answer
    assert_mostly_solved(problem.name, outcomes)


@pytest.mark.e2e
@pytest.mark.timeout(1200)
def test_policy_reuse_between_transformations():
    """Test a policy learned on one transformation can seed another."""
    rng = np.random.default_rng(0)
    source = transfer_problem("d_to_c", rng, sample_size=10, shuffle_operators=True)
    target = transfer_problem("d_to_pez", rng, sample_size=10, shuffle_operators=True)

    source_result, _, source_report = solve(source)
    assert is_solved(source, source_report)

    _, _, reuse_report = solve(target, initial_table=source_result.q_table)
    assert is_solved(target, reuse_report)


@pytest.mark.e2e
@pytest.mark.timeout(3600)
def test_bench_reuse_needs_fewer_steps(output_dir):
    """Test reused policies beat learning from scratch across the transfer grid."""
    path = output_dir / "bench.csv"
    with pytest.raises(SystemExit) as excinfo:
        main(["--quiet", "bench", "transfer", "--seeds", "5", "--seed", "0", "--out", str(path), *SEARCH_FLAGS])
    assert excinfo.value.code == 0

    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 25
    scratch = [float(row["mean_steps_scratch"]) for row in rows]
    reuse = [float(row["mean_steps_reuse"]) for row in rows]
    better = sum(r <= s for s, r in zip(scratch, reuse))
    assert better >= 20, f"reuse was no slower in only {better} of 25 cells"
    assert np.mean(reuse) <= 0.9 * np.mean(scratch)
