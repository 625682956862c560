"""
The learning loop: pick an (operator, rule abstraction) action with the Q-model,
apply it to one rule of that abstraction,
merge the new rule into programs, reward the step with the new rule's
optimality and update the Q-table, until the optimality of recently added
programs stabilises or the step limit is reached.
"""

import csv
import logging
import statistics
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np
from tqdm import tqdm

from .config import DEFAULT_EPSILON, DEFAULT_MAX_STEPS, DEFAULT_PAIR_CAP, DEFAULT_SEED, DEFAULT_WINDOW
from .errors import ConfigError, ProblemError
from .features import RuleFeatures, StateFeatures, abstract_rule, abstract_state
from .operators import OperatorDef, apply_operator
from .policy import (
    QModel, QTable, RLConfig, apply_update, argmax_with_ties, init_q, train_model,
)
from .rewriting import EvalBudget, coverage_counts
from .scoring import ScoringConfig, evidence_bits, optimality_from_bits
from .syntax import format_rule
from .terms import Program, Rule, canonical
from .utils import named_rng, stable_hash

if TYPE_CHECKING:
    from .corpus import Problem


@dataclass(frozen=True, slots=True)
class LearnConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    epsilon: float = DEFAULT_EPSILON
    window_n: int = DEFAULT_WINDOW
    budget: EvalBudget = field(default_factory=EvalBudget)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    rl: RLConfig = field(default_factory=RLConfig)
    seed: int = DEFAULT_SEED
    pair_cap: int = DEFAULT_PAIR_CAP
    stop_on_solution: bool = False
    skip_applied: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if self.window_n < 2:
            raise ConfigError("window_n must be at least 2")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative")
        if self.pair_cap < 0:
            raise ConfigError("pair_cap must be non-negative (0 means unbounded)")


@dataclass(frozen=True, slots=True)
class RuleEntry:
    index: int
    rule: Rule
    features: RuleFeatures

    @property
    def hash(self) -> str:
        return rule_hash(self.rule)


@dataclass(frozen=True, slots=True)
class ProgramEntry:
    rules: Program
    opt: float
    bits: float
    pos_cov: int
    neg_cov: int

    def rank_key(self) -> tuple[float, float]:
        return (-self.opt, self.bits)


@dataclass(frozen=True, slots=True)
class TraceEntry:
    step: int
    op_id: int
    rule_hash: str
    reward: float
    global_opt: float
    stop_flag: bool


@dataclass
class LearnResult:
    rules: list[RuleEntry]
    programs: list[ProgramEntry]
    q_table: QTable
    steps: int
    trace: list[TraceEntry]
    solved_at: int | None = None

    def program_rules(self, program: ProgramEntry) -> list[Rule]:
        return [self.rules[i].rule for i in sorted(program.rules)]


def rule_hash(rule: Rule) -> str:
    return stable_hash(format_rule(canonical(rule)))


def stop_criterion(optimalities: Sequence[float], t: int, epsilon: float, window_n: int, max_steps: int) -> bool:
    """True at the step limit, or when the last ``window_n`` optimalities have sample stdev ≤ epsilon."""
    if t >= max_steps:
        return True
    if t < window_n or len(optimalities) < window_n:
        return False
    return statistics.stdev(optimalities[-window_n:]) <= epsilon


def best_solution(result: LearnResult) -> ProgramEntry:
    if not result.programs:
        raise ProblemError("the learner produced no programs")
    return result.programs[0]


class Learner:
    """One learning run over a problem; owns the rule and program populations."""

    def __init__(self, problem: "Problem", cfg: LearnConfig, initial_table: QTable | None = None):
        if not problem.positives:
            raise ProblemError(f"problem '{problem.name}' has no positive examples")
        if not problem.operators:
            raise ProblemError(f"problem '{problem.name}' has no operators")
        self.problem = problem
        self.cfg = cfg
        self.registry = problem.registry()
        self.operators: list[OperatorDef] = list(problem.operators)
        self.op_ids = [op.id for op in self.operators]
        self.rng = named_rng(cfg.seed, "tie-break")

        self.rules: list[RuleEntry] = []
        self._canonical: set[Rule] = set()
        self.programs: dict[Program, ProgramEntry] = {}
        self._evaluated: dict[Program, ProgramEntry] = {}
        # Rules grouped by abstraction; the policy chooses among groups.
        self._groups: list[list[int]] = []
        self._group_of: dict[tuple[float, ...], int] = {}
        self._group_vectors: list[tuple[float, ...]] = []
        self._applied: dict[tuple[int, int], set[int]] = {}
        self.generated_opts: list[float] = []
        self.trace: list[TraceEntry] = []
        self.solved_at: int | None = None

        for example in problem.positives:
            entry = self._add_rule(example)
            if entry is not None:
                self._add_program(self._unit_program(entry))
        state = self.state()
        if initial_table is None:
            self.table = init_q(state, (e.features for e in self.rules), self.op_ids, cfg.rl.q0)
        else:
            self.table = QTable(initial_table)
        self.model: QModel = train_model(self.table, cfg.rl.op_interactions)

    # -- populations -------------------------------------------------------
    def _add_rule(self, rule: Rule) -> RuleEntry | None:
        key = canonical(rule)
        if key in self._canonical:
            return None
        features = abstract_rule(rule, self.problem.positives, self.problem.negatives, self.problem.background,
                                 self.cfg.budget, self.problem.signature, self.cfg.scoring, self.registry)
        entry = RuleEntry(len(self.rules), rule, features)
        self._canonical.add(key)
        self.rules.append(entry)
        group = self._group_of.get(features.key())
        if group is None:
            group = self._group_of[features.key()] = len(self._groups)
            self._groups.append([])
            self._group_vectors.append(features.vector())
        self._groups[group].append(entry.index)
        return entry

    def _unit_program(self, entry: RuleEntry) -> ProgramEntry:
        program = frozenset([entry.index])
        if program not in self._evaluated:
            f = entry.features
            self._evaluated[program] = ProgramEntry(program, f.opt, f.size, f.pos_cov, f.neg_cov)
        return self._evaluated[program]

    def _add_program(self, program: ProgramEntry) -> bool:
        if program.rules in self.programs:
            return False
        self.programs[program.rules] = program
        return True

    def program_bits(self, program: Program) -> float:
        return sum(self.rules[i].features.size for i in program)

    def evaluate(self, program: Program) -> ProgramEntry:
        """Coverage and optimality of a rule-index set, cached per set."""
        cached = self._evaluated.get(program)
        if cached is not None:
            return cached
        problem = self.problem
        report = coverage_counts([self.rules[i].rule for i in program], problem.positives, problem.negatives,
                                 problem.background, self.cfg.budget, self.registry)
        bits = self.program_bits(program)
        residual = evidence_bits(report, problem.positives, problem.negatives, problem.signature)
        entry = ProgramEntry(program, optimality_from_bits(bits, residual, self.cfg.scoring), bits,
                             report.pos, report.neg)
        self._evaluated[program] = entry
        return entry

    def ranked_programs(self) -> list[ProgramEntry]:
        return sorted(self.programs.values(), key=ProgramEntry.rank_key)

    def is_solution(self, program: ProgramEntry) -> bool:
        return program.pos_cov == len(self.problem.positives) and program.neg_cov == 0

    def state(self) -> StateFeatures:
        return abstract_state((e.features.size for e in self.rules),
                              ((p.opt, len(p.rules)) for p in self.programs.values()))

    # -- rule generator ----------------------------------------------------
    def generate_rule(self, op: OperatorDef, entry: RuleEntry) -> list[RuleEntry]:
        """Apply ``op`` to a rule; returns only rules new to R up to renaming."""
        best = self.ranked_programs()[0]
        context = [self.rules[i].rule for i in sorted(best.rules)]
        produced = apply_operator(op, entry.rule, context, self.problem.background, self.registry, self.cfg.budget)
        new_entries = []
        for rule in produced:
            added = self._add_rule(rule)
            if added is not None:
                new_entries.append(added)
        return new_entries

    # -- program generator -------------------------------------------------
    def _best_of(self, candidates, bound_of) -> ProgramEntry | None:
        best: ProgramEntry | None = None
        for program in candidates:
            # Evidence bits are never negative, so -beta1·bits bounds the optimality.
            if best is not None and bound_of(program) <= best.opt:
                continue
            entry = self.evaluate(program)
            if best is None or entry.rank_key() < best.rank_key():
                best = entry
        return best

    def combine_programs(self, entry: RuleEntry) -> tuple[ProgramEntry, bool]:
        """Best of: the best pairwise union, the best program extended by the rule, the rule alone."""
        beta1 = self.cfg.scoring.beta1
        ranked = self.ranked_programs()
        top = ranked if self.cfg.pair_cap == 0 else ranked[:self.cfg.pair_cap]

        def bound(program: Program) -> float:
            return -beta1 * self.program_bits(program)

        pairs = (a.rules | b.rules for a, b in combinations(top, 2))
        p1 = self._best_of(pairs, bound)
        extended = (p.rules | {entry.index} for p in ranked)
        p2 = self._best_of(extended, bound)
        unit = self._unit_program(entry)

        chosen = None
        for candidate in (p1, p2, unit):
            if candidate is not None and (chosen is None or candidate.rank_key() < chosen.rank_key()):
                chosen = candidate
        return chosen, self._add_program(chosen)

    # -- loop --------------------------------------------------------------
    def _scores(self, state: StateFeatures) -> np.ndarray:
        """Predicted q for every (operator, rule abstraction); columns follow the abstraction groups."""
        return self.model.predict_grid(state.vector(), self.op_ids, np.array(self._group_vectors))

    def _action_grid(self, state: StateFeatures) -> np.ndarray:
        scores = self._scores(state)
        if not self.cfg.skip_applied:
            return scores
        exhausted = [cell for cell, done in self._applied.items() if len(done) >= len(self._groups[cell[1]])]
        if len(exhausted) == scores.size:
            logging.debug("Every (operator, rule) pair has been applied; choosing among all of them")
            return scores
        for op_index, group in exhausted:
            scores[op_index, group] = -np.inf
        return scores

    def _pick_rule(self, op_index: int, group: int) -> int:
        """A rule of the chosen abstraction, uniformly at random."""
        members = self._groups[group]
        if self.cfg.skip_applied:
            done = self._applied.get((op_index, group), set())
            members = [i for i in members if i not in done] or members
        return members[0] if len(members) == 1 else int(self.rng.choice(members))

    def step(self, t: int) -> bool:
        """Run one step; returns True when the loop should stop."""
        rl = self.cfg.rl
        if (t - 1) % rl.retrain_period == 0:
            self.model = train_model(self.table, rl.op_interactions)
        state = self.state()
        op_index, group = divmod(argmax_with_ties(self._action_grid(state), self.rng), len(self._groups))
        rule_index = self._pick_rule(op_index, group)
        self._applied.setdefault((op_index, group), set()).add(rule_index)
        op, chosen = self.operators[op_index], self.rules[rule_index]

        new_entries = self.generate_rule(op, chosen)
        for entry in new_entries:
            for op_id in self.op_ids:
                self.table.ensure((state.key(), op_id, entry.features.key()), rl.q0)
        new_hash = ""
        if new_entries:
            best_new = max(new_entries, key=lambda e: e.features.opt)
            reward = best_new.features.opt
            new_hash = best_new.hash
            program, added = self.combine_programs(best_new)
            if added:
                self.generated_opts.append(program.opt)
                logging.debug(f"Step {t}: new program with Opt {program.opt:.3f} ({len(program.rules)} rules)")
        else:
            reward = min(e.features.opt for e in self.rules)

        next_state = self.state()
        max_next = float(np.max(self._scores(next_state)))
        apply_update(self.table, (state.key(), op.id, chosen.features.key()), reward, max_next, rl)

        best = self.ranked_programs()[0]
        if self.solved_at is None and self.is_solution(best):
            self.solved_at = t
            logging.info(f"Complete and consistent program found at step {t}")
        stop = stop_criterion(self.generated_opts, t, self.cfg.epsilon, self.cfg.window_n, self.cfg.max_steps)
        stop = stop or (self.cfg.stop_on_solution and self.solved_at is not None)
        self.trace.append(TraceEntry(t, op.id, new_hash, reward, next_state.global_opt, stop))
        return stop

    def run(self, progress: bool = False) -> LearnResult:
        logging.info(f"Learning '{self.problem.name}': {len(self.problem.positives)} positive, "
                     f"{len(self.problem.negatives)} negative examples, {len(self.operators)} operators")
        t = 0
        with tqdm(total=self.cfg.max_steps, desc=self.problem.name, disable=not progress) as bar:
            while True:
                t += 1
                stop = self.step(t)
                bar.update(1)
                if stop:
                    break
        logging.info(f"Stopped after {t} steps with {len(self.rules)} rules and {len(self.programs)} programs")
        return LearnResult(self.rules, self.ranked_programs(), self.table, t, self.trace, self.solved_at)


def run(problem: "Problem", cfg: LearnConfig | None = None, initial_table: QTable | None = None,
        progress: bool = False) -> LearnResult:
    """Learn a program for ``problem``; deterministic for a given seed."""
    return Learner(problem, cfg or LearnConfig(), initial_table).run(progress)


def write_trace(trace: Sequence[TraceEntry], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "op_id", "rule_hash", "reward", "global_opt", "stop_flag"])
        for entry in trace:
            writer.writerow([entry.step, entry.op_id, entry.rule_hash, f"{entry.reward:.9g}",
                             f"{entry.global_opt:.9g}", int(entry.stop_flag)])
    logging.info(f"Trace with {len(trace)} steps written to {path}")
