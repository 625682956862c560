import csv
import sys
import time
import argparse
import logging
import dataclasses
from pathlib import Path

from scipy import stats
from tqdm import tqdm

from .config import add_learning_arguments, build_learn_config, init_environment
from .corpus import Problem, TRANSFORMATIONS, TRANSFER_SAMPLE_SIZE, problem_names, resolve_problem, transfer_problem
from .errors import BackgroundError, ConfigError, ParseError, PolicyFileError, ProblemError
from .policy import QTable, export_policy, import_policy
from .rewriting import CoverageReport, EvalBudget, coverage_counts, covers
from .search import LearnConfig, LearnResult, best_solution, run, write_trace
from .syntax import format_rule, parse_rule
from .terms import Rule
from .utils import named_rng, save_report

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')

EXIT_OK = 0
EXIT_INCOMPLETE = 1
EXIT_USER_ERROR = 2
EXIT_INTERNAL_ERROR = 3
EXIT_INTERRUPTED = 130

USER_ERRORS = (FileNotFoundError, ParseError, ProblemError, PolicyFileError, ConfigError, BackgroundError)

BENCH_SUITES: dict[str, tuple[str, ...]] = {"transfer": tuple(TRANSFORMATIONS)}


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--save-policy", help="Write the final Q-table to this CSV file.")
    parser.add_argument("--trace", help="Write the per-step trace to this CSV file.")
    parser.add_argument("--out", help="Write the run report as JSON to this file.")


def parse_arguments(argv=None):
    """Parses command line arguments."""
    parser = argparse.ArgumentParser(
        description="ruleforge: learn rewrite-rule programs from examples with a reinforcement-learned operator policy",
    )
    parser.add_argument("--verbose", action="store_true", help="Log per-step detail.")
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars.")
    commands = parser.add_subparsers(dest="command", required=True)

    learn = commands.add_parser("learn", help="Learn a program for a problem.")
    learn.add_argument("problem", help="Problem file path or bundled problem name (see 'list').")
    learn.add_argument("--load-policy", help="Start from a Q-table exported by an earlier run.")
    add_learning_arguments(learn)
    add_output_arguments(learn)

    transfer = commands.add_parser("transfer", help="Learn a problem reusing a saved policy.")
    transfer.add_argument("source_policy", help="Q-table CSV exported with --save-policy.")
    transfer.add_argument("problem", help="Problem file path or bundled problem name.")
    add_learning_arguments(transfer)
    add_output_arguments(transfer)

    evaluate = commands.add_parser("eval", help="Report the coverage of a program on a problem.")
    evaluate.add_argument("problem", help="Problem file path or bundled problem name.")
    evaluate.add_argument("program", help="File with one rule per line.")
    evaluate.add_argument("--budget-steps", type=int, default=None,
                          help="Rewrite steps allowed per normalization.")

    bench = commands.add_parser("bench", help="Compare learning with and without policy reuse.")
    bench.add_argument("suite", help=f"Benchmark suite ({', '.join(BENCH_SUITES)}).")
    bench.add_argument("--seeds", type=int, default=5, help="Number of seeded repetitions per cell (default: 5).")
    bench.add_argument("--sample-size", type=int, default=TRANSFER_SAMPLE_SIZE,
                       help=f"Examples sampled from each suite per run (default: {TRANSFER_SAMPLE_SIZE}).")
    bench.add_argument("--out", help="Write the aggregate CSV here instead of stdout.")
    add_learning_arguments(bench)

    commands.add_parser("list", help="List the bundled problems.")
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
def held_out_verdicts(rules: list[Rule], problem: Problem, budget: EvalBudget) -> list[bool]:
    registry = problem.registry()
    return [covers(rules, problem.background, problem.positives, test, budget, registry) for test in problem.tests]


def build_report(problem: Problem, result: LearnResult, cfg: LearnConfig, elapsed: float) -> dict:
    """Summary of a run; coverage is recomputed for the best program rather than read from the trace."""
    best = best_solution(result)
    rules = result.program_rules(best)
    coverage = coverage_counts(rules, problem.positives, problem.negatives, problem.background, cfg.budget,
                               problem.registry())
    complete = coverage.pos == len(problem.positives) and coverage.neg == 0
    report = {
        "problem": problem.name,
        "program": [format_rule(rule) for rule in rules],
        "opt": best.opt,
        "cov_pos": f"{coverage.pos}/{len(problem.positives)}",
        "cov_neg": f"{coverage.neg}/{len(problem.negatives)}",
        "complete": complete,
        "steps": result.steps,
        "solved_at": result.solved_at,
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
        "wall_time_s": round(elapsed, 3),
    }
    if problem.tests:
        verdicts = held_out_verdicts(rules, problem, cfg.budget)
        report["tests_covered"] = [i + 1 for i, ok in enumerate(verdicts) if ok]
    return report


def format_report(report: dict) -> str:
    lines = [f"Problem:  {report['problem']}", "Program:"]
    lines += [f"  {rule}" for rule in report["program"]]
    lines += [
        f"Opt:      {report['opt']:.4f}",
        f"Cov+:     {report['cov_pos']}",
        f"Cov-:     {report['cov_neg']}",
        f"Steps:    {report['steps']}" + (f" (solved at {report['solved_at']})" if report["solved_at"] else ""),
        f"Seed:     {report['seed']}",
    ]
    if "tests_covered" in report:
        lines.append(f"Tests covered: {report['tests_covered']}")
    if not report["complete"]:
        lines.append("Note: incomplete, the best program is not complete and consistent.")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def run_and_report(args, problem: Problem, initial_table: QTable | None) -> int:
    cfg = build_learn_config(args, problem.overrides)
    started = time.perf_counter()
    result = run(problem, cfg, initial_table, progress=not args.quiet)
    report = build_report(problem, result, cfg, time.perf_counter() - started)
    print(format_report(report))
    if args.trace:
        write_trace(result.trace, args.trace)
    if args.save_policy:
        export_policy(result.q_table, args.save_policy)
    if args.out:
        save_report(problem.name, report, args.out)
    return EXIT_OK


def cmd_learn(args) -> int:
    problem = resolve_problem(args.problem)
    initial_table = import_policy(args.load_policy) if args.load_policy else None
    return run_and_report(args, problem, initial_table)


def cmd_transfer(args) -> int:
    initial_table = import_policy(args.source_policy)
    problem = resolve_problem(args.problem)
    logging.info(f"Reusing {len(initial_table)} policy rows from {args.source_policy}")
    return run_and_report(args, problem, initial_table)


def load_program(path: str | Path) -> list[Rule]:
    """Rules from a file, one per line; blank lines and ``#`` comments are skipped."""
    rules = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rules.append(parse_rule(line, lineno))
    if not rules:
        raise ProblemError(f"program file {path} has no rules")
    return rules


def format_verdicts(problem: Problem, report: CoverageReport, tests: list[bool]) -> str:
    lines = []
    for label, examples, covered in (("pos", problem.positives, report.covered_pos),
                                     ("neg", problem.negatives, report.covered_neg)):
        for i, example in enumerate(examples):
            lines.append(f"{label} {i + 1:>3} {'covered' if i in covered else 'not covered':<12} {format_rule(example)}")
    for i, (test, ok) in enumerate(zip(problem.tests, tests)):
        lines.append(f"test {i + 1:>2} {'covered' if ok else 'not covered':<12} {format_rule(test)}")
    lines.append(f"Cov+: {report.pos}/{len(problem.positives)}  Cov-: {report.neg}/{len(problem.negatives)}")
    return "\n".join(lines)


def cmd_eval(args) -> int:
    problem = resolve_problem(args.problem)
    rules = load_program(args.program)
    budget = EvalBudget(args.budget_steps) if args.budget_steps else EvalBudget()
    report = coverage_counts(rules, problem.positives, problem.negatives, problem.background, budget,
                             problem.registry())
    print(format_verdicts(problem, report, held_out_verdicts(rules, problem, budget)))
    complete = report.pos == len(problem.positives) and report.neg == 0
    return EXIT_OK if complete else EXIT_INCOMPLETE


def steps_to_solve(result: LearnResult) -> int:
    return result.solved_at if result.solved_at is not None else result.steps


def wilcoxon_p(scratch: list[int], reuse: list[int]) -> float | None:
    """Two-sided Wilcoxon signed-rank p-value, or None when it is undefined."""
    if len(scratch) < 2:
        return None
    try:
        return float(stats.wilcoxon(scratch, reuse).pvalue)
    except ValueError:
        # All paired differences are zero.
        return None


def cmd_bench(args) -> int:
    kinds = BENCH_SUITES.get(args.suite)
    if kinds is None:
        raise ConfigError(f"unknown benchmark suite '{args.suite}'; choose from {', '.join(BENCH_SUITES)}")
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    if args.seeds == 1:
        logging.warning("One seed per cell is too few for a Wilcoxon p-value; p-values are left empty")
    base_cfg = build_learn_config(args)
    seeds = [base_cfg.seed + i for i in range(args.seeds)]

    scratch: dict[str, list[int]] = {kind: [] for kind in kinds}
    reuse: dict[tuple[str, str], list[int]] = {(s, t): [] for s in kinds for t in kinds}
    total = len(seeds) * (len(kinds) + len(kinds) ** 2)
    with tqdm(total=total, desc=f"bench {args.suite}", disable=args.quiet) as bar:
        for seed in seeds:
            cfg = dataclasses.replace(base_cfg, seed=seed, stop_on_solution=True)
            problems = {
                kind: transfer_problem(kind, named_rng(seed, f"sample-{kind}"), args.sample_size,
                                       shuffle_operators=True)
                for kind in kinds
            }
            tables: dict[str, QTable] = {}
            for kind in kinds:
                result = run(problems[kind], cfg)
                scratch[kind].append(steps_to_solve(result))
                tables[kind] = result.q_table
                bar.update(1)
            for source in kinds:
                for target in kinds:
                    result = run(problems[target], cfg, tables[source])
                    reuse[(source, target)].append(steps_to_solve(result))
                    bar.update(1)

    rows = []
    for source in kinds:
        for target in kinds:
            p = wilcoxon_p(scratch[target], reuse[(source, target)])
            rows.append([source, target, len(seeds), f"{sum(scratch[target]) / len(seeds):.2f}",
                         f"{sum(reuse[(source, target)]) / len(seeds):.2f}", "" if p is None else f"{p:.4g}"])
    header = ["source", "target", "n", "mean_steps_scratch", "mean_steps_reuse", "p_value"]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
        logging.info(f"Benchmark results written to {args.out}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    return EXIT_OK


def cmd_list(args) -> int:
    print("\n".join(problem_names()))
    return EXIT_OK


COMMANDS = {"learn": cmd_learn, "transfer": cmd_transfer, "eval": cmd_eval, "bench": cmd_bench, "list": cmd_list}


def main(argv=None):
    init_environment()
    args = parse_arguments(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        code = COMMANDS[args.command](args)
    except USER_ERRORS as e:
        logging.error(e)
        sys.exit(EXIT_USER_ERROR)
    except KeyboardInterrupt:
        logging.info("\nProcess interrupted by user. Exiting.")
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        logging.exception(f"An unexpected error occurred: {e}")
        sys.exit(EXIT_INTERNAL_ERROR)
    sys.exit(code)


if __name__ == "__main__":
    main()
