import os
import sys
import json
import pytest
from unittest import mock

from ruleforge.cli import (
    EXIT_INCOMPLETE,
    EXIT_OK,
    EXIT_USER_ERROR,
    load_program,
    main,
    parse_arguments,
    steps_to_solve,
    wilcoxon_p,
)
from ruleforge.corpus import LAST_SOLUTION
from ruleforge.errors import ProblemError
from ruleforge.policy import QTable, import_policy
from ruleforge.search import LearnResult


def run_main(argv):
    """Run the CLI and return its exit code."""
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


def write_program(directory, lines):
    path = os.path.join(directory, "program.txt")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return path


def test_parse_arguments_defaults():
    """Test default arguments when no flags are passed."""
    with mock.patch.object(sys, 'argv', ['ruleforge', 'learn', 'last']):
        args = parse_arguments()
        assert args.command == 'learn'
        assert args.problem == 'last'
        assert args.load_policy is None
        assert args.seed is None
        assert args.max_steps is None
        assert args.save_policy is None
        assert args.quiet is False


def test_parse_arguments_flags():
    """Test CLI flag parsing."""
    test_args = [
        'ruleforge', '--quiet',
        'bench', 'transfer',
        '--seeds', '3',
        '--sample-size', '6',
        '--max-steps', '40',
        '--stop-on-solution',
    ]
    with mock.patch.object(sys, 'argv', test_args):
        args = parse_arguments()
        assert args.quiet is True
        assert args.suite == 'transfer'
        assert args.seeds == 3
        assert args.sample_size == 6
        assert args.max_steps == 40
        assert args.stop_on_solution is True


def test_parse_arguments_requires_a_command():
    """Test a bare invocation is rejected by argparse."""
    with pytest.raises(SystemExit):
        parse_arguments([])


def test_list_command(capsys):
    """Test the bundled problem listing."""
    assert run_main(['list']) == EXIT_OK
    names = capsys.readouterr().out.split()
    assert 'last' in names
    assert 'raven-worked' in names


def test_missing_problem_is_a_user_error():
    """Test an unknown problem reference exits with the user error code."""
    assert run_main(['learn', '/no/such/problem.prob']) == EXIT_USER_ERROR


def test_learn_reports_incomplete_runs(output_dir, capsys):
    """Test a one-step run prints a report, writes its files and flags the program as incomplete."""
    policy = output_dir / 'policy.csv'
    trace = output_dir / 'trace.csv'
    report = output_dir / 'report.json'
    code = run_main(['--quiet', 'learn', 'last', '--max-steps', '1', '--seed', '3',
                     '--save-policy', str(policy), '--trace', str(trace), '--out', str(report)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert 'Problem:  last' in out
    assert 'incomplete' in out
    assert len(import_policy(policy)) > 0
    assert trace.exists()
    with open(report) as f:
        data = json.load(f)
    assert data['steps'] == 1
    assert data['seed'] == 3
    assert data['complete'] is False
    assert data['cov_neg'].endswith('/5')


def test_transfer_reuses_a_saved_policy(output_dir):
    """Test a saved policy can seed another run."""
    policy = output_dir / 'policy.csv'
    assert run_main(['--quiet', 'learn', 'last', '--max-steps', '2', '--save-policy', str(policy)]) == EXIT_OK
    assert run_main(['--quiet', 'transfer', str(policy), 'last', '--max-steps', '1']) == EXIT_OK


def test_corrupt_policy_is_a_user_error(output_dir):
    """Test a malformed policy file is rejected."""
    policy = output_dir / 'bad.csv'
    policy.write_text('not,a,policy\n')
    assert run_main(['--quiet', 'learn', 'last', '--load-policy', str(policy)]) == EXIT_USER_ERROR
    assert run_main(['--quiet', 'transfer', str(policy), 'last']) == EXIT_USER_ERROR


def test_eval_complete_program(output_dir, capsys):
    """Test eval exits 0 for a complete and consistent program."""
    program = write_program(output_dir, ['# recursive last', *LAST_SOLUTION])
    assert run_main(['eval', 'last', program]) == EXIT_OK
    assert 'Cov+: 8/8  Cov-: 0/5' in capsys.readouterr().out


def test_eval_incomplete_program(output_dir, capsys):
    """Test eval exits 1 when some positives are missed."""
    program = write_program(output_dir, [LAST_SOLUTION[0]])
    assert run_main(['eval', 'last', program, '--budget-steps', '50']) == EXIT_INCOMPLETE
    assert 'not covered' in capsys.readouterr().out


def test_eval_empty_program(output_dir):
    """Test an empty program file is a user error."""
    program = write_program(output_dir, ['# nothing here'])
    assert run_main(['eval', 'last', program]) == EXIT_USER_ERROR
    with pytest.raises(ProblemError):
        load_program(program)


def test_eval_unparsable_program(output_dir):
    """Test a syntax error in the program file is a user error."""
    program = write_program(output_dir, ['last([X] -> X'])
    assert run_main(['eval', 'last', program]) == EXIT_USER_ERROR


@pytest.mark.parametrize("flags", [['nope'], ['transfer', '--seeds', '0']])
def test_bench_rejects_bad_arguments(flags):
    """Test unknown suites and seed counts are user errors."""
    assert run_main(['--quiet', 'bench', *flags]) == EXIT_USER_ERROR


def test_wilcoxon_p():
    """Test the p-value helper."""
    assert wilcoxon_p([5], [3]) is None
    p = wilcoxon_p([10, 12, 14, 16, 18], [1, 2, 3, 4, 5])
    assert 0.0 < p <= 0.1


def test_steps_to_solve():
    """Test runs that never solve count their full length."""
    assert steps_to_solve(LearnResult([], [], QTable(), 40, [], solved_at=12)) == 12
    assert steps_to_solve(LearnResult([], [], QTable(), 40, [])) == 40
