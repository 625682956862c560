"""
Run configuration for ruleforge.

Holds the default learning parameters, the seed fallback chain
(``--seed`` → ``RULEFORGE_SEED`` → default) and the argparse arguments
shared by the ``learn``, ``transfer`` and ``bench`` commands.
"""

import os
import argparse
import logging

from dotenv import find_dotenv, load_dotenv

from .errors import ConfigError

# ---------------------------------------------------------------------------
# Learning defaults
# ---------------------------------------------------------------------------
DEFAULT_MAX_STEPS = 2000
DEFAULT_EPSILON = 0.01
DEFAULT_WINDOW = 20
DEFAULT_PAIR_CAP = 25
DEFAULT_SEED = 0

# Q-learning
DEFAULT_ALPHA = 0.5
DEFAULT_GAMMA = 0.5
DEFAULT_Q0 = 1.0
DEFAULT_RETRAIN_PERIOD = 10

# Evaluation budget and scoring weights
DEFAULT_BUDGET_STEPS = 100
DEFAULT_BUDGET_DEPTH = 200
DEFAULT_BETA1 = 1.0
DEFAULT_BETA2 = 1.0

SEED_ENV_VAR = "RULEFORGE_SEED"

# Problem-file ``config key = value`` lines and the type of each value
PROBLEM_OVERRIDES: dict[str, type] = {
    "max_steps": int,
    "epsilon": float,
    "window_n": int,
    "pair_cap": int,
    "seed": int,
    "alpha": float,
    "gamma": float,
    "q0": float,
    "retrain_period": int,
    "budget_steps": int,
    "budget_depth": int,
    "beta1": float,
    "beta2": float,
    "stop_on_solution": bool,
    "skip_applied": bool,
    "op_interactions": bool,
}


def init_environment() -> None:
    """Load a ``.env`` file from the working directory or its parents."""
    load_dotenv(find_dotenv(usecwd=True))


def resolve_seed(seed_arg: int | None = None) -> int:
    """Seed from the argument, then ``RULEFORGE_SEED``, then ``DEFAULT_SEED``."""
    if seed_arg is not None:
        return seed_arg
    env_value = os.environ.get(SEED_ENV_VAR)
    if env_value:
        try:
            return int(env_value.strip())
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got '{env_value}'") from None
    return DEFAULT_SEED


def parse_override(key: str, text: str) -> int | float | bool:
    """Convert a problem-file ``config`` value to the type its key expects."""
    kind = PROBLEM_OVERRIDES.get(key)
    if kind is None:
        raise ConfigError(f"unknown config key '{key}'")
    text = text.strip()
    if kind is bool:
        if text.lower() not in ("true", "false"):
            raise ConfigError(f"config {key} expects true or false, got '{text}'")
        return text.lower() == "true"
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"config {key} expects {kind.__name__}, got '{text}'") from None


def add_learning_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the flags shared by every command that runs the learner."""
    parser.add_argument("--seed", type=int, default=None,
                        help=f"Random seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED}).")
    parser.add_argument("--max-steps", type=int, default=None,
                        help=f"Maximum learning steps (default: {DEFAULT_MAX_STEPS}).")
    parser.add_argument("--epsilon", type=float, default=None,
                        help=f"Stop when the optimality stdev of recent programs is below this (default: {DEFAULT_EPSILON}).")
    parser.add_argument("--window", type=int, default=None,
                        help=f"Number of recent programs in the stop window (default: {DEFAULT_WINDOW}).")
    parser.add_argument("--alpha", type=float, default=None,
                        help=f"Q-learning rate (default: {DEFAULT_ALPHA}).")
    parser.add_argument("--gamma", type=float, default=None,
                        help=f"Q-learning discount (default: {DEFAULT_GAMMA}).")
    parser.add_argument("--q0", type=float, default=None,
                        help=f"Initial q value of new table rows (default: {DEFAULT_Q0}).")
    parser.add_argument("--retrain-period", type=int, default=None,
                        help=f"Steps between Q-model refits (default: {DEFAULT_RETRAIN_PERIOD}).")
    parser.add_argument("--budget-steps", type=int, default=None,
                        help=f"Rewrite steps allowed per normalization (default: {DEFAULT_BUDGET_STEPS}).")
    parser.add_argument("--beta1", type=float, default=None,
                        help=f"Weight of program length in optimality (default: {DEFAULT_BETA1}).")
    parser.add_argument("--beta2", type=float, default=None,
                        help=f"Weight of unexplained evidence in optimality (default: {DEFAULT_BETA2}).")
    parser.add_argument("--pair-cap", type=int, default=None,
                        help=f"Top programs considered for pairwise unions, 0 for all (default: {DEFAULT_PAIR_CAP}).")
    parser.add_argument("--stop-on-solution", action="store_true", default=None,
                        help="Stop as soon as the best program is complete and consistent.")
    parser.add_argument("--skip-applied", action="store_true", default=None,
                        help="Leave (operator, rule) pairs that were already applied out of the greedy choice.")
    parser.add_argument("--op-interactions", action="store_true", default=None,
                        help="Fit separate rule weights per operator in the Q-model.")


def build_learn_config(args: argparse.Namespace | None = None, overrides: dict | None = None):
    """Layer CLI flags over problem-file overrides over defaults into a ``LearnConfig``.

    Raises ``ConfigError`` on invalid values.
    """
    from .policy import RLConfig
    from .rewriting import EvalBudget
    from .scoring import ScoringConfig
    from .search import LearnConfig

    values: dict = dict(overrides or {})
    flag_names = {
        "seed": "seed", "max_steps": "max_steps", "epsilon": "epsilon", "window": "window_n",
        "alpha": "alpha", "gamma": "gamma", "q0": "q0", "retrain_period": "retrain_period",
        "budget_steps": "budget_steps", "beta1": "beta1", "beta2": "beta2", "pair_cap": "pair_cap",
        "stop_on_solution": "stop_on_solution", "skip_applied": "skip_applied", "op_interactions": "op_interactions",
    }
    for flag, key in flag_names.items():
        value = getattr(args, flag, None) if args is not None else None
        if value is not None:
            values[key] = value

    seed = values.get("seed")
    try:
        cfg = LearnConfig(
            max_steps=values.get("max_steps", DEFAULT_MAX_STEPS),
            epsilon=values.get("epsilon", DEFAULT_EPSILON),
            window_n=values.get("window_n", DEFAULT_WINDOW),
            budget=EvalBudget(values.get("budget_steps", DEFAULT_BUDGET_STEPS),
                              values.get("budget_depth", DEFAULT_BUDGET_DEPTH)),
            scoring=ScoringConfig(values.get("beta1", DEFAULT_BETA1), values.get("beta2", DEFAULT_BETA2)),
            rl=RLConfig(values.get("alpha", DEFAULT_ALPHA), values.get("gamma", DEFAULT_GAMMA),
                        values.get("q0", DEFAULT_Q0), values.get("retrain_period", DEFAULT_RETRAIN_PERIOD),
                        bool(values.get("op_interactions", False))),
            seed=resolve_seed(seed),
            pair_cap=values.get("pair_cap", DEFAULT_PAIR_CAP),
            stop_on_solution=bool(values.get("stop_on_solution", False)),
            skip_applied=bool(values.get("skip_applied", False)),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    logging.debug(f"Resolved learning configuration: {cfg}")
    return cfg
