"""
Q-table, linear Q-model, greedy action selection and policy files.

Rows are keyed by abstractions: (state key, operator id, rule key). The
model is an ordinary least-squares fit of q on
[1, state features, one-hot operator id, rule features] and is what the
learner consults; the table only stores observed values.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .config import DEFAULT_ALPHA, DEFAULT_GAMMA, DEFAULT_Q0, DEFAULT_RETRAIN_PERIOD
from .errors import EmptyPopulation, PolicyFileError, ProblemError
from .features import RuleFeatures, StateFeatures, round_key

StateKey = tuple[float, ...]
RuleKey = tuple[float, ...]
QKey = tuple[StateKey, int, RuleKey]

STATE_COLUMNS = ("phi1", "phi2", "phi3")
RULE_COLUMNS = tuple(f"vphi{i}" for i in range(1, 9))
POLICY_HEADER = (*STATE_COLUMNS, "op_id", *RULE_COLUMNS, "q")

RIDGE_LAMBDA = 1e-6


@dataclass(frozen=True, slots=True)
class RLConfig:
    alpha: float = DEFAULT_ALPHA
    gamma: float = DEFAULT_GAMMA
    q0: float = DEFAULT_Q0
    retrain_period: int = DEFAULT_RETRAIN_PERIOD
    op_interactions: bool = False

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.gamma <= 1.0):
            raise ValueError("alpha and gamma must lie in [0, 1]")
        if self.retrain_period < 1:
            raise ValueError("retrain_period must be at least 1")


class QTable:
    """Insertion-ordered map from abstraction keys to q; values kept at 9 significant digits."""

    def __init__(self, rows: Iterable[tuple[QKey, float]] = ()):
        self._rows: dict[QKey, float] = {}
        for key, q in rows:
            self.set(key, q)

    def __len__(self) -> int:
        return len(self._rows)

    def __contains__(self, key: QKey) -> bool:
        return key in self._rows

    def __iter__(self) -> Iterator[tuple[QKey, float]]:
        return iter(self._rows.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QTable) and list(self) == list(other)

    def get(self, key: QKey, default: float | None = None) -> float | None:
        return self._rows.get(key, default)

    def set(self, key: QKey, q: float) -> None:
        self._rows[key] = round_key(q)

    def ensure(self, key: QKey, q0: float) -> bool:
        """Add ``key`` at ``q0`` unless present; True when a row was added."""
        if key in self._rows:
            return False
        self.set(key, q0)
        return True

    def op_ids(self) -> list[int]:
        return sorted({op_id for (_, op_id, _) in self._rows})


def q_key(state: StateFeatures, op_id: int, rule: RuleFeatures) -> QKey:
    return (state.key(), op_id, rule.key())


def init_q(state: StateFeatures, rules: Iterable[RuleFeatures], op_ids: Sequence[int], q0: float = 1.0) -> QTable:
    """One row per (state, operator, distinct rule abstraction) at ``q0``."""
    if not op_ids:
        raise ProblemError("cannot initialise a Q-table without operators")
    table = QTable()
    abstractions = list(dict.fromkeys(rule.key() for rule in rules))
    for op_id in op_ids:
        for rule_key in abstractions:
            table.ensure((state.key(), op_id, rule_key), q0)
    return table


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class QModel:
    """Linear q over [1, state, one-hot op, rule], plus one-hot op ⊗ rule when ``interactions`` is set."""
    op_ids: tuple[int, ...]
    constant: float
    weights: np.ndarray | None = field(default=None)
    interactions: bool = False

    @property
    def is_constant(self) -> bool:
        return self.weights is None

    def _one_hot(self, op_id: int) -> np.ndarray:
        # First operator is the reference level; unseen ids encode as all zeros.
        row = np.zeros(max(len(self.op_ids) - 1, 0))
        if op_id in self.op_ids[1:]:
            row[self.op_ids.index(op_id) - 1] = 1.0
        return row

    def encode(self, state: Sequence[float], op_id: int, rule: Sequence[float]) -> np.ndarray:
        one_hot, rule = self._one_hot(op_id), np.asarray(rule, float)
        parts = [[1.0], np.asarray(state, float), one_hot, rule]
        if self.interactions:
            parts.append(np.kron(one_hot, rule))
        return np.concatenate(parts)

    def predict(self, state: Sequence[float], op_id: int, rule: Sequence[float]) -> float:
        if self.weights is None:
            return self.constant
        return float(self.encode(state, op_id, rule) @ self.weights)

    def predict_grid(self, state: Sequence[float], op_ids: Sequence[int], rules: np.ndarray) -> np.ndarray:
        """Predictions for every (operator, rule) pair; rows follow ``op_ids``."""
        rules = np.asarray(rules, float).reshape(-1, len(RULE_COLUMNS))
        if self.weights is None:
            return np.full((len(op_ids), len(rules)), self.constant)
        w = self.weights
        n_ops = max(len(self.op_ids) - 1, 0)
        n_rule = len(RULE_COLUMNS)
        base = w[0] + float(np.asarray(state, float) @ w[1:4])
        one_hots = np.array([self._one_hot(op_id) for op_id in op_ids]).reshape(len(op_ids), n_ops)
        op_part = one_hots @ w[4:4 + n_ops]
        rule_weights = np.tile(w[4 + n_ops:4 + n_ops + n_rule], (len(op_ids), 1))
        if self.interactions:
            rule_weights += one_hots @ w[4 + n_ops + n_rule:].reshape(n_ops, n_rule)
        return op_part[:, None] + rule_weights @ rules.T + base


def train_model(table: QTable, interactions: bool = False) -> QModel:
    """Least-squares fit of q; ridge when the design is rank deficient, constant when q is."""
    rows = list(table)
    if not rows:
        raise EmptyPopulation("cannot train a model on an empty Q-table")
    op_ids = tuple(table.op_ids())
    y = np.array([q for _, q in rows])
    if np.ptp(y) == 0.0:
        return QModel(op_ids, float(y[0]), interactions=interactions)
    encoder = QModel(op_ids, 0.0, interactions=interactions)
    X = np.array([encoder.encode(state, op_id, rule) for (state, op_id, rule), _ in rows])
    weights, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        augmented_X = np.vstack([X, math.sqrt(RIDGE_LAMBDA) * np.eye(X.shape[1])])
        augmented_y = np.concatenate([y, np.zeros(X.shape[1])])
        weights = np.linalg.lstsq(augmented_X, augmented_y, rcond=None)[0]
    if not np.all(np.isfinite(weights)):
        logging.warning("Q-model fit was not finite; using the mean q")
        return QModel(op_ids, float(y.mean()), interactions=interactions)
    logging.debug(f"Trained Q-model on {len(rows)} rows")
    return QModel(op_ids, float(y.mean()), weights, interactions)


# ---------------------------------------------------------------------------
# Acting and learning
# ---------------------------------------------------------------------------
def argmax_with_ties(scores: np.ndarray, rng: np.random.Generator) -> int:
    """Flat index of a maximal score; near-equal maxima are chosen uniformly."""
    flat = np.asarray(scores, float).ravel()
    best = np.max(flat)
    if not np.isfinite(best):
        raise ValueError("no selectable candidate")
    tolerance = 1e-9 * max(1.0, abs(best))
    ties = np.flatnonzero(flat >= best - tolerance)
    return int(ties[0] if len(ties) == 1 else rng.choice(ties))


def select_action(model: QModel, state: StateFeatures, candidates: Sequence[tuple[int, RuleFeatures]],
                  rng: np.random.Generator) -> int:
    """Index of the candidate (operator id, rule abstraction) with the highest predicted q."""
    if not candidates:
        raise ValueError("select_action needs at least one candidate")
    scores = np.array([model.predict(state.vector(), op_id, rule.vector()) for op_id, rule in candidates])
    return argmax_with_ties(scores, rng)


def q_update(old: float, reward: float, max_next: float, cfg: RLConfig) -> float:
    return cfg.alpha * (reward + cfg.gamma * max_next) + (1.0 - cfg.alpha) * old


def apply_update(table: QTable, key: QKey, reward: float, max_next: float, cfg: RLConfig) -> float:
    old = table.get(key, cfg.q0)
    new = q_update(old, reward, max_next, cfg)
    table.set(key, new)
    return new


def update_q(table: QTable, model: QModel, state: StateFeatures, action: tuple[int, RuleFeatures], reward: float,
             next_state: StateFeatures, next_candidates: Sequence[tuple[int, RuleFeatures]], cfg: RLConfig) -> float:
    """Blend the observed reward and the best predicted next value into the row for ``action``."""
    max_next = max((model.predict(next_state.vector(), op_id, rule.vector()) for op_id, rule in next_candidates),
                   default=0.0)
    op_id, rule = action
    return apply_update(table, q_key(state, op_id, rule), reward, max_next, cfg)


# ---------------------------------------------------------------------------
# Policy files
# ---------------------------------------------------------------------------
def _fmt(value: float) -> str:
    return f"{value:.9g}"


def export_policy(table: QTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(POLICY_HEADER)
        for (state, op_id, rule), q in table:
            writer.writerow([*(_fmt(x) for x in state), op_id, *(_fmt(x) for x in rule), _fmt(q)])
    logging.info(f"Policy with {len(table)} rows written to {path}")


def import_policy(path: str | Path) -> QTable:
    """Read a policy CSV; the caller retrains a model before selecting actions."""
    table = QTable()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != POLICY_HEADER:
            raise PolicyFileError(f"expected header {','.join(POLICY_HEADER)}", row=1)
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(POLICY_HEADER):
                raise PolicyFileError(f"expected {len(POLICY_HEADER)} fields, found {len(row)}", row=row_number)
            values = []
            for column, text in zip(POLICY_HEADER, row):
                try:
                    values.append(int(text) if column == "op_id" else float(text))
                except ValueError:
                    raise PolicyFileError(f"cannot parse {text!r}", row=row_number, column=column) from None
                if column != "op_id" and not math.isfinite(values[-1]):
                    raise PolicyFileError("value is not finite", row=row_number, column=column)
            key = (tuple(round_key(x) for x in values[0:3]), values[3],
                   tuple(round_key(x) for x in values[4:12]))
            if key in table:
                raise PolicyFileError("duplicate abstraction key", row=row_number)
            table.set(key, values[12])
    if not len(table):
        raise PolicyFileError(f"policy file {path} has no rows")
    logging.info(f"Imported policy with {len(table)} rows from {path}")
    return table
