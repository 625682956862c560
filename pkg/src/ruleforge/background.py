"""
Background knowledge: a registry of named, pure functions over terms.

Evaluators take a tuple of argument terms and return a non-empty list of
result terms. Most are single-valued; ``nSust`` returns one result per
candidate replacement. A result may itself contain function applications
(``oneSust`` answers with ``map(b=>d, L)``), which normalization then
finishes. Evaluators raise ``DomainError`` when a redex is stuck.
"""

import logging
import string
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ArityMismatch, DomainError, UnknownFunction
from .terms import (
    FALSE, NIL, TRUE, Apply, Atom, BKRef, Cons, Integer, Mapping, Term, Tuple,
    from_list, is_ground, split_list, to_list,
)
from .syntax import format_term

Evaluator = Callable[..., list[Term]]

ALPHABET = string.ascii_lowercase

# ---------------------------------------------------------------------------
# Raven feature coding
# ---------------------------------------------------------------------------
RAVEN_ATTRIBUTES: tuple[str, ...] = ("shape", "size", "quantity", "position", "type")
RAVEN_RELATIONS: tuple[str, ...] = ("identity", "distrib3val", "progressive", "addition", "distrib2val")
SIZE_SCALE: tuple[str, ...] = ("tiny", "small", "medium", "big", "huge")


@dataclass(frozen=True, slots=True)
class BKFunction:
    """A registered background function.

    ``contextual`` functions receive ``(item, whole_list)`` when applied by ``map``.
    """
    name: str
    arity: int
    evaluator: Evaluator
    multi_valued: bool = False
    contextual: bool = False


class BKRegistry:
    """Name → function table; immutable once a problem is loaded."""

    def __init__(self, functions: Sequence[BKFunction] = ()):
        self._functions: dict[str, BKFunction] = {}
        for fn in functions:
            self._functions[fn.name] = fn

    def __contains__(self, name: str) -> bool:
        return name in self._functions

    def __iter__(self):
        return iter(self._functions.values())

    def names(self) -> frozenset[str]:
        return frozenset(self._functions)

    def get(self, name: str) -> BKFunction:
        try:
            return self._functions[name]
        except KeyError:
            raise UnknownFunction(f"unknown background function '{name}'") from None

    def with_functions(self, *functions: BKFunction) -> "BKRegistry":
        return BKRegistry(list(self._functions.values()) + list(functions))

    def eval_bk(self, name: str, args: Sequence[Term]) -> list[Term]:
        """Evaluate ``name(args)``; raises UnknownFunction, ArityMismatch or DomainError."""
        fn = self.get(name)
        if len(args) != fn.arity:
            raise ArityMismatch(f"'{name}' takes {fn.arity} argument(s), got {len(args)}")
        results = fn.evaluator(*args)
        if not results:
            raise DomainError(f"'{name}' produced no result")
        return results


# ---------------------------------------------------------------------------
# Argument coercion
# ---------------------------------------------------------------------------
def _list_arg(term: Term, name: str) -> list[Term]:
    items = to_list(term)
    if items is None or not is_ground(term):
        raise DomainError(f"{name}: expected a ground list, got {format_term(term)}")
    return items


def _int_arg(term: Term, name: str) -> int:
    if not isinstance(term, Integer):
        raise DomainError(f"{name}: expected an integer, got {format_term(term)}")
    return term.value


def _bool(value: bool) -> Term:
    return TRUE if value else FALSE


# ---------------------------------------------------------------------------
# List structure
# ---------------------------------------------------------------------------
def _head(lst):
    items = _list_arg(lst, "head")
    if not items:
        raise DomainError("head of empty list")
    return [items[0]]


def _tail(lst):
    items = _list_arg(lst, "tail")
    if not items:
        raise DomainError("tail of empty list")
    return [from_list(items[1:])]


def _last(lst):
    items = _list_arg(lst, "last")
    if not items:
        raise DomainError("last of empty list")
    return [items[-1]]


def _init(lst):
    items = _list_arg(lst, "init")
    if not items:
        raise DomainError("init of empty list")
    return [from_list(items[:-1])]


def _length(lst):
    return [Integer(len(_list_arg(lst, "length")))]


def _append(left, right):
    return [from_list(_list_arg(left, "append") + _list_arg(right, "append"))]


def _reverse(lst):
    return [from_list(reversed(_list_arg(lst, "reverse")))]


def _sort(lst):
    return [from_list(sorted(_list_arg(lst, "sort"), key=format_term))]


def _identity(term):
    return [term]


# ---------------------------------------------------------------------------
# Arithmetic and comparison (guards)
# ---------------------------------------------------------------------------
def _mod(a, b):
    divisor = _int_arg(b, "mod")
    if divisor == 0:
        raise DomainError("mod by zero")
    return [Integer(_int_arg(a, "mod") % divisor)]


def _eq(a, b):
    if not (is_ground(a) and is_ground(b)):
        raise DomainError("eq on non-ground terms")
    return [_bool(a == b)]


def _neq(a, b):
    return [_bool(_eq(a, b)[0] == FALSE)]


def _gt(a, b):
    return [_bool(_int_arg(a, "gt") > _int_arg(b, "gt"))]


def _lt(a, b):
    return [_bool(_int_arg(a, "lt") < _int_arg(b, "lt"))]


def period_guard(lst: Term, interval: int) -> bool:
    """True iff the position after ``lst`` is a multiple of ``interval``."""
    return (len(_list_arg(lst, "position")) + 1) % interval == 0


def _position(lst, interval):
    return [_bool(period_guard(lst, _int_arg(interval, "position")))]


def _not_position(lst, interval):
    return [_bool(not period_guard(lst, _int_arg(interval, "not_position")))]


# ---------------------------------------------------------------------------
# Letters
# ---------------------------------------------------------------------------
def alphabet_step(kind: str, c: Term, circular: bool = False) -> Term:
    """Successor (``next``) or predecessor (``previous``) of a letter atom."""
    if not isinstance(c, Atom) or c.name not in ALPHABET:
        raise DomainError(f"{kind}: not a letter: {format_term(c)}")
    index = ALPHABET.index(c.name) + (1 if kind == "next" else -1)
    if not 0 <= index < len(ALPHABET):
        if not circular:
            raise DomainError(f"{kind}({c.name}) crosses the alphabet boundary")
        index %= len(ALPHABET)
    return Atom(ALPHABET[index])


def _letter_step(kind: str, circular: bool) -> Evaluator:
    def evaluate(term):
        # On a list the step applies to its last letter.
        if isinstance(term, Cons):
            term = _last(term)[0]
        return [alphabet_step(kind, term, circular)]
    return evaluate


# ---------------------------------------------------------------------------
# List transformations
# ---------------------------------------------------------------------------
def difference_mappings(kind: str, l1: list[Term], l2: list[Term]) -> list[Mapping] | None:
    """Replacement mappings explaining ``l2`` from ``l1``; None when the lists are equal."""
    index = 0
    while index < len(l1) and index < len(l2) and l1[index] == l2[index]:
        index += 1
    if index == len(l1) and index == len(l2):
        return None
    if index >= len(l1) or index >= len(l2):
        raise DomainError(f"{kind}: one list is a prefix of the other")
    if kind == "oneSust":
        return [Mapping(l1[index], l2[index])]
    if index + 2 > len(l2):
        raise DomainError("nSust: no multi-symbol replacement available")
    return [Mapping(l1[index], from_list(l2[index:end])) for end in range(index + 2, len(l2) + 1)]


def apply_mapping(mapping: Mapping, items: list[Term]) -> list[Term]:
    """Replace every occurrence of the source; a list target is spliced in."""
    spliced = to_list(mapping.target)
    result: list[Term] = []
    for item in items:
        if item != mapping.source:
            result.append(item)
        elif spliced is not None:
            result.extend(spliced)
        else:
            result.append(mapping.target)
    return result


def list_diffs(kind: str, l1: Term, l2: Term) -> list[Term]:
    """Fully applied results of ``oneSust``/``nSust``."""
    items = _list_arg(l1, kind)
    mappings = difference_mappings(kind, items, _list_arg(l2, kind))
    if mappings is None:
        return [l1]
    return [from_list(apply_mapping(m, items)) for m in mappings]


def _sust(kind: str) -> Evaluator:
    def evaluate(l1, l2):
        mappings = difference_mappings(kind, _list_arg(l1, kind), _list_arg(l2, kind))
        if mappings is None:
            return [l1]
        return [Apply("map", (m, l1)) for m in mappings]
    return evaluate


def residue(l1: list[Term], l2: list[Term]) -> list[Term]:
    """``l2`` with the first occurrence of each element of ``l1`` deleted."""
    rest = list(l2)
    for item in l1:
        if item in rest:
            rest.remove(item)
    return rest


def affix(kind: str, l1: Term, l2: Term) -> Term:
    """``addPrefix`` → l1 ++ diff, ``addSuffix`` → diff ++ l1, with diff the residue of l1 in l2."""
    items = _list_arg(l1, kind)
    diff = residue(items, _list_arg(l2, kind))
    return from_list(items + diff if kind == "addPrefix" else diff + items)


def _affix(kind: str) -> Evaluator:
    def evaluate(l1, l2):
        items = _list_arg(l1, kind)
        diff = from_list(residue(items, _list_arg(l2, kind)))
        args = (l1, diff) if kind == "addPrefix" else (diff, l1)
        return [Apply("append", args)]
    return evaluate


# ---------------------------------------------------------------------------
# Odd-one-out
# ---------------------------------------------------------------------------
def ooo_score(kind: str, item: Term, context: Term) -> int:
    """``hamming``: summed positional mismatches against every item; ``diffObj``: distinct symbols."""
    symbols = _list_arg(item, kind)
    if kind == "diffObj":
        return len(set(symbols))
    total = 0
    for other in _list_arg(context, kind):
        other_symbols = _list_arg(other, kind)
        width = max(len(symbols), len(other_symbols))
        for i in range(width):
            # Missing cells never match.
            if i >= len(symbols) or i >= len(other_symbols) or symbols[i] != other_symbols[i]:
                total += 1
    return total


def _ooo(kind: str) -> Evaluator:
    def evaluate(item, context):
        return [Integer(ooo_score(kind, item, context))]
    return evaluate


def distinct(scores: list[int]) -> int:
    """1-based index of the unique score occurring exactly once."""
    if not scores:
        raise DomainError("distinct of an empty list")
    singles = [value for value in set(scores) if scores.count(value) == 1]
    if len(scores) == 1:
        return 1
    if len(singles) != 1:
        raise DomainError("no unique outlier")
    return scores.index(singles[0]) + 1


def _distinct(lst):
    return [Integer(distinct([_int_arg(x, "distinct") for x in _list_arg(lst, "distinct")]))]


# ---------------------------------------------------------------------------
# map
# ---------------------------------------------------------------------------
def _map(registry_ref: list["BKRegistry"]) -> Evaluator:
    def evaluate(fn, lst):
        items = _list_arg(lst, "map")
        if isinstance(fn, Mapping):
            return [from_list(apply_mapping(fn, items))]
        if isinstance(fn, BKRef):
            registry = registry_ref[0]
            contextual = fn.name in registry and registry.get(fn.name).contextual
            args = (lambda x: (x, lst)) if contextual else (lambda x: (x,))
            return [from_list(Apply(fn.name, args(x)) for x in items)]
        raise DomainError(f"map: cannot apply {format_term(fn)}")
    return evaluate


# ---------------------------------------------------------------------------
# Raven relations
# ---------------------------------------------------------------------------
def _numeric(value: Term) -> int:
    if isinstance(value, Integer):
        return value.value
    if isinstance(value, Atom) and value.name in SIZE_SCALE:
        return SIZE_SCALE.index(value.name)
    raise DomainError(f"progressive: {format_term(value)} is not ordered")


def _from_numeric(number: int, like: Term) -> Term:
    if isinstance(like, Integer):
        return Integer(number)
    if not 0 <= number < len(SIZE_SCALE):
        raise DomainError("progressive: value leaves the size scale")
    return Atom(SIZE_SCALE[number])


def _as_set(value: Term) -> frozenset[Term]:
    items = to_list(value)
    return frozenset(items) if items is not None else frozenset([value])


def _from_set(values: frozenset[Term]) -> Term:
    ordered = sorted(values, key=format_term)
    if len(ordered) == 1:
        return ordered[0]
    return from_list(ordered)


def raven_relation(name: str, rows: list[list[Term]]) -> Term:
    """Predict the value missing from the last (incomplete) row of an attribute grid."""
    if len(rows) < 2:
        raise DomainError("a relation needs at least one complete row")
    complete, partial = rows[:-1], rows[-1]
    if any(len(row) != 3 for row in complete) or not 1 <= len(partial) <= 2:
        raise DomainError("malformed attribute grid")
    if name == "identity":
        if any(len(set(row)) != 1 for row in complete):
            raise DomainError("identity: a row is not constant")
        return partial[0]
    if len(partial) != 2:
        raise DomainError(f"{name}: the incomplete row needs two cells")
    match name:
        case "distrib3val":
            values = set(complete[0])
            if len(values) != 3 or any(set(row) != values for row in complete):
                raise DomainError("distrib3val: rows do not share three distinct values")
            missing = values - set(partial)
            if len(partial) != len(set(partial)) or len(missing) != 1:
                raise DomainError("distrib3val: incomplete row does not fit")
            return missing.pop()
        case "progressive":
            steps = set()
            for row in complete:
                a, b, c = (_numeric(v) for v in row)
                if b - a != c - b:
                    raise DomainError("progressive: row is not an arithmetic progression")
                steps.add(b - a)
            a, b = (_numeric(v) for v in partial)
            if len(steps) != 1 or b - a not in steps:
                raise DomainError("progressive: rows disagree on the step")
            return _from_numeric(b + (b - a), partial[1])
        case "addition":
            for row in complete:
                if _as_set(row[2]) != _as_set(row[0]) | _as_set(row[1]):
                    raise DomainError("addition: third cell is not the union")
            return _from_set(_as_set(partial[0]) | _as_set(partial[1]))
        case "distrib2val":
            for row in complete:
                if _as_set(row[2]) != _as_set(row[0]) ^ _as_set(row[1]):
                    raise DomainError("distrib2val: third cell is not the exclusive union")
            return _from_set(_as_set(partial[0]) ^ _as_set(partial[1]))
    raise DomainError(f"unknown relation '{name}'")


def attribute_grid(matrix: Term, attribute: Term) -> list[list[Term]]:
    """Values of ``attribute`` for the first figure of every cell of a matrix."""
    if not isinstance(attribute, Atom) or attribute.name not in RAVEN_ATTRIBUTES:
        raise DomainError(f"unknown attribute {format_term(attribute)}")
    k = RAVEN_ATTRIBUTES.index(attribute.name)
    grid = []
    for row in _list_arg(matrix, "raven"):
        values = []
        for cell in _list_arg(row, "raven"):
            figures = _list_arg(cell, "raven")
            if not figures or not isinstance(figures[0], Tuple) or len(figures[0].elements) != len(RAVEN_ATTRIBUTES):
                raise DomainError("malformed raven cell")
            values.append(figures[0].elements[k])
        grid.append(values)
    return grid


def _relation(name: str) -> Evaluator:
    def evaluate(matrix, attribute):
        return [raven_relation(name, attribute_grid(matrix, attribute))]
    return evaluate


# ---------------------------------------------------------------------------
# Default registry
# ---------------------------------------------------------------------------
def default_registry(circular_alphabet: bool = False) -> BKRegistry:
    """The built-in background functions used by every bundled problem family."""
    registry_ref: list[BKRegistry] = []
    functions = [
        BKFunction("head", 1, _head),
        BKFunction("tail", 1, _tail),
        BKFunction("last", 1, _last),
        BKFunction("init", 1, _init),
        BKFunction("length", 1, _length),
        BKFunction("append", 2, _append),
        BKFunction("reverse", 1, _reverse),
        BKFunction("sort", 1, _sort),
        BKFunction("id", 1, _identity),
        BKFunction("mod", 2, _mod),
        BKFunction("eq", 2, _eq),
        BKFunction("neq", 2, _neq),
        BKFunction("gt", 2, _gt),
        BKFunction("lt", 2, _lt),
        BKFunction("position", 2, _position),
        BKFunction("not_position", 2, _not_position),
        BKFunction("next", 1, _letter_step("next", circular_alphabet)),
        BKFunction("previous", 1, _letter_step("previous", circular_alphabet)),
        BKFunction("oneSust", 2, _sust("oneSust")),
        BKFunction("nSust", 2, _sust("nSust"), multi_valued=True),
        BKFunction("addPrefix", 2, _affix("addPrefix")),
        BKFunction("addSuffix", 2, _affix("addSuffix")),
        BKFunction("hamming", 2, _ooo("hamming"), contextual=True),
        BKFunction("diffObj", 2, _ooo("diffObj"), contextual=True),
        BKFunction("distinct", 1, _distinct),
        BKFunction("map", 2, _map(registry_ref)),
    ]
    functions += [BKFunction(name, 2, _relation(name)) for name in RAVEN_RELATIONS]
    registry = BKRegistry(functions)
    registry_ref.append(registry)
    logging.debug(f"Background registry with {len(functions)} functions (circular alphabet: {circular_alphabet})")
    return registry


def eval_bk(name: str, args: Sequence[Term], registry: BKRegistry | None = None) -> list[Term]:
    return (registry or default_registry()).eval_bk(name, args)
