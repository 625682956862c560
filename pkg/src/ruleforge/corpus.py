"""
Learning problems: the problem-file format, bundled problems and the
generators that turn puzzles into evidence.

Problem files are line oriented::

    # comment
    name: last
    target: last
    pos: last([a,b,c]) -> c
    neg: last([c]) -> b
    test: last([x,y]) -> y
    bk: double(X) -> append(X, X)
    op 1 = replace(Rt1, last(L1.1))
    op 5 = replace(L1 | Rt1 | Rt1.1, V_List)     # ids 5, 6, 7
    op 9 = one_step_rew
    config max_steps = 500
    decompose: series

Bundled problems are addressed by name: ``last``, ``ooo``, ``thurstone-<n>``,
``raven-worked``, ``raven-<id>`` (25-59) and ``transfer-<kind>``.
"""

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .background import RAVEN_ATTRIBUTES, RAVEN_RELATIONS, SIZE_SCALE, BKRegistry, default_registry
from .config import parse_override
from .errors import ConfigError, ParseError, ProblemError
from .operators import OperatorDef, format_operator, parse_operator_decl
from .scoring import compute_signature
from .syntax import EQUATION, format_rule, format_term, parse_rule
from .terms import (
    Apply, Atom, BKRef, Example, Integer, Rule, Signature, Term, Tuple, Variable,
    from_list, string_term, term_string, walk,
)

DEFAULT_MIN_PREFIX = 2

_LINE_RE = re.compile(r"(name|target|pos|neg|test|bk|decompose)\s*:\s*(.*)\Z")
_OP_RE = re.compile(r"op\s+(\d+)\s*=\s*(.*)\Z")
_CONFIG_RE = re.compile(r"config\s+([A-Za-z_]\w*)\s*=\s*(.*)\Z")


@dataclass(frozen=True)
class Problem:
    name: str
    positives: tuple[Example, ...]
    negatives: tuple[Example, ...] = ()
    background: tuple[Rule, ...] = ()
    operators: tuple[OperatorDef, ...] = ()
    signature: Signature = field(default_factory=lambda: Signature(0, 0, 0))
    overrides: dict = field(default_factory=dict)
    tests: tuple[Example, ...] = ()
    target: str = ""
    circular_alphabet: bool = False
    min_prefix: int = DEFAULT_MIN_PREFIX

    def registry(self) -> BKRegistry:
        return default_registry(self.circular_alphabet)


def make_problem(name: str, positives: Iterable[Example], negatives: Iterable[Example] = (),
                 background: Iterable[Rule] = (), operators: Iterable[OperatorDef] = (),
                 overrides: dict | None = None, tests: Iterable[Example] = (), target: str | None = None,
                 circular_alphabet: bool = False, min_prefix: int = DEFAULT_MIN_PREFIX) -> Problem:
    """Validate the parts of a problem and compute its signature."""
    positives, negatives, tests = tuple(positives), tuple(negatives), tuple(tests)
    background = tuple(background)
    operators = tuple(operators)
    if not positives:
        raise ProblemError(f"problem '{name}' has no positive examples")
    target = target or positives[0].functor
    for example in (*positives, *negatives, *tests):
        if not example.is_example():
            raise ProblemError(f"evidence must be ground and unconditional: {format_rule(example)}")
        if example.functor != target:
            raise ProblemError(f"example {format_rule(example)} does not define the target '{target}'")
    ids = [op.id for op in operators]
    if len(ids) != len(set(ids)):
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        raise ProblemError(f"duplicate operator id(s): {duplicates}")

    registry = default_registry(circular_alphabet)
    _check_function_names(registry, target, positives + negatives + tests, background, operators)
    templates = [op.template for op in operators if op.template is not None]
    signature = compute_signature(positives, negatives, background, templates)
    return Problem(name, positives, negatives, background, operators, signature, dict(overrides or {}),
                   tests, target, circular_alphabet, min_prefix)


def _check_function_names(registry: BKRegistry, target: str, evidence: Sequence[Example],
                          background: Sequence[Rule], operators: Sequence[OperatorDef]) -> None:
    """Every function a template or background rule calls must be defined somewhere."""
    known = set(registry.names()) | {target, EQUATION} | {rule.functor for rule in background}
    for example in evidence:
        for term in example.terms():
            known.update(node.functor for node in walk(term) if isinstance(node, Apply))
    calls: list[tuple[Term, str]] = []
    for op in operators:
        if op.template is not None:
            calls.append((op.template, f"operator {op.id}"))
    for rule in background:
        calls.extend((term, f"background rule {format_rule(rule)}") for term in rule.right + rule.guards)
    for term, where in calls:
        for node in walk(term):
            if isinstance(node, Apply) and node.functor not in known:
                raise ProblemError(f"{where} calls unknown function '{node.functor}'")
            if isinstance(node, BKRef) and node.name not in registry:
                raise ProblemError(f"{where} refers to unknown background function '&{node.name}'")


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------
def _strip_comment(line: str) -> str:
    in_string = None
    for index, ch in enumerate(line):
        if in_string:
            if ch == in_string:
                in_string = None
        elif ch in "\"'":
            in_string = ch
        elif ch == "#":
            return line[:index]
    return line


def _parse_located(parse: Callable, text: str, line: int, offset: int):
    try:
        return parse(text)
    except ParseError as e:
        raise ParseError(str(e), line, (e.column or 1) + offset) from None


def parse_problem(text: str, default_name: str = "problem") -> Problem:
    """Parse problem-file text; raises ParseError with line and column, ProblemError when inconsistent."""
    name, target, decompose = default_name, None, None
    sections: dict[str, list[Rule]] = {"pos": [], "neg": [], "test": [], "bk": []}
    operators: list[OperatorDef] = []
    overrides: dict = {}
    circular, min_prefix = False, DEFAULT_MIN_PREFIX

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw)
        indent = len(stripped) - len(stripped.lstrip())
        line = stripped.strip()
        if not line:
            continue
        if found := _OP_RE.match(line):
            first_id = int(found.group(1))
            declared = parse_operator_decl(found.group(2), first_id, lineno)
            taken = {op.id for op in operators}
            for op in declared:
                if op.id in taken:
                    raise ProblemError(f"duplicate operator id {op.id} (line {lineno})")
            operators.extend(declared)
        elif found := _CONFIG_RE.match(line):
            key, value = found.group(1), found.group(2).strip()
            try:
                if key == "circular_alphabet":
                    if value.lower() not in ("true", "false"):
                        raise ConfigError(f"config circular_alphabet expects true or false, got '{value}'")
                    circular = value.lower() == "true"
                elif key == "min_prefix":
                    if not value.isdigit() or int(value) < 1:
                        raise ConfigError(f"config min_prefix expects a positive integer, got '{value}'")
                    min_prefix = int(value)
                else:
                    overrides[key] = parse_override(key, value)
            except ConfigError as e:
                raise ParseError(str(e), lineno, indent + 1) from None
        elif found := _LINE_RE.match(line):
            keyword, rest = found.group(1), found.group(2).strip()
            offset = indent + found.start(2)
            if keyword == "name":
                name = rest
            elif keyword == "target":
                target = rest
            elif keyword == "decompose":
                if rest != "series":
                    raise ParseError(f"unknown decomposition '{rest}'", lineno, offset + 1)
                decompose = rest
            else:
                rule = _parse_located(parse_rule, found.group(2), lineno, offset)
                if keyword != "bk" and not rule.is_example():
                    raise ParseError("evidence must be a ground rule without guards or body", lineno, offset + 1)
                sections[keyword].append(rule)
        else:
            raise ParseError(f"unrecognised line: {line!r}", lineno, indent + 1)

    positives = sections["pos"]
    if decompose == "series":
        positives = [instance for example in positives for instance in decompose_series(example, min_prefix)]
    return make_problem(name, positives, sections["neg"], sections["bk"], operators, overrides,
                        sections["test"], target, circular, min_prefix)


def load_problem(path: str | Path) -> Problem:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    problem = parse_problem(text, default_name=path.stem)
    logging.info(f"Loaded problem '{problem.name}' from {path}: {len(problem.positives)} positive, "
                 f"{len(problem.negatives)} negative examples, {len(problem.operators)} operators")
    return problem


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value)


def format_problem(problem: Problem) -> str:
    """Problem-file text that parses back to an equal problem."""
    lines = [f"name: {problem.name}", f"target: {problem.target}"]
    for key, value in problem.overrides.items():
        lines.append(f"config {key} = {_format_value(value)}")
    if problem.circular_alphabet:
        lines.append("config circular_alphabet = true")
    if problem.min_prefix != DEFAULT_MIN_PREFIX:
        lines.append(f"config min_prefix = {problem.min_prefix}")
    for keyword, rules in (("bk", problem.background), ("pos", problem.positives),
                           ("neg", problem.negatives), ("test", problem.tests)):
        lines.extend(f"{keyword}: {format_rule(rule)}" for rule in rules)
    lines.extend(f"op {op.id} = {format_operator(op)}" for op in problem.operators)
    return "\n".join(lines) + "\n"


def parse_operators(text: str) -> list[OperatorDef]:
    """Operator declarations only, one ``op N = ...`` per line."""
    operators = []
    for lineno, raw in enumerate(text.strip().splitlines(), start=1):
        found = _OP_RE.match(raw.strip())
        if found is None:
            raise ParseError(f"not an operator line: {raw!r}", lineno)
        operators.extend(parse_operator_decl(found.group(2), int(found.group(1)), lineno))
    return operators


# ---------------------------------------------------------------------------
# Letter series
# ---------------------------------------------------------------------------
def decompose_series(example: Example, min_prefix: int = DEFAULT_MIN_PREFIX) -> list[Example]:
    """``f(s) → c`` becomes ``f(prefix_k) → next char`` for k = min_prefix … |s|, ending with the original."""
    lhs, answer = example.lhs, example.rhs
    series = term_string(lhs.args[0]) if lhs.arity == 1 else None
    if series is None or not isinstance(answer, Atom) or len(answer.name) != 1:
        raise ProblemError(f"not a letter-series example: {format_rule(example)}")
    if len(series) < 2:
        raise ProblemError(f"series '{series}' is shorter than three letters with its answer")
    if not 1 <= min_prefix <= len(series):
        raise ProblemError(f"min_prefix {min_prefix} does not fit the series '{series}'")
    full = series + answer.name
    return [Rule(Apply(lhs.functor, (string_term(full[:k]),)), rhs=Atom(full[k]))
            for k in range(min_prefix, len(series) + 1)]


@dataclass(frozen=True, slots=True)
class SeriesItem:
    series: str
    answer: str
    min_prefix: int
    circular: bool = False


THURSTONE_SERIES: dict[int, SeriesItem] = {
    1: SeriesItem("cdcdcdcd", "c", 2),
    2: SeriesItem("aaabbbcccdd", "d", 3),
    3: SeriesItem("atbataatbat", "a", 6),
    4: SeriesItem("abmcdmefmghm", "i", 3),
    5: SeriesItem("defgefghfghi", "g", 4),
    6: SeriesItem("qxapxbqxa", "p", 6),
    8: SeriesItem("mabmbcmcdm", "d", 3),
    9: SeriesItem("turtustuttu", "u", 3),
    10: SeriesItem("abyabxabwab", "v", 3),
    11: SeriesItem("rscdstdetuef", "u", 4),
    12: SeriesItem("npaoqapraqsa", "r", 3),
    13: SeriesItem("wxaxybyzczadab", "e", 3, circular=True),
    14: SeriesItem("jkqrklrslmst", "m", 4),
    15: SeriesItem("pononmnmlmlk", "l", 3),
}

THURSTONE_OPERATORS = """
op 1 = replace(L1, V_String)
op 2 = replace(Rt1, head(L1))
op 3 = replace(Rt1, tail(L1))
op 4 = replace(Rt1, last(L1))
op 5 = replace(Rt1, init(L1))
op 6 = replace(Rt1, head(R1))
op 7 = replace(Rt1, tail(R1))
op 8 = replace(Rt1, last(R1))
op 9 = replace(Rt1, init(R1))
op 10 = replace(Rt1, next(R1))
op 11 = replace(Rt1, previous(R1))
op 12 = insert(G1, position(L1, 2))
op 13 = insert(G1, position(L1, 3))
op 14 = insert(G1, not_position(L1, 2))
op 15 = insert(G1, not_position(L1, 3))
op 16 = insert(G1, not_position(L1, 4))
"""


def thurstone_problem(number: int) -> Problem:
    item = THURSTONE_SERIES.get(number)
    if item is None:
        raise ProblemError(f"no Thurstone series number {number}")
    example = Rule(Apply("thurstone", (string_term(item.series),)), rhs=Atom(item.answer))
    return make_problem(f"thurstone-{number}", decompose_series(example, item.min_prefix),
                        operators=parse_operators(THURSTONE_OPERATORS), circular_alphabet=item.circular,
                        min_prefix=item.min_prefix)


# ---------------------------------------------------------------------------
# Raven matrices
# ---------------------------------------------------------------------------
def figure(shape: Term | str, size: str = "big", quantity: int = 1, position: Term | str = "none",
           kind: str = "black") -> Tuple:
    """A figure as ⟨shape, size, quantity, position, type⟩."""
    if quantity < 1:
        raise ProblemError("a figure has quantity of at least 1")

    def atom(value):
        return Atom(value) if isinstance(value, str) else value

    return Tuple((atom(shape), atom(size), Integer(quantity), atom(position), atom(kind)))


def cell(*figures: Tuple) -> Term:
    return from_list(figures)


def _line_term(lines: Sequence[Sequence[Term]]) -> Term:
    return from_list(from_list(line) for line in lines)


def decompose_matrix(matrix: Sequence[Sequence[Term]], candidates: Sequence[Term],
                     axes: Sequence[str] = ("rows", "columns"), functor: str = "raven"
                     ) -> tuple[list[Example], list[Example]]:
    """Training examples from the two complete lines of each axis, and one test
    example per (axis, candidate) that fills the gap.

    ``matrix`` is three rows of cells, the last with two cells (the gap is
    bottom right).
    """
    if len(matrix) != 3 or [len(row) for row in matrix] != [3, 3, 2]:
        raise ProblemError("a matrix needs two complete rows of three cells and a last row of two")
    if not candidates:
        raise ProblemError("a matrix needs at least one answer candidate")
    views = {
        "rows": [list(row) for row in matrix],
        "columns": [[matrix[r][c] for r in range(3) if c < len(matrix[r])] for c in range(3)],
    }
    training: dict[Example, None] = {}
    tests: dict[Example, None] = {}
    for axis in axes:
        if axis not in views:
            raise ProblemError(f"unknown matrix axis '{axis}'")
        lines = views[axis]
        for seen, asked in ((0, 1), (1, 0)):
            lhs = Apply(functor, (_line_term([lines[seen], lines[asked][:2]]),))
            training[Rule(lhs, rhs=lines[asked][2])] = None
        for candidate in candidates:
            tests[Rule(Apply(functor, (_line_term(lines),)), rhs=candidate)] = None
    return list(training), list(tests)


def raven_operators() -> list[OperatorDef]:
    """One operator per relation × attribute in relation-major order, then the matrix generalisation."""
    lines = []
    for r, relation in enumerate(RAVEN_RELATIONS):
        for k, attribute in enumerate(RAVEN_ATTRIBUTES):
            lines.append(f"op {r * len(RAVEN_ATTRIBUTES) + k + 1} = "
                         f"replace(Rt1.1.{k + 1}, {relation}(V_Matrix, {attribute}))")
    lines.append(f"op {len(lines) + 1} = replace(L1, V_Matrix)")
    return parse_operators("\n".join(lines))


WORKED_MATRIX = (
    (cell(figure("square", kind="black")), cell(figure("diamond", kind="white")),
     cell(figure("circle", kind="striped"))),
    (cell(figure("diamond", kind="striped")), cell(figure("circle", kind="black")),
     cell(figure("square", kind="white"))),
    (cell(figure("circle", kind="white")), cell(figure("square", kind="striped"))),
)

# Candidate 8 is the answer.
WORKED_CANDIDATES = (
    cell(figure("circle", kind="black")),
    cell(figure("diamond", kind="white")),
    cell(figure("square", kind="black")),
    cell(figure("diamond", size="small", kind="black")),
    cell(figure("diamond", quantity=2, kind="black")),
    cell(figure("triangle", kind="black")),
    cell(figure("diamond", kind="striped")),
    cell(figure("diamond", kind="black")),
)
WORKED_ANSWER = 8


def raven_worked_problem() -> Problem:
    training, tests = decompose_matrix(WORKED_MATRIX, WORKED_CANDIDATES)
    return make_problem("raven-worked", training, operators=raven_operators(), tests=tests)


def _expand(groups: dict[tuple[int, ...], dict[str, str]]) -> dict[int, dict[str, str]]:
    return {item: relations for ids, relations in groups.items() for item in ids}


# Relations holding along the rows of each item; unlisted attributes are constant.
RAVEN_SOLUTIONS: dict[int, dict[str, str]] = _expand({
    (25,): {"shape": "identity"},
    (26, 27, 28, 30): {"shape": "identity", "size": "progressive"},
    (29,): {"shape": "identity", "quantity": "progressive", "position": "progressive"},
    (31, 33, 34, 36): {"shape": "identity", "position": "progressive"},
    (32, 35): {"shape": "identity", "quantity": "progressive"},
    (37,): {"shape": "identity", "type": "identity"},
    (38, 39): {"shape": "distrib3val"},
    (40, 41, 42, 46): {"shape": "identity", "type": "distrib3val"},
    (43, 44, 45, 48): {"shape": "distrib3val", "type": "distrib3val"},
    (47,): {"shape": "identity", "quantity": "distrib3val", "type": "distrib3val"},
    (49, 50): {"shape": "addition"},
    (51,): {"shape": "addition", "type": "identity"},
    (52, 53, 54, 55, 56, 58, 59): {"shape": "distrib2val"},
    (57,): {"shape": "distrib2val", "type": "distrib3val"},
})

RAVEN_CONSTANTS: dict[str, Term] = {
    "shape": Atom("circle"), "size": Atom("big"), "quantity": Integer(1),
    "position": Atom("none"), "type": Atom("black"),
}

_PALETTES: dict[str, tuple[Term, ...]] = {
    "shape": tuple(Atom(s) for s in ("circle", "square", "triangle", "diamond", "pentagon", "hexagon",
                                     "star", "cross")),
    "size": tuple(Atom(s) for s in SIZE_SCALE),
    "quantity": tuple(Integer(q) for q in range(1, 6)),
    "position": tuple(Integer(45 * k) for k in range(8)),
    "type": tuple(Atom(t) for t in ("black", "white", "striped", "grey", "dotted")),
}


def _sorted_set(values: Iterable[Term]) -> Term:
    return from_list(sorted(set(values), key=format_term))


def _attribute_values(attribute: str, relation: str | None, seed: int) -> list[list[Term]]:
    """A 3×3 grid of values for which ``relation`` holds along every row."""
    palette = _PALETTES[attribute]
    offset = seed % len(palette)

    def pick(k: int) -> Term:
        return palette[(offset + k) % len(palette)]

    rows = range(3)
    match relation:
        case None:
            return [[RAVEN_CONSTANTS[attribute]] * 3 for _ in rows]
        case "identity":
            return [[pick(r)] * 3 for r in rows]
        case "distrib3val":
            return [[pick((r + c) % 3) for c in range(3)] for r in rows]
        case "progressive":
            if attribute not in ("size", "quantity", "position"):
                raise ProblemError(f"{attribute} has no order for a progression")
            return [[palette[r + c] for c in range(3)] for r in rows]
        case "addition":
            grid = []
            for r in rows:
                a, b = pick(2 * r), pick(2 * r + 1)
                grid.append([a, b, _sorted_set([a, b])])
            return grid
        case "distrib2val":
            grid = []
            for r in rows:
                a, b, shared = pick(3 * r), pick(3 * r + 1), pick(3 * r + 2)
                grid.append([_sorted_set([a, shared]), _sorted_set([b, shared]), _sorted_set([a, b])])
            return grid
    raise ProblemError(f"unknown relation '{relation}'")


def synthesize_matrix(relations: dict[str, str], seed: int) -> tuple[list[list[Term]], Term]:
    """A matrix whose rows obey ``relations`` (attribute → relation) and its answer cell."""
    grids = {att: _attribute_values(att, relations.get(att), seed) for att in RAVEN_ATTRIBUTES}
    cells = [[cell(Tuple(tuple(grids[att][r][c] for att in RAVEN_ATTRIBUTES))) for c in range(3)]
             for r in range(3)]
    return [cells[0], cells[1], cells[2][:2]], cells[2][2]


def raven_problem(item: int) -> Problem:
    relations = RAVEN_SOLUTIONS.get(item)
    if relations is None:
        raise ProblemError(f"no Raven item {item}; items 25-59 are available")
    matrix, answer = synthesize_matrix(relations, item)
    training, tests = decompose_matrix(matrix, [answer], axes=("rows",))
    return make_problem(f"raven-{item}", training, operators=raven_operators(), tests=tests)


def raven_solution(relations: dict[str, str]) -> list[Rule]:
    """``raven(V_Matrix) -> [{...}]`` with a relation call or a constant per attribute."""
    matrix = Variable("V_Matrix")
    slots = []
    for attribute in RAVEN_ATTRIBUTES:
        relation = relations.get(attribute)
        if relation is None:
            slots.append(RAVEN_CONSTANTS[attribute])
        else:
            slots.append(Apply(relation, (matrix, Atom(attribute))))
    return [Rule(Apply("raven", (matrix,)), rhs=from_list([Tuple(tuple(slots))]))]


# ---------------------------------------------------------------------------
# List transformations
# ---------------------------------------------------------------------------
TRANSFER_WORDS: tuple[str, ...] = (
    "trade", "grade", "made", "side", "ride", "code", "slide", "blade", "glide", "guide",
    "shade", "pride", "wade", "fade", "hide", "bride", "tide", "node", "rode", "wide",
    "band", "bird", "cold", "drum", "find", "hand", "kind", "land", "mild", "word",
    "cake", "bike", "lake", "make", "take", "note", "rose", "time", "lane", "fine",
)


def _replace_all(old: str, new: str) -> Callable[[str], str | None]:
    return lambda word: word.replace(old, new) if old in word else None


def _final_e_to_ing(word: str) -> str | None:
    # Only a single, final e: the replacement is applied to every occurrence.
    if word.endswith("e") and word.count("e") == 1:
        return word[:-1] + "ing"
    return None


TRANSFORMATIONS: dict[str, Callable[[str], str | None]] = {
    "d_to_c": _replace_all("d", "c"),
    "e_to_ing": _final_e_to_ing,
    "d_to_pez": _replace_all("d", "pez"),
    "over_prefix": lambda word: "over" + word,
    "mark_suffix": lambda word: word + "mark",
}

TRANSFER_SOLUTIONS: dict[str, str] = {
    "d_to_c": "trans(V_List) -> map(d=>c, V_List)",
    "e_to_ing": 'trans(V_List) -> map(e=>"ing", V_List)',
    "d_to_pez": 'trans(V_List) -> map(d=>"pez", V_List)',
    "over_prefix": 'trans(V_List) -> append("over", V_List)',
    "mark_suffix": 'trans(V_List) -> append(V_List, "mark")',
}

TRANSFER_OPERATORS = """
op 1 = replace(Rt1, oneSust(L1, R1))
op 2 = replace(Rt1, nSust(L1, R1))
op 3 = replace(Rt1, addPrefix(L1, R1))
op 4 = replace(Rt1, addSuffix(L1, R1))
op 5 = replace(L1 | Rt1 | Rt1.1 | Rt1.2, V_List)
op 9 = one_step_rew
op 10 = replace(Rt1, reverse(L1))
op 11 = replace(Rt1, reverse(R1))
op 12 = replace(Rt1, head(L1))
op 13 = replace(Rt1, tail(L1))
op 14 = replace(Rt1, last(L1))
op 15 = replace(Rt1, init(L1))
op 16 = replace(Rt1, tail(R1))
op 17 = replace(Rt1, init(R1))
op 18 = replace(Rt1, append(L1, L1))
op 19 = replace(Rt1, sort(L1))
op 20 = replace(L1.1, V_Head)
"""

TRANSFER_SUITE_SIZE = 20
TRANSFER_SAMPLE_SIZE = 10


def gen_transform_suite(kind: str, count: int = TRANSFER_SUITE_SIZE) -> list[Example]:
    """``trans(word) → transformed`` for the first ``count`` words the transformation applies to."""
    transform = TRANSFORMATIONS.get(kind)
    if transform is None:
        raise ProblemError(f"unknown transformation '{kind}'; choose from {', '.join(TRANSFORMATIONS)}")
    if count < 1:
        raise ValueError("count must be at least 1")
    examples = []
    for word in TRANSFER_WORDS:
        result = transform(word)
        if result is None:
            continue
        examples.append(Rule(Apply("trans", (string_term(word),)), rhs=string_term(result)))
        if len(examples) == count:
            break
    return examples


def transfer_problem(kind: str, rng: np.random.Generator | None = None,
                     sample_size: int | None = None, shuffle_operators: bool = False) -> Problem:
    """The transformation suite as a problem; with ``rng``, a sample of it and optionally shuffled operators.

    Operator ids stay fixed under shuffling so a policy keeps its meaning across problems.
    """
    suite = gen_transform_suite(kind)
    operators = parse_operators(TRANSFER_OPERATORS)
    if rng is not None:
        if sample_size is not None:
            chosen = sorted(rng.choice(len(suite), size=min(sample_size, len(suite)), replace=False))
            suite = [suite[i] for i in chosen]
        if shuffle_operators:
            operators = [operators[i] for i in rng.permutation(len(operators))]
    return make_problem(f"transfer-{kind}", suite, operators=operators)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------
BUNDLED_FILES: dict[str, str] = {"last": "last.prob", "ooo": "ooo.prob"}

OOO_RULES: dict[str, str] = {
    "hamming": "ooo(V_Lists) -> distinct(map(&hamming, V_Lists))",
    "diffObj": "ooo(V_Lists) -> distinct(map(&diffObj, V_Lists))",
}

# Reference programs; 4 and 7 have none because their published answers do not check out
# against the series.
THURSTONE_SOLUTIONS: dict[int, tuple[str, ...]] = {
    1: ("thurstone(V) -> last(init(V))",),
    2: ("thurstone(V) -> next(init(init(V)))",),
    3: ("thurstone(V) -> last(init(init(init(init(init(V))))))",),
    5: ("thurstone(V) -> next(init(init(init(V))))",),
    6: ("thurstone(V) -> last(init(init(init(init(init(V))))))",),
    8: ("thurstone(V) when eq(mod(length(V), 3), 0) -> last(init(init(V)))",
        "thurstone(V) when neq(mod(length(V), 3), 0) -> next(init(init(V)))"),
    9: ("thurstone(V) when position(V, 3) -> next(init(init(V)))",
        "thurstone(V) when not_position(V, 3) -> last(init(init(V)))"),
    10: ("thurstone(V) when position(V, 3) -> previous(init(init(V)))",
         "thurstone(V) when not_position(V, 3) -> last(init(init(V)))"),
    11: ("thurstone(V) -> next(init(init(init(V))))",),
    12: ("thurstone(V) when position(V, 3) -> last(init(init(V)))",
         "thurstone(V) when not_position(V, 3) -> next(init(init(V)))"),
    13: ("thurstone(V) -> next(init(init(V)))",),
    14: ("thurstone(V) -> next(init(init(init(V))))",),
    15: ("thurstone(V) -> previous(init(init(V)))",),
}

LAST_SOLUTION = ("last([V_Head]) -> V_Head", "last([V_Head|V_Tail]) -> last(V_Tail)")

WORKED_SOLUTION = {"shape": "distrib3val", "type": "distrib3val"}


def problem_names() -> list[str]:
    names = list(BUNDLED_FILES)
    names += [f"thurstone-{n}" for n in THURSTONE_SERIES]
    names.append("raven-worked")
    names += [f"raven-{item}" for item in RAVEN_SOLUTIONS]
    names += [f"transfer-{kind}" for kind in TRANSFORMATIONS]
    return names


def load_bundled(name: str) -> Problem:
    """Build the bundled problem called ``name``."""
    if name in BUNDLED_FILES:
        text = resources.files("ruleforge").joinpath("problems", BUNDLED_FILES[name]).read_text(encoding="utf-8")
        return parse_problem(text, default_name=name)
    family, _, suffix = name.partition("-")
    if family == "thurstone" and suffix.isdigit():
        return thurstone_problem(int(suffix))
    if family == "raven" and suffix == "worked":
        return raven_worked_problem()
    if family == "raven" and suffix.isdigit():
        return raven_problem(int(suffix))
    if family == "transfer" and suffix in TRANSFORMATIONS:
        return transfer_problem(suffix)
    raise ProblemError(f"no bundled problem named '{name}'")


def resolve_problem(reference: str) -> Problem:
    """A problem file path, or else the name of a bundled problem."""
    path = Path(reference)
    if path.is_file():
        return load_problem(path)
    if reference in problem_names():
        problem = load_bundled(reference)
        logging.info(f"Loaded bundled problem '{reference}'")
        return problem
    raise FileNotFoundError(f"no problem file or bundled problem named '{reference}'")


def fixture_solution(name: str) -> list[Rule] | None:
    """The published solution program for a bundled problem, when one is known."""
    family, _, suffix = name.partition("-")
    if name == "last":
        texts: Sequence[str] = LAST_SOLUTION
    elif name == "ooo":
        texts = (OOO_RULES["hamming"],)
    elif family == "thurstone" and suffix.isdigit() and int(suffix) in THURSTONE_SOLUTIONS:
        texts = THURSTONE_SOLUTIONS[int(suffix)]
    elif name == "raven-worked":
        return raven_solution(WORKED_SOLUTION)
    elif family == "raven" and suffix.isdigit() and int(suffix) in RAVEN_SOLUTIONS:
        return raven_solution(RAVEN_SOLUTIONS[int(suffix)])
    elif family == "transfer" and suffix in TRANSFER_SOLUTIONS:
        texts = (TRANSFER_SOLUTIONS[suffix],)
    else:
        return None
    return [parse_rule(text) for text in texts]
