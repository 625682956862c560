"""
Term algebra for ruleforge.

Terms are immutable values: variables, atoms, integers, lists built from
``Cons``/``NIL``, tuples, applications, mappings and references to background
functions. Rules address their subparts through position trees rooted at
``L`` (the lhs), ``G`` (the guards) and ``Rt`` (the Right sequence: body items
followed by the rhs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, TypeAlias

from .errors import InvalidPosition, StructuralPositionError


# ---------------------------------------------------------------------------
# Term types
# ---------------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Variable:
    name: str


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Integer:
    value: int


@dataclass(frozen=True, slots=True)
class Nil:
    """The empty list."""


NIL = Nil()


@dataclass(frozen=True, slots=True)
class Cons:
    head: Term
    tail: Term


@dataclass(frozen=True, slots=True)
class Tuple:
    elements: tuple[Term, ...] = ()

    def __post_init__(self):
        if not isinstance(self.elements, tuple):
            object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True, slots=True)
class Apply:
    functor: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError(f"Apply '{self.functor}' needs at least one argument; use an Atom instead")

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True, slots=True)
class Mapping:
    """A first-class replacement ``source => target``."""
    source: Term
    target: Term


@dataclass(frozen=True, slots=True)
class BKRef:
    """Reference to a named function, written ``&name``."""
    name: str


Term: TypeAlias = Variable | Atom | Integer | Nil | Cons | Tuple | Apply | Mapping | BKRef
Substitution: TypeAlias = dict[str, Term]

TRUE = Atom("true")
FALSE = Atom("false")


# ---------------------------------------------------------------------------
# Template leaves (operator templates only)
# ---------------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class PositionRef:
    """Template leaf replaced by the subpart of the input rule at ``pos``."""
    pos: RulePosition


@dataclass(frozen=True, slots=True)
class FreshVar:
    """Template leaf instantiated to the variable ``name``."""
    name: str


# ---------------------------------------------------------------------------
# List helpers
# ---------------------------------------------------------------------------
def from_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    """Build a Cons chain from ``items`` ending in ``tail``."""
    result = tail
    for item in reversed(list(items)):
        result = Cons(item, result)
    return result


def split_list(term: Term) -> tuple[list[Term], Term]:
    """Return the elements along a Cons spine and whatever ends it."""
    items: list[Term] = []
    while isinstance(term, Cons):
        items.append(term.head)
        term = term.tail
    return items, term


def to_list(term: Term) -> list[Term] | None:
    """Elements of a proper (Nil-terminated) list, else None."""
    items, tail = split_list(term)
    if tail != NIL:
        return None
    return items


def string_term(text: str) -> Term:
    """A string as a list of single-character atoms."""
    return from_list(Atom(ch) for ch in text)


def term_string(term: Term) -> str | None:
    """Inverse of ``string_term``; None when the term is not a character list."""
    items = to_list(term)
    if items is None:
        return None
    chars = []
    for item in items:
        if not isinstance(item, Atom) or len(item.name) != 1:
            return None
        chars.append(item.name)
    return "".join(chars)


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------
def children(term) -> tuple:
    """Children in position-tree order (1-based in positions)."""
    match term:
        case Cons(head, tail):
            return (head, tail)
        case Tuple(elements):
            return elements
        case Apply(_, args):
            return args
        case Mapping(source, target):
            return (source, target)
        case _:
            return ()


def with_children(term, new_children: tuple):
    match term:
        case Cons():
            return Cons(new_children[0], new_children[1])
        case Tuple():
            return Tuple(tuple(new_children))
        case Apply(functor, _):
            return Apply(functor, tuple(new_children))
        case Mapping():
            return Mapping(new_children[0], new_children[1])
        case _:
            raise InvalidPosition(f"{type(term).__name__} has no children")


def walk(term) -> Iterator:
    """Preorder traversal of every node."""
    stack = [term]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(term) -> Iterator[Variable]:
    return (node for node in walk(term) if isinstance(node, Variable))


def is_ground(term) -> bool:
    return not any(isinstance(node, (Variable, PositionRef, FreshVar)) for node in walk(term))


def term_depth(term) -> int:
    depth = 0
    stack = [(term, 1)]
    while stack:
        node, d = stack.pop()
        depth = max(depth, d)
        stack.extend((child, d + 1) for child in children(node))
    return depth


def match(pattern: Term, subject: Term, subst: Substitution | None = None) -> Substitution | None:
    """One-way matching: the substitution making ``pattern`` equal ``subject``, or None."""
    theta: Substitution = dict(subst) if subst else {}
    stack = [(pattern, subject)]
    while stack:
        pat, sub = stack.pop()
        if isinstance(pat, Variable):
            bound = theta.get(pat.name)
            if bound is None:
                theta[pat.name] = sub
            elif bound != sub:
                return None
            continue
        if type(pat) is not type(sub):
            return None
        match pat:
            case Cons() | Tuple() | Apply() | Mapping():
                if isinstance(pat, Apply) and pat.functor != sub.functor:
                    return None
                pat_children, sub_children = children(pat), children(sub)
                if len(pat_children) != len(sub_children):
                    return None
                stack.extend(zip(pat_children, sub_children))
            case _:
                if pat != sub:
                    return None
    return theta


def substitute(term: Term, subst: Substitution) -> Term:
    if not subst:
        return term
    match term:
        case Variable(name):
            return subst.get(name, term)
        case Cons():
            items, tail = split_list(term)
            return from_list([substitute(item, subst) for item in items], substitute(tail, subst))
        case Tuple() | Apply() | Mapping():
            return with_children(term, tuple(substitute(child, subst) for child in children(term)))
        case _:
            return term


def rename_term(term: Term, renaming: dict[str, str]) -> Term:
    return substitute(term, {old: Variable(new) for old, new in renaming.items()})


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Rule:
    """A conditional rewrite rule ``lhs when guards -> body, rhs``."""
    lhs: Apply
    guards: tuple[Term, ...] = ()
    body: tuple[Term, ...] = ()
    rhs: Term = NIL

    def __post_init__(self):
        if not isinstance(self.lhs, Apply):
            raise ValueError("rule lhs must be a function application")
        for name in ("guards", "body"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))

    @property
    def functor(self) -> str:
        return self.lhs.functor

    @property
    def right(self) -> tuple[Term, ...]:
        return self.body + (self.rhs,)

    def terms(self) -> Iterator[Term]:
        yield self.lhs
        yield from self.guards
        yield from self.body
        yield self.rhs

    def is_ground(self) -> bool:
        return all(is_ground(t) for t in self.terms())

    def is_example(self) -> bool:
        return not self.guards and not self.body and self.is_ground()


Example: TypeAlias = Rule
Program: TypeAlias = frozenset[int]


def rule_variables(rule: Rule) -> list[str]:
    """Distinct variable names in order of first occurrence."""
    seen: dict[str, None] = {}
    for t in rule.terms():
        for var in variables(t):
            seen.setdefault(var.name, None)
    return list(seen)


def rename_rule(rule: Rule, renaming: dict[str, str]) -> Rule:
    return Rule(
        lhs=rename_term(rule.lhs, renaming),
        guards=tuple(rename_term(g, renaming) for g in rule.guards),
        body=tuple(rename_term(b, renaming) for b in rule.body),
        rhs=rename_term(rule.rhs, renaming),
    )


def rename_apart(rule: Rule, salt: int) -> Rule:
    """Rename every variable ``X`` to ``X_<salt>``."""
    return rename_rule(rule, {name: f"{name}_{salt}" for name in rule_variables(rule)})


def canonical(rule: Rule) -> Rule:
    """Variables renamed ``V0, V1, ...`` by first occurrence; equal for alpha-equivalent rules."""
    return rename_rule(rule, {name: f"V{i}" for i, name in enumerate(rule_variables(rule))})


def is_recursive(rule: Rule) -> bool:
    """True iff the lhs functor is applied somewhere in the body or rhs."""
    functor = rule.functor
    for t in rule.right:
        if any(isinstance(node, Apply) and node.functor == functor for node in walk(t)):
            return True
    return False


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------
Root = Literal["L", "G", "Rt"]
ROOTS: tuple[str, ...] = ("L", "G", "Rt")


@dataclass(frozen=True, slots=True, order=True)
class RulePosition:
    root: str
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.root not in ROOTS:
            raise InvalidPosition(f"unknown position root '{self.root}'")
        if not isinstance(self.path, tuple):
            object.__setattr__(self, "path", tuple(self.path))
        if any(i < 1 for i in self.path):
            raise InvalidPosition(f"position indexes start at 1: {self.path}")

    def __str__(self) -> str:
        if not self.path:
            return self.root
        return self.root + ".".join(str(i) for i in self.path)

    @property
    def parent(self) -> RulePosition:
        return RulePosition(self.root, self.path[:-1])

    def child(self, index: int) -> RulePosition:
        return RulePosition(self.root, self.path + (index,))


def _root_term(rule: Rule, root: str) -> Term:
    if root == "L":
        return rule.lhs
    if root == "G":
        return Tuple(rule.guards)
    return Tuple(rule.right)


def _rebuild(rule: Rule, root: str, term: Term) -> Rule:
    if root == "L":
        if not isinstance(term, Apply):
            raise InvalidPosition("lhs must remain a function application")
        return Rule(term, rule.guards, rule.body, rule.rhs)
    if not isinstance(term, Tuple):
        raise InvalidPosition(f"{root} must be replaced by a sequence")
    if root == "G":
        return Rule(rule.lhs, term.elements, rule.body, rule.rhs)
    if not term.elements:
        raise StructuralPositionError("the Right sequence cannot be empty")
    return Rule(rule.lhs, rule.guards, term.elements[:-1], term.elements[-1])


def positions(rule: Rule) -> list[RulePosition]:
    """Every position of the rule in depth-first order."""
    result: list[RulePosition] = []
    for root in ROOTS:
        stack = [(RulePosition(root), _root_term(rule, root))]
        while stack:
            pos, term = stack.pop()
            result.append(pos)
            kids = children(term)
            for index in range(len(kids), 0, -1):
                stack.append((pos.child(index), kids[index - 1]))
    return result


def subpart(rule: Rule, pos: RulePosition) -> Term:
    term = _root_term(rule, pos.root)
    for index in pos.path:
        kids = children(term)
        if index > len(kids):
            raise InvalidPosition(f"position {pos} does not exist in rule")
        term = kids[index - 1]
    return term


def _replace_at(term: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    kids = list(children(term))
    index = path[0]
    if index > len(kids):
        raise InvalidPosition(f"child {index} does not exist")
    kids[index - 1] = _replace_at(kids[index - 1], path[1:], new)
    return with_children(term, tuple(kids))


SpliceMode = Literal["replace", "insert", "delete"]


def splice(rule: Rule, pos: RulePosition, mode: SpliceMode, term: Term | None = None) -> Rule:
    """Replace, insert or delete at ``pos``; raises InvalidPosition when not applicable."""
    if (term is None) != (mode == "delete"):
        raise ValueError("a term is required for replace/insert and forbidden for delete")
    root = _root_term(rule, pos.root)

    if mode == "replace":
        subpart(rule, pos)
        return _rebuild(rule, pos.root, _replace_at(root, pos.path, term))

    if not pos.path:
        raise InvalidPosition(f"cannot {mode} at root {pos.root}")
    parent_pos, index = pos.parent, pos.path[-1]
    parent = subpart(rule, parent_pos)
    if not isinstance(parent, (Tuple, Apply)):
        raise InvalidPosition(f"{parent_pos} is not a sequence position")
    kids = list(children(parent))

    if mode == "insert":
        limit = len(kids) if pos.root == "Rt" and not parent_pos.path else len(kids) + 1
        if index > limit:
            raise InvalidPosition(f"cannot insert at {pos}")
        kids.insert(index - 1, term)
    else:
        deletable = parent_pos.path == () and (
            pos.root == "G" or (pos.root == "Rt" and index <= len(rule.body))
        )
        if not deletable:
            raise StructuralPositionError(f"only guard conjuncts and body items can be deleted, not {pos}")
        if index > len(kids):
            raise InvalidPosition(f"position {pos} does not exist in rule")
        del kids[index - 1]

    if isinstance(parent, Apply) and not kids:
        raise InvalidPosition("an application cannot lose its last argument")
    new_parent = with_children(parent, tuple(kids))
    return _rebuild(rule, pos.root, _replace_at(root, parent_pos.path, new_parent))


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Signature:
    """Vocabulary sizes used by the message-length encoding."""
    n_f: int
    n_c: int
    n_v: int

    def __post_init__(self):
        if min(self.n_f, self.n_c, self.n_v) < 0:
            raise ValueError("signature counts must be non-negative")
