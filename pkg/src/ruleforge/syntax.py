"""
Textual syntax for terms, rules, positions and operator templates.

    variables   X, V_List, _Tmp        atoms       a, square, 'A'
    integers    3, -45                 strings     "abc"  (list of chars)
    lists       [a,b|T], []            tuples      {a,b}
    apply       f(a,b)                 mappings    a=>b
    references  &hamming
    rules       lhs when g1, g2 -> b1, rhs
    templates   any term, plus positions L1.1 / G1 / Rt1 (R1 is an alias of Rt1)

Printing is the inverse of parsing: ``parse_term(format_term(t)) == t``.
"""

import re
from dataclasses import dataclass

from .errors import ParseError
from .terms import (
    NIL, Apply, Atom, BKRef, Cons, FreshVar, Integer, Mapping, Nil, PositionRef,
    Rule, RulePosition, Tuple, Variable, from_list, split_list, string_term,
)

EQUATION = "="

_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("ARROW", r"->"),
    ("MAPSTO", r"=>"),
    ("INT", r"-?\d+"),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("QATOM", r"'(?:[^'\\]|\\.)*'"),
    ("POS", r"(?:Rt|R|L|G)(?:\d+(?:\.\d+)*)?(?![A-Za-z0-9_])"),
    ("VAR", r"[A-Z_][A-Za-z0-9_]*"),
    ("NAME", r"[a-z][A-Za-z0-9_]*"),
    ("PUNCT", r"[()\[\]{},|&=]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))
_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_POSITION_RE = re.compile(r"(Rt|R|L|G)((?:\d+)(?:\.\d+)*)?\Z")
RESERVED = frozenset({"when"})


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str, line: int | None = None, positions: bool = False) -> list[Token]:
    """Split ``text`` into tokens; ``positions`` enables L1.1-style position tokens."""
    tokens = []
    index = 0
    while index < len(text):
        found = _TOKEN_RE.match(text, index)
        if found is None:
            raise ParseError(f"unexpected character {text[index]!r}", line, index + 1)
        kind = found.lastgroup
        if kind == "POS" and not positions:
            kind = "VAR"
        if kind != "WS":
            tokens.append(Token(kind, found.group(), index + 1))
        index = found.end()
    return tokens


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


def parse_position(text: str) -> RulePosition:
    found = _POSITION_RE.match(text.strip())
    if found is None:
        raise ParseError(f"not a rule position: {text!r}")
    root = "Rt" if found.group(1) in ("R", "Rt") else found.group(1)
    path = tuple(int(part) for part in found.group(2).split(".")) if found.group(2) else ()
    return RulePosition(root, path)


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str, line: int | None, template: bool):
        self.tokens = tokenize(text, line, positions=template)
        self.index = 0
        self.line = line
        self.template = template
        self.text_length = len(text)

    # -- token plumbing ---------------------------------------------------
    def peek(self) -> Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def error(self, message: str) -> ParseError:
        token = self.peek()
        column = token.column if token else self.text_length + 1
        return ParseError(message, self.line, column)

    def advance(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.error("unexpected end of input")
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token is not None and token.kind in ("PUNCT", "ARROW", "MAPSTO", "NAME") and token.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            token = self.peek()
            found = token.text if token else "end of input"
            raise self.error(f"expected '{text}' but found '{found}'")
        return self.advance()

    def done(self) -> bool:
        return self.index >= len(self.tokens)

    # -- grammar ----------------------------------------------------------
    def term(self):
        left = self.primary()
        if self.at("=>"):
            self.advance()
            return Mapping(left, self.term())
        return left

    def item(self):
        """A body item: a term, optionally ``Pattern = Expression``."""
        left = self.term()
        if self.at(EQUATION):
            self.advance()
            return Apply(EQUATION, (left, self.term()))
        return left

    def sequence(self, closing: str, parse) -> list:
        items = []
        if self.at(closing):
            self.advance()
            return items
        items.append(parse())
        while self.at(","):
            self.advance()
            items.append(parse())
        self.expect(closing)
        return items

    def primary(self):
        token = self.advance()
        match token.kind:
            case "INT":
                return Integer(int(token.text))
            case "STRING":
                return string_term(_unquote(token.text))
            case "VAR":
                return FreshVar(token.text) if self.template else Variable(token.text)
            case "POS":
                return PositionRef(parse_position(token.text))
            case "NAME" | "QATOM":
                name = token.text if token.kind == "NAME" else _unquote(token.text)
                if self.at("("):
                    self.advance()
                    args = self.sequence(")", self.term)
                    if not args:
                        raise ParseError(f"'{name}()' has no arguments; write the atom '{name}'",
                                         self.line, token.column)
                    return Apply(name, tuple(args))
                return Atom(name)
        match token.text:
            case "[":
                return self.list_rest()
            case "{":
                return Tuple(tuple(self.sequence("}", self.term)))
            case "(":
                inner = self.term()
                self.expect(")")
                return inner
            case "&":
                name = self.advance()
                if name.kind not in ("NAME", "QATOM"):
                    raise ParseError("expected a function name after '&'", self.line, name.column)
                return BKRef(name.text if name.kind == "NAME" else _unquote(name.text))
        raise ParseError(f"unexpected token '{token.text}'", self.line, token.column)

    def list_rest(self):
        if self.at("]"):
            self.advance()
            return NIL
        items = [self.term()]
        while self.at(","):
            self.advance()
            items.append(self.term())
        tail = NIL
        if self.at("|"):
            self.advance()
            tail = self.term()
        self.expect("]")
        return from_list(items, tail)

    def rule(self) -> Rule:
        lhs = self.term()
        if not isinstance(lhs, Apply):
            raise self.error("a rule lhs must be a function application")
        guards = []
        if self.at("when"):
            self.advance()
            guards.append(self.term())
            while self.at(","):
                self.advance()
                guards.append(self.term())
        self.expect("->")
        right = [self.item()]
        while self.at(","):
            self.advance()
            right.append(self.item())
        return Rule(lhs, tuple(guards), tuple(right[:-1]), right[-1])


def _parse(text: str, line: int | None, template: bool, what):
    parser = _Parser(text, line, template)
    result = what(parser)
    if not parser.done():
        raise parser.error(f"unexpected trailing input '{parser.peek().text}'")
    return result


def parse_term(text: str, line: int | None = None):
    return _parse(text, line, False, _Parser.term)


def parse_template(text: str, line: int | None = None):
    """Parse an operator template: variables become FreshVar, positions become PositionRef."""
    return _parse(text, line, True, _Parser.term)


def parse_rule(text: str, line: int | None = None) -> Rule:
    return _parse(text, line, False, _Parser.rule)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------
def format_name(name: str) -> str:
    if _PLAIN_ATOM.match(name) and name not in RESERVED:
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def format_term(term) -> str:
    match term:
        case Variable(name):
            return name
        case Atom(name):
            return format_name(name)
        case Integer(value):
            return str(value)
        case Nil():
            return "[]"
        case Cons():
            items, tail = split_list(term)
            inner = ",".join(format_term(item) for item in items)
            if tail != NIL:
                inner += "|" + format_term(tail)
            return f"[{inner}]"
        case Tuple(elements):
            return "{" + ",".join(format_term(e) for e in elements) + "}"
        case Apply(functor, args):
            return f"{format_name(functor)}(" + ",".join(format_term(a) for a in args) + ")"
        case Mapping(source, target):
            left = format_term(source)
            if isinstance(source, Mapping):
                left = f"({left})"
            return f"{left}=>{format_term(target)}"
        case BKRef(name):
            return "&" + format_name(name)
        case PositionRef(pos):
            return str(pos)
        case FreshVar(name):
            return name
    raise TypeError(f"not a term: {term!r}")


def format_item(item) -> str:
    """A body item; top-level equations print infix, nested ones as ``'='(a,b)``."""
    if isinstance(item, Apply) and item.functor == EQUATION and item.arity == 2:
        return f"{format_term(item.args[0])} = {format_term(item.args[1])}"
    return format_term(item)


def format_rule(rule: Rule) -> str:
    text = format_term(rule.lhs)
    if rule.guards:
        text += " when " + ", ".join(format_term(g) for g in rule.guards)
    return text + " -> " + ", ".join([*(format_item(b) for b in rule.body), format_term(rule.rhs)])
