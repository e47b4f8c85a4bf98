"""Access-policy formulas: parsing, evaluation and formatting.

Grammar::

    expr   := term ('|' term)*
    term   := factor ('&' factor)*
    factor := ATTR | '(' expr ')' | INT 'of' '(' expr (',' expr)* ')'

``&`` binds tighter than ``|``; both desugar pairwise and left-associatively
into 2-of-2 and 1-of-2 thresholds.  An all-digit token is an attribute name
unless it is followed by ``of``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .errors import PolicySyntaxError, ThresholdOutOfRange

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z0-9_]+)|(?P<op>[()&|,]))")


@dataclass(frozen=True)
class Leaf:
    attr: str

    def __str__(self):
        return self.attr


@dataclass(frozen=True)
class Threshold:
    t: int
    children: tuple["PolicyNode", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ThresholdOutOfRange("a threshold gate needs at least one child")
        if not 1 <= self.t <= len(self.children):
            raise ThresholdOutOfRange(
                f"threshold {self.t} outside 1..{len(self.children)}"
            )

    def __str__(self):
        return to_text(self)


PolicyNode = Union[Leaf, Threshold]


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise PolicySyntaxError(f"unexpected character {text[start]!r}", start)
        kind = "name" if m.group("name") else "op"
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0):
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def position(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def expect(self, value: str):
        tok = self.peek()
        if tok is None or tok[1] != value:
            found = "end of input" if tok is None else repr(tok[1])
            raise PolicySyntaxError(f"expected {value!r}, found {found}", self.position())
        self.i += 1

    def parse(self) -> PolicyNode:
        if not self.tokens:
            raise PolicySyntaxError("empty policy", 0)
        node = self.expr()
        if self.peek() is not None:
            raise PolicySyntaxError(f"unexpected {self.peek()[1]!r}", self.position())
        return node

    def expr(self) -> PolicyNode:
        node = self.term()
        while self.peek() and self.peek()[1] == "|":
            self.i += 1
            node = Threshold(1, (node, self.term()))
        return node

    def term(self) -> PolicyNode:
        node = self.factor()
        while self.peek() and self.peek()[1] == "&":
            self.i += 1
            node = Threshold(2, (node, self.factor()))
        return node

    def factor(self) -> PolicyNode:
        tok = self.peek()
        if tok is None:
            raise PolicySyntaxError("unexpected end of input", self.position())
        kind, value, pos = tok
        if value == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if kind != "name":
            raise PolicySyntaxError(f"unexpected {value!r}", pos)
        nxt = self.peek(1)
        if value.isdigit() and nxt is not None and nxt[1] == "of":
            self.i += 2
            self.expect("(")
            children = [self.expr()]
            while self.peek() and self.peek()[1] == ",":
                self.i += 1
                children.append(self.expr())
            self.expect(")")
            t = int(value)
            if not 1 <= t <= len(children):
                raise ThresholdOutOfRange(f"threshold {t} of {len(children)} children at position {pos}")
            return Threshold(t, tuple(children))
        if value == "of":
            raise PolicySyntaxError("'of' must follow a threshold count", pos)
        self.i += 1
        return Leaf(value)


def parse_policy(text: str) -> PolicyNode:
    return _Parser(text).parse()


def to_text(node: PolicyNode) -> str:
    """Render a tree back to policy text (threshold form for every gate)."""
    if isinstance(node, Leaf):
        return node.attr
    return f"{node.t} of ({', '.join(to_text(c) for c in node.children)})"


def leaves(node: PolicyNode) -> Iterator[str]:
    """Leaf attributes in left-to-right order, repeats included."""
    if isinstance(node, Leaf):
        yield node.attr
    else:
        for child in node.children:
            yield from leaves(child)


def is_qualified(node: PolicyNode, attrs: Iterable[str]) -> bool:
    attrs = set(attrs)

    def sat(n: PolicyNode) -> bool:
        if isinstance(n, Leaf):
            return n.attr in attrs
        return sum(sat(c) for c in n.children) >= n.t

    return sat(node)


def minimal_qualified_sets(node: PolicyNode, universe: Iterable[str] | None = None) -> list[frozenset[str]]:
    """Minimal authorized sets by exhaustive enumeration over the universe."""
    universe = sorted(set(universe) if universe is not None else set(leaves(node)))
    found: list[frozenset[str]] = []
    for k in range(len(universe) + 1):
        for combo in itertools.combinations(universe, k):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            if is_qualified(node, s):
                found.append(s)
    return found


def disjunctive_policy(sets: Iterable[Iterable[str]]) -> str:
    """OR-of-ANDs policy text whose minimal sets are ``sets``."""
    terms = [" & ".join(sorted(s)) for s in sorted((tuple(sorted(s)) for s in sets))]
    if not terms:
        raise ValueError("no qualified sets to express")
    return " | ".join(f"({t})" if len(terms) > 1 and "&" in t else t for t in terms)
