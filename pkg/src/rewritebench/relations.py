"""Feeding/bleeding relation calculus for rule pairs and whole cascades.

``feeds`` is the symbolic classifier (a five-condition disjunction over
substring/prefix/suffix sets); ``bleeds`` reduces to ``feeds`` on the
reversed first rule. ``oracle_feeds``/``oracle_bleeds`` are independent
brute-force checkers that search exhaustively for a concrete witness
string, used to cross-validate the symbolic classifier.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .core import Cascade, EmptySourceError, RewriteRule, apply_rule, string_sets

FEEDING = "F"
BLEEDING = "B"


@dataclass(frozen=True)
class RelationEdge:
    """A stored feeding or bleeding edge between rule positions.

    Only F and B edges are persisted; an edge with i > j encodes the
    corresponding counter-relation implicitly.
    """

    i: int
    kind: str
    j: int

    def __post_init__(self) -> None:
        if self.kind not in (FEEDING, BLEEDING):
            raise ValueError(f"edge kind must be 'F' or 'B', got {self.kind!r}")
        if self.i == self.j:
            raise ValueError("self-edges are not allowed")


@dataclass(frozen=True)
class CategoryString:
    """Presence bits for feeding, bleeding, counter-feeding, and
    counter-bleeding, rendered as a 4-character '0'/'1' string."""

    f: bool
    b: bool
    cf: bool
    cb: bool

    def render(self) -> str:
        return "".join("1" if bit else "0" for bit in (self.f, self.b, self.cf, self.cb))

    @classmethod
    def parse(cls, text: str) -> "CategoryString":
        if len(text) != 4 or any(c not in "01" for c in text):
            raise ValueError(f"malformed category string {text!r}")
        return cls(*(c == "1" for c in text))


ALL_CATEGORIES = tuple(format(i, "04b") for i in range(16))


def feeds(first: RewriteRule, second: RewriteRule) -> bool:
    """True iff applying ``first`` can create new match sites for ``second``.

    ``first.source`` may be empty (this happens when called through
    ``bleeds`` on a deletion rule); ``second.source`` must not be.
    """
    if not second.source:
        raise EmptySourceError("feeds() requires the second rule's find pattern")
    s_i, t_i = first.source, first.target
    s_j = second.source

    if t_i == "" and len(s_j) > 1:
        return True

    sub_si, _, _ = string_sets(s_i)
    sub_sj, pref_sj, suff_sj = string_sets(s_j)
    sub_ti, pref_ti, suff_ti = string_sets(t_i)

    if t_i in sub_sj and t_i not in sub_si:
        return True
    if s_j in sub_ti and s_j not in sub_si:
        return True
    if (pref_ti - sub_si) & suff_sj:
        return True
    if (suff_ti - sub_si) & pref_sj:
        return True
    return False


def bleeds(first: RewriteRule, second: RewriteRule) -> bool:
    """True iff applying ``first`` can destroy match sites for ``second``.

    Definitionally the feeding test on the reversed first rule."""
    return feeds(first.reversed(), second)


def classify_bfcc(cascade: Sequence[RewriteRule]) -> tuple[CategoryString, list[RelationEdge]]:
    """Classify every ordered rule pair of a cascade and derive its category.

    Edges are produced row-major over ordered pairs (i, then j); an edge with
    i < j sets the forward bit, i > j the counter bit.
    """
    f = b = cf = cb = False
    edges: list[RelationEdge] = []
    m = len(cascade)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            if feeds(cascade[i], cascade[j]):
                edges.append(RelationEdge(i, FEEDING, j))
                if i < j:
                    f = True
                else:
                    cf = True
            if bleeds(cascade[i], cascade[j]):
                edges.append(RelationEdge(i, BLEEDING, j))
                if i < j:
                    b = True
                else:
                    cb = True
    return CategoryString(f, b, cf, cb), edges


_FRESH_POOL = "abcdefghijklmnopqrstuvwxyz0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _fresh_symbol(used: set[str]) -> str:
    for c in _FRESH_POOL:
        if c not in used:
            return c
    code = max(ord(c) for c in used) + 1
    return chr(code)


@lru_cache(maxsize=4096)
def _candidate_strings(symbols: tuple[str, ...], max_len: int) -> tuple[str, ...]:
    """All strings over ``symbols`` of length 1..max_len, shortest first and
    lexicographic within a length."""
    out: list[str] = []
    for n in range(1, max_len + 1):
        out.extend("".join(t) for t in itertools.product(symbols, repeat=n))
    return tuple(out)


def _oracle_alphabet(first: RewriteRule, second: RewriteRule) -> tuple[str, ...]:
    used = set(first.source + first.target + second.source + second.target)
    used.add(_fresh_symbol(used))
    return tuple(sorted(used))


def oracle_feeds(
    first: RewriteRule, second: RewriteRule, max_len: int
) -> Optional[str]:
    """Search for a string on which applying ``first`` strictly increases the
    occurrence count of ``second.source``.

    Enumerates every string up to ``max_len`` over the combined symbols of
    both rules plus one fresh symbol; returns the shortest (then
    lexicographically first) witness, or None.
    """
    if not second.source:
        raise EmptySourceError("oracle_feeds() requires the second rule's find pattern")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if not first.source:
        return None
    pattern = second.source
    for s in _candidate_strings(_oracle_alphabet(first, second), max_len):
        if first.source not in s:
            continue
        if apply_rule(first, s).count(pattern) > s.count(pattern):
            return s
    return None


def oracle_bleeds(
    first: RewriteRule, second: RewriteRule, max_len: int
) -> Optional[str]:
    """Search for a string on which applying ``first`` strictly decreases the
    occurrence count of ``second.source``."""
    if not second.source:
        raise EmptySourceError("oracle_bleeds() requires the second rule's find pattern")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if not first.source:
        return None
    pattern = second.source
    for s in _candidate_strings(_oracle_alphabet(first, second), max_len):
        if first.source not in s:
            continue
        if apply_rule(first, s).count(pattern) < s.count(pattern):
            return s
    return None


def default_oracle_bound(first: RewriteRule, second: RewriteRule) -> int:
    """Witness-length bound used by the cross-validation suites."""
    return len(first.source) + len(second.source) + len(first.target) + 2
