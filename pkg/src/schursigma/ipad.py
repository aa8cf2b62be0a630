"""Index-p abelianization data.

IPAD(G) is the abelianization of G together with the multiset of
abelianizations of its (p^d - 1)/(p - 1) maximal subgroups.  Invariants are
written as ascending lists of p-powers, so [3, 9] is Z/3 x Z/9.

Text syntax: ``[3,3];[3,3,3][3,9]^3`` (head, then entries with multiplicities).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .pcgroup import PcGroup, abelian_invariants

_ENTRY = re.compile(r"\[([\d,\s]*)\](?:\s*\^\s*(\d+))?")


def _entry_key(inv: tuple):
    # more factors first, then ascending factor lists
    return (-len(inv), inv)


@dataclass(frozen=True, order=True)
class Ipad:
    head: tuple
    entries: tuple

    @classmethod
    def make(cls, head, entries) -> "Ipad":
        head = tuple(sorted(int(q) for q in head))
        entries = tuple(sorted((tuple(sorted(int(q) for q in e)) for e in entries), key=_entry_key))
        return cls(head, entries)

    def __str__(self):
        return format_ipad(self)

    @property
    def size(self) -> int:
        return len(self.entries)


def ipad(G: PcGroup) -> Ipad:
    if G.rank < 1:
        raise ValidationError("IPAD needs a nontrivial group")
    return Ipad.make(abelian_invariants(G), [abelian_invariants(M) for M in G.index_p_subgroups()])


def _format_inv(inv) -> str:
    return "[" + ",".join(str(q) for q in inv) + "]"


def format_ipad(I: Ipad) -> str:
    parts = []
    for inv, k in _grouped(I.entries):
        parts.append(_format_inv(inv) + (f"^{k}" if k > 1 else ""))
    return _format_inv(I.head) + ";" + "".join(parts)


def _grouped(entries):
    out = []
    for e in entries:
        if out and out[-1][0] == e:
            out[-1][1] += 1
        else:
            out.append([e, 1])
    return [(e, k) for e, k in out]


def parse_ipad(text: str) -> Ipad:
    s = text.strip()
    if s.startswith("[[") and s.endswith("]"):
        s = s[1:-1]
    head_txt, sep, rest = s.partition(";")
    if not sep:
        raise ValidationError(f"IPAD needs ';' between head and entries: {text!r}")
    m = _ENTRY.fullmatch(head_txt.strip())
    if not m or m.group(2):
        raise ValidationError(f"bad IPAD head: {head_txt!r}")
    head = _parse_inv(m.group(1))
    entries = []
    pos = 0
    rest = rest.strip()
    while pos < len(rest):
        if rest[pos] in " ,":
            pos += 1
            continue
        m = _ENTRY.match(rest, pos)
        if not m:
            raise ValidationError(f"bad IPAD entry near {rest[pos:]!r}")
        entries.extend([_parse_inv(m.group(1))] * int(m.group(2) or 1))
        pos = m.end()
    return Ipad.make(head, entries)


def _parse_inv(txt: str) -> tuple:
    parts = [t.strip() for t in txt.split(",") if t.strip()]
    try:
        return tuple(int(t) for t in parts)
    except ValueError:
        raise ValidationError(f"bad abelian invariants {txt!r}") from None


def is_quotient_of(a, b) -> bool:
    """Whether the abelian p-group with invariants a is a quotient of b."""
    if len(a) > len(b):
        return False
    a = sorted(a, reverse=True) + [1] * (len(b) - len(a))
    b = sorted(b, reverse=True)
    return all(x <= y and y % x == 0 for x, y in zip(a, b))


def ipad_leq(I: Ipad, J: Ipad) -> bool:
    """I <= J: every entry of I is a quotient of a distinct entry of J, and
    likewise for the heads (maximum bipartite matching)."""
    if len(I.entries) != len(J.entries):
        raise ValidationError("IPADs of different sizes are not comparable")
    if not is_quotient_of(I.head, J.head):
        return False
    n = len(I.entries)
    adj = [[j for j in range(n) if is_quotient_of(I.entries[i], J.entries[j])] for i in range(n)]
    match = [-1] * n

    def augment(i, seen):
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if match[j] < 0 or augment(match[j], seen):
                match[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(n))


def is_settled(G: PcGroup) -> bool:
    """IPAD(G) = IPAD(G / P_{c-1}(G)) where c is the p-class of G."""
    c = G.p_class
    if c < 2:
        raise ValidationError("settledness needs p-class at least 2")
    Q, _ = G.quotient(G.lower_p_central[c - 1], check_normal=False)
    return ipad(G) == ipad(Q)


@dataclass
class SurveyRow:
    ipad: Ipad
    resolved: Fraction
    unresolved: Fraction


def ipad_survey(tree, max_class: int | None = None) -> dict:
    """Resolved and unresolved mass per IPAD.

    A node is resolved when it is terminal or settled; its whole mass goes to
    its IPAD and its descendants are not visited again.  Open frontier nodes
    (unexpanded, or beyond max_class) contribute unresolved mass under their
    current IPAD, which is a lower bound for the IPADs of their descendants.
    Mass retained by a non-terminal node (tuples presenting the node itself)
    is resolved at that node.
    """
    rows: dict = {}

    def add(I, resolved=Fraction(0), unresolved=Fraction(0)):
        r = rows.setdefault(I, SurveyRow(I, Fraction(0), Fraction(0)))
        r.resolved += resolved
        r.unresolved += unresolved

    stack = list(reversed(tree.roots()))
    while stack:
        node = stack.pop()
        if not node.schur:
            continue
        if node.terminal or node.settled:
            add(node.ipad, resolved=node.measure)
            continue
        beyond = max_class is not None and node.cls >= max_class
        if not node.expanded or beyond:
            add(node.ipad, unresolved=node.measure)
            continue
        if node.retained:
            add(node.ipad, resolved=node.retained)
        stack.extend(reversed([ch for ch in tree.children(node) if ch.schur]))
    return dict(sorted(rows.items(), key=lambda kv: (-(kv[1].resolved + kv[1].unresolved), kv[0])))


def ipad_multiset(I: Ipad) -> Counter:
    return Counter(I.entries)
