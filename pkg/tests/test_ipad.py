from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schursigma import PcGroup
from schursigma.errors import ValidationError
from schursigma.ipad import (
    Ipad,
    format_ipad,
    ipad,
    ipad_leq,
    ipad_survey,
    is_quotient_of,
    is_settled,
    parse_ipad,
)

invariants = st.lists(st.sampled_from([3, 9, 27, 81]), min_size=1, max_size=3)
ipads = st.builds(lambda h, es: Ipad.make(h, es), invariants, st.lists(invariants, min_size=4, max_size=4))


def test_parse_format_round_trip_of_display_lines():
    for text in ["[3,3];[3,3,3][3,9]^3", "[3,9];[3,3,9]^2[3,27]^2", "[3,3];[3,9]^4",
                 "[3,9];[3,3,3,3][3,27]^3", "[3,3];[3,3,3][3,9]^2[9,27]"]:
        assert format_ipad(parse_ipad(text)) == text


def test_parse_accepts_spacing_and_outer_brackets():
    assert parse_ipad(" [[3, 3]; [3,9]^3 [3,3,3]] ") == parse_ipad("[3,3];[3,3,3][3,9]^3")


def test_canonical_order_puts_more_factors_first():
    I = Ipad.make([9, 3], [[9, 3], [3, 3, 3], [3, 9], [27, 9]])
    assert str(I) == "[3,9];[3,3,3][3,9]^2[9,27]"


@pytest.mark.parametrize("bad", ["[3,3]", "[3,x];[3,3]", "[3,3]^2;[3,3]", "[3,3];[3,3]!"])
def test_parse_errors(bad):
    with pytest.raises(ValidationError):
        parse_ipad(bad)


@given(ipads)
def test_round_trip_property(I):
    assert parse_ipad(format_ipad(I)) == I


@given(ipads)
def test_leq_is_reflexive(I):
    assert ipad_leq(I, I)


@settings(max_examples=60)
@given(ipads, ipads, ipads)
def test_leq_is_transitive(a, b, c):
    if ipad_leq(a, b) and ipad_leq(b, c):
        assert ipad_leq(a, c)


def test_quotient_relation():
    assert is_quotient_of((3, 3), (3, 9))
    assert is_quotient_of((9,), (3, 9))
    assert not is_quotient_of((9, 9), (3, 27))
    assert not is_quotient_of((3, 3, 3), (9, 9))


def test_leq_uses_a_matching():
    a = parse_ipad("[3,3];[3,9][9,9][3,3]^2")
    b = parse_ipad("[3,3];[3,27][9,27][3,3]^2")
    assert ipad_leq(a, b)
    # two entries of a both need the single [9,27] of c
    c = parse_ipad("[3,3];[3,3][9,27][3,3]^2")
    assert not ipad_leq(a, c)
    with pytest.raises(ValidationError):
        ipad_leq(a, parse_ipad("[3,3];[3,3]"))


def _brute_maximal_abelianizations(G):
    """Abelianizations of index-p subgroups of a group of order 27, by element orders."""
    # every subgroup of order 9 is abelian, so it is Z/9 or Z/3 x Z/3
    elems = list(G.elements())
    e = G.identity()

    def order(x):
        k, y = 1, x
        while y != e:
            y, k = G.mul(y, x), k + 1
        return k

    out = []
    seen = set()
    for x in elems:
        for y in elems:
            S = {e}
            frontier = [e]
            while frontier:
                z = frontier.pop()
                for gen in (x, y):
                    w = G.mul(z, gen)
                    if w not in S:
                        S.add(w)
                        frontier.append(w)
            if len(S) == 9 and frozenset(S) not in seen:
                seen.add(frozenset(S))
                out.append((9,) if any(order(s) == 9 for s in S) else (3, 3))
    return sorted(out)


def test_ipad_of_order_27_against_brute_force(class2_groups):
    G1 = class2_groups[0]
    I = ipad(G1)
    assert I.head == (3, 3) and I.size == 4
    assert sorted(I.entries) == _brute_maximal_abelianizations(G1)


def test_ipad_of_elementary_abelian():
    assert str(ipad(PcGroup.elementary_abelian(3, 2))) == "[3,3];[3]^4"


def test_settledness(shallow_tree):
    h3 = shallow_tree["H3"]
    assert str(h3.ipad) == "[3,3];[3,3,3][3,9]^3"
    assert is_settled(h3.group) == h3.settled
    for node in shallow_tree:
        if node.parent is not None and node.cls >= 2:
            assert node.settled == (node.ipad == shallow_tree[node.parent].ipad)
    with pytest.raises(ValidationError):
        is_settled(PcGroup.elementary_abelian(3, 2))


def test_ipads_grow_along_the_tree(shallow_tree):
    for node in shallow_tree:
        for ch in shallow_tree.children(node):
            assert ipad_leq(node.ipad, ch.ipad)


def test_survey_shallow_lines(shallow_tree):
    rows = ipad_survey(shallow_tree, 4)
    expected = {
        "[3,3];[3,3,3][3,9]^3": Fraction(128, 729),
        "[3,9];[3,3,9]^2[3,27]^2": Fraction(256, 2187),
        "[3,3];[3,3,3]^3[3,9]": Fraction(64, 729),
        "[3,3];[3,3,3]^2[3,9]^2": Fraction(64, 729),
        "[3,3];[3,9]^4": Fraction(16, 729),
    }
    for text, value in expected.items():
        assert rows[parse_ipad(text)].resolved == value


def test_survey_conserves_mass(shallow_tree):
    rows = ipad_survey(shallow_tree, 4)
    assert sum(r.resolved + r.unresolved for r in rows.values()) == 1


def test_survey_of_root_only():
    from schursigma.tree import expand

    tree = expand(3, 2, max_class=1)
    rows = ipad_survey(tree, 1)
    assert [(r.resolved, r.unresolved) for r in rows.values()] == [(0, 1)]
