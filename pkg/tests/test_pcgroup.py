import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schursigma import NotNormalError, PcGroup, PresentationError, ValidationError, abelian_invariants
from schursigma.cover import free_quotient
from schursigma.pcgroup import (
    format_presentation,
    index_p_subgroups,
    lower_p_central,
    multiply,
    parse_presentation,
    quotient,
)

W3 = free_quotient(3, 2, 3)


def elements_of(G):
    return st.tuples(*[st.integers(0, G.p - 1) for _ in range(G.n)])


@settings(max_examples=60, deadline=None)
@given(elements_of(W3), elements_of(W3), elements_of(W3))
def test_collection_is_associative(a, b, c):
    assert W3.mul(W3.mul(a, b), c) == W3.mul(a, W3.mul(b, c))


@settings(max_examples=60, deadline=None)
@given(elements_of(W3))
def test_inverse_and_power(a):
    assert W3.mul(a, W3.inv(a)) == W3.identity()
    o = W3.element_order(a)
    assert W3.pow(a, o) == W3.identity()
    assert o in (1, 3, 9, 27)


def test_abelian_groups_and_invariants():
    G = PcGroup.abelian(3, [1, 2])
    assert G.order == 27
    assert abelian_invariants(G) == (3, 9)
    assert abelian_invariants(PcGroup.cyclic(3, 3)) == (27,)
    assert abelian_invariants(PcGroup.elementary_abelian(5, 3)) == (5, 5, 5)


def test_inconsistent_presentation_is_rejected():
    # g1^3 = g2 with g2 central of order 3 but g2 also a commutator that breaks associativity
    with pytest.raises(PresentationError):
        PcGroup(3, 3, [(0, 1, 0), (0, 0, 0), (0, 0, 0)], {(1, 0): (0, 0, 1)})


def test_even_prime_rejected():
    with pytest.raises(PresentationError):
        PcGroup(2, 1, [(0,)], {})


def test_text_round_trip_keeps_weights_and_definitions():
    text = format_presentation(W3)
    G = parse_presentation(text)
    assert G.relation_data() == W3.relation_data()
    assert G.weights == W3.weights and G.definitions == W3.definitions
    assert format_presentation(G) == text


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("p 3 n 2\n", "expected"),
    ("p 3 n 2 d 2\nP 1 : g2 g1\n", "normal order"),
    ("p 3 n 2 d 2\nP 1 : g1\n", "later generators"),
    ("p 3 n 2 d 2\nP 1 : g2^3\n", "exponent"),
    ("p 3 n 2 d 1\n", "rank"),
    ("p 3 n 2 d 2\nX 1 : g2\n", "unknown"),
])
def test_parse_errors(text, msg):
    with pytest.raises(PresentationError, match=msg):
        parse_presentation(text)


def test_normal_closure_and_quotient():
    W2 = free_quotient(3, 2, 2)
    N = W2.normal_closure([W2.gen(2)])
    Q, proj = quotient(W2, N)
    assert N.order * Q.order == W2.order
    for x in (W2.gen(0), W2.gen(1)):
        for y in (W2.gen(0), W2.gen(1)):
            assert proj(W2.mul(x, y)) == Q.mul(proj(x), proj(y))


def test_quotient_by_non_normal_subgroup():
    W2 = free_quotient(3, 2, 2)
    H = W2.subgroup([W2.gen(0)])
    with pytest.raises(NotNormalError):
        quotient(W2, H)


def test_lower_p_central_of_free_quotient():
    # layer ranks 2, 3, 5 of W_{2,3}, pinned from the iterated cover
    series, c = lower_p_central(W3)
    assert c == 3
    assert [len(series[k]) - len(series[k + 1]) for k in range(c)] == [2, 3, 5]


def test_index_p_subgroups():
    subs = index_p_subgroups(free_quotient(3, 2, 2))
    assert len(subs) == 4
    assert all(len(H) == 4 for H in subs)


def test_multiply_validates_length():
    with pytest.raises(ValidationError):
        multiply(W3, (1, 0), (0, 1))


def test_homomorphism_from_generator_images():
    W2 = free_quotient(3, 2, 2)
    imgs = [W2.gen(1), W2.gen(0)]
    full = W2.images_from_generators(imgs, W2)
    assert W2.is_homomorphism(full, W2)
