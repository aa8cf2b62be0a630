import random

import pytest

from schursigma import PcGroup, ValidationError
from schursigma.autgroup import (
    AutOps,
    aut_order,
    automorphism_group,
    brute_force_aut_order,
    fingerprint,
    fingerprint_label,
    is_isomorphic,
)
from schursigma.cover import standardize

# extraspecial group of order 27 and exponent 9: a^3 = c, [b, a] = c
EXP9 = PcGroup(3, 3, [(0, 0, 1), (0, 0, 0), (0, 0, 0)], {(1, 0): (0, 0, 1)})
HEIS = PcGroup(3, 3, [(0, 0, 0), (0, 0, 0), (0, 0, 0)], {(1, 0): (0, 0, 1)})


@pytest.mark.parametrize("G", [
    PcGroup.elementary_abelian(3, 2),
    PcGroup.cyclic(3, 2),
    PcGroup.abelian(3, [1, 2]),
    EXP9,
    HEIS,
], ids=["C3xC3", "C9", "C3xC9", "exp9", "heisenberg"])
def test_layered_order_matches_brute_force(G):
    assert automorphism_group(G)[0].order == brute_force_aut_order(G)


def test_class2_aut_orders(class2_groups):
    assert [aut_order(G)[0] for G in class2_groups] == [432, 972, 34992]


def test_generators_are_automorphisms(class2_groups):
    for G in class2_groups:
        _, gens = aut_order(G)
        for a in gens:
            assert G.is_homomorphism(G.images_from_generators(a, G), G)


def test_random_elements_inverse_and_membership(class2_groups):
    rng = random.Random(5)
    A, S, _ = automorphism_group(class2_groups[1])
    ops = A.ops
    for _ in range(10):
        a = A.random(rng)
        assert ops.is_automorphism(a)
        assert ops.compose(a, ops.inverse(a)) == ops.identity()
        assert A.contains(a)


def test_isomorphism_search(class2_groups):
    G1 = class2_groups[0]
    S, images, _ = standardize(G1)
    phi = is_isomorphic(S, G1)
    assert phi is not None
    assert S.is_homomorphism(S.images_from_generators(phi, G1), G1)
    assert is_isomorphic(HEIS, EXP9) is None
    assert is_isomorphic(G1, HEIS) is not None


def test_fingerprint_is_an_invariant(class2_groups):
    G1 = class2_groups[0]
    S = standardize(G1)[0]
    assert fingerprint(S) == fingerprint(G1)
    assert fingerprint_label(S) == fingerprint_label(G1)
    assert fingerprint(HEIS) != fingerprint(EXP9)
    assert fingerprint_label(G1).startswith("3^3c2-")


def test_autops_cached_and_needs_weights():
    S = standardize(HEIS)[0]
    assert AutOps.of(S) is AutOps.of(S)
    with pytest.raises(ValidationError):
        AutOps.of(HEIS)
