import random

import pytest

from schursigma import PcGroup
from schursigma.autgroup import automorphism_group
from schursigma.cover import free_quotient, p_cover, standardize
from schursigma.sigma import (
    XSet,
    aut_sigma_order,
    centralizer_brute_force,
    find_sigma,
    fixed_point_count,
    generator_inversion,
    is_sigma,
    sigma_lift,
    x_set,
    z_value,
)

EXP9 = PcGroup(3, 3, [(0, 0, 1), (0, 0, 0), (0, 0, 0)], {(1, 0): (0, 0, 1)})


def test_x2_is_elementary_abelian_of_order_9():
    W = free_quotient(3, 2, 2)
    X = x_set(W)
    assert len(X) == 9
    el = sorted(X.elements)
    assert all(W.mul(a, b) == W.mul(b, a) and W.mul(a, b) in X for a in el for b in el)
    assert all(W.pow(a, 3) == W.identity() for a in el)


@pytest.mark.parametrize("c", [1, 2, 3])
def test_pool_equals_inverted_part(c):
    X = XSet(free_quotient(3, 2, c))
    assert X.equals_inverted_part()
    assert len(X.fiber_sizes()) == 1


def test_x3_size():
    # 3^6, pinned by explicit enumeration
    assert len(XSet(free_quotient(3, 2, 3))) == 729


def test_implicit_membership_matches_explicit():
    W = free_quotient(3, 2, 3)
    explicit = XSet(W)
    implicit = XSet(W, explicit_limit=0)
    assert implicit.elements is None
    rng = random.Random(2)
    for _ in range(30):
        x = implicit.sample(rng)
        assert x in explicit
    for x in list(W.frattini().elements())[:200]:
        assert implicit.contains(x) == explicit.contains(x)


def test_sigma_of_class2_groups(class2_groups):
    for G in class2_groups:
        s = find_sigma(G)
        assert s is not None and is_sigma(G, s.sigma)
        assert s.z == 3 == fixed_point_count(G, s.sigma)


def test_z_does_not_depend_on_the_choice_of_sigma(class2_groups):
    rng = random.Random(7)
    for G in class2_groups:
        A, S, _ = automorphism_group(G)
        s = find_sigma(S, A)
        ops = A.ops
        for _ in range(3):
            a = A.random(rng)
            t = ops.compose(ops.compose(a, s.sigma), ops.inverse(a))
            assert is_sigma(S, t)
            assert z_value(S, t) == s.z == fixed_point_count(S, t)


def test_centraliser_identity(class2_groups):
    for G in class2_groups[:2]:
        s = find_sigma(G)
        assert aut_sigma_order(G, s) == centralizer_brute_force(G, s)


def test_group_without_sigma():
    assert find_sigma(EXP9) is None


def test_generator_inversion_on_free_quotients():
    for c in (1, 2, 3):
        W = free_quotient(3, 2, c)
        s = generator_inversion(W)
        assert is_sigma(W, s.sigma)


def test_sigma_lifts_to_the_cover(class2_groups):
    S = standardize(class2_groups[0])[0]
    s = find_sigma(S)
    cd = p_cover(S)
    lifted = sigma_lift(S, s, cd)
    assert is_sigma(cd.cover, lifted.sigma)
    assert [cd.project(x) for x in lifted.sigma] == list(s.sigma)
