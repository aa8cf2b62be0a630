import itertools
from fractions import Fraction

import pytest

from schursigma import PcGroup
from schursigma.autgroup import automorphism_group
from schursigma.cover import free_quotient
from schursigma.measure import (
    NotSchur,
    Unknown,
    Witness,
    abelian_aut_order,
    cl_measure,
    meas_enumerate,
    meas_formula,
    meas_sample,
    meas_value,
    presenting_proportion,
    schur_witness,
    verify_witness,
)
from schursigma.pcgroup import abelian_invariants
from schursigma.errors import ValidationError
from schursigma.harness.selftest import cl_class2_pushforward


def _brute_abelian_aut(a, b, p=3):
    """Count automorphisms of Z/p^a x Z/p^b by checking every pair of images."""
    A, B = p ** a, p ** b
    elems = [(x, y) for x in range(A) for y in range(B)]
    n = 0
    for u, v in itertools.product(elems, repeat=2):
        # the image of e1 must have order dividing p^a, e2 dividing p^b
        if (u[1] * A) % B or (v[0] * B) % A:
            continue
        imgs = {((i * u[0] + j * v[0]) % A, (i * u[1] + j * v[1]) % B) for i in range(A) for j in range(B)}
        n += len(imgs) == A * B
    return n


@pytest.mark.parametrize("exps", [(1, 1), (1, 2), (2, 2), (1, 3)])
def test_abelian_aut_order_matches_brute_force(exps):
    inv = [3 ** e for e in exps]
    assert abelian_aut_order(inv, 3) == _brute_abelian_aut(*exps)


@pytest.mark.parametrize("exps", [(1, 1), (1, 2), (2, 2)])
def test_abelian_aut_order_matches_layered_aut(exps):
    G = PcGroup.abelian(3, list(exps))
    assert automorphism_group(G)[0].order == abelian_aut_order([3 ** e for e in exps], 3)


def test_abelian_aut_order_edge_cases():
    assert abelian_aut_order([], 3) == 1
    assert abelian_aut_order([3, 3], 3) == 48
    assert abelian_aut_order([5], 5) == 4
    with pytest.raises(ValidationError):
        abelian_aut_order([6], 3)


def test_cohen_lenstra_values():
    assert cl_measure((3, 3), 2, 3) == Fraction(16, 27)
    assert cl_measure((3, 9), 2, 3) == Fraction(64, 243)
    # exact values from the definition |GL_2(F_3)|^2 / (|Aut A| 3^4)
    for inv in [(3, 3), (3, 9), (9, 9), (3, 27)]:
        assert cl_measure(inv, 2, 3) == Fraction(48 * 48, abelian_aut_order(inv, 3) * 81)
    with pytest.raises(ValidationError):
        cl_measure((3,), 2, 3)


def test_cohen_lenstra_rank_two_total_is_below_one():
    total = sum(cl_measure((3 ** a, 3 ** b), 2, 3) for a in range(1, 9) for b in range(a, 9))
    assert Fraction(9, 10) < total < 1


def test_class2_enumeration(class2_report):
    rep = class2_report
    assert rep.trials == 81 and rep.total == 1
    by_order = sorted(rep.entries, key=lambda e: e.group.order)
    assert [e.group.order for e in by_order] == [27, 81, 243]
    assert [e.count for e in by_order] == [48, 32, 1]
    assert [e.mass for e in by_order] == [Fraction(16, 27), Fraction(32, 81), Fraction(1, 81)]


def test_class2_pushforward_is_cohen_lenstra(class2_report):
    push = class2_report.by_abelianization()
    assert push == {(3, 3): Fraction(16, 27), (3, 9): Fraction(32, 81), (9, 9): Fraction(1, 81)}
    assert push[(3, 3)] == cl_measure((3, 3), 2, 3)
    # the other classes are Cohen-Lenstra masses summed over invariants capped at 9
    assert push == cl_class2_pushforward(3)
    partial = sum(cl_measure((3, 3 ** b), 2, 3) for b in range(2, 40))
    assert abs(partial - push[(3, 9)]) < Fraction(1, 10 ** 15)


def test_class2_pushforward_at_p5():
    assert sum(cl_class2_pushforward(5).values()) == 1


def test_formula_matches_enumeration(class2_report):
    for e in class2_report.entries:
        assert meas_formula(e.group) == e.mass


def test_formula_arithmetic():
    assert presenting_proportion(3, 2, 2, 432) == Fraction(48 * 48, 432 * 81)
    assert meas_value(3, 2, 3, 2, 432) == Fraction(16, 27)
    assert meas_value(3, 2, 3, 0, 34992) == Fraction(1, 81)


def test_formula_refuses_non_schur():
    G = PcGroup.abelian(3, [1, 2])
    with pytest.raises(ValidationError):
        meas_formula(G)


def test_report_text_and_records(class2_report):
    text = class2_report.to_text()
    assert text.splitlines()[-1] == "total  1/1"
    recs = class2_report.to_records()
    assert sum(r["count"] for r in recs) == 81
    assert {tuple(r["abelianization"]) for r in recs} == {(3, 3), (3, 9), (9, 9)}


def test_enumeration_budget():
    from schursigma.errors import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        meas_enumerate(3, 2, 2, budget=10)


def test_sampling_within_four_standard_errors(class2_report):
    n = 3000
    samp = meas_sample(3, 2, 2, n, seed=7)
    assert samp.trials == n and samp.total == 1
    got = {abelian_invariants(e.group): e.mass for e in samp.entries}
    for e in class2_report.entries:
        q = float(e.mass)
        se = (q * (1 - q) / n) ** 0.5
        assert abs(float(got.get(abelian_invariants(e.group), 0)) - q) <= 4 * se


def test_sampling_is_reproducible():
    a = meas_sample(3, 2, 2, 200, seed=3)
    b = meas_sample(3, 2, 2, 200, seed=3)
    assert [(e.label, e.count) for e in a.entries] == [(e.label, e.count) for e in b.entries]
    assert meas_sample(3, 2, 2, 0).entries == []


def test_class2_witnesses_verify(class2_groups):
    for G in class2_groups:
        w = schur_witness(G)
        assert isinstance(w, Witness) and w.c == 2
        assert verify_witness(G, w)


def test_class1_witness():
    G = PcGroup.elementary_abelian(3, 2)
    w = schur_witness(G)
    assert isinstance(w, Witness) and verify_witness(G, w)


@pytest.mark.parametrize("exps", [(1, 2), (2, 2)])
def test_abelian_pseudo_candidates_are_not_schur(exps):
    # Z/3 x Z/9 and Z/9 x Z/9 have sigma and h <= 2 but no X_2 presentation
    assert isinstance(schur_witness(PcGroup.abelian(3, list(exps))), NotSchur)


def test_witness_budget_gives_unknown(class2_groups):
    assert isinstance(schur_witness(class2_groups[0], budget=5), Unknown)


def test_class3_witness(shallow_tree):
    node = shallow_tree["H3"]
    w = schur_witness(node.group)
    assert isinstance(w, Witness) and w.c == 3
    assert verify_witness(node.group, w)


def test_verify_rejects_wrong_group(class2_groups):
    G1, G2, _ = class2_groups
    w = schur_witness(G1)
    bad = Witness(w.relations, tuple(G2.gen(i) for i in range(2)), 2)
    assert not verify_witness(G2, bad)
    W = free_quotient(3, 2, 2)
    assert not verify_witness(G1, Witness((W.identity(), W.identity()), w.images, 2))
