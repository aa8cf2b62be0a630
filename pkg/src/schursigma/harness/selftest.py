"""Checks of the reference facts this package reproduces, runnable from the CLI.

Each check returns (ok, detail).  Exact rationals are compared exactly.
"""

from __future__ import annotations

import sys
import time
from fractions import Fraction
from functools import lru_cache

from ..autgroup import automorphism_group
from ..cover import descendants, free_quotient, h_rank, is_terminal, p_cover, schur_multiplier_rank
from ..ipad import ipad_survey, parse_ipad
from ..measure import cl_measure, meas_enumerate, meas_formula, meas_sample
from ..pcgroup import PcGroup, abelian_invariants
from ..sigma import XSet, centralizer_brute_force, find_sigma

CLASS2_MASSES = (Fraction(16, 27), Fraction(32, 81), Fraction(1, 81))
CLASS2_AUT = (432, 972, 34992)
CLASS2_H = (2, 1, 0)
SHALLOW_LINES = {
    "[3,3];[3,3,3][3,9]^3": Fraction(128, 729),
    "[3,9];[3,3,9]^2[3,27]^2": Fraction(256, 2187),
    "[3,3];[3,3,3]^3[3,9]": Fraction(64, 729),
    "[3,3];[3,3,3]^2[3,9]^2": Fraction(64, 729),
    "[3,3];[3,9]^4": Fraction(16, 729),
}
CL_VALUES = {(3, 3): "0.5926", (3, 9): "0.2634", (3, 27): "0.0878", (3, 81): "0.0293"}


@lru_cache(maxsize=None)
def class2_report():
    return meas_enumerate(3, 2, 2)


def class2_groups():
    """G1, G2, G3 ordered by size."""
    return [e.group for e in sorted(class2_report().entries, key=lambda e: e.group.order)]


@lru_cache(maxsize=None)
def shallow_tree():
    from ..tree import expand

    return expand(3, 2, 4, max_order=5)


# -- checks --------------------------------------------------------------------------


def check_free_quotients():
    W1, W2 = free_quotient(3, 2, 1), free_quotient(3, 2, 2)
    X = XSet(W2)
    elems = sorted(X.elements)
    abelian = all(W2.mul(a, b) == W2.mul(b, a) for a in elems for b in elems)
    exp3 = all(W2.pow(a, 3) == W2.identity() for a in elems)
    ok = W1.order == 9 and W2.order == 243 and len(X) == 9 and abelian and exp3
    return ok, f"|W1|={W1.order} |W2|={W2.order} |X2|={len(X)} elementary abelian={abelian and exp3}"


def check_class2_enumeration():
    rep = class2_report()
    entries = sorted(rep.entries, key=lambda e: e.group.order)
    counts = [e.count for e in entries]
    masses = tuple(e.mass for e in entries)
    return counts == [48, 32, 1] and masses == CLASS2_MASSES and rep.total == 1, f"counts={counts} masses={[str(m) for m in masses]}"


def check_formula_agreement():
    out, ok = [], True
    for G, mass, aut, h in zip(class2_groups(), CLASS2_MASSES, CLASS2_AUT, CLASS2_H):
        A = automorphism_group(G)[0].order
        s = find_sigma(G)
        hh = h_rank(G)
        m = meas_formula(G)
        ok &= (A, s.z, hh, m) == (aut, 3, h, mass)
        out.append(f"|Aut|={A} z={s.z} h={hh} meas={m}")
    return ok, "; ".join(out)


def check_sigma_centraliser():
    out, ok = [], True
    for G in class2_groups():
        s = find_sigma(G)
        A = automorphism_group(G)[0].order
        c = centralizer_brute_force(G, s)
        ok &= c * s.z ** 2 == A
        out.append(f"{c}*{s.z}^2={A}")
    return ok, "; ".join(out)


def check_descendants():
    G1, G2, _ = class2_groups()
    kids = descendants(G1)
    hs = [h_rank(k) for k in kids]
    tree = shallow_tree()
    h3, h5 = tree["H3"], tree["H5"]
    g2_schur = [c for c in tree.children(tree["G2"]) if c.schur]
    ok = (len(kids) == 11 and hs.count(2) == 7 and h3.terminal and h5.terminal
          and (h3.order, h5.order) == (243, 243)
          and (h3.measure, h5.measure) == (Fraction(128, 729), Fraction(64, 729))
          and str(h3.ipad) == "[3,3];[3,3,3][3,9]^3" and str(h5.ipad) == "[3,3];[3,3,3]^2[3,9]^2"
          and len(g2_schur) == 22)
    return ok, f"G1: {len(kids)} children, {hs.count(2)} with h=2; G2: {len(g2_schur)} Schur children"


def check_shallow_survey():
    rows = ipad_survey(shallow_tree(), 4)
    got = {k: rows.get(parse_ipad(k)) for k in SHALLOW_LINES}
    ok = all(r is not None and r.resolved == v for (k, v), r in zip(SHALLOW_LINES.items(), got.values()))
    return ok, ", ".join(f"{k}={got[k].resolved if got[k] else None}" for k in SHALLOW_LINES)


def materialised_groups():
    """Every group materialised by the other checks."""
    groups = list(class2_groups()) + [free_quotient(3, 2, 1), free_quotient(3, 2, 2)]
    G1 = class2_groups()[0]
    groups += descendants(G1)
    groups += [n.group for n in shallow_tree() if n.cover is not None]
    return groups


def check_trivial_multiplier():
    bad = []
    n = 0
    for G in materialised_groups():
        if G.rank < 2:
            continue
        cd = p_cover(G if G.definitions is not None and G.is_weighted else _std(G))
        n += 1
        if schur_multiplier_rank(G, cd) == 0 and cd.nuclear_rank != 0:
            bad.append(G.order)
    Z9 = PcGroup.cyclic(3, 2)
    z9 = schur_multiplier_rank(Z9) == 0 and not is_terminal(Z9)
    return not bad and z9, f"{n} non-cyclic groups checked, violations={bad}; Z/9 counterexample={z9}"


def _std(G):
    from ..cover import standardize

    return standardize(G)[0]


def check_cohen_lenstra():
    from .census import round_half_up

    vals = {cg: round_half_up(cl_measure(cg, 2, 3)) for cg in CL_VALUES}
    pushed = class2_report().by_abelianization()
    # a class-2 quotient sees the abelianization only modulo 9
    exact = pushed == cl_class2_pushforward(3)
    return vals == CL_VALUES and exact, f"{vals}; pushforward exact={exact}"


def cl_class2_pushforward(p: int = 3, depth: int = 12) -> dict:
    """Exact Cohen-Lenstra mass of each rank-2 abelianization type seen modulo p^2.

    A class-2 quotient only sees invariants capped at p^2, so the types are
    (p, p), (p, p^2) and (p^2, p^2).  The last two are geometric sums: the mass
    of (p, p^b) drops by p from b to b+1 once b >= 2, and raising both exponents
    by one divides by p^4.  Both scaling laws are checked up to depth.
    """
    q = p * p
    for b in range(2, depth):
        if cl_measure((p, p ** (b + 1)), 2, p) * p != cl_measure((p, p ** b), 2, p):
            raise AssertionError(f"scaling fails at (p, p^{b})")
    for a in range(1, depth):
        for b in range(a, depth):
            if cl_measure((p ** (a + 1), p ** (b + 1)), 2, p) * p ** 4 != cl_measure((p ** a, p ** b), 2, p):
                raise AssertionError(f"scaling fails at (p^{a}, p^{b})")
    small = cl_measure((p, p), 2, p)
    mixed = cl_measure((p, q), 2, p) * Fraction(p, p - 1)
    # total = small + mixed + total / p^4
    total = (small + mixed) / (1 - Fraction(1, p ** 4))
    return {(p, p): small, (p, q): mixed, (q, q): total / p ** 4}


def check_harness():
    from .census import census, compare, round_half_up, bundled_predictions
    from .fielddata import load_census_data

    recs = load_census_data()
    rep = census(recs)
    cmp = compare(rep, bundled_predictions())
    top = cmp.rows[0]
    obs, pred = round_half_up(top.observed), round_half_up(top.predicted)
    cgs = [round_half_up(o) for _, o, _ in cmp.class_groups]
    ok = (rep.rows[0].counts == [105, 138, 116, 124, 114] and rep.total == 3190
          and rep.incomplete.total == 410 and (obs, pred) == ("0.1871", "0.1756")
          and cgs == ["0.6332", "0.2743", "0.0740", "0.0107"])
    return ok, f"top row {obs} vs {pred}; class groups {cgs}"


def check_properties(n_samples: int = 10_000):
    from ..ipad import ipad_leq
    from ..tree import measure_flow

    rep = class2_report()
    mass_ok = rep.total == 1
    tree = shallow_tree()
    flow_ok = all(a == b for _, a, b in measure_flow(tree))
    inverted_ok = all(XSet(free_quotient(3, 2, c)).equals_inverted_part() for c in (1, 2, 3))
    mono_ok = True
    for node in tree:
        for ch in tree.children(node):
            mono_ok &= ipad_leq(node.ipad, ch.ipad)
    samp = meas_sample(3, 2, 2, n_samples, seed=1)
    got = {abelian_invariants(e.group): e.mass for e in samp.entries}
    sample_ok = True
    for e in rep.entries:
        q = float(e.mass)
        se = (q * (1 - q) / n_samples) ** 0.5
        est = float(got.get(abelian_invariants(e.group), 0))
        sample_ok &= abs(est - q) <= 4 * se
    ok = mass_ok and flow_ok and inverted_ok and mono_ok and sample_ok
    return ok, f"mass={mass_ok} flow={flow_ok} inverted-set={inverted_ok} monotone={mono_ok} sampling={sample_ok}"


CHECKS = [
    ("free quotients and X_2", check_free_quotients, False),
    ("class-2 enumeration", check_class2_enumeration, False),
    ("closed form against enumeration", check_formula_agreement, False),
    ("sigma centraliser identity", check_sigma_centraliser, False),
    ("descendant counts", check_descendants, True),
    ("IPAD survey, shallow lines", check_shallow_survey, True),
    ("trivial multiplier implies terminal", check_trivial_multiplier, True),
    ("Cohen-Lenstra values and pushforward", check_cohen_lenstra, False),
    ("census and comparison", check_harness, False),
    ("property suites", check_properties, True),
]


def run_selftest(quick: bool = False, stream=sys.stdout) -> bool:
    all_ok = True
    for k, (name, fn, slow) in enumerate(CHECKS, start=1):
        if quick and slow:
            print(f"[skip] {k:2d} {name}", file=stream)
            continue
        t = time.time()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, reported with the rest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        print(f"[{'pass' if ok else 'FAIL'}] {k:2d} {name} ({time.time() - t:.1f}s): {detail}", file=stream)
    return all_ok
