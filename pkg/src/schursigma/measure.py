"""Measures on Schur groups.

Two independent routes are provided:

* the closed formula Meas(G) = z^g/|Aut G| * p^(-gh) prod_k (p^g - p^(g-k)) prod_k (p^g - p^(h-k)),
* direct counting of relation tuples drawn from X_c (``meas_enumerate`` at a
  fixed class, and ``RelationLifter`` which pushes tuples one class deeper).

All masses are exact ``Fraction`` values.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .cover import CoverData, free_quotient, p_cover
from .errors import BudgetExceeded, ValidationError
from .pcgroup import PcGroup, abelian_invariants, is_prime
from .sigma import XSet, generator_inversion

DEFAULT_TUPLE_BUDGET = 200_000


# -- closed formulas -------------------------------------------------------------


def _valuation(q: int, p: int) -> int:
    e = 0
    while q > 1:
        if q % p:
            raise ValidationError(f"{q} is not a power of {p}")
        q //= p
        e += 1
    return e


def abelian_aut_order(invariants: Sequence[int], p: int) -> int:
    """|Aut| of Z/p^e1 x ... x Z/p^ek (formula of Hillar and Rhea)."""
    e = sorted(_valuation(q, p) for q in invariants if q > 1)
    k = len(e)
    if k == 0:
        return 1
    dmax = [max(j for j in range(k) if e[j] == e[i]) + 1 for i in range(k)]
    cmin = [min(j for j in range(k) if e[j] == e[i]) + 1 for i in range(k)]
    out = 1
    for i in range(k):
        out *= p ** dmax[i] - p ** i
    for j in range(k):
        out *= p ** (e[j] * (k - dmax[j]))
    for i in range(k):
        out *= p ** ((e[i] - 1) * (k - cmin[i] + 1))
    return out


def _gl_factor(p: int, g: int, h: int) -> int:
    """prod_{k=1}^{h} (p^g - p^(h-k)): ordered g-tuples spanning F_p^h, times p^(g h)/p^(g h)."""
    out = 1
    for k in range(1, h + 1):
        out *= p ** g - p ** (h - k)
    return out


def cl_measure(invariants: Sequence[int], g: int, p: int | None = None) -> Fraction:
    """Cohen-Lenstra mass of a finite abelian p-group of rank g."""
    inv = [q for q in invariants if q > 1]
    if len(inv) != g:
        raise ValidationError(f"invariants {list(invariants)} do not have rank {g}")
    if p is None:
        p = min(q for q in inv) if inv else 2
        while not is_prime(p):
            p = next(f for f in range(2, p + 1) if p % f == 0)
    return Fraction(_gl_factor(p, g, g) ** 2, abelian_aut_order(inv, p) * p ** (g * g))


def presenting_proportion(p: int, g: int, h: int, aut: int) -> Fraction:
    """Proportion of g-tuples in Phi(F) presenting a Schur group with the given data."""
    return Fraction(_gl_factor(p, g, g) * _gl_factor(p, g, h), aut * p ** (g * h))


def meas_value(p: int, g: int, z: int, h: int, aut: int) -> Fraction:
    return Fraction(z ** g) * presenting_proportion(p, g, h, aut)


def meas_formula(G: PcGroup, *, certified: bool = False, z: int | None = None,
                 h: int | None = None, aut: int | None = None) -> Fraction:
    """Meas(G) from the closed formula.

    G must be certified Schur: either ``certified=True`` is passed (the caller
    holds a witness) or a witness is found here by ``schur_witness``.
    """
    if not certified:
        w = schur_witness(G)
        if not isinstance(w, Witness):
            raise ValidationError(f"group is not certified Schur ({w})")
    from .autgroup import automorphism_group
    from .cover import h_rank
    from .sigma import find_sigma

    if aut is None:
        aut = automorphism_group(G)[0].order
    if h is None:
        h = h_rank(G)
    if z is None:
        s = find_sigma(G)
        if s is None:
            raise ValidationError("group has no sigma-automorphism")
        z = s.z
    return meas_value(G.p, G.rank, z, h, aut)


# -- reports ---------------------------------------------------------------------


@dataclass
class MeasureEntry:
    label: str
    group: PcGroup
    count: int
    mass: Fraction
    witness: tuple | None = None
    fingerprint: tuple = field(default=(), repr=False)


@dataclass
class MeasureReport:
    p: int
    g: int
    c: int
    method: str
    entries: list
    trials: int
    seed: int | None = None

    @property
    def total(self) -> Fraction:
        return sum((e.mass for e in self.entries), Fraction(0))

    def by_abelianization(self) -> dict:
        out: dict = {}
        for e in self.entries:
            key = abelian_invariants(e.group)
            out[key] = out.get(key, Fraction(0)) + e.mass
        return out

    def to_text(self) -> str:
        lines = [f"# p={self.p} g={self.g} c={self.c} method={self.method} trials={self.trials}"
                 + (f" seed={self.seed}" if self.seed is not None else "")]
        for e in self.entries:
            wit = " " + _format_witness(e.witness) if e.witness else ""
            lines.append(f"{e.label}  {e.mass.numerator}/{e.mass.denominator}  {self.method}{wit}")
        t = self.total
        lines.append(f"total  {t.numerator}/{t.denominator}")
        return "\n".join(lines) + "\n"

    def to_records(self) -> list:
        return [
            {
                "label": e.label,
                "order": e.group.order,
                "count": e.count,
                "mass": f"{e.mass.numerator}/{e.mass.denominator}",
                "abelianization": list(abelian_invariants(e.group)),
                "witness": [list(r) for r in e.witness] if e.witness else None,
            }
            for e in self.entries
        ]


def _format_witness(w) -> str:
    return "(" + ";".join("".join(str(x) for x in r) for r in w) + ")"


class _Classifier:
    """Buckets groups by fingerprint and confirms with an isomorphism test."""

    def __init__(self):
        self.classes: list = []  # [fingerprint, group, count, first tuple]

    def add(self, Q: PcGroup, tup, weight: int = 1) -> int:
        from .autgroup import fingerprint, is_isomorphic

        fp = fingerprint(Q)
        for idx, cls in enumerate(self.classes):
            if cls[0] == fp and (cls[1].relation_data() == Q.relation_data() or is_isomorphic(cls[1], Q) is not None):
                cls[2] += weight
                return idx
        self.classes.append([fp, Q, weight, tup])
        return len(self.classes) - 1


def _quotient_by_tuple(W: PcGroup, tup):
    N = W.normal_closure(tup)
    Q, _ = W.quotient(N, check_normal=False)
    return Q


def _report(p, g, c, method, clf: _Classifier, total: int, seed=None) -> MeasureReport:
    from .autgroup import fingerprint_label
    from .cover import standardize

    entries = []
    for fp, Q, count, tup in clf.classes:
        S = standardize(Q)[0] if Q.n else Q
        entries.append(MeasureEntry(fingerprint_label(Q), S, count, Fraction(count, total) if total else Fraction(0), tup, fp))
    entries.sort(key=lambda e: (-e.mass, e.group.order, e.label))
    return MeasureReport(p, g, c, method, entries, total, seed)


def meas_enumerate(p: int, g: int, c: int, budget: int = DEFAULT_TUPLE_BUDGET) -> MeasureReport:
    """Exact counts over all of X_c^g."""
    W = free_quotient(p, g, c)
    X = XSet(W)
    if X.elements is None or len(X.elements) ** g > budget:
        raise BudgetExceeded("too many relation tuples for exact enumeration; use meas_sample", bound=budget)
    pool = sorted(X.elements)
    clf = _Classifier()
    cache: dict = {}
    for tup in itertools.product(pool, repeat=g):
        N = W.normal_closure(tup)
        key = tuple(sorted(N.depths)), tuple(N.pcgs)
        if key in cache:
            clf.classes[cache[key]][2] += 1
            continue
        Q, _ = W.quotient(N, check_normal=False)
        cache[key] = clf.add(Q, tup)
    return _report(p, g, c, "enumeration", clf, len(pool) ** g)


def meas_sample(p: int, g: int, c: int, n: int, seed: int = 0) -> MeasureReport:
    """Empirical frequencies from n tuples drawn uniformly from X_c^g."""
    rng = random.Random(seed)
    clf = _Classifier()
    if n <= 0:
        return MeasureReport(p, g, c, "sample", [], 0, seed)
    W = free_quotient(p, g, c)
    X = XSet(W, explicit_limit=0)
    cache: dict = {}
    for _ in range(n):
        tup = tuple(X.sample(rng) for _ in range(g))
        N = W.normal_closure(tup)
        key = tuple(N.pcgs)
        if key in cache:
            clf.classes[cache[key]][2] += 1
            continue
        Q, _ = W.quotient(N, check_normal=False)
        cache[key] = clf.add(Q, tup)
    return _report(p, g, c, "sample", clf, n, seed)


# -- lifting relation tuples one class deeper ------------------------------------


class RelationLifter:
    """Relations in X_{c+1} above given relations in X_c.

    W1 = W_{c+1} is the p-cover of W = W_c, so normal words of W are normal
    words of W1.  A relation r in X_c is lifted by writing r = t^-1 sigma(t)
    with t = r^((o-1)/2) (o the order of r) and applying the same formula in
    W1.  All other lifts differ by elements of E, the sigma-inverted part of
    P_c(W1).
    """

    def __init__(self, p: int, g: int, c: int):
        self.W = free_quotient(p, g, c)
        self.cdW = p_cover(self.W)
        self.W1 = self.cdW.cover
        self.sigma1 = generator_inversion(self.W1)
        self._full = self.sigma1.full
        W1, n = self.W1, self.W.n
        S = []
        for t in range(self.cdW.multiplicator_rank):
            S.append(self.cdW.tail_vector(W1.word_value(self._full, W1.gen(n + t), W1)))
        S = linalg.transpose(S)
        m = len(S)
        shifted = tuple(tuple((S[i][j] + int(i == j)) % p for j in range(m)) for i in range(m))
        self.E = [self.cdW.tail_element(v) for v in linalg.nullspace(shifted, m, p)]

    def phi(self, t):
        W1 = self.W1
        return W1.mul(W1.inv(t), W1.word_value(self._full, t, W1))

    def lift(self, r):
        W = self.W
        o = W.element_order(r)
        t = W.pow(r, (o - 1) // 2)
        return self.phi(self.cdW.lift(t))


@dataclass
class ChildSpan:
    """One span M of lifted relation images, with the tuples producing it."""

    space: tuple
    count: int
    sample: tuple  # coefficient tuple a (one per relation) realising it


@dataclass
class LiftData:
    cd: CoverData
    m0: tuple           # images of the base lifts in multiplicator coordinates
    nminus: tuple       # basis (rref) of the reachable part of the nucleus
    emap: tuple         # for each nminus basis vector, an element of E mapping to it
    spans: dict         # subspace -> ChildSpan
    total: int

    @property
    def retained(self) -> int:
        full = tuple(tuple(int(i == j) for j in range(self.cd.multiplicator_rank)) for i in range(self.cd.multiplicator_rank))
        sp = self.spans.get(full)
        return sp.count if sp else 0


def lift_spans(cd: CoverData, images: Sequence, witness: Sequence, lifter: RelationLifter,
               budget: int = DEFAULT_TUPLE_BUDGET) -> LiftData:
    """Distribution of M = span(images of lifted relations) in the multiplicator.

    ``images`` are the images in G = cd.base of the generators of W_c under an
    epimorphism whose kernel is the normal closure of ``witness``.
    """
    C, p = cd.cover, cd.base.p
    g = len(images)
    lifted = [cd.lift(x) for x in images]
    full = lifter.W1.images_from_generators(lifted, C)

    def push(y):
        return lifter.W1.word_value(full, y, C)

    m0 = []
    for r in witness:
        v = push(lifter.lift(r))
        if any(v[: cd.tail_start]):
            raise ValidationError("witness does not present the base group")
        m0.append(cd.tail_vector(v))
    evecs = [cd.tail_vector(push(e)) for e in lifter.E]
    nminus, piv = linalg.rref(evecs, p)
    # an E-preimage for each basis vector of nminus
    emap = []
    for row in nminus:
        coeffs = linalg.solve(linalg.transpose(evecs), row, p)
        e = lifter.W1.identity()
        for x, c in zip(lifter.E, coeffs):
            if c:
                e = lifter.W1.mul(e, lifter.W1.pow(x, c))
        emap.append(e)
    k = len(nminus)
    total = p ** (k * g)
    if total > budget:
        raise BudgetExceeded(f"{total} relation lifts exceed budget {budget}", bound=total)
    spans: dict = {}
    vecs = list(linalg.subspace_elements(nminus, p)) if k else [(0,) * cd.multiplicator_rank]
    coeff_list = list(itertools.product(range(p), repeat=k))
    for combo in itertools.product(range(len(vecs)), repeat=g):
        rows = [linalg.add_vectors(m0[i], vecs[combo[i]], p) for i in range(g)]
        M = linalg.span(rows, p)
        sp = spans.get(M)
        if sp is None:
            spans[M] = ChildSpan(M, 1, tuple(coeff_list[j] for j in combo))
        else:
            sp.count += 1
    return LiftData(cd, tuple(m0), nminus, tuple(emap), spans, total)


def lifted_witness(ld: LiftData, lifter: RelationLifter, witness: Sequence, coeffs: Sequence) -> tuple:
    """Concrete relations in X_{c+1} realising the span chosen by coeffs."""
    W1, p = lifter.W1, lifter.W1.p
    out = []
    for r, a in zip(witness, coeffs):
        y = lifter.lift(r)
        for e, c in zip(ld.emap, a):
            if c:
                y = W1.mul(y, W1.pow(e, c))
        out.append(y)
    return tuple(out)


# -- witnesses -------------------------------------------------------------------


@dataclass
class Witness:
    relations: tuple
    images: tuple  # images in G of the generators of W_c (an epimorphism with kernel <relations>)
    c: int

    def __str__(self):
        return _format_witness(self.relations)


@dataclass
class NotSchur:
    reason: str = "search exhausted"

    def __str__(self):
        return f"NotSchur({self.reason})"


@dataclass
class Unknown:
    bound: int = 0

    def __str__(self):
        return f"Unknown(budget {self.bound})"


def schur_witness(G: PcGroup, budget: int = DEFAULT_TUPLE_BUDGET):
    """A relation tuple from X_c presenting G, NotSchur, or Unknown."""
    from .autgroup import is_isomorphic

    c, g, p = G.p_class, G.rank, G.p
    if c <= 1:
        W = free_quotient(p, g, 1)
        if G.n != g:
            return NotSchur("class one group that is not elementary abelian")
        return Witness(tuple(W.identity() for _ in range(g)), tuple(G.gen(i) for i in range(g)), 1)
    if c == 2:
        W = free_quotient(p, g, 2)
        X = XSet(W)
        pool = sorted(X.elements)
        if len(pool) ** g > budget:
            return Unknown(len(pool) ** g)
        for tup in itertools.product(pool, repeat=g):
            N = W.normal_closure(tup)
            if N.order * G.order != W.order:
                continue
            Q, proj = W.quotient(N, check_normal=False)
            iso = is_isomorphic(Q, G)
            if iso is not None:
                full = Q.images_from_generators(iso, G)
                images = tuple(Q.word_value(full, proj(W.gen(i)), G) for i in range(g))
                return Witness(tup, images, 2)
        return NotSchur()
    # deeper: lift a witness of the parent G/P_{c-1}(G) through its p-cover
    from .autgroup import SubspaceAction, automorphism_group
    from .cover import kernel_onto

    parent, _ = G.quotient(G.lower_p_central[c - 1], check_normal=False)
    pw = schur_witness(parent, budget)
    if not isinstance(pw, Witness):
        return pw
    A, S, _ = automorphism_group(parent)
    # S's generator i corresponds to the parent's generator i
    to_S = parent.images_from_generators([S.gen(i) for i in range(g)], S)
    imgs = tuple(parent.word_value(to_S, y, S) for y in pw.images)
    cd = p_cover(S)
    gens = [G.gen(i) for i in range(g)]
    K = kernel_onto(cd, G, gens, G.lower_p_central, c - 1)
    act = SubspaceAction(A, cd)
    orbit = act.orbit(K)
    lifter = RelationLifter(p, g, c - 1)
    try:
        ld = lift_spans(cd, imgs, pw.relations, lifter, budget)
    except BudgetExceeded as exc:
        return Unknown(exc.bound or 0)
    C = cd.cover
    for M, sp in sorted(ld.spans.items()):
        if M not in orbit:
            continue
        rel = lifted_witness(ld, lifter, pw.relations, sp.sample)
        # psi: S* -> G has kernel K; precompose with a lift of T^-1 where T(K) = M
        T = act.transversal(orbit, M)
        Tinv = A.ops.inverse(T)
        L = C.images_from_generators([cd.lift(y) for y in Tinv], C)
        psi = C.images_from_generators(gens, G)
        images = tuple(C.word_value(psi, C.word_value(L, cd.lift(y), C), G) for y in imgs)
        return Witness(rel, images, c)
    return NotSchur()


def verify_witness(G: PcGroup, w: Witness) -> bool:
    """W_c / <relations> has the order of G and maps onto G by the images."""
    W = free_quotient(G.p, G.rank, w.c)
    N = W.normal_closure(w.relations)
    if N.order * G.order != W.order:
        return False
    full = W.images_from_generators(w.images, G)
    if not W.is_homomorphism(full, G):
        return False
    if any(any(W.word_value(full, r, G)) for r in w.relations):
        return False
    top = [x[: G.rank] for x in w.images]
    return linalg.rank(top, G.p) == G.rank
