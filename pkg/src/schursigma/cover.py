"""p-covering groups, multiplicators, nuclei and immediate descendants.

The cover G* of a weighted presentation is built by the tails method: every
relation that is not the definition of a generator receives a new central
generator of order p, the consistency tests then impose linear relations on
those tails, and the tails that survive span the p-multiplicator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from . import linalg
from .errors import BudgetExceeded, PresentationError, ValidationError
from .pcgroup import PcGroup, Subgroup

DEFAULT_MAX_MULT_RANK = 8


def _relations(G: PcGroup):
    """Relation keys in a fixed order: ("P", i) then ("C", j, i)."""
    keys = [("P", i) for i in range(G.n)]
    keys += [("C", j, i) for j in range(G.n) for i in range(j)]
    return keys


def _rhs(G: PcGroup, key):
    if key[0] == "P":
        return G.powers[key[1]]
    return G.comms.get((key[1], key[2]), (0,) * G.n)


def _definitions(G: PcGroup):
    if G.definitions is None or G.weights is None:
        raise PresentationError("the tails method needs a weighted presentation with definitions")
    return {d for d in G.definitions if d is not None}


@dataclass
class CoverData:
    cover: PcGroup
    base: PcGroup
    multiplicator: Subgroup
    nucleus: Subgroup
    multiplicator_rank: int
    nuclear_rank: int
    nucleus_space: tuple = field(repr=False)

    @property
    def h(self) -> int:
        return self.multiplicator_rank - self.nuclear_rank

    @property
    def tail_start(self) -> int:
        return self.base.n

    def tail_vector(self, x) -> tuple:
        """Coordinates of an element of the multiplicator."""
        if any(x[: self.tail_start]):
            raise ValidationError("element is not in the multiplicator")
        return tuple(x[self.tail_start:])

    def tail_element(self, v) -> tuple:
        return (0,) * self.tail_start + tuple(v)

    def lift(self, x) -> tuple:
        """The element of G* with the same normal word as x in G."""
        return tuple(x) + (0,) * self.multiplicator_rank

    def project(self, y) -> tuple:
        return tuple(y[: self.tail_start])

    def quotient_by(self, K) -> PcGroup:
        """G*/K for a subspace K (rref rows) of the multiplicator coordinates."""
        return _central_quotient(self, linalg.span(K, self.base.p))[0]

    def quotient_with_projection(self, K):
        return _central_quotient(self, linalg.span(K, self.base.p))

    def is_allowable(self, K) -> bool:
        """K proper in the multiplicator and K + nucleus = multiplicator."""
        p, m = self.base.p, self.multiplicator_rank
        K = linalg.span(K, p)
        return len(K) < m and linalg.rank(list(K) + list(self.nucleus_space), p) == m

    def allowable_subspaces(self, step: int | None = None):
        """Every allowable subspace, optionally only those of the given step
        size (codimension in the multiplicator)."""
        p, m, k = self.base.p, self.multiplicator_rank, self.nuclear_rank
        N = self.nucleus_space
        steps = [step] if step is not None else range(1, k + 1)
        for s in steps:
            if not 1 <= s <= k:
                continue
            for K in linalg.subspaces(m, m - s, p):
                if linalg.rank(list(K) + list(N), p) == m:
                    yield K

    @cached_property
    def action_program(self):
        return self.cover.program

    def induced_action(self, images) -> tuple:
        """Matrix on multiplicator coordinates of the lift of the automorphism
        of G given by the images of its d generators (columns = images of tails)."""
        G, C = self.base, self.cover
        lifted = [self.lift(x) for x in images[: G.rank]]
        full = C.images_from_generators(lifted, C)
        cols = [self.tail_vector(full[self.tail_start + t]) for t in range(self.multiplicator_rank)]
        return linalg.transpose(cols)


def p_cover(G: PcGroup, max_mult_rank: int | None = None) -> CoverData:
    """The p-covering group of a weighted presentation with definitions."""
    p, n = G.p, G.n
    defs = _definitions(G)
    keys = _relations(G)
    tailed = [k for k in keys if k not in defs]
    T = len(tailed)
    tail_of = {k: n + t for t, k in enumerate(tailed)}
    N = n + T

    def ext(v, key):
        w = list(v) + [0] * T
        if key in tail_of:
            w[tail_of[key]] = 1
        return tuple(w)

    powers = [ext(G.powers[i], ("P", i)) for i in range(n)] + [(0,) * N] * T
    comms = {}
    for key in keys:
        if key[0] == "C":
            w = ext(_rhs(G, key), key)
            if any(w):
                comms[(key[1], key[2])] = w
    E = PcGroup(p, N, powers, comms, check=False)
    rows = []
    for label, lhs, rhs in _tests(E, n):
        if lhs[:n] != rhs[:n]:
            raise PresentationError(f"base presentation is inconsistent at {label}")
        diff = tuple((a - b) % p for a, b in zip(lhs[n:], rhs[n:]))
        if any(diff):
            rows.append(diff)
    rel, piv = linalg.rref(rows, p)
    free = [t for t in range(T) if t not in piv]
    m = len(free)
    if max_mult_rank is not None and m > max_mult_rank:
        raise BudgetExceeded(f"multiplicator rank {m} exceeds budget {max_mult_rank}", bound=m)
    # each tail as a combination of the free tails
    express = {}
    for row, c in zip(rel, piv):
        express[c] = tuple((-row[f]) % p for f in free)
    for idx, f in enumerate(free):
        express[f] = tuple(int(i == idx) for i in range(m))
    M = n + m

    def sub(v, key):
        w = list(v) + [0] * m
        if key in tail_of:
            for idx, c in enumerate(express[tail_of[key] - n]):
                w[n + idx] = (w[n + idx] + c) % p
        return tuple(w)

    cpowers = [sub(G.powers[i], ("P", i)) for i in range(n)] + [(0,) * M] * m
    ccomms = {}
    for key in keys:
        if key[0] == "C":
            w = sub(_rhs(G, key), key)
            if any(w):
                ccomms[(key[1], key[2])] = w
    c = max(G.weights) if n else 0
    weights = tuple(G.weights) + (c + 1,) * m
    definitions = tuple(G.definitions) + tuple(tailed[f] for f in free)
    C = PcGroup(p, M, cpowers, ccomms, weights, definitions, check=False)
    mult = C.span_of_gens(range(n, M))
    nucleus = C.lower_p_central[c] if c >= 1 else mult
    nspace = linalg.span([u[n:] for u in nucleus.pcgs], p)
    return CoverData(C, G, mult, nucleus, m, len(nspace), nspace)


def _tests(E: PcGroup, n: int):
    """Consistency test words restricted to the first n generators."""
    p, g, mul = E.p, E.gen, E.mul
    for k in range(n):
        for j in range(k):
            for i in range(j):
                yield (k, j, i), mul(mul(g(k), g(j)), g(i)), mul(g(k), mul(g(j), g(i)))
    for j in range(n):
        for i in range(j):
            yield (j, "p", i), mul(E.powers[j], g(i)), mul(g(j, p - 1), mul(g(j), g(i)))
            yield (j, i, "p"), mul(mul(g(j), g(i, p - 1)), g(i)), mul(g(j), E.powers[i])
    for i in range(n):
        yield (i, "p", "p"), mul(E.powers[i], g(i)), mul(g(i), E.powers[i])


def _central_quotient(cd: CoverData, K) -> PcGroup:
    C, n = cd.cover, cd.tail_start
    table = {}
    for row in K:
        lead = next(i for i, x in enumerate(row) if x)
        table[n + lead] = cd.tail_element(row)
    Q, proj = C.quotient(Subgroup(C, table), check_normal=False)
    kept = [i for i in range(C.n) if i not in table]
    Q.weights = tuple(C.weights[i] for i in kept)
    Q.definitions = tuple(C.definitions[i] for i in kept)
    return Q, proj


def free_quotient(p: int, g: int, c: int, max_gens: int | None = None) -> PcGroup:
    """W_{g,c} = F/P_c(F), built as an iterated p-cover of (Z/p)^g."""
    if g < 1 or c < 1:
        raise ValidationError("need g >= 1 and c >= 1")
    W = PcGroup.elementary_abelian(p, g)
    for _ in range(c - 1):
        W = p_cover(W).cover
        if max_gens is not None and W.n > max_gens:
            raise BudgetExceeded(f"W has order p^{W.n}, above the budget p^{max_gens}", bound=W.n)
    return W


def standardize(G: PcGroup):
    """A weighted presentation S with definitions and an isomorphism S -> G.

    Returns (S, images, levels): images[k] is the image in G of the k-th pc
    generator of S, and levels lists (cover data, kernel, quotient,
    projection) for each step of the chain (Z/p)^d = S_1, S_2, ..., S_c = S with S_{k+1} = S_k* / kernel.
    """
    p, d = G.p, G.rank
    series = G.lower_p_central
    c = len(series) - 1
    S = PcGroup.elementary_abelian(p, d)
    gens = [G.gen(i) for i in range(d)]
    levels = []
    for k in range(1, c):
        cd = p_cover(S)
        K = kernel_onto(cd, G, gens, series, k)
        S, proj = cd.quotient_with_projection(K)
        levels.append((cd, K, S, proj))
    images = S.images_from_generators(gens, G) if c >= 1 else ()
    return S, images, levels


def kernel_onto(cd: CoverData, G: PcGroup, gens, series, k: int):
    """Kernel, in multiplicator coordinates, of the map from cd.cover onto
    G/P_{k+1}(G) sending the generators to the given elements of G.

    Assumes cd.base is isomorphic to G/P_k(G) under the same generators.
    """
    p = G.p
    Gbar, proj = G.quotient(series[k + 1], check_normal=False)
    layer_sub = _project_subgroup(Gbar, proj, series[k])
    img = cd.cover.images_from_generators([proj(x) for x in gens], Gbar)
    m = cd.multiplicator_rank
    cols = [layer_sub.exponents(img[cd.tail_start + t]) for t in range(m)]
    return linalg.nullspace(linalg.transpose(cols), m, p)


def _project_subgroup(Q: PcGroup, proj, N: Subgroup) -> Subgroup:
    return Q.subgroup([proj(u) for u in N.pcgs])


def p_class(G: PcGroup) -> int:
    return G.p_class


def is_terminal(G: PcGroup, cd: CoverData | None = None) -> bool:
    cd = cd or p_cover(_weighted(G))
    return cd.nuclear_rank == 0


def h_rank(G: PcGroup, cd: CoverData | None = None) -> int:
    cd = cd or p_cover(_weighted(G))
    return cd.h


def schur_multiplier_rank(G: PcGroup, cd: CoverData | None = None) -> int:
    cd = cd or p_cover(_weighted(G))
    return cd.multiplicator_rank - G.rank


def _weighted(G: PcGroup) -> PcGroup:
    if G.definitions is not None and G.is_weighted:
        return G
    return standardize(G)[0]


def descendants(G: PcGroup, max_mult_rank: int | None = DEFAULT_MAX_MULT_RANK, seed: int = 0,
                step: int | None = None) -> list[PcGroup]:
    """Immediate descendants of G, one per Aut(G)-orbit of allowable subspaces.

    Children come back sorted by fingerprint label, so the order is
    reproducible but unrelated to any other implementation's numbering.
    """
    from .autgroup import SubspaceAction, automorphism_group, fingerprint_label

    A, S, _ = automorphism_group(G, seed)
    cd = p_cover(S, max_mult_rank)
    if cd.nuclear_rank == 0:
        return []
    act = SubspaceAction(A, cd)
    children = [cd.quotient_by(K) for K, _ in act.orbits(cd.allowable_subspaces(step))]
    return sorted(children, key=fingerprint_label)
