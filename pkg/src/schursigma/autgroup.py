"""Automorphism groups of weighted p-groups.

An automorphism is stored as the tuple of images of the d weight-one
generators; the images of the remaining pc generators are forced and are
obtained by running the group's generator program.

Aut(G) is kept in layered form.  The top part records, for every matrix in
the image of Aut(G) -> GL(d, p), one automorphism inducing it.  Below that,
K_k is the group of automorphisms acting trivially modulo P_k(G), and
K_k / K_{k+1} embeds in (P_k/P_{k+1})^d; for each k we keep an echelon basis
of that image together with automorphisms realising it.  Every element then
has a unique normal form (top lift) * (product of layer basis powers), which
gives exact orders and uniform random elements.

For a descendant Q = G*/M, Aut(Q) is the lift of the stabiliser of M in Aut(G)
extended by the central automorphisms a_i -> a_i z with z in P_c(Q).
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from typing import Sequence

from . import linalg
from .cover import CoverData, p_cover, standardize
from .errors import BudgetExceeded, ValidationError
from .pcgroup import PcGroup

Aut = tuple


class AutOps:
    """Arithmetic on automorphisms of a weighted group."""

    def __init__(self, G: PcGroup):
        if not G.is_weighted:
            raise ValidationError("automorphism arithmetic needs a weighted presentation")
        self.G = G
        self.p = G.p
        self.d = G.rank
        self.c = G.p_class
        self.layer_pos = [G.layer_indices(k) for k in range(self.c)]

    @classmethod
    def of(cls, G: PcGroup) -> "AutOps":
        ops = G.__dict__.get("_autops")
        if ops is None:
            ops = cls(G)
            G.__dict__["_autops"] = ops
        return ops

    def identity(self) -> Aut:
        return tuple(self.G.gen(i) for i in range(self.d))

    def full(self, a: Aut) -> tuple:
        return self.G.images_from_generators(a, self.G)

    def apply(self, full, x):
        return self.G.word_value(full, x, self.G)

    def compose(self, a: Aut, b: Aut) -> Aut:
        """a after b."""
        fa = self.full(a)
        return tuple(self.apply(fa, y) for y in b)

    def power(self, a: Aut, e: int) -> Aut:
        result = self.identity()
        base = a
        while e:
            if e & 1:
                result = self.compose(base, result)
            e >>= 1
            if e:
                base = self.compose(base, base)
        return result

    def top_matrix(self, a: Aut) -> tuple:
        return linalg.transpose(tuple(tuple(x[: self.d]) for x in a))

    def layer_coords(self, x, k: int) -> tuple:
        return tuple(x[i] for i in self.layer_pos[k])

    def layer_element(self, v, k: int):
        x = [0] * self.G.n
        for i, e in zip(self.layer_pos[k], v):
            x[i] = e
        return tuple(x)

    def layer_vector(self, a: Aut, k: int) -> tuple:
        G = self.G
        out = []
        for i, y in enumerate(a):
            out.extend(self.layer_coords(G.mul(G.inv(G.gen(i)), y), k))
        return tuple(out)

    def layer_matrix(self, full, k: int) -> tuple:
        cols = [self.layer_coords(full[j], k) for j in self.layer_pos[k]]
        return linalg.transpose(cols)

    def inverse(self, a: Aut) -> Aut:
        """Solve a(x_i) = a_i layer by layer."""
        G = self.G
        full = self.full(a)
        mats = [linalg.mat_inv(self.layer_matrix(full, k), self.p) for k in range(self.c)]
        out = []
        for i in range(self.d):
            x = G.identity()
            target = G.gen(i)
            for k in range(self.c):
                r = G.mul(G.inv(self.apply(full, x)), target)
                u = linalg.mat_vec(mats[k], self.layer_coords(r, k), self.p)
                x = G.mul(x, self.layer_element(u, k))
            out.append(x)
        return tuple(out)

    def is_automorphism(self, a: Aut) -> bool:
        if len(a) != self.d:
            return False
        try:
            linalg.mat_inv(self.top_matrix(a), self.p)
        except ValueError:
            return False
        return self.G.is_homomorphism(self.full(a), self.G)


class AutGroup:
    """A subgroup of Aut(G) in layered form (see the module docstring)."""

    def __init__(self, G: PcGroup):
        self.ops = AutOps.of(G)
        self.G = G
        ident = self.ops.identity()
        self.top = {self.ops.top_matrix(ident): ident}
        self.top_gens: list = []
        self._top_inv: dict = {}
        # layers[k] for k = 1 .. c-1 (index 0 unused): list of [pivot, vec, aut, inverse]
        self.layers: list = [[] for _ in range(self.ops.c)]

    @property
    def order(self) -> int:
        return len(self.top) * self.ops.p ** sum(len(L) for L in self.layers)

    def layer_dims(self) -> list[int]:
        return [len(L) for L in self.layers[1:]]

    def generators(self) -> list:
        return list(self.top_gens) + [e[2] for L in self.layers for e in L]

    def _inv_of_top(self, A):
        inv = self._top_inv.get(A)
        if inv is None:
            inv = self.ops.inverse(self.top[A])
            self._top_inv[A] = inv
        return inv

    def _entry_inverse(self, entry):
        if entry[3] is None:
            entry[3] = self.ops.inverse(entry[2])
        return entry[3]

    def _add_top(self, s):
        ops, p = self.ops, self.ops.p
        self.top_gens.append(s)
        gens = [(ops.top_matrix(g), g) for g in self.top_gens]
        queue = deque(self.top.items())
        while queue:
            A, a = queue.popleft()
            for B, b in gens:
                C = linalg.mat_mul(A, B, p)
                if C not in self.top:
                    self.top[C] = ops.compose(a, b)
                    queue.append((C, self.top[C]))

    def sift(self, s) -> bool:
        """Insert s; return True when the structure grew."""
        ops, p = self.ops, self.ops.p
        A = ops.top_matrix(s)
        if A not in self.top:
            self._add_top(s)
            return True
        s = ops.compose(self._inv_of_top(A), s)
        for k in range(1, ops.c):
            v = ops.layer_vector(s, k)
            for entry in self.layers[k]:
                e = v[entry[0]]
                if e:
                    s = ops.compose(s, ops.power(self._entry_inverse(entry), e))
                    v = tuple((x - e * y) % p for x, y in zip(v, entry[1]))
            if any(v):
                piv = next(i for i, x in enumerate(v) if x)
                f = pow(v[piv], -1, p)
                if f != 1:
                    s = ops.power(s, f)
                    v = tuple((f * x) % p for x in v)
                self.layers[k].append([piv, v, s, None])
                return True
        return False

    def contains(self, s) -> bool:
        ops, p = self.ops, self.ops.p
        A = ops.top_matrix(s)
        if A not in self.top:
            return False
        s = ops.compose(self._inv_of_top(A), s)
        for k in range(1, ops.c):
            v = ops.layer_vector(s, k)
            for entry in self.layers[k]:
                e = v[entry[0]]
                if e:
                    s = ops.compose(s, ops.power(self._entry_inverse(entry), e))
                    v = tuple((x - e * y) % p for x, y in zip(v, entry[1]))
            if any(v):
                return False
        return True

    def random(self, rng: random.Random):
        ops, p = self.ops, self.ops.p
        keys = sorted(self.top)
        s = self.top[rng.choice(keys)]
        for L in self.layers:
            for entry in L:
                e = rng.randrange(p)
                if e:
                    s = ops.compose(s, ops.power(entry[2], e))
        return s

    def elements(self):
        """Every element (only sensible for small groups)."""
        ops, p = self.ops, self.ops.p
        entries = [e for L in self.layers for e in L]
        for A in sorted(self.top):
            for exps in itertools.product(range(p), repeat=len(entries)):
                s = self.top[A]
                for entry, e in zip(entries, exps):
                    if e:
                        s = ops.compose(s, ops.power(entry[2], e))
                yield s


def general_linear_group(G: PcGroup, max_order: int = 200_000) -> AutGroup:
    """Aut of an elementary abelian group: all of GL(d, p)."""
    p, d = G.p, G.rank
    size = 1
    for k in range(d):
        size *= p ** d - p ** k
    if size > max_order:
        raise BudgetExceeded(f"|GL({d},{p})| = {size} exceeds the automorphism budget", bound=size)
    A = AutGroup(G)
    for rows in itertools.product(itertools.product(range(p), repeat=d), repeat=d):
        if linalg.rank(rows, p) == d:
            M = tuple(tuple(r) for r in rows)
            A.top[M] = tuple(tuple(M[r][i] for r in range(d)) for i in range(d))
    A.top_gens = _small_generating_set(A)
    return A


def _small_generating_set(A: AutGroup) -> list:
    p = A.ops.p
    keys = sorted(A.top)
    chosen: list = []
    closure = {linalg.identity(A.ops.d)}
    for M in keys:
        if M in closure:
            continue
        chosen.append(M)
        queue = deque(closure)
        while queue:
            X = queue.popleft()
            for Y in chosen:
                Z = linalg.mat_mul(X, Y, p)
                if Z not in closure:
                    closure.add(Z)
                    queue.append(Z)
        if len(closure) == len(A.top):
            break
    return [A.top[M] for M in chosen]


# -- orbits of the action on multiplicator subspaces ---------------------------


class SubspaceAction:
    """Aut(G) acting on subspaces of the multiplicator of G*."""

    def __init__(self, aut: AutGroup, cd: CoverData):
        self.aut = aut
        self.cd = cd
        self.p = cd.base.p
        self.gens = aut.generators()
        self.mats = [cd.induced_action(g) for g in self.gens]

    def image(self, mat, K):
        return linalg.image_of_subspace(mat, K, self.p)

    def orbit(self, K, limit: int | None = None) -> dict:
        """Orbit of K as a dict subspace -> (previous subspace, generator index)."""
        K = linalg.span(K, self.p)
        tree = {K: None}
        queue = deque([K])
        while queue:
            U = queue.popleft()
            for j, mat in enumerate(self.mats):
                V = self.image(mat, U)
                if V not in tree:
                    tree[V] = (U, j)
                    queue.append(V)
                    if limit is not None and len(tree) > limit:
                        raise BudgetExceeded("orbit exceeds budget", bound=len(tree))
        return tree

    def transversal(self, tree, U):
        """An automorphism sending the orbit root to U."""
        ops = self.aut.ops
        path = []
        while tree[U] is not None:
            prev, j = tree[U]
            path.append(j)
            U = prev
        t = ops.identity()
        for j in reversed(path):
            t = ops.compose(self.gens[j], t)
        return t

    def orbits(self, subspaces) -> list[tuple]:
        """Partition the given subspaces into orbits; returns (representative, size)."""
        seen = set()
        out = []
        for K in subspaces:
            K = linalg.span(K, self.p)
            if K in seen:
                continue
            orb = self.orbit(K)
            seen.update(orb)
            out.append((K, len(orb)))
        return out

    def stabilizer(self, K, rng: random.Random, orbit: dict | None = None) -> AutGroup:
        """Stabiliser of K, found by sifting random Schreier elements until its
        order reaches |Aut(G)| / |orbit|."""
        aut, ops = self.aut, self.aut.ops
        K = linalg.span(K, self.p)
        orbit = orbit if orbit is not None else self.orbit(K)
        target = aut.order // len(orbit)
        H = AutGroup(aut.G)
        for g in self.gens:
            if self.image(self.cd.induced_action(g), K) == K:
                H.sift(g)
        while H.order < target:
            g = aut.random(rng)
            U = self.image(self.cd.induced_action(g), K)
            t = self.transversal(orbit, U)
            H.sift(ops.compose(ops.inverse(t), g))
        return H


def descendant_automorphisms(stab: AutGroup, cd: CoverData, Q: PcGroup, proj) -> AutGroup:
    """Aut(Q) for Q = G*/M, from the stabiliser of M in Aut(G)."""
    def lift(a):
        return tuple(proj(cd.lift(x)) for x in a)

    A = AutGroup(Q)
    ops = A.ops
    A.top = {M: lift(a) for M, a in stab.top.items()}
    A.top_gens = [lift(a) for a in stab.top_gens]
    for k in range(1, stab.ops.c):
        A.layers[k] = [[e[0], e[1], lift(e[2]), None] for e in stab.layers[k]]
    c = ops.c - 1
    L = len(ops.layer_pos[c])
    central = []
    for i in range(ops.d):
        for t in range(L):
            z = [0] * L
            z[t] = 1
            img = list(ops.identity())
            img[i] = Q.mul(img[i], ops.layer_element(z, c))
            zinv = list(ops.identity())
            zinv[i] = Q.mul(zinv[i], ops.layer_element([(-x) % Q.p for x in z], c))
            vec = tuple(int(j == i * L + t) for j in range(ops.d * L))
            central.append([i * L + t, vec, tuple(img), tuple(zinv)])
    A.layers[c] = central
    return A


def automorphism_group(G: PcGroup, seed: int = 0):
    """Aut(G) for any presentation.

    Returns (A, S, images): A is Aut(S) in layered form for a standardised
    presentation S of G, and images gives the isomorphism S -> G.
    """
    chain, S, images = _aut_chain(G, seed)
    return chain[-1], S, images


def _aut_chain(G: PcGroup, seed: int = 0):
    cached = G.__dict__.get("_autchain")
    if cached is not None:
        return cached
    rng = random.Random(seed)
    S, images, levels = standardize(G)
    A = general_linear_group(levels[0][0].base if levels else S)
    chain = [A]
    for cd, K, Q, proj in levels:
        stab = SubspaceAction(A, cd).stabilizer(K, rng)
        A = descendant_automorphisms(stab, cd, Q, proj)
        chain.append(A)
    result = ([(chain[i],) + tuple(levels[i]) for i in range(len(levels))] + [chain[-1]], S, images)
    G.__dict__["_autchain"] = result
    return result


def aut_order(G: PcGroup, seed: int = 0):
    """(|Aut(G)|, generators as images of G's d generators)."""
    A, S, images = automorphism_group(G, seed)
    out = []
    for a in A.generators():
        out.append(tuple(G.word_value(images, y, G) for y in a))
    return A.order, out


def brute_force_aut_order(G: PcGroup, candidates: Sequence | None = None) -> int:
    """Count d-tuples of elements that extend to automorphisms (small groups only).

    ``candidates`` optionally restricts the image of every generator to a
    given list (used for centraliser counts).
    """
    if G.order > G.p ** 6:
        raise BudgetExceeded("brute force automorphism search limited to order p^6", bound=G.order)
    d, p = G.rank, G.p
    pool = list(candidates) if candidates is not None else list(G.elements())
    count = 0
    prog = G.program
    for imgs in itertools.product(pool, repeat=d):
        top = [x[:d] for x in imgs]
        if linalg.rank(top, p) < d:
            continue
        full = prog.evaluate(imgs, G)
        if G.is_homomorphism(full, G):
            count += 1
    return count


# -- fingerprints and isomorphism ------------------------------------------------

ELEMENT_CENSUS_LIMIT = 7


def fingerprint(G: PcGroup) -> tuple:
    """Isomorphism invariants: order, abelianization, p-class, IPAD, element
    order counts (small groups only), derived subgroup invariants and the
    ranks of the lower p-central layers."""
    from .ipad import ipad
    from .pcgroup import abelian_invariants

    series = G.lower_p_central
    layers = tuple(len(series[k]) - len(series[k + 1]) for k in range(len(series) - 1))
    D = G.normal_closure([G.comm(G.gen(j), G.gen(i)) for j in range(G.n) for i in range(j)])
    census = ()
    if G.n <= ELEMENT_CENSUS_LIMIT:
        counts: dict = {}
        for x in G.elements():
            o = G.element_order(x)
            counts[o] = counts.get(o, 0) + 1
        census = tuple(sorted(counts.items()))
    I = ipad(G) if G.rank >= 1 else None
    return (
        G.order,
        abelian_invariants(G),
        G.p_class,
        (I.head, I.entries) if I else (),
        census,
        abelian_invariants(D) if len(D) else (),
        layers,
    )


def fingerprint_label(G: PcGroup) -> str:
    """Short stable identifier derived from the fingerprint."""
    import hashlib

    digest = hashlib.sha1(repr(fingerprint(G)).encode()).hexdigest()[:8]
    return f"{G.p}^{G.n}c{G.p_class}-{digest}"


def is_isomorphic(G: PcGroup, H: PcGroup, seed: int = 0):
    """An isomorphism G -> H (images of G's d generators in H), or None."""
    from .cover import kernel_onto

    if G.p != H.p or G.n != H.n or G.rank != H.rank:
        return None
    if fingerprint(G) != fingerprint(H):
        return None
    chain, S, _ = _aut_chain(G, seed)
    d = G.rank
    series = H.lower_p_central
    phi = tuple(H.gen(i) for i in range(d))
    for k, (A, cd, K, Q, proj) in enumerate(chain[:-1], start=1):
        K2 = kernel_onto(cd, H, phi, series, k)
        act = SubspaceAction(A, cd)
        tree = act.orbit(K)
        if K2 not in tree:
            return None
        T = act.transversal(tree, K2)
        full = cd.cover.images_from_generators(phi, H)
        phi = tuple(H.word_value(full, cd.lift(y), H) for y in T)
    full = G.images_from_generators(phi, H)
    if not G.is_homomorphism(full, H):
        raise ValidationError("isomorphism construction failed")
    return phi
