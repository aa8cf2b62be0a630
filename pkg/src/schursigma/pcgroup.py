"""Finite p-groups given by power-commutator presentations.

A presentation has generators a_0 .. a_{n-1}, all of relative order p, with

    a_i^p      = w_i     (a normal word in a_{i+1} .. a_{n-1})
    [a_j, a_i] = w_ji    (j > i, a normal word in a_{j+1} .. a_{n-1})

where [x, y] = x^-1 y^-1 x y.  Elements are exponent tuples (e_0, .., e_{n-1})
with 0 <= e_k < p standing for a_0^e_0 ... a_{n-1}^e_{n-1}.  Products are
computed by collection from the left with memoised conjugates.

Indices are 0-based in the API and 1-based in the text format.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

from .errors import NotNormalError, PresentationError, ValidationError

Element = tuple

_CACHE_LIMIT = 1_500_000


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, int(n ** 0.5) + 1))


def _leading(x) -> int:
    for i, e in enumerate(x):
        if e:
            return i
    return -1


class PcGroup:
    """A consistent pc presentation of a finite p-group.

    ``powers[i]`` is the normal form of a_i^p and ``comms[(j, i)]`` that of
    [a_j, a_i]; missing commutators are trivial.  ``weights`` (optional) gives
    the lower p-central weight of each generator; when present the weight-1
    generators must come first.  ``definitions`` (optional) records for each
    generator how it arose: None for weight one, ("P", i) for a_i^p or
    ("C", j, i) for [a_j, a_i].
    """

    def __init__(
        self,
        p: int,
        ngens: int,
        powers: Sequence[Sequence[int]] | None = None,
        comms: dict | None = None,
        weights: Sequence[int] | None = None,
        definitions: Sequence | None = None,
        *,
        check: bool = True,
        odd: bool = True,
    ):
        if not is_prime(p) or (odd and p == 2):
            raise PresentationError(f"p must be an odd prime, got {p}")
        self.p = p
        self.n = n = ngens
        zero = (0,) * n
        if powers is None:
            powers = [zero] * n
        if len(powers) != n:
            raise PresentationError("need one power relation per generator")
        self.powers = tuple(tuple(int(e) for e in w) for w in powers)
        self.comms = {}
        for (j, i), w in (comms or {}).items():
            if not (0 <= i < j < n):
                raise PresentationError(f"bad commutator index ({j}, {i})")
            w = tuple(int(e) for e in w)
            if any(w):
                self.comms[(j, i)] = w
        for i, w in enumerate(self.powers):
            self._check_word(w, i + 1, f"power relation of generator {i + 1}")
        for (j, i), w in self.comms.items():
            self._check_word(w, j + 1, f"commutator relation ({j + 1}, {i + 1})")
        if weights is not None:
            weights = tuple(int(w) for w in weights)
            if len(weights) != n or any(w < 1 for w in weights):
                raise PresentationError("weights must be positive, one per generator")
            if any(a > b for a, b in zip(weights, weights[1:])):
                raise PresentationError("weights must be nondecreasing")
        self.weights = weights
        self.definitions = tuple(definitions) if definitions is not None else None
        self._conj_cache: dict = {}
        self._cgen_cache: dict = {}
        if check:
            bad = self.consistency_defects(first_only=True)
            if bad:
                raise PresentationError(f"inconsistent presentation: test {bad[0][0]} fails")

    def _check_word(self, w, start, what):
        if len(w) != self.n:
            raise PresentationError(f"{what}: expected {self.n} exponents")
        if any(not 0 <= e < self.p for e in w):
            raise PresentationError(f"{what}: exponents must lie in [0, p)")
        if any(w[:start]):
            raise PresentationError(f"{what}: may only involve later generators")

    # -- basic data -------------------------------------------------------

    @property
    def order(self) -> int:
        return self.p ** self.n

    def identity(self) -> Element:
        return (0,) * self.n

    def gen(self, i: int, e: int = 1) -> Element:
        x = [0] * self.n
        x[i] = e % self.p
        return tuple(x)

    def gens(self) -> list[Element]:
        return [self.gen(i) for i in range(self.n)]

    def elements(self) -> Iterator[Element]:
        return itertools.product(range(self.p), repeat=self.n)

    def __repr__(self):
        return f"<PcGroup p={self.p} order={self.p}^{self.n} rank={self.rank}>"

    def relation_data(self):
        """Hashable summary of the presentation (not an isomorphism invariant)."""
        return (self.p, self.n, self.powers, tuple(sorted(self.comms.items())))

    # -- collection -------------------------------------------------------

    def mul(self, x: Element, y: Element) -> Element:
        """Normal form of x*y."""
        for k, e in enumerate(y):
            if e:
                x = self._times(x, k, e)
        return x

    def _times(self, x, k, e):
        # x * a_k^e: move a_k^e left past the tail above position k
        tail = x[k + 1:]
        if any(tail):
            tail = self._conj(k, e, tail)
        m = x[k] + e
        if m >= self.p:
            m -= self.p
            full = self.mul(self.powers[k], (0,) * (k + 1) + tail)
            tail = full[k + 1:]
        return x[:k] + (m,) + tail

    def _conj(self, k, e, tail):
        # (product over the tail)^(a_k^e), returned as a tail
        key = (k, e, tail)
        cache = self._conj_cache
        r = cache.get(key)
        if r is not None:
            return r
        acc = (0,) * self.n
        for off, m in enumerate(tail):
            if m:
                acc = self.mul(acc, self._cpow(k, e, k + 1 + off, m))
        r = acc[k + 1:]
        if len(cache) > _CACHE_LIMIT:
            cache.clear()
        cache[key] = r
        return r

    def _cpow(self, k, e, j, m):
        # (a_j^(a_k^e))^m
        key = (k, e, j, m)
        c = self._cgen_cache.get(key)
        if c is not None:
            return c
        if m == 1:
            if e == 1:
                c = self.mul(self.gen(j), self.comms.get((j, k), (0,) * self.n))
            else:
                prev = self._cpow(k, e - 1, j, 1)
                c = (0,) * (k + 1) + self._conj(k, 1, prev[k + 1:])
        else:
            c = self.mul(self._cpow(k, e, j, m - 1), self._cpow(k, e, j, 1))
        self._cgen_cache[key] = c
        return c

    def inv(self, x: Element) -> Element:
        out = []
        for k in range(self.n):
            if x[k]:
                f = self.p - x[k]
                x = self._times(x, k, f)
                out.append(f)
            else:
                out.append(0)
        return tuple(out)

    def pow(self, x: Element, m: int) -> Element:
        if m < 0:
            x, m = self.inv(x), -m
        result = self.identity()
        while m:
            if m & 1:
                result = self.mul(result, x)
            m >>= 1
            if m:
                x = self.mul(x, x)
        return result

    def comm(self, x: Element, y: Element) -> Element:
        """[x, y] = x^-1 y^-1 x y."""
        return self.mul(self.inv(self.mul(y, x)), self.mul(x, y))

    def conj(self, x: Element, y: Element) -> Element:
        """x^y = y^-1 x y."""
        return self.mul(self.inv(y), self.mul(x, y))

    def element_order(self, x: Element) -> int:
        o = 1
        while any(x):
            x = self.pow(x, self.p)
            o *= self.p
        return o

    def word_value(self, images: Sequence[Element], v: Element, target: "PcGroup") -> Element:
        """Evaluate the normal word v on the given generator images in target."""
        r = target.identity()
        for k, e in enumerate(v):
            if e:
                r = target.mul(r, target.pow(images[k], e))
        return r

    # -- consistency ------------------------------------------------------

    def consistency_tests(self) -> Iterator[tuple[str, Element, Element]]:
        """Yield (label, lhs, rhs): the two collected forms of each test word."""
        n, p, g = self.n, self.p, self.gen
        mul = self.mul
        for k in range(n):
            for j in range(k):
                for i in range(j):
                    yield (f"({k},{j},{i})", mul(mul(g(k), g(j)), g(i)), mul(g(k), mul(g(j), g(i))))
        for j in range(n):
            for i in range(j):
                yield (f"({j}^p,{i})", mul(self.powers[j], g(i)), mul(g(j, p - 1), mul(g(j), g(i))))
                yield (f"({j},{i}^p)", mul(mul(g(j), g(i, p - 1)), g(i)), mul(g(j), self.powers[i]))
        for i in range(n):
            yield (f"({i}^p,{i})", mul(self.powers[i], g(i)), mul(g(i), self.powers[i]))

    def consistency_defects(self, first_only=False):
        bad = []
        for label, lhs, rhs in self.consistency_tests():
            if lhs != rhs:
                bad.append((label, lhs, rhs))
                if first_only:
                    break
        return bad

    # -- subgroups --------------------------------------------------------

    def subgroup(self, gens: Iterable[Element]) -> "Subgroup":
        return Subgroup(self, _closure(self, gens, normal=False))

    def normal_closure(self, gens: Iterable[Element]) -> "Subgroup":
        return Subgroup(self, _closure(self, gens, normal=True))

    def whole(self) -> "Subgroup":
        return Subgroup(self, {i: self.gen(i) for i in range(self.n)})

    def trivial(self) -> "Subgroup":
        return Subgroup(self, {})

    def span_of_gens(self, indices) -> "Subgroup":
        """Subgroup generated by the listed pc generators, assumed closed."""
        return Subgroup(self, {i: self.gen(i) for i in indices})

    @cached_property
    def lower_p_central(self) -> tuple["Subgroup", ...]:
        """P_0 = G > P_1 = Phi(G) > ... > P_c = 1."""
        series = [self.whole()]
        while series[-1].order > 1:
            cur = series[-1]
            new = []
            for u in cur.pcgs:
                new.append(self.pow(u, self.p))
                for i in range(self.n):
                    new.append(self.comm(u, self.gen(i)))
            series.append(self.normal_closure(new))
        return tuple(series)

    @property
    def p_class(self) -> int:
        return len(self.lower_p_central) - 1

    def frattini(self) -> "Subgroup":
        return self.lower_p_central[1] if self.n else self.trivial()

    @cached_property
    def rank(self) -> int:
        """Minimal number of generators d(G)."""
        if self.weights is not None:
            return sum(1 for w in self.weights if w == 1)
        return self.n - len(self.frattini().pcgs)

    @cached_property
    def is_weighted(self) -> bool:
        """True when the weights describe the lower p-central series exactly."""
        if self.weights is None:
            return False
        series = self.lower_p_central
        if len(series) - 1 != (max(self.weights) if self.n else 0):
            return False
        for k, sub in enumerate(series):
            expect = [i for i in range(self.n) if self.weights[i] > k]
            if sorted(sub.depths) != expect:
                return False
        return True

    def layer_indices(self, k: int) -> list[int]:
        """Generators spanning P_{k}/P_{k+1} (requires weights)."""
        return [i for i in range(self.n) if self.weights[i] == k + 1]

    def quotient(self, N: "Subgroup", check_normal: bool = True):
        """Return (G/N, projection).  ``projection`` maps elements of G to G/N."""
        if N.group is not self:
            raise ValidationError("subgroup belongs to another group")
        if check_normal and not N.is_normal():
            raise NotNormalError("quotient by a non-normal subgroup")
        kept = [i for i in range(self.n) if i not in N.table]

        def project(x):
            x = N.canonical(x)
            return tuple(x[i] for i in kept)

        powers = [project(self.powers[i]) for i in kept]
        comms = {}
        for b, j in enumerate(kept):
            for a, i in enumerate(kept[:b]):
                w = self.comms.get((j, i))
                if w is not None:
                    comms[(b, a)] = project(w)
        weights = tuple(self.weights[i] for i in kept) if self.weights is not None else None
        Q = PcGroup(self.p, len(kept), powers, comms, weights, check=False)
        return Q, project

    def truncate(self, k: int):
        """G / P_k(G) for a weighted presentation: keep generators of weight <= k."""
        keep = [i for i in range(self.n) if self.weights[i] <= k]
        N = self.span_of_gens([i for i in range(self.n) if self.weights[i] > k])
        Q, proj = self.quotient(N, check_normal=False)
        if self.definitions is not None:
            Q.definitions = tuple(self.definitions[i] for i in keep)
        return Q

    def index_p_subgroups(self) -> list["Subgroup"]:
        """Maximal subgroups, as preimages of the hyperplanes of G/Phi(G)."""
        phi = self.frattini()
        top = [i for i in range(self.n) if i not in phi.table]
        d = len(top)
        out = []
        for f in _projective_points(d, self.p):
            ker = [v for v in _kernel_basis(f, self.p)]
            gens = list(phi.pcgs)
            for v in ker:
                x = [0] * self.n
                for i, c in zip(top, v):
                    x[i] = c
                gens.append(tuple(x))
            out.append(self.subgroup(gens))
        return out

    # -- generator programs and homomorphisms -----------------------------

    @cached_property
    def program(self) -> "Program":
        return Program.build(self)

    def images_from_generators(self, images: Sequence[Element], target: "PcGroup") -> tuple:
        """Images of all pc generators under the map fixed on a_0..a_{d-1}."""
        return self.program.evaluate(images, target)

    def is_homomorphism(self, full_images: Sequence[Element], target: "PcGroup") -> bool:
        """Check every defining relation on images of all pc generators."""
        for i in range(self.n):
            if target.pow(full_images[i], self.p) != self.word_value(full_images, self.powers[i], target):
                return False
        for j in range(self.n):
            for i in range(j):
                w = self.comms.get((j, i), (0,) * self.n)
                if target.comm(full_images[j], full_images[i]) != self.word_value(full_images, w, target):
                    return False
        return True

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        return format_presentation(self)

    @classmethod
    def from_text(cls, text: str) -> "PcGroup":
        return parse_presentation(text)

    # -- constructors -----------------------------------------------------

    @classmethod
    def abelian(cls, p: int, exponents: Sequence[int]) -> "PcGroup":
        """Z/p^e1 x ... x Z/p^ek in weighted form."""
        exponents = [e for e in exponents if e > 0]
        slots = sorted((w, f) for f, e in enumerate(exponents) for w in range(1, e + 1))
        index = {s: i for i, s in enumerate(slots)}
        n = len(slots)
        powers = []
        defs = []
        for (w, f) in slots:
            v = [0] * n
            if (w + 1, f) in index:
                v[index[(w + 1, f)]] = 1
            powers.append(tuple(v))
            defs.append(None if w == 1 else ("P", index[(w - 1, f)]))
        return cls(p, n, powers, {}, [w for w, _ in slots], defs)

    @classmethod
    def cyclic(cls, p: int, k: int) -> "PcGroup":
        return cls.abelian(p, [k])

    @classmethod
    def elementary_abelian(cls, p: int, d: int) -> "PcGroup":
        return cls.abelian(p, [1] * d)


def _projective_points(d: int, p: int):
    """Nonzero vectors of F_p^d whose first nonzero entry is 1."""
    for v in itertools.product(range(p), repeat=d):
        lead = next((x for x in v if x), 0)
        if lead == 1:
            yield v


def _kernel_basis(f, p):
    from .linalg import nullspace

    return nullspace([f], len(f), p)


# -- subgroups -----------------------------------------------------------------


def _sift(G: PcGroup, table: dict, w: Element) -> Element:
    while True:
        d = _leading(w)
        if d < 0 or d not in table:
            return w
        u = table[d]
        w = G.mul(G.pow(u, -w[d]), w)


def _closure(G: PcGroup, gens: Iterable[Element], normal: bool, table: dict | None = None) -> dict:
    table = dict(table or {})
    queue = [tuple(x) for x in gens]
    p = G.p
    while queue:
        w = _sift(G, table, queue.pop())
        d = _leading(w)
        if d < 0:
            continue
        if w[d] != 1:
            w = G.pow(w, pow(w[d], -1, p))
        others = list(table.values())
        table[d] = w
        queue.append(G.pow(w, p))
        for v in others:
            queue.append(G.comm(w, v))
        if normal:
            for i in range(G.n):
                queue.append(G.comm(w, G.gen(i)))
    return table


class Subgroup:
    """A subgroup stored by an induced pc sequence: one element per leading depth,
    each with leading exponent 1."""

    def __init__(self, group: PcGroup, table: dict):
        self.group = group
        self.table = dict(sorted(table.items()))

    @property
    def pcgs(self) -> tuple:
        return tuple(self.table.values())

    @property
    def depths(self) -> tuple:
        return tuple(self.table.keys())

    @property
    def order(self) -> int:
        return self.group.p ** len(self.table)

    def __len__(self):
        return len(self.table)

    def __eq__(self, other):
        if not isinstance(other, Subgroup) or other.group is not self.group:
            return NotImplemented
        return self.depths == other.depths and all(self.contains(u) for u in other.pcgs)

    def __hash__(self):
        return hash(self.depths)

    def __repr__(self):
        return f"<Subgroup of order {self.group.p}^{len(self.table)}>"

    def sift(self, x: Element) -> Element:
        return _sift(self.group, self.table, x)

    def contains(self, x: Element) -> bool:
        return not any(self.sift(x))

    __contains__ = contains

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return all(self.contains(u) for u in other.pcgs)

    def canonical(self, x: Element) -> Element:
        """Canonical representative of the coset xS (zero at every depth of S)."""
        G = self.group
        for d, u in self.table.items():
            if x[d]:
                x = G.mul(x, G.pow(u, -x[d]))
        return x

    def exponents(self, x: Element) -> tuple:
        """Exponents (f_1..f_m) with x = u_1^f_1 ... u_m^f_m; requires x in S."""
        G = self.group
        out = []
        for d, u in self.table.items():
            e = x[d]
            out.append(e)
            if e:
                x = G.mul(G.pow(u, -e), x)
        if any(x):
            raise ValidationError("element not in subgroup")
        return tuple(out)

    def elements(self) -> Iterator[Element]:
        G = self.group
        pcgs = self.pcgs
        for exps in itertools.product(range(G.p), repeat=len(pcgs)):
            x = G.identity()
            for u, e in zip(pcgs, exps):
                if e:
                    x = G.mul(x, G.pow(u, e))
            yield x

    def is_normal(self) -> bool:
        G = self.group
        return all(self.contains(G.comm(u, G.gen(i))) for u in self.pcgs for i in range(G.n))

    def join(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.group, _closure(self.group, other.pcgs, normal=False, table=self.table))

    def as_pcgroup(self) -> PcGroup:
        """The subgroup as a group in its own right, presented on its induced pcgs."""
        G = self.group
        pcgs = self.pcgs
        m = len(pcgs)
        powers = [self.exponents(G.pow(u, G.p)) for u in pcgs]
        comms = {}
        for j in range(m):
            for i in range(j):
                w = self.exponents(G.comm(pcgs[j], pcgs[i]))
                if any(w):
                    comms[(j, i)] = w
        return PcGroup(G.p, m, powers, comms, check=False)


def abelian_invariants(H) -> tuple[int, ...]:
    """Ascending list of p-powers [p^e1, ..., p^ek] describing H/[H, H].

    Elementary divisors of the abelianised relation matrix, computed over
    Z/p^K with K large enough that no information is lost.
    """
    if isinstance(H, Subgroup):
        H = H.as_pcgroup()
    p, n = H.p, H.n
    if n == 0:
        return ()
    K = n + 2
    mod = p ** K
    rows = []
    for i in range(n):
        r = [(-e) % mod for e in H.powers[i]]
        r[i] = (r[i] + p) % mod
        rows.append(r)
    for w in H.comms.values():
        rows.append([(-e) % mod for e in w])
    divisors = _elementary_divisors(rows, n, p, K)
    return tuple(sorted(p ** v for v in divisors if v > 0))


def _valuation(x: int, p: int, K: int) -> int:
    if x == 0:
        return K
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _elementary_divisors(rows, ncols, p, K) -> list[int]:
    """p-adic valuations of the elementary divisors of a matrix over Z/p^K."""
    mod = p ** K
    m = [list(r) for r in rows]
    out = []
    col_left = list(range(ncols))
    while col_left:
        best = None
        for i, r in enumerate(m):
            for c in col_left:
                if r[c] % mod:
                    v = _valuation(r[c] % mod, p, K)
                    if best is None or v < best[0]:
                        best = (v, i, c)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            # remaining columns have no relation: Z/p^K factors (infinite in truth)
            out.extend([K] * len(col_left))
            break
        v, i, c = best
        piv = m[i][c] % mod
        unit = piv // p ** v
        uinv = pow(unit, -1, mod)
        prow = [(x * uinv) % mod for x in m[i]]  # pivot entry now p^v
        pv = p ** v
        newm = []
        for k, r in enumerate(m):
            if k == i:
                continue
            f = r[c] % mod
            if f:
                q = f // pv  # exact: v is minimal
                r = [(a - q * b) % mod for a, b in zip(r, prow)]
            newm.append(r)
        # column operations clear the pivot row; other entries are multiples of p^v
        m = newm
        col_left.remove(c)
        out.append(v)
    return out


# -- programs -------------------------------------------------------------------


@dataclass
class Program:
    """Straight-line program producing every pc generator from a_0..a_{d-1}.

    Steps are ("g", i), ("m", a, b) for r_a * r_b, ("p", a, e) for r_a^e and
    ("c", a, b) for [r_a, r_b]; ``outputs[k]`` is the register holding a_k.
    """

    rank: int
    steps: list
    outputs: list

    @classmethod
    def build(cls, G: PcGroup) -> "Program":
        d = G.rank
        if G.weights is None:
            phi = G.frattini()
            if set(phi.depths) != set(range(d, G.n)):
                raise PresentationError("the first d pc generators must generate the group")
        regs: list = []
        steps: list = []

        def emit(step, val):
            steps.append(step)
            regs.append(val)
            return len(regs) - 1

        table: dict = {}

        def insert(r):
            while True:
                w = regs[r]
                dd = _leading(w)
                if dd < 0:
                    return None
                if dd in table:
                    u = table[dd]
                    r1 = emit(("p", u, -w[dd]), G.pow(regs[u], -w[dd]))
                    r = emit(("m", r1, r), G.mul(regs[r1], w))
                    continue
                if w[dd] != 1:
                    f = pow(w[dd], -1, G.p)
                    r = emit(("p", r, f), G.pow(w, f))
                table[dd] = r
                return r

        queue = [emit(("g", i), G.gen(i)) for i in range(d)]
        qi = 0
        new_entries = []
        for r in queue:
            t = insert(r)
            if t is not None:
                new_entries.append(t)
        while len(table) < G.n and qi < len(new_entries):
            u = new_entries[qi]
            qi += 1
            cands = [emit(("p", u, G.p), G.pow(regs[u], G.p))]
            for v in list(table.values()):
                if v != u:
                    cands.append(emit(("c", u, v), G.comm(regs[u], regs[v])))
                    cands.append(emit(("c", v, u), G.comm(regs[v], regs[u])))
            for c in cands:
                t = insert(c)
                if t is not None:
                    new_entries.append(t)
                if len(table) == G.n:
                    break
        if len(table) < G.n:
            raise PresentationError("generators do not generate the group")
        outputs = []
        for k in range(G.n):
            w = G.gen(k)
            factors = []
            while any(w):
                dd = _leading(w)
                e = w[dd]
                factors.append((table[dd], e))
                w = G.mul(G.pow(regs[table[dd]], -e), w)
            r = None
            for reg, e in factors:
                if e != 1:
                    reg = emit(("p", reg, e), None)
                r = reg if r is None else emit(("m", r, reg), None)
            outputs.append(r)
        return cls(d, steps, outputs)._pruned()

    def _pruned(self) -> "Program":
        need = set()
        stack = list(self.outputs)
        while stack:
            r = stack.pop()
            if r in need:
                continue
            need.add(r)
            s = self.steps[r]
            if s[0] in ("m", "c"):
                stack.extend([s[1], s[2]])
            elif s[0] == "p":
                stack.append(s[1])
        keep = sorted(need | set(range(self.rank)))
        remap = {old: new for new, old in enumerate(keep)}
        steps = []
        for old in keep:
            s = self.steps[old]
            if s[0] == "g":
                steps.append(s)
            elif s[0] == "p":
                steps.append(("p", remap[s[1]], s[2]))
            else:
                steps.append((s[0], remap[s[1]], remap[s[2]]))
        return Program(self.rank, steps, [remap[o] for o in self.outputs])

    def evaluate(self, images: Sequence[Element], target: PcGroup) -> tuple:
        regs = []
        for s in self.steps:
            op = s[0]
            if op == "g":
                regs.append(images[s[1]])
            elif op == "m":
                regs.append(target.mul(regs[s[1]], regs[s[2]]))
            elif op == "p":
                regs.append(target.pow(regs[s[1]], s[2]))
            else:
                regs.append(target.comm(regs[s[1]], regs[s[2]]))
        return tuple(regs[o] for o in self.outputs)


# -- text format ------------------------------------------------------------------

_HEADER = re.compile(r"^p\s+(\d+)\s+n\s+(\d+)\s+d\s+(\d+)\s*$")
_FACTOR = re.compile(r"^g(\d+)(?:\^(-?\d+))?$")


def format_word(v: Element) -> str:
    return " ".join(f"g{i + 1}^{e}" if e != 1 else f"g{i + 1}" for i, e in enumerate(v) if e)


def format_presentation(G: PcGroup) -> str:
    lines = [f"p {G.p} n {G.n} d {G.rank}"]
    if G.weights is not None:
        lines.append("W " + " ".join(str(w) for w in G.weights))
    for i, w in enumerate(G.powers):
        if any(w):
            lines.append(f"P {i + 1} : {format_word(w)}")
    for (j, i), w in sorted(G.comms.items()):
        lines.append(f"C {j + 1} {i + 1} : {format_word(w)}")
    if G.definitions is not None:
        for k, dfn in enumerate(G.definitions):
            if dfn is not None:
                lines.append(f"D {k + 1} : {dfn[0]} " + " ".join(str(x + 1) for x in dfn[1:]))
    return "\n".join(lines) + "\n"


def _parse_word(text: str, n: int, p: int, lineno: int) -> Element:
    v = [0] * n
    last = -1
    for tok in text.split():
        m = _FACTOR.match(tok)
        if not m:
            raise PresentationError(f"line {lineno}: bad factor {tok!r}")
        k = int(m.group(1)) - 1
        e = int(m.group(2)) if m.group(2) is not None else 1
        if not 0 <= k < n:
            raise PresentationError(f"line {lineno}: generator g{k + 1} out of range")
        if k <= last:
            raise PresentationError(f"line {lineno}: word is not in normal order")
        if not 0 < e < p:
            raise PresentationError(f"line {lineno}: exponent must lie in [1, p)")
        v[k] = e
        last = k
    return tuple(v)


def _parse_definition(definitions: list, rest: str, n: int, lineno: int) -> None:
    """Parse 'k : P i' or 'k : C j i' (generator k is defined by that relation)."""
    lhs, sep, rhs = rest.partition(":")
    try:
        k = int(lhs) - 1
        kind, *idx = rhs.split()
        idx = [int(x) - 1 for x in idx]
    except ValueError:
        raise PresentationError(f"line {lineno}: bad definition {rest!r}") from None
    if not sep or not 0 <= k < n or (kind, len(idx)) not in (("P", 1), ("C", 2)):
        raise PresentationError(f"line {lineno}: bad definition {rest!r}")
    if any(not 0 <= x < k for x in idx):
        raise PresentationError(f"line {lineno}: definition must use earlier generators")
    definitions[k] = (kind, *idx)


def parse_presentation(text: str) -> PcGroup:
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise PresentationError("empty presentation")
    lineno, head = lines[0]
    m = _HEADER.match(head)
    if not m:
        raise PresentationError(f"line {lineno}: expected 'p <prime> n <ngens> d <rank>'")
    p, n, d = (int(x) for x in m.groups())
    powers = [(0,) * n for _ in range(n)]
    comms = {}
    weights = None
    definitions = None
    for lineno, ln in lines[1:]:
        kind, _, rest = ln.partition(" ")
        if kind == "W":
            weights = [int(x) for x in rest.split()]
            continue
        if kind == "D":
            definitions = definitions or [None] * n
            _parse_definition(definitions, rest, n, lineno)
            continue
        lhs, sep, rhs = rest.partition(":")
        if not sep:
            raise PresentationError(f"line {lineno}: missing ':'")
        idx = [int(x) - 1 for x in lhs.split()]
        if kind == "P" and len(idx) == 1:
            if not 0 <= idx[0] < n:
                raise PresentationError(f"line {lineno}: index out of range")
            powers[idx[0]] = _parse_word(rhs, n, p, lineno)
        elif kind == "C" and len(idx) == 2:
            j, i = idx
            if not 0 <= i < j < n:
                raise PresentationError(f"line {lineno}: need j > i")
            comms[(j, i)] = _parse_word(rhs, n, p, lineno)
        else:
            raise PresentationError(f"line {lineno}: unknown relation {ln!r}")
    G = PcGroup(p, n, powers, comms, weights, definitions)
    if G.rank != d:
        raise PresentationError(f"declared rank {d} but the group has rank {G.rank}")
    if weights is None:
        phi = G.frattini()
        if set(phi.depths) != set(range(d, n)):
            raise PresentationError("the first d generators must be a basis modulo the Frattini subgroup")
    elif not G.is_weighted:
        raise PresentationError("weights do not match the lower p-central series")
    return G


# -- functional API -----------------------------------------------------------------


def multiply(G: PcGroup, a: Element, b: Element) -> Element:
    if len(a) != G.n or len(b) != G.n:
        raise ValidationError(f"elements of this group have {G.n} exponents")
    return G.mul(tuple(a), tuple(b))


def normal_closure(G: PcGroup, gens: Iterable[Element]) -> Subgroup:
    return G.normal_closure(gens)


def quotient(G: PcGroup, N: Subgroup):
    return G.quotient(N)


def lower_p_central(G: PcGroup):
    """(P_0, ..., P_c) together with the p-class c."""
    series = G.lower_p_central
    return series, len(series) - 1


def index_p_subgroups(G: PcGroup) -> list[Subgroup]:
    return G.index_p_subgroups()
