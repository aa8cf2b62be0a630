"""Generator-inverting involutions, their fixed points, and the relation pools X_c.

A sigma-automorphism of G is an automorphism of order 2 inducing inversion on
G/[G, G].  Because p is odd, any automorphism inducing -I on G/Phi(G) has
order 2 p^a, and its p^a-th power is such an involution.  Since <sigma> has
order prime to p, its fixed points can be counted one lower p-central layer
at a time: z = p^(sum of dim ker(A_k - I)) where A_k is the action on
P_k/P_{k+1}.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import linalg
from .autgroup import AutGroup, AutOps, automorphism_group
from .cover import CoverData
from .errors import BudgetExceeded, ValidationError
from .pcgroup import PcGroup, Subgroup

BRUTE_FORCE_LIMIT = 8  # scan all elements when |G| <= p^8


def compose_on(G: PcGroup, a, b):
    """a after b, for automorphisms given by generator images in any group."""
    full = G.images_from_generators(a, G)
    return tuple(G.word_value(full, y, G) for y in b)


def apply_on(G: PcGroup, a, x):
    return G.word_value(G.images_from_generators(a, G), x, G)


def make_involution(G: PcGroup, s):
    """Replace s (of order 2 p^a) by s^(p^a)."""
    ident = tuple(G.gen(i) for i in range(G.rank))
    for _ in range(4 * G.n + 4):
        if compose_on(G, s, s) == ident:
            return s
        t = ident
        for _ in range(G.p):
            t = compose_on(G, s, t)
        s = t
    raise ValidationError("automorphism does not have order 2 p^a")


@dataclass
class SigmaData:
    group: PcGroup
    sigma: tuple
    z: int
    _fixed: Subgroup | None = field(default=None, repr=False)

    @property
    def full(self):
        return self.group.images_from_generators(self.sigma, self.group)

    def apply(self, x):
        return self.group.word_value(self.full, x, self.group)

    @property
    def fixed_subgroup(self) -> Subgroup:
        if self._fixed is None:
            self._fixed = fixed_subgroup(self.group, self.sigma)
        return self._fixed


def is_sigma(G: PcGroup, s) -> bool:
    """Order two and inverting G/Phi(G) (hence G/[G, G])."""
    d = G.rank
    full = G.images_from_generators(s, G)
    if not G.is_homomorphism(full, G):
        return False
    if compose_on(G, s, s) != tuple(G.gen(i) for i in range(d)):
        return False
    ab = _abelianisation(G)
    return all(ab(s[i]) == ab(G.inv(G.gen(i))) for i in range(d))


def _abelianisation(G: PcGroup):
    D = G.normal_closure([G.comm(G.gen(j), G.gen(i)) for j in range(G.n) for i in range(j)])
    return D.canonical


def find_sigma(G: PcGroup, aut: AutGroup | None = None) -> SigmaData | None:
    """A sigma-automorphism, or None when none exists.

    With the full automorphism group at hand this is a lookup: sigma exists
    iff -I lies in the image of Aut(G) in GL(d, p).
    """
    if aut is None:
        aut, S, images = automorphism_group(G)
        if S.relation_data() != G.relation_data():
            s = find_sigma(S, aut)
            if s is None:
                return None
            # transport along the isomorphism S -> G
            imgs = tuple(G.word_value(images, y, G) for y in s.sigma)
            return SigmaData(G, imgs, s.z)
    d, p = G.rank, G.p
    minus = tuple(tuple((-int(i == j)) % p for j in range(d)) for i in range(d))
    if minus not in aut.top:
        return None
    s = make_involution(G, aut.top[minus])
    return SigmaData(G, s, z_value(G, s))


def z_value(G: PcGroup, s) -> int:
    """Number of fixed points of the involution s."""
    if isinstance(s, SigmaData):
        s = s.sigma
    if G.is_weighted:
        ops = AutOps.of(G)
        full = ops.full(s)
        dim = 0
        for k in range(ops.c):
            A = ops.layer_matrix(full, k)
            shifted = tuple(tuple((A[i][j] - int(i == j)) % G.p for j in range(len(A))) for i in range(len(A)))
            dim += len(linalg.nullspace(shifted, len(A), G.p))
        return G.p ** dim
    return fixed_subgroup(G, s).order


def fixed_subgroup(G: PcGroup, s) -> Subgroup:
    """A = {x : s(x) = x}, by scanning the group."""
    if G.n > BRUTE_FORCE_LIMIT:
        raise BudgetExceeded(f"fixed-point scan limited to order p^{BRUTE_FORCE_LIMIT}", bound=G.n)
    full = G.images_from_generators(s, G)
    fixed = [x for x in G.elements() if G.word_value(full, x, G) == x]
    return G.subgroup(fixed)


def fixed_point_count(G: PcGroup, s) -> int:
    """Independent count of fixed points by a full scan (oracle for z)."""
    full = G.images_from_generators(s, G)
    return sum(1 for x in G.elements() if G.word_value(full, x, G) == x)


def generator_inversion(W: PcGroup) -> SigmaData:
    """sigma(x_i) = x_i^-1 on a group where this is an automorphism (e.g. W_{g,c})."""
    s = tuple(W.inv(W.gen(i)) for i in range(W.rank))
    if not W.is_homomorphism(W.images_from_generators(s, W), W):
        raise ValidationError("generator inversion is not an automorphism here")
    return SigmaData(W, s, z_value(W, s))


def inverted_elements(G: PcGroup, s) -> list:
    """B = {y : s(y) = y^-1}."""
    full = G.images_from_generators(s, G)
    return [x for x in G.elements() if G.word_value(full, x, G) == G.inv(x)]


def aut_sigma_order(G: PcGroup, s, aut_order: int | None = None) -> int:
    """|C_Aut(G)(sigma)| from the identity |Aut(G)| / z^g."""
    if isinstance(s, SigmaData):
        z = s.z
    else:
        z = z_value(G, s)
    if aut_order is None:
        aut_order = automorphism_group(G)[0].order
    q, r = divmod(aut_order, z ** G.rank)
    if r:
        raise ValidationError("z^g does not divide |Aut(G)|")
    return q


def centralizer_brute_force(G: PcGroup, s) -> int:
    """Count automorphisms commuting with s by searching generator images.

    If s inverts every generator, a commuting automorphism must send each
    generator into B = {y : s(y) = y^-1}, which shrinks the search.
    """
    import itertools

    if isinstance(s, SigmaData):
        s = s.sigma
    d, p = G.rank, G.p
    if G.order > p ** 6:
        raise BudgetExceeded("centraliser brute force limited to order p^6", bound=G.order)
    sfull = G.images_from_generators(s, G)
    inverts = all(s[i] == G.inv(G.gen(i)) for i in range(d))
    pool = inverted_elements(G, s) if inverts else list(G.elements())
    count = 0
    for imgs in itertools.product(pool, repeat=d):
        if linalg.rank([x[:d] for x in imgs], p) < d:
            continue
        full = G.program.evaluate(imgs, G)
        if not G.is_homomorphism(full, G):
            continue
        if all(G.word_value(full, s[i], G) == G.word_value(sfull, imgs[i], G) for i in range(d)):
            count += 1
    return count


def sigma_lift(G: PcGroup, s, cd: CoverData) -> SigmaData:
    """An involution of G* inducing s on G."""
    if isinstance(s, SigmaData):
        s = s.sigma
    C = cd.cover
    lifted = make_involution(C, tuple(cd.lift(x) for x in s))
    z = z_value(C, lifted) if C.is_weighted or C.n <= BRUTE_FORCE_LIMIT else None
    return SigmaData(C, lifted, z)


def sigma_to_quotient(cd: CoverData, s, Q: PcGroup, proj) -> tuple:
    """Involution of Q = G*/M induced by the lift of s (M must be s-stable)."""
    if isinstance(s, SigmaData):
        s = s.sigma
    return make_involution(Q, tuple(proj(cd.lift(x)) for x in s))


# -- relation pools -------------------------------------------------------------


class XSet:
    """X_c = {t^-1 sigma(t) : t in Phi(W)} inside W = W_{g,c}.

    Elements are stored explicitly when Phi(W) is small enough to scan and
    otherwise only membership (via the equivalent description
    {s in Phi : sigma(s) = s^-1}) and sampling are available.
    """

    def __init__(self, W: PcGroup, sigma: SigmaData | None = None, explicit_limit: int = BRUTE_FORCE_LIMIT):
        self.ambient = W
        self.sigma = sigma or generator_inversion(W)
        self.phi = W.frattini()
        self._full = self.sigma.full
        self.elements = None
        if len(self.phi) <= explicit_limit:
            self.elements = frozenset(self.image(t) for t in self.phi.elements())

    def image(self, t):
        W = self.ambient
        return W.mul(W.inv(t), W.word_value(self._full, t, W))

    def contains(self, x) -> bool:
        if self.elements is not None:
            return x in self.elements
        W = self.ambient
        return self.phi.contains(x) and W.word_value(self._full, x, W) == W.inv(x)

    __contains__ = contains

    def __len__(self):
        if self.elements is None:
            raise BudgetExceeded("X_c is not stored explicitly at this size")
        return len(self.elements)

    def inverted_part(self) -> frozenset:
        """X' = {s in Phi(W) : sigma(s) = s^-1}, by scanning Phi(W)."""
        W = self.ambient
        return frozenset(s for s in self.phi.elements() if W.word_value(self._full, s, W) == W.inv(s))

    def equals_inverted_part(self) -> bool:
        return self.elements == self.inverted_part()

    def fiber_sizes(self) -> set:
        """Sizes of the fibres of t -> t^-1 sigma(t) on Phi(W)."""
        counts: dict = {}
        for t in self.phi.elements():
            y = self.image(t)
            counts[y] = counts.get(y, 0) + 1
        return set(counts.values())

    def sample(self, rng: random.Random):
        W = self.ambient
        t = W.identity()
        for u in self.phi.pcgs:
            e = rng.randrange(W.p)
            if e:
                t = W.mul(t, W.pow(u, e))
        return self.image(t)

    def sorted_elements(self) -> list:
        return sorted(self.elements)


def x_set(W: PcGroup, s: SigmaData | None = None) -> XSet:
    return XSet(W, s)
