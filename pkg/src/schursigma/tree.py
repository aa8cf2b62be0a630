"""The Schur sigma-tree: Schur sigma-groups connected by immediate descent.

The root is (Z/p)^g with measure 1.  A node G of class c carries a relation
tuple from X_c presenting it together with the epimorphism W_c -> G.  Its
Schur children are found by lifting that tuple to X_{c+1} in every possible
way: each lift spans a subspace M of the multiplicator of G*, and G*/M is a
child when M is proper.  Children are grouped into Aut(G)-orbits of M, and a
child receives the measure of G times the proportion of lifts landing in its
orbit.  Lifts with M equal to the whole multiplicator present G itself; that
mass is retained by G.

Every node also gets the closed-form measure z^g/|Aut| * ..., so the two
routes can be compared node by node.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .autgroup import AutGroup, AutOps, SubspaceAction, automorphism_group, descendant_automorphisms, fingerprint_label
from .cover import DEFAULT_MAX_MULT_RANK, CoverData, p_cover
from .errors import BudgetExceeded, ValidationError
from .ipad import Ipad, ipad, ipad_leq, parse_ipad
from .measure import DEFAULT_TUPLE_BUDGET, RelationLifter, lift_spans, lifted_witness, meas_value
from .pcgroup import PcGroup, format_presentation, format_word, parse_presentation
from .sigma import z_value

FLAGS = ("schur", "terminal", "settled", "pseudo_schur_candidate", "expanded", "open")
HEADER = "# label\tparent\torder\tclass\tflags\tmeasure\tformula\tlifted\tretained\tipad\twitness\tpresentation"


@dataclass(eq=False)
class TreeNode:
    label: str
    group: PcGroup
    cls: int
    parent: str | None
    measure: Fraction
    witness: tuple = ()
    images: tuple = ()
    schur: bool = True
    terminal: bool = False
    settled: bool = False
    expanded: bool = False
    retained: Fraction = Fraction(0)
    formula: Fraction | None = None
    lifted: Fraction | None = None
    pseudo_schur_candidate: bool = False
    has_sigma: bool | None = None
    ipad: Ipad | None = None
    h: int | None = None
    nuclear_rank: int | None = None
    aut_order: int | None = None
    z: int | None = None
    alias: str | None = None
    note: str = ""
    children: list = field(default_factory=list)
    aut: AutGroup | None = field(default=None, repr=False)
    cover: CoverData | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def open(self) -> bool:
        return self.schur and not (self.terminal or self.settled or self.expanded)

    @property
    def flags(self) -> list[str]:
        return [f for f in FLAGS if getattr(self, f)]

    @property
    def agrees(self) -> bool | None:
        """Whether the lifted (enumeration) mass equals the closed form."""
        if self.formula is None or self.lifted is None:
            return None
        return self.formula == self.lifted


class SchurTree:
    def __init__(self, p: int, g: int):
        self.p = p
        self.g = g
        self.nodes: dict[str, TreeNode] = {}

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes.values())

    def __getitem__(self, key) -> TreeNode:
        if key in self.nodes:
            return self.nodes[key]
        for node in self.nodes.values():
            if node.alias == key:
                return node
        raise KeyError(key)

    def add(self, node: TreeNode) -> TreeNode:
        base, k = node.label, 1
        while node.label in self.nodes:
            k += 1
            node.label = f"{base}.{k}"
        self.nodes[node.label] = node
        if node.parent is not None:
            self.nodes[node.parent].children.append(node.label)
        return node

    def roots(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.parent is None]

    def children(self, node: TreeNode) -> list[TreeNode]:
        return [self.nodes[c] for c in node.children]

    def at_class(self, c: int) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.cls == c]

    def leaves_mass(self) -> Fraction:
        """Mass of the frontier: terminal, settled or unexpanded nodes plus retained mass."""
        total = Fraction(0)
        for n in self.nodes.values():
            if n.schur:
                total += n.retained if n.expanded else n.measure
        return total

    def to_text(self) -> str:
        return serialize(self)


# -- serialisation ------------------------------------------------------------------


def _fmt_fraction(x) -> str:
    return "-" if x is None else str(Fraction(x))


def _parse_fraction(s: str):
    return None if s == "-" else Fraction(s)


def _fmt_witness(node: TreeNode) -> str:
    rels = ";".join(format_word(r) or "1" for r in node.witness)
    imgs = ";".join(format_word(x) or "1" for x in node.images)
    return f"{rels}|{imgs}" if node.witness else "-"


def _parse_elements(s: str, n: int, p: int) -> tuple:
    from .pcgroup import _parse_word

    return tuple(_parse_word("" if w == "1" else w, n, p, 0) for w in s.split(";"))


def serialize(tree: SchurTree) -> str:
    lines = [f"# schur sigma tree p={tree.p} g={tree.g}", HEADER]
    for n in tree.nodes.values():
        pres = format_presentation(n.group).strip().replace("\n", " | ")
        flags = ",".join(n.flags) or "-"
        if n.alias:
            flags += f",alias={n.alias}"
        lines.append("\t".join([
            n.label, n.parent or "-", str(n.order), str(n.cls), flags,
            _fmt_fraction(n.measure), _fmt_fraction(n.formula), _fmt_fraction(n.lifted), _fmt_fraction(n.retained),
            str(n.ipad) if n.ipad else "-", _fmt_witness(n), pres,
        ]))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> SchurTree:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schur sigma tree"):
        raise ValidationError("not a tree file")
    try:
        params = dict(kv.split("=") for kv in lines[0].split()[4:])
        tree = SchurTree(int(params["p"]), int(params["g"]))
    except (KeyError, ValueError):
        raise ValidationError("bad tree header") from None
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln.strip() or ln.startswith("#"):
            continue
        cols = ln.split("\t")
        if len(cols) != 12:
            raise ValidationError(f"line {lineno}: expected 12 tab-separated fields")
        try:
            node = _parse_row(tree, cols)
        except (ValidationError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if node.parent is not None and node.parent not in tree.nodes:
            raise ValidationError(f"line {lineno}: parent {node.parent} not defined earlier")
        if node.label in tree.nodes:
            raise ValidationError(f"line {lineno}: duplicate label {node.label}")
        tree.nodes[node.label] = node
        if node.parent is not None:
            tree.nodes[node.parent].children.append(node.label)
    return tree


def _parse_row(tree: SchurTree, cols: list) -> TreeNode:
    label, parent, order, cls, flags, meas, form, lifted, ret, ip, wit, pres = cols
    G = parse_presentation(pres.replace(" | ", "\n"))
    if G.order != int(order):
        raise ValidationError("order does not match the presentation")
    flagset = set(flags.split(","))
    alias = next((f[6:] for f in flagset if f.startswith("alias=")), None)
    node = TreeNode(label, G, int(cls), None if parent == "-" else parent, Fraction(meas))
    node.formula = _parse_fraction(form)
    node.lifted = _parse_fraction(lifted)
    node.retained = Fraction(ret)
    node.ipad = None if ip == "-" else parse_ipad(ip)
    for f in ("schur", "terminal", "settled", "pseudo_schur_candidate", "expanded"):
        setattr(node, f, f in flagset)
    node.alias = alias
    if wit != "-":
        rels, _, imgs = wit.partition("|")
        n_w = _free_rank(tree.p, tree.g, node.cls)
        node.witness = _parse_elements(rels, n_w, tree.p)
        node.images = _parse_elements(imgs, G.n, tree.p)
    return node


_FREE_RANKS: dict = {}


def _free_rank(p: int, g: int, c: int) -> int:
    """Number of pc generators of W_{g,c}."""
    from .cover import free_quotient

    key = (p, g, c)
    if key not in _FREE_RANKS:
        _FREE_RANKS[key] = free_quotient(p, g, c).n
    return _FREE_RANKS[key]


# -- expansion ------------------------------------------------------------------------


@dataclass
class Budgets:
    max_class: int = 3
    max_order: int | None = None       # do not expand nodes of order above p^max_order
    max_mult_rank: int = DEFAULT_MAX_MULT_RANK
    lift_budget: int = DEFAULT_TUPLE_BUDGET
    orbit_budget: int = 200_000
    expand_settled: bool = False
    all_children: bool = False         # also record non-Schur children (pseudo-Schur screening)
    targets: tuple = ()                # IPADs of interest; prune nodes that cannot reach any of them


def node_sigma(G: PcGroup, images) -> tuple:
    """The involution of G induced by inverting the generators of W_c.

    With beta: a_i -> images[i], sigma o beta sends a_i to images[i]^-1, so
    sigma = (a_i -> images[i]^-1) o beta^-1.
    """
    ops = AutOps.of(G)
    d = G.rank
    beta = tuple(images[:d])
    s1 = tuple(G.inv(x) for x in beta)
    return ops.compose(s1, ops.inverse(beta))


class TreeBuilder:
    def __init__(self, p: int = 3, g: int = 2, budgets: Budgets | None = None, seed: int = 0):
        self.p, self.g = p, g
        self.budgets = budgets or Budgets()
        self.rng = random.Random(seed)
        self._lifters: dict = {}

    def lifter(self, c: int) -> RelationLifter:
        if c not in self._lifters:
            self._lifters[c] = RelationLifter(self.p, self.g, c)
        return self._lifters[c]

    # -- nodes ----------------------------------------------------------------------

    def root(self) -> TreeNode:
        p, g = self.p, self.g
        W1 = PcGroup.elementary_abelian(p, g)
        A, S, _ = automorphism_group(W1)
        node = TreeNode("root", S, 1, None, Fraction(1))
        node.witness = tuple(S.identity() for _ in range(g))
        node.images = tuple(S.gen(i) for i in range(g))
        node.aut = A
        node.lifted = Fraction(1)
        self.finish(node, None)
        return node

    def finish(self, node: TreeNode, parent: TreeNode | None) -> None:
        """Cover data, IPAD, terminal/settled flags and the closed-form measure."""
        G, p, g = node.group, self.p, self.g
        node.ipad = ipad(G)
        node.settled = parent is not None and parent.ipad == node.ipad
        node.aut_order = node.aut.order if node.aut is not None else None
        try:
            node.cover = p_cover(G, self.budgets.max_mult_rank)
        except BudgetExceeded as exc:
            node.note = f"cover: {exc}"
            return
        node.nuclear_rank = node.cover.nuclear_rank
        node.h = node.cover.h
        node.terminal = node.nuclear_rank == 0
        if node.images and node.aut is not None:
            node.z = z_value(G, node_sigma(G, node.images))
            node.has_sigma = True
            node.formula = meas_value(p, g, node.z, node.h, node.aut.order)
            node.measure = node.formula

    def expandable(self, node: TreeNode) -> bool:
        b = self.budgets
        if not node.schur or node.terminal or node.expanded or node.cover is None:
            return False
        if node.settled and not b.expand_settled:
            return False
        if node.cls >= b.max_class:
            return False
        if b.targets and not any(_can_reach(node.ipad, T) for T in b.targets):
            return False
        return b.max_order is None or node.group.n <= b.max_order

    def expand_node(self, tree: SchurTree, node: TreeNode) -> list[TreeNode]:
        """Create the Schur children of node; on budget failure mark it open."""
        cd = node.cover
        try:
            lifter = self.lifter(node.cls)
            ld = lift_spans(cd, node.images, node.witness, lifter, self.budgets.lift_budget)
            act = SubspaceAction(node.aut, cd)
            groups = self._span_orbits(ld, act)
        except BudgetExceeded as exc:
            node.note = f"expand: {exc}"
            return []
        m = cd.multiplicator_rank
        base = node.lifted if node.lifted is not None else node.measure
        made = []
        for M, orbit, count in groups:
            mass = base * Fraction(count, ld.total)
            if len(M) == m:
                node.retained += mass
                continue
            made.append(self._child(tree, node, ld, lifter, act, M, orbit, mass))
        if self.budgets.all_children:
            made.extend(self._other_children(tree, node, act, {M for M, _, _ in groups}))
        node.expanded = True
        return made

    def _span_orbits(self, ld, act):
        seen, out = set(), []
        for M in sorted(ld.spans):
            if M in seen:
                continue
            orbit = act.orbit(M, limit=self.budgets.orbit_budget)
            seen.update(orbit)
            count = sum(ld.spans[U].count for U in orbit if U in ld.spans)
            out.append((M, orbit, count))
        return out

    def _child(self, tree, node, ld, lifter, act, M, orbit, mass) -> TreeNode:
        cd = node.cover
        Q, proj = cd.quotient_with_projection(M)
        stab = act.stabilizer(M, self.rng, orbit)
        child = TreeNode(fingerprint_label(Q), Q, node.cls + 1, node.label, mass)
        child.lifted = mass
        child.aut = descendant_automorphisms(stab, cd, Q, proj)
        child.images = tuple(proj(cd.lift(x)) for x in node.images)
        child.witness = lifted_witness(ld, lifter, node.witness, ld.spans[M].sample)
        self.finish(child, node)
        return tree.add(child)

    def _other_children(self, tree, node, act, schur_reps) -> list[TreeNode]:
        """Non-Schur immediate descendants, screened by the weak filters."""
        cd = node.cover
        reached = set()
        for M in schur_reps:
            reached.update(act.orbit(M))
        out = []
        for K, size in act.orbits(cd.allowable_subspaces()):
            if K in reached:
                continue
            Q, proj = cd.quotient_with_projection(K)
            stab = act.stabilizer(K, self.rng)
            child = TreeNode(fingerprint_label(Q), Q, node.cls + 1, node.label, Fraction(0), schur=False)
            child.aut = descendant_automorphisms(stab, cd, Q, proj)
            child.ipad = ipad(Q)
            child.aut_order = child.aut.order
            try:
                ccd = p_cover(Q, self.budgets.max_mult_rank)
                child.h, child.nuclear_rank = ccd.h, ccd.nuclear_rank
                child.terminal = ccd.nuclear_rank == 0
            except BudgetExceeded as exc:
                child.note = f"cover: {exc}"
            child.has_sigma = _has_sigma(child.aut)
            child.pseudo_schur_candidate = bool(child.has_sigma and child.h is not None and child.h <= self.g)
            out.append(tree.add(child))
        return out

    # -- driver -------------------------------------------------------------------------

    def build(self) -> SchurTree:
        tree = SchurTree(self.p, self.g)
        queue = [tree.add(self.root())]
        while queue:
            nxt = []
            for node in queue:
                if self.expandable(node):
                    nxt.extend(self.expand_node(tree, node))
            queue = [n for n in nxt if n.schur]
        assign_aliases(tree)
        return tree


def _can_reach(I: Ipad, T: Ipad) -> bool:
    """Descendants only have larger IPADs, so I must lie below T."""
    return I.size == T.size and ipad_leq(I, T)


def _has_sigma(aut: AutGroup) -> bool:
    d, p = aut.ops.d, aut.G.p
    minus = tuple(tuple((-int(i == j)) % p for j in range(d)) for i in range(d))
    return minus in aut.top


def expand(p: int = 3, g: int = 2, max_class: int = 3, budgets: Budgets | None = None, seed: int = 0,
           **kw) -> SchurTree:
    """Breadth-first Schur sigma-tree down to p-class max_class."""
    budgets = budgets or Budgets(max_class=max_class, **kw)
    budgets.max_class = max_class
    return TreeBuilder(p, g, budgets, seed).build()


# -- aliases --------------------------------------------------------------------------

# IPADs that single out particular nodes at (p, g) = (3, 2)
LINE_1 = "[3,3];[3,3,3][3,9]^3"
LINE_2 = "[3,9];[3,3,9]^2[3,27]^2"
LINE_3 = "[3,3];[3,3,3]^3[3,9]"
LINE_4 = "[3,3];[3,3,3]^2[3,9]^2"
LINE_10 = "[3,3];[3,9]^4"

# (alias, parent alias, IPAD, terminal, measure); None matches anything
ALIAS_RULES = [
    ("H3", "G1", LINE_1, True, Fraction(128, 729)),
    ("H5", "G1", LINE_4, True, Fraction(64, 729)),
    ("H4", "G1", LINE_1, False, None),
    ("H1", "G1", LINE_4, False, None),
    ("H2", "G1", LINE_3, False, None),
    ("H7", "G1", LINE_10, False, Fraction(16, 729)),
    ("H6", "G1", LINE_10, False, Fraction(64, 729)),
    ("J10", "G2", LINE_2, False, None),
]


def assign_aliases(tree: SchurTree) -> None:
    """Name nodes the way the literature does where invariants pin them down.

    Class-2 nodes are G1, G2, G3 by increasing order.  Among the children of
    G1 and G2 the names follow ALIAS_RULES; the two terminal children of G2
    with IPAD line (2) become J11 and J12 in label order.
    """
    if (tree.p, tree.g) != (3, 2):
        return
    level2 = sorted((n for n in tree.at_class(2) if n.schur), key=lambda n: n.order)
    if [n.order for n in level2] != [27, 81, 243]:
        return
    by_alias = {}
    for name, node in zip(("G1", "G2", "G3"), level2):
        node.alias = name
        by_alias[name] = node
    for alias, parent, ip, terminal, meas in ALIAS_RULES:
        if parent not in by_alias:
            continue
        hits = [c for c in tree.children(by_alias[parent])
                if c.schur and str(c.ipad) == ip and c.terminal == terminal
                and (meas is None or c.measure == meas)]
        if len(hits) == 1:
            hits[0].alias = alias
    if "G2" in by_alias:
        hits = [c for c in tree.children(by_alias["G2"]) if c.schur and c.terminal and str(c.ipad) == LINE_2]
        if len(hits) == 2:
            for name, node in zip(("J11", "J12"), sorted(hits, key=lambda n: n.label)):
                node.alias = name


def classify(node: TreeNode) -> list[str]:
    return node.flags


def measure_flow(tree: SchurTree) -> list[tuple]:
    """(label, node measure, children + retained) at every expanded non-terminal Schur node."""
    out = []
    for n in tree:
        if n.schur and n.expanded and not n.terminal:
            total = sum((c.measure for c in tree.children(n) if c.schur), n.retained)
            out.append((n.label, n.measure, total))
    return out
