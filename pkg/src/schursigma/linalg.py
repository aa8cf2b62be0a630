"""Small dense linear algebra over the prime field F_p.

Vectors are tuples of ints in [0, p).  Matrices are tuples of row tuples and act
on column vectors.  Subspaces are stored by their reduced row echelon basis,
which is canonical, so two subspaces are equal iff their ``rref`` tuples are.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

Vector = tuple
Matrix = tuple


def rref(rows: Iterable[Sequence[int]], p: int) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return (), ()
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] % p:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return tuple(tuple(x % p for x in row) for row in m[:r]), tuple(pivots)


def span(rows: Iterable[Sequence[int]], p: int) -> tuple[tuple[int, ...], ...]:
    return rref(rows, p)[0]


def rank(rows: Iterable[Sequence[int]], p: int) -> int:
    return len(rref(rows, p)[0])


def reduce_vector(v: Sequence[int], basis, pivots, p: int) -> tuple[int, ...]:
    """Reduce v modulo the span of an rref basis."""
    v = list(v)
    for row, c in zip(basis, pivots):
        f = v[c] % p
        if f:
            v = [(a - f * b) % p for a, b in zip(v, row)]
    return tuple(x % p for x in v)


def in_span(v, basis, p: int) -> bool:
    pivots = tuple(row.index(next(x for x in row if x)) for row in basis)
    return not any(reduce_vector(v, basis, pivots, p))


def pivots_of(basis) -> tuple[int, ...]:
    return tuple(next(i for i, x in enumerate(row) if x) for row in basis)


def nullspace(mat: Sequence[Sequence[int]], ncols: int, p: int) -> tuple[tuple[int, ...], ...]:
    """Basis (rref) of {v : mat v = 0}."""
    rows, piv = rref(mat, p)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, c in zip(rows, piv):
            v[c] = (-row[f]) % p
        basis.append(v)
    return span(basis, p)


def mat_vec(a: Matrix, v: Sequence[int], p: int) -> tuple[int, ...]:
    return tuple(sum(x * y for x, y in zip(row, v)) % p for row in a)


def mat_mul(a: Matrix, b: Matrix, p: int) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) % p for col in bt) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_inv(a: Matrix, p: int) -> Matrix:
    n = len(a)
    aug = [list(row) + list(e) for row, e in zip(a, identity(n))]
    rows, piv = rref(aug, p)
    if tuple(piv[:n]) != tuple(range(n)) or len(rows) < n:
        raise ValueError("singular matrix")
    return tuple(tuple(row[n:]) for row in rows)


def solve(a: Matrix, b: Sequence[int], p: int):
    """One solution x of a x = b, or None."""
    nrows = len(a)
    if nrows == 0:
        return None if any(b) else ()
    ncols = len(a[0])
    aug = [list(row) + [bb] for row, bb in zip(a, b)]
    rows, piv = rref(aug, p)
    if ncols in piv:
        return None
    x = [0] * ncols
    for row, c in zip(rows, piv):
        x[c] = row[ncols]
    return tuple(x)


def image_of_subspace(a: Matrix, basis, p: int):
    """Canonical basis of a(U) for U given by basis rows (a acts on columns)."""
    return span((mat_vec(a, v, p) for v in basis), p)


def add_vectors(u, v, p: int):
    return tuple((x + y) % p for x, y in zip(u, v))


def scale(v, s: int, p: int):
    return tuple((s * x) % p for x in v)


def all_vectors(dim: int, p: int):
    return itertools.product(range(p), repeat=dim)


def subspace_elements(basis, p: int):
    """Every vector of span(basis); the zero vector comes first."""
    dim = len(basis[0]) if basis else 0
    if not basis:
        yield ()
        return
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        v = [0] * dim
        for c, row in zip(coeffs, basis):
            if c:
                for i, x in enumerate(row):
                    v[i] += c * x
        yield tuple(x % p for x in v)


def subspaces(dim: int, k: int, p: int):
    """All k-dimensional subspaces of F_p^dim, in rref form.

    Enumerated by pivot pattern so each subspace appears exactly once.
    """
    for piv in itertools.combinations(range(dim), k):
        free_slots = [(r, c) for r in range(k) for c in range(piv[r] + 1, dim) if c not in piv]
        for vals in itertools.product(range(p), repeat=len(free_slots)):
            m = [[0] * dim for _ in range(k)]
            for r, c in enumerate(piv):
                m[r][c] = 1
            for (r, c), v in zip(free_slots, vals):
                m[r][c] = v
            yield tuple(tuple(row) for row in m)


def gaussian_binomial(n: int, k: int, p: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def complement_basis(sub, dim: int, p: int):
    """Standard basis vectors completing an rref basis to the whole space."""
    piv = set(pivots_of(sub))
    return tuple(tuple(int(i == c) for i in range(dim)) for c in range(dim) if c not in piv)
