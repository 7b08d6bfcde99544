"""Spanning forest polynomials, the second graph polynomial and their Cremona
transforms, with a determinant route through the Laplace matrix."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import FeynmanGraph, GraphError, laplace_matrix
from .poly import Poly, SPoly


@dataclass(frozen=True)
class VertexPartition:
    """Ordered disjoint blocks of vertex ids."""

    blocks: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a partition needs at least one block")
        seen = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if seen & b:
                raise ValueError("blocks are not disjoint")
            seen |= b

    @classmethod
    def of(cls, *blocks: Iterable[int]) -> "VertexPartition":
        return cls(tuple(frozenset(b) for b in blocks))

    def check_external(self, G: FeynmanGraph) -> None:
        for b in self.blocks:
            for v in b:
                if not G.vertices[v].external:
                    raise ValueError(f"vertex {G.label(v)!r} is not external")

    def describe(self, G: FeynmanGraph) -> str:
        return ",".join("".join(sorted(G.label(v) for v in b)) for b in self.blocks)


def parse_partition(G: FeynmanGraph, text: str) -> VertexPartition:
    """Parse ``"01,z"`` style partitions.  Blocks are comma separated; inside a
    block labels are joined by ``+`` or, for one-character labels, just
    concatenated."""
    blocks = []
    for raw in text.split(","):
        raw = raw.strip()
        if not raw:
            raise GraphError(f"empty block in partition {text!r}")
        if "+" in raw:
            labels = raw.split("+")
        elif raw in G.label_index:
            labels = [raw]
        else:
            labels = list(raw)
        try:
            blocks.append(frozenset(G.vertex(lab) for lab in labels))
        except GraphError:
            raise GraphError(f"unknown partition label in {raw!r}") from None
    return VertexPartition(tuple(blocks))


def singletons(G: FeynmanGraph) -> VertexPartition:
    return VertexPartition(tuple(frozenset([v]) for v in G.external))


def two_block_partition(G: FeynmanGraph, i: int, j: int) -> VertexPartition:
    """The partition ``ij,(k)_{k != i,j}`` of the external vertices."""
    rest = [frozenset([k]) for k in G.external if k not in (i, j)]
    return VertexPartition((frozenset([i, j]), *rest))


class _UnionFind:
    """Union-find with an undo log, for backtracking."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.history = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.history.append((b, a, self.rank[a]))
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1

    def undo(self) -> None:
        b, a, r = self.history.pop()
        self.parent[b] = b
        self.rank[a] = r


@dataclass(frozen=True)
class ForestFamily:
    partition: VertexPartition
    forests: tuple[frozenset, ...]

    def __len__(self):
        return len(self.forests)

    def __iter__(self):
        return iter(self.forests)


def spanning_forests(G: FeynmanGraph, p: VertexPartition) -> ForestFamily:
    """All spanning forests with exactly one tree per block, tree t containing block t.

    Backtracking over edges in id order; an edge is rejected when it closes a
    cycle or joins two components that both contain a block.  Blocks may contain
    any vertices (internal ones too).
    """
    n = G.n_vertices
    n_trees = len(p.blocks)
    target = n - n_trees  # edges in a spanning forest with n_trees components
    uf = _UnionFind(n)
    # each block starts glued together through a virtual root
    tag = [-1] * n
    for t, b in enumerate(p.blocks):
        for v in b:
            if tag[v] != -1:
                raise ValueError("blocks are not disjoint")
            tag[v] = t
    # marker per root: which block the component carries (or -1)
    carry = list(tag)
    # union vertices of the same block virtually: we track them via `carry` and
    # require that each block ends up in one component, checked at the leaves.
    edges = G.edges
    found: list[frozenset] = []
    chosen: list[int] = []

    def feasible_leaf() -> bool:
        roots = {}
        for t, b in enumerate(p.blocks):
            rs = {uf.find(v) for v in b}
            if len(rs) != 1:
                return False
            roots[t] = rs.pop()
        return len(set(roots.values())) == n_trees

    def rec(k: int):
        remaining = len(edges) - k
        if len(chosen) == target:
            if feasible_leaf():
                found.append(frozenset(chosen))
            return
        if len(chosen) + remaining < target:
            return
        e = edges[k]
        ra, rb = uf.find(e.u), uf.find(e.v)
        if ra != rb:
            ca, cb = carry[ra], carry[rb]
            if ca == -1 or cb == -1 or ca == cb:
                uf.union(ra, rb)
                root = uf.find(ra)
                old = carry[root]
                carry[root] = ca if ca != -1 else cb
                chosen.append(e.id)
                rec(k + 1)
                chosen.pop()
                carry[root] = old
                uf.undo()
        rec(k + 1)

    rec(0)
    found.sort(key=lambda f: sorted(f))
    return ForestFamily(p, tuple(found))


def forest_polynomial_from_family(E: int, family: Iterable[frozenset]) -> Poly:
    terms = {}
    for f in family:
        m = tuple(1 if i in f else 0 for i in range(E))
        terms[m] = terms.get(m, 0) + 1
    return Poly(E, terms)


def dual_forest_polynomial(G: FeynmanGraph, p: VertexPartition) -> Poly:
    """Sum over forests F of the product of a_e over e in F."""
    return forest_polynomial_from_family(G.n_edges, spanning_forests(G, p))


def psi_tilde(G: FeynmanGraph) -> Poly:
    return dual_forest_polynomial(G, singletons(G))


def phi_tilde(G: FeynmanGraph) -> Poly:
    """Sum over external pairs i<j of s[i,j] times the two-block forest polynomial."""
    ext = G.external
    if len(ext) < 2:
        raise ValueError("phi needs at least two external vertices")
    out = Poly.zero(G.n_edges)
    for a in range(len(ext)):
        for b in range(a + 1, len(ext)):
            i, j = ext[a], ext[b]
            poly = dual_forest_polynomial(G, two_block_partition(G, i, j))
            out = out + poly * Poly.const(G.n_edges, SPoly.symbol(G.label(i), G.label(j)))
    return out


def z_specialization(z: complex) -> dict:
    """Numeric s-values for external points 0, 1 and z in the plane."""
    z = complex(z)
    return {("0", "1"): 1.0, ("0", "z"): abs(z) ** 2, ("1", "z"): abs(1 - z) ** 2}


def z_specialization_exact(re, im) -> dict:
    """Exact s-values for z = re + i*im with rational parts."""
    re, im = Fraction(re), Fraction(im)
    return {("0", "1"): Fraction(1), ("0", "z"): re * re + im * im, ("1", "z"): (1 - re) ** 2 + im * im}


def cremona_transform(p: Poly, E: int | None = None, h: int | None = None) -> Poly:
    """(prod a_e) * p(1/a) for a multilinear homogeneous ``p``: exponent m -> 1 - m."""
    E = p.nvars if E is None else E
    if E != p.nvars:
        raise ValueError("edge count does not match the polynomial")
    if p.is_zero():
        return p
    deg = p.homogeneous_degree()
    if deg is None:
        raise ValueError("Cremona transform needs a homogeneous polynomial")
    if h is not None and h != deg:
        raise ValueError(f"polynomial has degree {deg}, not {h}")
    if not p.is_multilinear():
        raise ValueError("Cremona transform needs a multilinear polynomial")
    return p.map_exponents(lambda m: (1 - e for e in m))


def psi(G: FeynmanGraph) -> Poly:
    return cremona_transform(psi_tilde(G))


def phi(G: FeynmanGraph) -> Poly:
    return cremona_transform(phi_tilde(G))


def bareiss_determinant(M: Sequence[Sequence[Poly]], nvars: int) -> Poly:
    """Fraction-free determinant over a polynomial ring (rational coefficients)."""
    n = len(M)
    if n == 0:
        return Poly.one(nvars)
    A = [list(row) for row in M]
    sign = 1
    prev = Poly.one(nvars)
    for k in range(n - 1):
        if A[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not A[r][k].is_zero()), None)
            if swap is None:
                return Poly.zero(nvars)
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                A[i][j] = num.exact_divide(prev)
        prev = A[k][k]
    det = A[n - 1][n - 1]
    return det if sign == 1 else -det


def psi_via_determinant(G: FeynmanGraph) -> Poly:
    """det of the internal-internal Laplace block (1 for no internal vertices)."""
    return bareiss_determinant(laplace_matrix(G).ii, G.n_edges)


def laplacian_inverse_entry(G: FeynmanGraph, v: int, w: int) -> tuple[Poly, Poly]:
    """(numerator, denominator) of the (v, w) entry of the inverse internal block.

    The numerator is the forest polynomial with v and w joined and every external
    vertex in its own tree; the denominator is psi_tilde.
    """
    for x in (v, w):
        if G.vertices[x].external:
            raise ValueError(f"vertex {G.label(x)!r} is not internal")
    den = psi_tilde(G)
    if den.is_zero():
        raise GraphError("graph disconnects external components")
    ext = [frozenset([k]) for k in G.external]
    num = dual_forest_polynomial(G, VertexPartition((frozenset([v, w]), *ext)))
    return num, den


def cofactor_inverse_entry(G: FeynmanGraph, v: int, w: int) -> tuple[Poly, Poly]:
    """Same quantity through Cramer's rule on the internal Laplace block."""
    L = laplace_matrix(G)
    pos = {vid: k for k, vid in enumerate(L.order[: L.n_internal])}
    ii = L.ii
    r, c = pos[w], pos[v]  # inverse (v,w) = cofactor (w,v) / det
    minor = [[ii[a][b] for b in range(len(ii)) if b != c] for a in range(len(ii)) if a != r]
    cof = bareiss_determinant(minor, G.n_edges)
    if (r + c) % 2:
        cof = -cof
    return cof, bareiss_determinant(ii, G.n_edges)
