"""Weighted Feynman graphs, subgraph selectors and the Laplace matrix."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .poly import Poly


class GraphError(ValueError):
    """Invalid graph description.  ``line`` is the source line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Vertex:
    id: int
    label: str
    external: bool


@dataclass(frozen=True)
class Edge:
    id: int
    name: str
    u: int
    v: int
    weight: Fraction

    @property
    def ends(self) -> tuple[int, int]:
        return (self.u, self.v)

    def other(self, w: int) -> int:
        return self.v if w == self.u else self.u


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("exact rationals only; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class FeynmanGraph:
    """Multigraph with distinguished external vertices and a rational dimension.

    Vertex and edge ids are dense integers in input order.  Edge ``i`` carries the
    Schwinger variable ``a{i+1}``.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    dim: Fraction
    # rotation system: vertex id -> cyclic tuple of edge ids (optional)
    rotation: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.dim <= 2:
            raise GraphError("dimension must exceed 2")
        labels = [v.label for v in self.vertices]
        if len(set(labels)) != len(labels):
            dup = next(lab for lab in labels if labels.count(lab) > 1)
            raise GraphError(f"duplicate vertex label {dup!r}")
        n = len(self.vertices)
        for e in self.edges:
            if not (0 <= e.u < n and 0 <= e.v < n):
                raise GraphError(f"edge {e.name}: unknown endpoint")
            if e.u == e.v:
                raise GraphError(f"edge {e.name}: self-loop")

    @classmethod
    def build(
        cls,
        vertices: Sequence[tuple[str, bool]],
        edges: Sequence[tuple],
        dim=4,
        rotation: dict | None = None,
    ) -> "FeynmanGraph":
        """Build from ``[(label, external), ...]`` and ``[(u_label, v_label[, weight[, name]]), ...]``."""
        verts = tuple(Vertex(i, str(lab), bool(ext)) for i, (lab, ext) in enumerate(vertices))
        index = {}
        for v in verts:
            if v.label in index:
                raise GraphError(f"duplicate vertex label {v.label!r}")
            index[v.label] = v.id
        es = []
        for k, spec in enumerate(edges):
            u, v = str(spec[0]), str(spec[1])
            weight = as_fraction(spec[2]) if len(spec) > 2 else Fraction(1)
            name = str(spec[3]) if len(spec) > 3 else f"e{k + 1}"
            for end in (u, v):
                if end not in index:
                    raise GraphError(f"edge {name}: unknown endpoint {end!r}")
            es.append(Edge(k, name, index[u], index[v], weight))
        rot = None
        if rotation is not None:
            names = {e.name: e.id for e in es}
            rot = {index[str(lab)]: tuple(names[str(n)] for n in order) for lab, order in rotation.items()}
        return cls(verts, tuple(es), as_fraction(dim), rot)

    # basic counts

    @cached_property
    def lam(self) -> Fraction:
        """λ = (d-2)/2."""
        return (self.dim - 2) / 2

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.vertices if not v.external)

    @cached_property
    def external(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.vertices if v.external)

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {v.label: v.id for v in self.vertices}

    def vertex(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise GraphError(f"unknown vertex {label!r}") from None

    def label(self, vid: int) -> str:
        return self.vertices[vid].label

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        inc = [[] for _ in self.vertices]
        for e in self.edges:
            inc[e.u].append(e.id)
            inc[e.v].append(e.id)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def total_weight(self) -> Fraction:
        return sum((e.weight for e in self.edges), Fraction(0))

    def edge_by_name(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise GraphError(f"unknown edge {name!r}")

    def with_weights(self, weights: Sequence, dim=None) -> "FeynmanGraph":
        es = tuple(Edge(e.id, e.name, e.u, e.v, as_fraction(w)) for e, w in zip(self.edges, weights))
        return FeynmanGraph(self.vertices, es, self.dim if dim is None else as_fraction(dim), self.rotation)

    def add_edge(self, u: str, v: str, weight=1, name: str | None = None) -> "FeynmanGraph":
        name = name or f"e{self.n_edges + 1}"
        es = self.edges + (Edge(self.n_edges, name, self.vertex(u), self.vertex(v), as_fraction(weight)),)
        return FeynmanGraph(self.vertices, es, self.dim, None)

    def relabeled(self, vertex_perm: Sequence[int], edge_perm: Sequence[int]) -> "FeynmanGraph":
        """Isomorphic copy: old vertex i becomes ``vertex_perm[i]``, old edge j becomes ``edge_perm[j]``."""
        verts = [None] * self.n_vertices
        for v in self.vertices:
            verts[vertex_perm[v.id]] = Vertex(vertex_perm[v.id], v.label, v.external)
        es = [None] * self.n_edges
        for e in self.edges:
            k = edge_perm[e.id]
            es[k] = Edge(k, e.name, vertex_perm[e.u], vertex_perm[e.v], e.weight)
        return FeynmanGraph(tuple(verts), tuple(es), self.dim)

    def __eq__(self, other):
        if not isinstance(other, FeynmanGraph):
            return NotImplemented
        return (self.vertices, self.edges, self.dim) == (other.vertices, other.edges, other.dim)

    def __hash__(self):
        return hash((self.vertices, self.edges, self.dim))

    def __repr__(self):
        return f"FeynmanGraph(V={self.n_vertices}, E={self.n_edges}, Vint={len(self.internal)}, d={self.dim})"

    def subgraph(self, edge_ids) -> "Subgraph":
        return Subgraph(self, frozenset(edge_ids))


@dataclass(frozen=True)
class Subgraph:
    """Edge subset of a graph together with its derived vertex data.

    ``vertex_set`` is the set of endpoints of the edges, unless given explicitly
    (induced subgraphs keep isolated vertices of the inducing set).
    """

    graph: FeynmanGraph
    edge_ids: frozenset
    explicit_vertices: frozenset | None = None

    @property
    def vertex_set(self) -> frozenset:
        if self.explicit_vertices is not None:
            return self.explicit_vertices
        g = self.graph
        return frozenset(x for i in self.edge_ids for x in g.edges[i].ends)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_set)

    @property
    def internal_vertices(self) -> frozenset:
        """g-internal vertices: internal, in the subgraph, all G-incident edges inside."""
        g = self.graph
        return frozenset(
            v for v in self.vertex_set
            if not g.vertices[v].external and all(e in self.edge_ids for e in g.incidence[v])
        )

    @property
    def weight(self) -> Fraction:
        return sum((self.graph.edges[i].weight for i in self.edge_ids), Fraction(0))

    def describe(self) -> str:
        g = self.graph
        vs = ",".join(sorted(g.label(v) for v in self.vertex_set))
        es = ",".join(g.edges[i].name for i in sorted(self.edge_ids))
        return f"V={{{vs}}} E={{{es}}}"


# Laplace matrix


@dataclass(frozen=True)
class LaplaceMatrix:
    """Symmetric Laplace matrix with polynomial entries, rows ordered internal-first."""

    order: tuple[int, ...]  # vertex ids: internal ones, then external ones
    n_internal: int
    entries: tuple[tuple[Poly, ...], ...]

    def entry(self, u: int, v: int) -> Poly:
        pos = {vid: k for k, vid in enumerate(self.order)}
        return self.entries[pos[u]][pos[v]]

    def block(self, rows: str, cols: str) -> list[list[Poly]]:
        """One of the blocks ``'ii'``, ``'ie'``, ``'ei'``, ``'ee'``."""
        k = self.n_internal
        n = len(self.order)
        rr = range(0, k) if rows == "i" else range(k, n)
        cc = range(0, k) if cols == "i" else range(k, n)
        return [[self.entries[r][c] for c in cc] for r in rr]

    @property
    def ii(self):
        return self.block("i", "i")

    @property
    def ie(self):
        return self.block("i", "e")

    @property
    def ei(self):
        return self.block("e", "i")

    @property
    def ee(self):
        return self.block("e", "e")


def laplace_matrix(G: FeynmanGraph) -> LaplaceMatrix:
    E = G.n_edges
    order = G.internal + G.external
    pos = {vid: k for k, vid in enumerate(order)}
    n = len(order)
    rows = [[Poly.zero(E) for _ in range(n)] for _ in range(n)]
    for e in G.edges:
        a = Poly.var(E, e.id)
        i, j = pos[e.u], pos[e.v]
        rows[i][i] = rows[i][i] + a
        rows[j][j] = rows[j][j] + a
        rows[i][j] = rows[i][j] - a
        rows[j][i] = rows[j][i] - a
    return LaplaceMatrix(order, len(G.internal), tuple(tuple(r) for r in rows))


# subgraph enumeration


def induced_subgraph(G: FeynmanGraph, vertex_ids) -> Subgraph:
    vs = frozenset(vertex_ids)
    es = frozenset(e.id for e in G.edges if e.u in vs and e.v in vs)
    return Subgraph(G, es, vs)


def star_subgraph(G: FeynmanGraph, vertex_ids) -> Subgraph:
    es = frozenset(i for v in vertex_ids for i in G.incidence[v])
    return Subgraph(G, es)


def count_uv_subgraphs(G: FeynmanGraph) -> int:
    k = len(G.internal)
    x = len(G.external)
    return (2**k - 1 - k) + x * (2**k - 1)


def enumerate_uv_subgraphs(G: FeynmanGraph) -> Iterator[Subgraph]:
    """Induced subgraphs on vertex sets of internal vertices plus at most one
    external vertex, with at least two vertices.

    Deterministic order: by internal subset (in ``itertools.combinations``
    order of increasing size), then without/with each external vertex.
    Exponential in the number of internal vertices; see ``count_uv_subgraphs``.
    """
    internal = G.internal
    for size in range(0, len(internal) + 1):
        for subset in itertools.combinations(internal, size):
            if size >= 2:
                yield induced_subgraph(G, subset)
            if size >= 1:
                for x in G.external:
                    yield induced_subgraph(G, subset + (x,))


def enumerate_ir_subgraphs(G: FeynmanGraph) -> Iterator[Subgraph]:
    """For every nonempty set S of internal vertices, the subgraph of all edges
    incident to S.  Every subgraph admissible for the infrared condition is of
    this form (take S to be its own set of g-internal vertices)."""
    internal = G.internal
    for size in range(1, len(internal) + 1):
        for subset in itertools.combinations(internal, size):
            yield star_subgraph(G, subset)
