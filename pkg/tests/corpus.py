"""Random graph corpus and hypothesis strategies shared by the tests."""
from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from graphfunc.convergence import check_convergence, superficial_degree
from graphfunc.graph import FeynmanGraph

EXT_LABELS = ("0", "1", "z")


def random_graph(rng: random.Random, max_vertices: int = 8, max_edges: int = 12, parallel: bool = True,
                 n_ext: int | None = None, weights=(Fraction(1),), dim=4) -> FeynmanGraph:
    """Connected multigraph with 1-3 external vertices labelled 0, 1, z."""
    V = rng.randint(max(2, n_ext or 1), max_vertices)
    n_ext = n_ext if n_ext is not None else rng.randint(1, min(3, V))
    labels = list(EXT_LABELS[:n_ext]) + [f"v{k}" for k in range(V - n_ext)]
    rng.shuffle(labels)
    verts = [(lab, lab in EXT_LABELS) for lab in labels]
    # random spanning tree first, then extra edges
    pairs = []
    order = list(range(V))
    rng.shuffle(order)
    for k in range(1, V):
        pairs.append((order[k], order[rng.randrange(k)]))
    E = rng.randint(V - 1, max(V - 1, max_edges))
    while len(pairs) < E:
        u, v = rng.sample(range(V), 2)
        if not parallel and any({u, v} == {a, b} for a, b in pairs):
            if len(pairs) >= V * (V - 1) // 2:
                break
            continue
        pairs.append((u, v))
    rng.shuffle(pairs)
    edges = [(labels[u], labels[v], rng.choice(weights)) for u, v in pairs]
    return FeynmanGraph.build(verts, edges, dim)


def corpus(n: int = 200, seed: int = 20240601, **kw) -> list[FeynmanGraph]:
    rng = random.Random(seed)
    out = []
    for k in range(n):
        out.append(random_graph(rng, parallel=(k % 2 == 0), **kw))
    return out


@st.composite
def graphs(draw, max_vertices: int = 6, max_edges: int = 8, min_ext: int = 1, weights=(Fraction(1),)):
    seed = draw(st.integers(0, 2**32 - 1))
    n_ext = draw(st.integers(min_ext, 3))
    rng = random.Random(seed)
    return random_graph(rng, max(max_vertices, n_ext), max_edges, parallel=draw(st.booleans()),
                        n_ext=n_ext, weights=weights)


def mixed_sign_corpus(n: int = 60, seed: int = 7) -> list[FeynmanGraph]:
    """Convergent graphs with internal vertices and at least one edge with lam*nu <= 0."""
    rng = random.Random(seed)
    weights = (Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))
    out = []
    tries = 0
    while len(out) < n and tries < 100000:
        tries += 1
        n_ext = rng.randint(2, 3)
        G = random_graph(rng, n_ext + rng.randint(1, 2), 7, n_ext=n_ext, weights=weights, dim=rng.choice((4, 6)))
        if (G.internal and any(G.lam * e.weight <= 0 for e in G.edges) and superficial_degree(G) > 0
                and check_convergence(G).convergent):
            out.append(G)
    return out


def convergent_three_point_corpus(n: int = 8, seed: int = 5) -> list[FeynmanGraph]:
    """Convergent graphs with externals 0, 1, z, positive weights and 1-3 internal vertices."""
    rng = random.Random(seed)
    weights = (Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(5, 4))
    out = []
    tries = 0
    while len(out) < n and tries < 100000:
        tries += 1
        G = random_graph(rng, 3 + rng.randint(1, 3), 8, n_ext=3, weights=weights)
        if G.internal and superficial_degree(G) > 0 and check_convergence(G).convergent:
            out.append(G)
    return out
