import itertools

import pytest
from hypothesis import given, settings

from corpus import graphs
from graphfunc.forests import (bareiss_determinant, cofactor_inverse_entry, cremona_transform,
                               dual_forest_polynomial, laplacian_inverse_entry, parse_partition,
                               phi_tilde, psi, psi_tilde, psi_via_determinant, singletons,
                               spanning_forests, two_block_partition, z_specialization_exact)
from graphfunc.graph import FeynmanGraph, GraphError, induced_subgraph
from graphfunc.io import load_fixture
from graphfunc.poly import Poly, from_text, to_text

# dual forest polynomials of the three-star (edges to 0, 1, z are a1, a2, a3)
G4_TABLE = {
    "1z,0": "a2*a3",
    "01z": "a1*a2*a3",
    "0z,1": "a1*a3",
    "0,1,z": "a1+a2+a3",
    "01,z": "a1*a2",
}


@pytest.fixture(scope="module")
def g4():
    return load_fixture("G4")


@pytest.mark.parametrize("partition,expected", sorted(G4_TABLE.items()))
def test_g4_table(g4, partition, expected):
    assert to_text(dual_forest_polynomial(g4, parse_partition(g4, partition))) == expected


def test_g4_phi(g4):
    assert to_text(phi_tilde(g4)) == "s01*a1*a2+s0z*a1*a3+s1z*a2*a3"


def test_g4_phi_at_z(g4):
    # z = 2 + i: z zbar = 5, (z-1)(zbar-1) = 2
    p = phi_tilde(g4).substitute_s(z_specialization_exact(2, 1))
    assert p == from_text("a1*a2+5*a1*a3+2*a2*a3", 3)


def test_g4_cremona(g4):
    assert to_text(psi(g4)) == "a1*a2+a1*a3+a2*a3"
    assert to_text(cremona_transform(psi_tilde(g4))) == "a1*a2+a1*a3+a2*a3"


def test_partition_parsing(g4):
    assert parse_partition(g4, "0+1,z") == parse_partition(g4, "01,z")
    with pytest.raises(GraphError, match="unknown partition label"):
        parse_partition(g4, "0q,z")


def test_forest_enumeration_small():
    # a triangle 0-a-b with all of {0} as the only external vertex: three spanning trees
    G = FeynmanGraph.build([("0", True), ("a", False), ("b", False)], [("0", "a"), ("a", "b"), ("b", "0")])
    fam = spanning_forests(G, singletons(G))
    assert len(fam) == 3
    assert all(len(F) == 2 for F in fam)


def test_parallel_edges_count_separately():
    G = FeynmanGraph.build([("0", True), ("1", True), ("a", False)], [("0", "a"), ("0", "a"), ("1", "a")])
    # a joins exactly one root, through any of the three edges
    assert to_text(psi_tilde(G)) == "a1+a2+a3"
    assert to_text(dual_forest_polynomial(G, parse_partition(G, "01"))) == "a1*a3+a2*a3"


def test_bareiss_on_constant_matrix():
    M = [[Poly.const(1, c) for c in row] for row in ([2, 1, 0], [1, 3, 1], [0, 1, 4])]
    assert bareiss_determinant(M, 1) == Poly.const(1, 18)
    assert bareiss_determinant([], 1) == Poly.one(1)
    # zero pivot needs a row swap
    M = [[Poly.const(1, c) for c in row] for row in ([0, 1], [1, 0])]
    assert bareiss_determinant(M, 1) == Poly.const(1, -1)


def test_inverse_entry_disconnected():
    G = FeynmanGraph.build([("0", True), ("a", False), ("b", False)], [("a", "b"), ("0", "b")])
    H = FeynmanGraph.build([("0", True), ("a", False), ("b", False)], [("a", "b")])
    num, den = laplacian_inverse_entry(G, G.vertex("a"), G.vertex("b"))
    assert den == psi_tilde(G)
    with pytest.raises(GraphError, match="disconnects"):
        laplacian_inverse_entry(H, 1, 2)


def test_cremona_rejects_non_homogeneous():
    with pytest.raises(ValueError):
        cremona_transform(from_text("a1+a1*a2", 2))


# properties on random graphs


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_matrix_tree(G):
    assert psi_via_determinant(G) == psi_tilde(G)


@settings(max_examples=40, deadline=None)
@given(graphs(max_vertices=5, max_edges=7))
def test_inverse_entries_match_cramer(G):
    for v, w in itertools.combinations_with_replacement(G.internal, 2):
        assert laplacian_inverse_entry(G, v, w) == cofactor_inverse_entry(G, v, w)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_forest_polynomials_are_multilinear_and_homogeneous(G):
    p = psi_tilde(G)
    assert p.is_multilinear()
    assert p.homogeneous_degree() == len(G.internal)
    assert cremona_transform(cremona_transform(p)) == p


@settings(max_examples=40, deadline=None)
@given(graphs(min_ext=2))
def test_phi_is_sum_of_two_forest_polynomials(G):
    f = phi_tilde(G)
    assert f.homogeneous_degree() in (None, len(G.internal) + 1)
    # setting every s to 1 and alpha to 1 counts 2-forests separating pairs
    total = 0
    ext = G.external
    for i, j in itertools.combinations(ext, 2):
        total += len(spanning_forests(G, two_block_partition(G, i, j)))
    s_all = {(a, b): 1 for a in ("0", "1", "z") for b in ("0", "1", "z") if a < b}
    assert f.evaluate([1] * G.n_edges, s_all) == total


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_degree_bounds_on_induced_subgraphs(G):
    V = G.n_vertices
    for p_text in _partitions(G):
        p = parse_partition(G, p_text)
        poly = dual_forest_polynomial(G, p)
        if poly.is_zero():
            continue
        for r in range(1, V + 1):
            for S in itertools.combinations(range(V), r):
                g = induced_subgraph(G, S)
                if not g.edge_ids:
                    continue
                vars_ = sorted(g.edge_ids)
                assert poly.low_degree(vars_) >= len(g.internal_vertices)
                assert poly.degree(vars_) <= g.n_vertices - 1


def _partitions(G):
    labs = [G.label(v) for v in G.external]
    out = []
    for blocks in _set_partitions(labs):
        out.append(",".join("+".join(b) for b in blocks))
    return out


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part
