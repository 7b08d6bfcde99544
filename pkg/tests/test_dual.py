import random
from fractions import Fraction

import pytest

from graphfunc.convergence import check_convergence, superficial_degree
from graphfunc.dual import (DualityRefused, EmbeddingError, augment_apex, euler_characteristic,
                            involution_check, labeled_isomorphism, planar_dual, rotation_from_positions,
                            trace_faces, two_forest_bijection, verify_duality_theorem)
from graphfunc.evaluator import SamplerConfig
from graphfunc.forests import cremona_transform, dual_forest_polynomial, parse_partition, spanning_forests
from graphfunc.graph import FeynmanGraph
from graphfunc.io import load_fixture


def test_star_apex_graph():
    G = load_fixture("G4")
    aug = augment_apex(G)
    # K_{2,3}: V=5, E=6, F=3
    assert (len(aug.vertices), len(aug.edges), len(aug.faces)) == (5, 6, 3)
    assert euler_characteristic(5, 6, len(aug.faces)) == 2


def test_faces_of_h7():
    G = load_fixture("H7")
    faces = trace_faces(G.edges, G.rotation)
    assert euler_characteristic(G.n_vertices, G.n_edges, len(faces)) == 2
    aug = augment_apex(G)
    assert len(aug.faces) == 2 - (G.n_vertices + 1) + (G.n_edges + 3)


def test_z_inside_inner_face_is_rejected():
    # z hangs inside the internal triangle a-b-c, so no face carries 0, 1 and z
    xy = {"0": (-3, 0), "1": (3, 0), "a": (0, 3), "b": (-1, 1), "c": (1, 1), "z": (0, 1.7)}
    G = FeynmanGraph.build([("0", True), ("1", True), ("z", True), ("a", False), ("b", False), ("c", False)],
                           [("0", "b"), ("1", "c"), ("a", "b"), ("b", "c"), ("c", "a"), ("z", "a"),
                            ("0", "a"), ("1", "a")])
    G = FeynmanGraph(G.vertices, G.edges, G.dim, rotation_from_positions(G, xy))
    with pytest.raises(EmbeddingError, match="not externally planar with this embedding"):
        augment_apex(G)


def test_missing_rotation():
    G = load_fixture("G4")
    with pytest.raises(EmbeddingError, match="no rotation system"):
        planar_dual(FeynmanGraph(G.vertices, G.edges, G.dim))


def test_h4_self_dual():
    G = load_fixture("H4")
    D = planar_dual(G).graph
    assert labeled_isomorphism(G, D) is not None
    assert involution_check(G)


def test_h7_dual_structure():
    G = load_fixture("H7")
    res = planar_dual(G)
    D = res.graph
    assert res.weights_ok()
    assert all(e.weight == 1 for e in D.edges)
    assert superficial_degree(D) == 2
    assert check_convergence(D).convergent
    assert (D.n_vertices, D.n_edges, len(D.internal)) == (7, 10, 4)
    # the dual of the 0-1 edge is the z-leg of a three-star
    e10 = D.edges[9]
    assert "z" in (D.label(e10.u), D.label(e10.v))
    assert involution_check(G)


def test_g4_involution_with_apex_embedding():
    # G4 has no dual of its own (M = 1), but the construction still involutes
    G = load_fixture("G4")
    assert involution_check(G)


def test_weights_transform():
    G = load_fixture("H4").with_weights([Fraction(1, 2), Fraction(3, 2), 1, 1])
    G = FeynmanGraph(G.vertices, G.edges, G.dim, load_fixture("H4").rotation)
    D = planar_dual(G).graph
    assert [e.weight for e in D.edges] == [Fraction(3, 2), Fraction(1, 2), 1, 1]


@pytest.mark.parametrize("name", ["H4", "H7"])
def test_duality_exact_layers(name):
    rep = verify_duality_theorem(load_fixture(name))
    assert rep.exact_ok
    assert rep.gamma_ratio == pytest.approx(1.0)
    assert rep.numeric is None


def test_duality_refuses_wrong_m():
    with pytest.raises(DualityRefused) as info:
        verify_duality_theorem(load_fixture("G4"))
    assert info.value.hint == "add edge 0-1 with weight 1"


def test_gamma_ratio_for_fractional_weights():
    # d = 6 (lam = 2), lam*nu = (1, 1, 3/2, 5/2) on H4: M = 6 - 3 = d/2.
    # Dual weights are (2, 2, 3/2, 1/2), so the ratio is Gamma(5/2)/Gamma(1/2) = 3/4.
    H4 = load_fixture("H4")
    G = H4.with_weights([Fraction(1, 2), Fraction(1, 2), Fraction(3, 4), Fraction(5, 4)], dim=6)
    G = FeynmanGraph(G.vertices, G.edges, G.dim, H4.rotation)
    rep = verify_duality_theorem(G)
    assert rep.exact_ok
    assert rep.gamma_ratio == pytest.approx(0.75, rel=1e-14)
    D = planar_dual(G).graph
    assert [D.lam * e.weight for e in D.edges] == [2, 2, Fraction(3, 2), Fraction(1, 2)]


@pytest.mark.parametrize("split", [("0", "1", "z"), ("0", "z", "1"), ("1", "z", "0")])
def test_two_forest_bijection_h7(split):
    G = load_fixture("H7")
    res = planar_dual(G)
    pairs = two_forest_bijection(G, res, split)
    i, j, k = split
    assert len(pairs) == len(spanning_forests(G, parse_partition(G, f"{i}+{j},{k}")))
    assert len(pairs) > 0


def test_two_forest_bijection_h4_is_involution():
    G = load_fixture("H4")
    res = planar_dual(G)
    iso = labeled_isomorphism(G, res.graph)
    assert iso is not None
    for split in [("0", "1", "z"), ("0", "z", "1"), ("1", "z", "0")]:
        pairs = two_forest_bijection(G, res, split)
        assert len(pairs) == len(set(F for F, _ in pairs))


def test_numeric_layer_small():
    rep = verify_duality_theorem(load_fixture("H4"), z=0.3 + 0.6j, cfg=SamplerConfig(samples=200_000, seed=3))
    assert rep.numeric["agree"]


def _random_planar(rng):
    """Random triangulated-ish planar graph from a point set, with 0, 1, z on the hull."""
    from itertools import combinations

    k = rng.randint(1, 3)
    pts = {"0": (-3.0, -2.0), "1": (3.0, -2.0), "z": (0.0, 3.5)}
    for i in range(k):
        pts[f"v{i}"] = (rng.uniform(-1, 1), rng.uniform(-1, 1))
    labels = list(pts)

    def cross(p, q, r, s):
        def orient(a, b, c):
            return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        p, q, r, s = pts[p], pts[q], pts[r], pts[s]
        return orient(p, q, r) * orient(p, q, s) < 0 and orient(r, s, p) * orient(r, s, q) < 0

    cand = [pair for pair in combinations(labels, 2) if not {pair[0], pair[1]} <= {"0", "1", "z"}]
    rng.shuffle(cand)
    edges = []
    for u, v in cand:
        if all(not cross(u, v, a, b) for a, b in edges if len({u, v, a, b}) == 4):
            edges.append((u, v))
    edges.append(("0", "1"))
    G = FeynmanGraph.build([(lab, lab in ("0", "1", "z")) for lab in labels], edges)
    return FeynmanGraph(G.vertices, G.edges, G.dim, rotation_from_positions(G, pts))


def test_random_planar_duals():
    rng = random.Random(17)
    done = 0
    for _ in range(40):
        G = _random_planar(rng)
        res = planar_dual(G)
        D = res.graph
        assert res.weights_ok()
        assert involution_check(G)
        for i, j, k in [("0", "1", "z"), ("0", "z", "1"), ("1", "z", "0")]:
            lhs = dual_forest_polynomial(G, parse_partition(G, f"{i}+{j},{k}"))
            rhs = cremona_transform(dual_forest_polynomial(D, parse_partition(D, f"{i}+{j},{k}")))
            assert lhs == rhs
        done += 1
    assert done == 40
