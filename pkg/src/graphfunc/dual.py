"""Planar duals of externally planar graphs with external vertices 0, 1, z.

Embeddings are given as rotation systems (cyclic order of edge ids around each
vertex).  Faces are traced with the rule: after arriving at ``y`` along ``e``,
leave along the successor of ``e`` in the rotation at ``y``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .convergence import check_convergence, superficial_degree
from .evaluator import ExternalData, SamplerConfig, evaluate_gf
from .forests import cremona_transform, dual_forest_polynomial, parse_partition, spanning_forests
from .graph import Edge, FeynmanGraph, GraphError, Vertex
from .integrand import build_dual_integrand, fix_chart

APEX = "v"
_LABELS = ("0", "1", "z")
# external label of the dual <- apex face bounded by the apex edges to these two
_FACE_LABEL = {frozenset(("1", "z")): "0", frozenset(("0", "z")): "1", frozenset(("0", "1")): "z"}


class EmbeddingError(GraphError):
    pass


# rotation systems


def check_rotation(n_vertices: int, edges, rotation: dict) -> None:
    """Every edge end appears exactly once in the rotation of its vertex."""
    ends = Counter()
    for e in edges:
        ends[(e.u, e.id)] += 1
        ends[(e.v, e.id)] += 1
    seen = Counter()
    for v in range(n_vertices):
        for eid in rotation.get(v, ()):
            seen[(v, eid)] += 1
    if seen != ends:
        missing = sorted(set(ends) - set(seen))
        extra = sorted(set(seen) - set(ends))
        raise EmbeddingError(f"rotation system does not match the edges (missing {missing}, extra {extra})")


def trace_faces(edges, rotation: dict) -> list[list[tuple[int, int, int]]]:
    """Faces as lists of darts (edge id, tail, head), in deterministic order."""
    succ = {}
    for v, order in rotation.items():
        k = len(order)
        for i, eid in enumerate(order):
            succ[(v, eid)] = order[(i + 1) % k]
    by_id = {e.id: e for e in edges}
    darts = []
    for e in edges:
        darts.append((e.id, e.u, e.v))
        darts.append((e.id, e.v, e.u))
    seen = set()
    faces = []
    for d in darts:
        if d in seen:
            continue
        face = []
        cur = d
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            eid, _, head = cur
            nxt = by_id[succ[(head, eid)]]
            cur = (nxt.id, head, nxt.other(head))
        if cur != d:
            raise EmbeddingError("face tracing did not close up")
        faces.append(face)
    return faces


def euler_characteristic(n_vertices: int, n_edges: int, n_faces: int) -> int:
    return n_vertices - n_edges + n_faces


def rotation_from_positions(G: FeynmanGraph, xy: dict) -> dict:
    """Counter-clockwise rotation system of a straight-line drawing ``{label: (x, y)}``."""
    import math

    rot = {}
    for v in G.vertices:
        x0, y0 = xy[v.label]
        inc = []
        for eid in G.incidence[v.id]:
            w = G.edges[eid].other(v.id)
            x1, y1 = xy[G.label(w)]
            inc.append((math.atan2(y1 - y0, x1 - x0), eid))
        rot[v.id] = tuple(eid for _, eid in sorted(inc))
    return rot


# apex augmentation


@dataclass(frozen=True)
class Augmented:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    rotation: dict
    apex: int
    apex_edges: dict  # external label -> apex edge id
    faces: list


def _externals(G: FeynmanGraph) -> dict:
    labels = {G.label(v): v for v in G.external}
    if set(labels) != set(_LABELS):
        raise GraphError("planar duals need external vertices labelled exactly 0, 1, z")
    return labels


def augment_apex(G: FeynmanGraph, rotation: dict | None = None) -> Augmented:
    """Add the apex vertex joined to 0, 1, z inside a face carrying all three."""
    rotation = rotation if rotation is not None else G.rotation
    if rotation is None:
        raise EmbeddingError("graph has no rotation system")
    check_rotation(G.n_vertices, G.edges, rotation)
    ext = _externals(G)
    faces = trace_faces(G.edges, rotation)
    chosen = None
    for face in faces:
        corners = {}
        for i, (eid, _, head) in enumerate(face):
            lab = G.label(head)
            if lab in ext and lab not in corners:
                corners[lab] = i
        if len(corners) == 3:
            chosen = (face, corners)
            break
    if chosen is None:
        raise EmbeddingError("not externally planar with this embedding: 0, 1, z share no face")
    face, corners = chosen
    rot = {v: list(order) for v, order in rotation.items()}
    for v in range(G.n_vertices):
        rot.setdefault(v, [])
    apex = G.n_vertices
    vertices = G.vertices + (Vertex(apex, APEX, False),)
    edges = list(G.edges)
    apex_edges = {}
    for lab in _LABELS:
        eid = len(edges)
        edges.append(Edge(eid, f"{lab}{APEX}", ext[lab], apex, Fraction(1)))
        apex_edges[lab] = eid
        arriving = face[corners[lab]][0]
        order = rot[ext[lab]]
        if order:
            order.insert(order.index(arriving) + 1, eid)
        else:
            order.append(eid)
    a, b, c = sorted(_LABELS, key=lambda lab: corners[lab])
    rot[apex] = [apex_edges[a], apex_edges[c], apex_edges[b]]
    rot = {v: tuple(o) for v, o in rot.items()}
    new_faces = trace_faces(edges, rot)
    chi = euler_characteristic(len(vertices), len(edges), len(new_faces))
    if chi != 2:
        raise EmbeddingError(f"embedding is not planar (V - E + F = {chi})")
    return Augmented(vertices, tuple(edges), rot, apex, apex_edges, new_faces)


# duals


@dataclass(frozen=True)
class DualResult:
    graph: FeynmanGraph  # G*, with induced rotation system
    original: FeynmanGraph
    edge_map: tuple[int, ...]  # edge id in G -> edge id in G* (identity order)
    faces: list  # faces of G_v as dart lists
    external_faces: dict  # dual label -> face index in ``faces``
    augmented: Augmented

    def weights_ok(self) -> bool:
        G, D = self.original, self.graph
        return all(G.lam * e.weight + D.lam * D.edges[self.edge_map[e.id]].weight == G.dim / 2
                   for e in G.edges)


def planar_dual(G: FeynmanGraph, rotation: dict | None = None) -> DualResult:
    aug = augment_apex(G, rotation)
    faces = aug.faces
    face_of = {}
    for k, face in enumerate(faces):
        for dart in face:
            face_of[dart] = k
    apex_ids = set(aug.apex_edges.values())
    # the three faces at the apex, named by their pair of apex edges
    label_of_face = {}
    for k, face in enumerate(faces):
        at_apex = [aug.edges[eid] for eid, _, _ in face if eid in apex_ids]
        if at_apex:
            pair = frozenset(G.label(e.u) for e in at_apex)
            if len(pair) != 2 or len(at_apex) != 2:
                raise EmbeddingError("apex faces are degenerate")
            label_of_face[k] = _FACE_LABEL[pair]
    if len(label_of_face) != 3:
        raise EmbeddingError("expected three faces around the apex")
    # dual vertices: externals 0, 1, z first, then the other faces in trace order
    order = sorted(label_of_face, key=lambda k: label_of_face[k])
    order += [k for k in range(len(faces)) if k not in label_of_face]
    vid = {k: i for i, k in enumerate(order)}
    verts = []
    n_int = 0
    for k in order:
        if k in label_of_face:
            verts.append(Vertex(vid[k], label_of_face[k], True))
        else:
            n_int += 1
            verts.append(Vertex(vid[k], f"f{n_int}", False))
    half_d = G.dim / 2
    dual_edges = []
    for e in G.edges:
        f1 = face_of[(e.id, e.u, e.v)]
        f2 = face_of[(e.id, e.v, e.u)]
        if f1 == f2:
            raise EmbeddingError(f"edge {e.name} is a bridge of the augmented graph; its dual is a self-loop")
        weight = (half_d - G.lam * e.weight) / G.lam
        dual_edges.append(Edge(e.id, f"{e.name}*", vid[f1], vid[f2], weight))
    # induced rotation: order of edges along each face walk
    rot = {}
    for k in order:
        rot[vid[k]] = tuple(eid for eid, _, _ in faces[k] if eid not in apex_ids)
    D = FeynmanGraph(tuple(verts), tuple(dual_edges), G.dim, rot)
    ext_faces = {label_of_face[k]: k for k in label_of_face}
    return DualResult(D, G, tuple(range(G.n_edges)), faces, ext_faces, aug)


def add_edge_hint(G: FeynmanGraph) -> str | None:
    """Suggested 0-1 edge weight (d/2 - M)/lam making M = d/2, or None if already so."""
    M = superficial_degree(G)
    if M == G.dim / 2:
        return None
    w = (G.dim / 2 - M) / G.lam
    return f"add edge 0-1 with weight {w}"


# isomorphism


def _edge_signature(G: FeynmanGraph, vmap, with_names=False) -> Counter:
    out = Counter()
    for e in G.edges:
        key = (frozenset((vmap[e.u], vmap[e.v])), e.weight)
        out[key] += 1
    return out


def labeled_isomorphism(G: FeynmanGraph, H: FeynmanGraph) -> dict | None:
    """Vertex bijection G -> H fixing external labels and preserving weighted edge multisets."""
    if (G.n_vertices, G.n_edges, len(G.internal)) != (H.n_vertices, H.n_edges, len(H.internal)):
        return None
    if G.dim != H.dim:
        return None
    base = {}
    for v in G.external:
        lab = G.label(v)
        if lab not in H.label_index or not H.vertices[H.vertex(lab)].external:
            return None
        base[v] = H.vertex(lab)
    target = _edge_signature(H, list(range(H.n_vertices)))
    gi, hi = list(G.internal), list(H.internal)
    deg_g = {v: sorted(G.edges[i].weight for i in G.incidence[v]) for v in gi}
    deg_h = {v: sorted(H.edges[i].weight for i in H.incidence[v]) for v in hi}
    for perm in itertools.permutations(hi):
        if any(deg_g[a] != deg_h[b] for a, b in zip(gi, perm)):
            continue
        vmap = dict(base)
        vmap.update(zip(gi, perm))
        if _edge_signature(G, vmap) == target:
            return vmap
    return None


def involution_check(G: FeynmanGraph, rotation: dict | None = None) -> bool:
    """The dual of the dual (with the induced embedding) is labeled-isomorphic to G."""
    first = planar_dual(G, rotation)
    second = planar_dual(first.graph)
    return labeled_isomorphism(G, second.graph) is not None


# the duality theorem


_SPLITS = (("0", "1", "z"), ("0", "z", "1"), ("1", "z", "0"))


def two_forest_bijection(G: FeynmanGraph, dual: DualResult, split: tuple[str, str, str]) -> list:
    """Pairs (F, F*) with F* = {e*: e not in F}, checked to be a bijection of 2-forests."""
    i, j, k = split
    D = dual.graph
    pG = parse_partition(G, f"{i}+{j},{k}")
    pD = parse_partition(D, f"{i}+{j},{k}")
    fam_g = spanning_forests(G, pG).forests
    fam_d = set(spanning_forests(D, pD).forests)
    pairs = []
    images = set()
    for F in fam_g:
        Fs = frozenset(dual.edge_map[e] for e in range(G.n_edges) if e not in F)
        if Fs not in fam_d:
            raise AssertionError(f"image of forest {sorted(F)} is not a 2-forest of the dual")
        if Fs in images:
            raise AssertionError("forest map is not injective")
        images.add(Fs)
        pairs.append((F, Fs))
    if len(images) != len(fam_d):
        raise AssertionError("forest map is not surjective")
    return pairs


class DualityRefused(ValueError):
    def __init__(self, message: str, hint: str | None = None):
        self.hint = hint
        super().__init__(message if hint is None else f"{message}; {hint}")


@dataclass
class DualityReport:
    M: Fraction
    M_dual: Fraction
    weights_ok: bool
    split_identities: dict
    phi_identity: bool
    gamma_ratio: float
    numeric: dict | None = None

    @property
    def exact_ok(self) -> bool:
        return (self.M_dual == self.M and self.weights_ok and all(self.split_identities.values())
                and self.phi_identity)

    def to_json(self) -> dict:
        return {
            "M": str(self.M), "M_dual": str(self.M_dual), "weights_ok": self.weights_ok,
            "split_identities": self.split_identities, "phi_identity": self.phi_identity,
            "gamma_ratio": self.gamma_ratio, "exact_ok": self.exact_ok, "numeric": self.numeric,
        }


def gamma_ratio(G: FeynmanGraph, D: FeynmanGraph) -> float:
    """prod_e Gamma(lam nu_e) / Gamma(lam nu_e*), so that f_{G*} = f_G * ratio."""
    import math

    logr = sum(math.lgamma(G.lam * e.weight) - math.lgamma(D.lam * d.weight) for e, d in zip(G.edges, D.edges))
    return math.exp(logr)


def verify_duality_theorem(G: FeynmanGraph, rotation: dict | None = None, z: complex | None = None,
                           cfg: SamplerConfig | None = None, power: float = 2.5) -> DualityReport:
    M = superficial_degree(G)
    if any(e.weight <= 0 for e in G.edges):
        raise DualityRefused("duality needs positive edge weights")
    report = check_convergence(G)
    if not report.convergent:
        raise DualityRefused(f"graph is {report.verdict}")
    if M != G.dim / 2:
        raise DualityRefused(f"M_G = {M} differs from d/2 = {G.dim / 2}", add_edge_hint(G))
    dual = planar_dual(G, rotation)
    D = dual.graph
    from .forests import phi_tilde

    splits = {}
    for i, j, k in _SPLITS:
        lhs = dual_forest_polynomial(G, parse_partition(G, f"{i}+{j},{k}"))
        rhs = cremona_transform(dual_forest_polynomial(D, parse_partition(D, f"{i}+{j},{k}")))
        splits[f"{i}{j},{k}"] = lhs == rhs
    phi_ok = phi_tilde(G) == cremona_transform(phi_tilde(D))
    out = DualityReport(M, superficial_degree(D), dual.weights_ok(), splits, phi_ok, gamma_ratio(G, D))
    if z is not None:
        cfg = cfg or SamplerConfig()
        x = ExternalData.from_z(z)
        a = evaluate_gf(fix_chart(build_dual_integrand(G), 0, power), x, cfg)
        cfg_b = SamplerConfig(cfg.samples, cfg.seed + 7919, cfg.sampler, cfg.workers, cfg.replicates)
        b = evaluate_gf(fix_chart(build_dual_integrand(D), 0, power), x, cfg_b)
        out.numeric = {"f_G": a.to_json(), "f_dual": b.to_json(),
                       "agree": b.agrees(a, 3.0, scale=out.gamma_ratio)}
    return out
