"""Power counting: ultraviolet and infrared conditions, superficial degree of divergence."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graph import FeynmanGraph, Subgraph, enumerate_ir_subgraphs, enumerate_uv_subgraphs


@dataclass(frozen=True)
class Condition:
    side: str  # "UV" or "IR"
    subgraph: Subgraph
    lhs: Fraction  # lambda * nu_g
    rhs: Fraction

    @property
    def margin(self) -> Fraction:
        """Positive iff the strict inequality holds."""
        return self.rhs - self.lhs if self.side == "UV" else self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.margin > 0

    def to_json(self) -> dict:
        g = self.subgraph
        G = g.graph
        return {
            "side": self.side,
            "vertices": sorted(G.label(v) for v in g.vertex_set),
            "edges": [G.edges[i].name for i in sorted(g.edge_ids)],
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "margin": str(self.margin),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    conditions: tuple[Condition, ...]
    superficial_degree: Fraction
    verdict: str = field(init=False)

    def __post_init__(self):
        uv = any(not c.passed for c in self.conditions if c.side == "UV")
        ir = any(not c.passed for c in self.conditions if c.side == "IR")
        verdict = {(False, False): "convergent", (True, False): "uv-divergent",
                   (False, True): "ir-divergent", (True, True): "both"}[(uv, ir)]
        object.__setattr__(self, "verdict", verdict)

    @property
    def convergent(self) -> bool:
        return self.verdict == "convergent"

    def side(self, side: str) -> list[Condition]:
        return [c for c in self.conditions if c.side == side]

    def failures(self) -> list[Condition]:
        return [c for c in self.conditions if not c.passed]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "M": str(self.superficial_degree),
            "n_uv": len(self.side("UV")),
            "n_ir": len(self.side("IR")),
            "conditions": [c.to_json() for c in self.conditions],
        }


def superficial_degree(G: FeynmanGraph) -> Fraction:
    """M_G = lambda * nu_G - (d/2) * V_int."""
    return G.lam * G.total_weight - G.dim / 2 * len(G.internal)


def uv_condition(g: Subgraph) -> Condition:
    G = g.graph
    return Condition("UV", g, G.lam * g.weight, G.dim / 2 * (g.n_vertices - 1))


def ir_condition(g: Subgraph) -> Condition:
    G = g.graph
    return Condition("IR", g, G.lam * g.weight, G.dim / 2 * len(g.internal_vertices))


def check_convergence(G: FeynmanGraph, connected_only: bool = False) -> ConvergenceReport:
    """Check every ultraviolet and infrared condition exactly.

    ``connected_only`` restricts the ultraviolet scan to connected induced
    subgraphs; off by default since the reduction is only clear for positive
    weights.
    """
    conds = []
    for g in enumerate_uv_subgraphs(G):
        if connected_only and not _connected(g):
            continue
        conds.append(uv_condition(g))
    for g in enumerate_ir_subgraphs(G):
        conds.append(ir_condition(g))
    return ConvergenceReport(tuple(conds), superficial_degree(G))


def _connected(g: Subgraph) -> bool:
    vs = g.vertex_set
    if not vs:
        return True
    G = g.graph
    adj = {v: set() for v in vs}
    for i in g.edge_ids:
        e = G.edges[i]
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vs)


@dataclass(frozen=True)
class MBound:
    applicable: bool
    lower: Fraction = Fraction(0)
    upper: Fraction | None = None
    M: Fraction | None = None

    @property
    def holds(self) -> bool:
        return self.applicable and self.lower < self.M < self.upper


def m_bound_check(G: FeynmanGraph) -> MBound:
    """0 < M_G < lambda * min_v sum_{w external, w != v} nu_w, for graphs without
    edges between external vertices (``applicable`` is False otherwise)."""
    ext = set(G.external)
    if any(e.u in ext and e.v in ext for e in G.edges):
        return MBound(False)
    nu = {w: sum((G.edges[i].weight for i in G.incidence[w]), Fraction(0)) for w in ext}
    total = sum(nu.values(), Fraction(0))
    upper = G.lam * min(total - nu[v] for v in ext)
    return MBound(True, Fraction(0), upper, superficial_degree(G))
