"""Plain-text graph files and the JSON result envelope.

A graph file looks like::

    # three-star in four dimensions
    dim 4
    vertex 0 external
    vertex 1 external
    vertex z external
    vertex x internal
    edge e1 0 x weight 1
    edge e2 1 x weight 1
    edge e3 z x weight 1
    rotation x: e1 e2 e3

Weights and the dimension are exact rationals written ``p/q``.  The ``weight``
clause may be omitted (weight 1).  Rotation lines are optional; when present
they give the cyclic order of edges around a vertex.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .graph import Edge, FeynmanGraph, GraphError, Vertex

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_NAME = re.compile(r"^[A-Za-z0-9_*'.\-\[\]]+$")


def parse_rational(text: str, line: int | None = None) -> Fraction:
    if not _RATIONAL.match(text):
        raise GraphError(f"expected a rational p/q, got {text!r}", line)
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise GraphError(f"zero denominator in {text!r}", line) from None


def _name(text: str, what: str, line: int) -> str:
    if not _NAME.match(text):
        raise GraphError(f"bad {what} name {text!r}", line)
    return text


def parse_graph(text: str) -> FeynmanGraph:
    """Parse a graph file.  Errors carry the offending line number."""
    dim = None
    verts: list[Vertex] = []
    vindex: dict[str, int] = {}
    edge_specs: list[tuple[str, str, str, Fraction, int]] = []
    rot_specs: list[tuple[str, list[str], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "dim":
            if dim is not None:
                raise GraphError("dimension given twice", lineno)
            dim = parse_rational(rest, lineno)
            if dim <= 2:
                raise GraphError("dimension must exceed 2", lineno)
        elif head == "vertex":
            parts = rest.split()
            if len(parts) != 2 or parts[1] not in ("internal", "external"):
                raise GraphError("expected 'vertex <name> internal|external'", lineno)
            label = _name(parts[0], "vertex", lineno)
            if label in vindex:
                raise GraphError(f"duplicate vertex label {label!r}", lineno)
            vindex[label] = len(verts)
            verts.append(Vertex(len(verts), label, parts[1] == "external"))
        elif head == "edge":
            parts = rest.split()
            if len(parts) == 3:
                weight = Fraction(1)
            elif len(parts) == 5 and parts[3] == "weight":
                weight = parse_rational(parts[4], lineno)
            else:
                raise GraphError("expected 'edge <name> <u> <v> weight <p/q>'", lineno)
            edge_specs.append((_name(parts[0], "edge", lineno), parts[1], parts[2], weight, lineno))
        elif head == "rotation":
            vname, colon, order = rest.partition(":")
            if not colon:
                raise GraphError("expected 'rotation <vertex>: <edges>'", lineno)
            rot_specs.append((vname.strip(), order.replace(",", " ").split(), lineno))
        else:
            raise GraphError(f"unknown keyword {head!r}", lineno)
    if dim is None:
        raise GraphError("missing 'dim' line")
    edges = []
    enames: dict[str, int] = {}
    for name, u, v, weight, lineno in edge_specs:
        if name in enames:
            raise GraphError(f"duplicate edge name {name!r}", lineno)
        for end in (u, v):
            if end not in vindex:
                raise GraphError(f"edge {name}: unknown endpoint {end!r}", lineno)
        if u == v:
            raise GraphError(f"edge {name}: self-loop", lineno)
        enames[name] = len(edges)
        edges.append(Edge(len(edges), name, vindex[u], vindex[v], weight))
    rotation = None
    if rot_specs:
        rotation = {}
        for vname, order, lineno in rot_specs:
            if vname not in vindex:
                raise GraphError(f"rotation for unknown vertex {vname!r}", lineno)
            vid = vindex[vname]
            if vid in rotation:
                raise GraphError(f"rotation for {vname!r} given twice", lineno)
            ids = []
            for en in order:
                if en not in enames:
                    raise GraphError(f"rotation at {vname!r}: unknown edge {en!r}", lineno)
                e = edges[enames[en]]
                if vid not in (e.u, e.v):
                    raise GraphError(f"rotation at {vname!r}: edge {en!r} is not incident", lineno)
                ids.append(e.id)
            expected = sorted(e.id for e in edges if vid in (e.u, e.v))
            if sorted(ids) != expected:
                raise GraphError(f"rotation at {vname!r} must list each incident edge once", lineno)
            rotation[vid] = tuple(ids)
        for v in verts:
            if v.id not in rotation and any(v.id in (e.u, e.v) for e in edges):
                raise GraphError(f"rotation system misses vertex {v.label!r}")
    return FeynmanGraph(tuple(verts), tuple(edges), dim, rotation)


def read_graph(path) -> FeynmanGraph:
    return parse_graph(Path(path).read_text())


def _rational(x: Fraction) -> str:
    return str(Fraction(x))


def serialize_graph(G: FeynmanGraph, comments: list[str] | None = None) -> str:
    lines = [f"# {c}" for c in comments or ()]
    lines.append(f"dim {_rational(G.dim)}")
    for v in G.vertices:
        lines.append(f"vertex {v.label} {'external' if v.external else 'internal'}")
    for e in G.edges:
        lines.append(f"edge {e.name} {G.label(e.u)} {G.label(e.v)} weight {_rational(e.weight)}")
    if G.rotation:
        for v in G.vertices:
            if v.id in G.rotation:
                names = " ".join(G.edges[i].name for i in G.rotation[v.id])
                lines.append(f"rotation {v.label}: {names}")
    return "\n".join(lines) + "\n"


def same_graph(G: FeynmanGraph, H: FeynmanGraph) -> bool:
    """Equality including the rotation system."""
    return G == H and (G.rotation or None) == (H.rotation or None)


# fixtures shipped with the package

FIXTURES = ("G4", "H4", "G7", "H7", "chain")


def fixture_text(name: str) -> str:
    return resources.files("graphfunc").joinpath("fixtures", f"{name}.graph").read_text()


def load_fixture(name: str) -> FeynmanGraph:
    return parse_graph(fixture_text(name))


# result envelope


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ResultEnvelope:
    command: str
    input_digest: str
    payload: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc)
                           .isoformat(timespec="seconds"))

    def to_json(self) -> dict:
        return {"tool": "graphfunc", "version": self.version, "command": self.command,
                "input_digest": self.input_digest, "timestamp": self.timestamp, "payload": self.payload}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def schema(name: str) -> dict:
    return json.loads(resources.files("graphfunc").joinpath("schemas", f"{name}.json").read_text())
