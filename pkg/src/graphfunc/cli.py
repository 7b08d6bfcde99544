"""Command-line interface: ``graphfunc check|poly|eval|dual|verify-dual FILE``.

Every command prints a JSON envelope on stdout.  Exit codes:
0 success, 1 usage or parse error, 2 divergent graph, 3 precondition refused,
4 a verification layer failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .convergence import check_convergence
from .dual import DualityRefused, EmbeddingError, planar_dual, verify_duality_theorem
from .evaluator import ExternalData, SamplerConfig, evaluate_gf
from .forests import cremona_transform, dual_forest_polynomial, parse_partition, phi_tilde, psi_tilde
from .graph import FeynmanGraph, GraphError
from .integrand import DivergentGraphError, build_direct_integrand, build_dual_integrand, choose_n, fix_chart
from .io import ResultEnvelope, digest, parse_graph, serialize_graph
from .poly import to_text

EXIT_OK, EXIT_USAGE, EXIT_DIVERGENT, EXIT_REFUSED, EXIT_FAILED = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Accept ``i``, ``0.5+0.75i``, ``2-1j`` and similar."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def parse_s(G: FeynmanGraph, text: str) -> dict:
    """``01=1,0z=2,1z=1`` or ``0:1=1,...`` into squared distances keyed by label pairs."""
    out = {}
    for item in filter(None, text.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"expected key=value in {item!r}")
        key = key.strip().removeprefix("s")
        i, j = key.split(":", 1) if ":" in key else (key[:1], key[1:])
        for lab in (i, j):
            if lab not in G.label_index or not G.vertices[G.vertex(lab)].external:
                raise UsageError(f"unknown external label {lab!r} in --s")
        try:
            out[(i, j)] = float(val)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    return out


def _edge_id(G: FeynmanGraph, name: str) -> int:
    try:
        return G.edge_by_name(name).id
    except GraphError:
        raise UsageError(f"unknown edge {name!r}") from None


def _config(args) -> SamplerConfig:
    return SamplerConfig(samples=args.samples, seed=args.seed, sampler=args.sampler,
                         workers=args.workers, replicates=args.replicates)


# commands


def cmd_check(G: FeynmanGraph, args) -> tuple[dict, int]:
    report = check_convergence(G)
    return report.to_json(), EXIT_OK if report.convergent else EXIT_DIVERGENT


def cmd_poly(G: FeynmanGraph, args) -> tuple[dict, int]:
    polys = {}
    wanted = []
    for p in args.partition or ():
        wanted.append((f"psi~[{p}]", dual_forest_polynomial(G, parse_partition(G, p))))
    if args.phi:
        wanted.append(("phi~", phi_tilde(G)))
    if not wanted:
        wanted.append(("psi~", psi_tilde(G)))
        if len(G.external) >= 2:
            wanted.append(("phi~", phi_tilde(G)))
    for name, p in wanted:
        polys[name] = to_text(p)
        if args.cremona:
            polys[name.replace("~", "", 1)] = to_text(cremona_transform(p, G.n_edges))
    return {"n_edges": G.n_edges, "polynomials": polys}, EXIT_OK


def cmd_eval(G: FeynmanGraph, args) -> tuple[dict, int]:
    if (args.z is None) == (args.s is None):
        raise UsageError("give exactly one of --z and --s")
    try:
        x = ExternalData.from_z(parse_complex(args.z)) if args.z is not None else ExternalData.from_s(parse_s(G, args.s))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    chart = _edge_id(G, args.chart) if args.chart else 0
    if args.representation == "direct":
        if args.n:
            raise UsageError("--n only applies to the dual representation")
        I = build_direct_integrand(G)
    else:
        override = {}
        for item in args.n or ():
            name, eq, k = item.partition("=")
            if not eq:
                raise UsageError(f"expected edge=k in --n {item!r}")
            override[_edge_id(G, name)] = int(k)
        I = build_dual_integrand(G, choose_n(G, override))
    est = evaluate_gf(fix_chart(I, chart, args.power), x, _config(args))
    payload = {"estimate": est.to_json(), "representation": args.representation,
               "chart": G.edges[chart].name, "power": args.power, "n": list(I.n)}
    if x.z is not None:
        payload["z"] = [x.z.real, x.z.imag]
    return payload, EXIT_OK


def _dual_payload(G: FeynmanGraph) -> dict:
    res = planar_dual(G)
    D = res.graph
    bij = [f"{e.name} -> {D.edges[res.edge_map[e.id]].name}" for e in G.edges]
    text = serialize_graph(D, ["planar dual", "edge bijection:"] + [f"  {b}" for b in bij])
    return {"graph_file": text, "bijection": {e.name: D.edges[res.edge_map[e.id]].name for e in G.edges},
            "n_vertices": D.n_vertices, "n_edges": D.n_edges, "weights_ok": res.weights_ok()}


def cmd_dual(G: FeynmanGraph, args) -> tuple[dict, int]:
    payload = _dual_payload(G)
    if args.output:
        Path(args.output).write_text(payload["graph_file"])
    return payload, EXIT_OK


def cmd_verify_dual(G: FeynmanGraph, args) -> tuple[dict, int]:
    z = parse_complex(args.z) if args.z is not None else None
    from .dual import involution_check

    report = verify_duality_theorem(G, z=z, cfg=_config(args), power=args.power)
    payload = report.to_json()
    payload["involution"] = involution_check(G)
    ok = report.exact_ok and payload["involution"]
    if report.numeric is not None:
        ok = ok and report.numeric["agree"]
    payload["ok"] = ok
    return payload, EXIT_OK if ok else EXIT_FAILED


COMMANDS = {"check": cmd_check, "poly": cmd_poly, "eval": cmd_eval, "dual": cmd_dual,
            "verify-dual": cmd_verify_dual}


def _sampling_flags(p: argparse.ArgumentParser, power: float) -> None:
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampler", choices=("plain", "qmc"), default="plain")
    p.add_argument("--replicates", type=int, default=16, help="randomized QMC replicates")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--power", type=float, default=power, help="cube map alpha = (t/(1-t))^power")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphfunc", description="Graphical functions in parametric space")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="UV/IR convergence report")
    p.add_argument("file")
    p = sub.add_parser("poly", help="spanning forest polynomials")
    p.add_argument("file")
    p.add_argument("--partition", action="append", help="external partition such as 01,z (repeatable)")
    p.add_argument("--phi", action="store_true", help="emit phi~")
    p.add_argument("--cremona", action="store_true", help="also emit the Cremona transforms")
    p = sub.add_parser("eval", help="Monte Carlo value of the graphical function")
    p.add_argument("file")
    p.add_argument("--z", help="complex point, e.g. i or 0.5+0.75i")
    p.add_argument("--s", help="squared distances, e.g. 01=1,0z=2,1z=1")
    p.add_argument("--representation", choices=("dual", "direct"), default="dual")
    p.add_argument("--chart", help="edge whose parameter is fixed to 1")
    p.add_argument("--n", action="append", help="derivative order edge=k (repeatable)")
    _sampling_flags(p, 1.0)
    p = sub.add_parser("dual", help="planar dual as a graph file")
    p.add_argument("file")
    p.add_argument("--output", "-o", help="write the dual graph file here")
    p = sub.add_parser("verify-dual", help="check the duality identities")
    p.add_argument("file")
    p.add_argument("--z", help="also compare Monte Carlo values at this point")
    _sampling_flags(p, 2.5)
    return parser


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        G = parse_graph(text)
        payload, code = COMMANDS[args.command](G, args)
    except DivergentGraphError as exc:
        payload, code = {"error": str(exc), "check": exc.report.to_json()}, EXIT_DIVERGENT
    except DualityRefused as exc:
        payload, code = {"error": str(exc), "hint": exc.hint}, EXIT_REFUSED
    except EmbeddingError as exc:
        payload, code = {"error": str(exc)}, EXIT_REFUSED
    except (GraphError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        payload, code = {"error": str(exc)}, EXIT_REFUSED
    env = ResultEnvelope(args.command, digest(text), payload)
    print(env.dumps(), file=out)
    if "error" in payload:
        print(f"error: {payload['error']}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
