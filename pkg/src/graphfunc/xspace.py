"""Direct Monte Carlo integration of the position-space integral, for cross-checks.

Each internal vertex is drawn from an equal-weight mixture of radial power-law
proposals centred at the external points and at the internal vertices drawn
before it.  Near a centre joined by an edge of weight lam*nu the radial
exponent follows the propagator, so the importance ratio stays bounded there.
"""
from __future__ import annotations

import math

import numpy as np

from .convergence import check_convergence
from .evaluator import Estimate, SamplerConfig, SHARD_SIZE, _Moments
from .graph import FeynmanGraph
from .integrand import DivergentGraphError


def _sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


class _Proposal:
    def __init__(self, G: FeynmanGraph, d: int):
        self.G = G
        self.d = d
        self.lam = float(G.lam)
        self.area = _sphere_area(d)

    def shape(self, center: int, v: int) -> float:
        """1/kappa for the component centred at vertex ``center`` proposing ``v``."""
        w = sum(float(e.weight) for e in self.G.edges if {e.u, e.v} == {center, v})
        return max(0.5, min(float(self.d) - 2 * self.lam * w, float(self.d)))

    def sample(self, rng, c: np.ndarray, inv_kappa: float, n: int) -> np.ndarray:
        u = rng.random(n)
        u = np.clip(u, 1e-300, 1 - 1e-16)
        r = (u / (1 - u)) ** (1.0 / inv_kappa)
        direction = rng.standard_normal((n, self.d))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        return c + r[:, None] * direction

    def log_density(self, x: np.ndarray, c: np.ndarray, inv_kappa: float) -> np.ndarray:
        r = np.linalg.norm(x - c, axis=1)
        logr = np.log(r)
        logrho = inv_kappa * logr
        # radial density (1/kappa) rho / (r (1+rho)^2), rho = r^(1/kappa)
        logp = math.log(inv_kappa) + logrho - logr - 2 * np.logaddexp(0.0, logrho)
        return logp - math.log(self.area) - (self.d - 1) * logr


def xspace_oracle(G: FeynmanGraph, z: complex, cfg: SamplerConfig = SamplerConfig()) -> Estimate:
    """Position-space estimate of f_G(z) with d^dx/pi^(d/2) measure per internal vertex."""
    d = G.dim
    if len(G.internal) > 2 or d.denominator != 1 or int(d) % 2 or int(d) > 6:
        raise ValueError("x-space oracle needs at most 2 internal vertices and d in {4, 6}")
    labels = {G.label(v) for v in G.external}
    if labels != {"0", "1", "z"}:
        raise ValueError("x-space oracle needs external vertices 0, 1, z")
    report = check_convergence(G)
    if not report.convergent:
        raise DivergentGraphError(report)
    d = int(d)
    z = complex(z)
    pos = {}
    for v in G.external:
        p = np.zeros(d)
        lab = G.label(v)
        if lab == "1":
            p[0] = 1.0
        elif lab == "z":
            p[0], p[1] = z.real, z.imag
        pos[v] = p
    prop = _Proposal(G, d)
    internal = list(G.internal)
    lam = float(G.lam)
    log_norm = -len(internal) * (d / 2) * math.log(math.pi)
    total = _Moments()
    N = cfg.samples
    for shard, start in enumerate(range(0, N, SHARD_SIZE)):
        n = min(SHARD_SIZE, N - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(2 << 20, shard))))
        points = {v: np.broadcast_to(p, (n, d)) for v, p in pos.items()}
        log_q = np.zeros(n)
        for v in internal:
            centers = [c for c in points]
            shapes = [prop.shape(c, v) for c in centers]
            which = rng.integers(0, len(centers), n)
            x = np.empty((n, d))
            for k, (c, ik) in enumerate(zip(centers, shapes)):
                mask = which == k
                m = int(mask.sum())
                if m:
                    x[mask] = prop.sample(rng, points[c][mask], ik, m)
            comps = np.stack([prop.log_density(x, points[c], ik) for c, ik in zip(centers, shapes)])
            log_q += np.logaddexp.reduce(comps, axis=0) - math.log(len(centers))
            points[v] = x
        log_f = np.full(n, log_norm)
        for e in G.edges:
            q = np.sum((points[e.u] - points[e.v]) ** 2, axis=1)
            log_f -= lam * float(e.weight) * np.log(q)
        total = total.merge(_Moments.of(np.exp(log_f - log_q)))
    stderr = math.sqrt(total.m2 / (total.n - 1) / total.n) if total.n > 1 else math.inf
    return Estimate(total.mean, stderr, total.n, cfg.seed, "plain", total.rejected)
