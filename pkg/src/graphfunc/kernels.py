"""Vectorized pointwise evaluation of charted integrands.

Everything is done in log space after rescaling each point projectively to
max(alpha) = 1, so the wide dynamic range of the cube map never overflows.

For the graph polynomials two routes exist: plain monomial sums, and the
Laplace-matrix route (psi~ = det L^ii, phi~/psi~ from the Schur complement of
L^ii, computed by Kron reduction) compiled with numba.  The second is used whenever the integrand is built
from psi~/phi~ or their Cremona transforms, which is every integrand produced
by this package.
"""
from __future__ import annotations

from typing import Mapping

import numba
import numpy as np

from .graph import FeynmanGraph


@numba.njit(cache=True, nogil=True)
def _laplace_logs(x, eu, ev, pos, k, smat, logpsi, logphi):
    # Kron reduction: eliminate internal vertices one at a time on the
    # non-negative off-diagonal weights W = -L.  Pivots are recomputed as row
    # sums, so every step adds positive numbers and nothing cancels.
    N, E = x.shape
    V = pos.shape[0]
    W = np.zeros((V, V))
    for r in range(N):
        for i in range(V):
            for j in range(V):
                W[i, j] = 0.0
        for e in range(E):
            a = x[r, e]
            i = pos[eu[e]]
            j = pos[ev[e]]
            W[i, j] += a
            W[j, i] += a
        lp = 0.0
        ok = True
        for p in range(k):
            d = 0.0
            for j in range(p + 1, V):
                d += W[p, j]
            if d <= 0.0:
                ok = False
                break
            lp += np.log(d)
            for i in range(p + 1, V):
                wip = W[i, p]
                if wip == 0.0:
                    continue
                f = wip / d
                for j in range(p + 1, V):
                    if j != i:
                        W[i, j] += f * W[p, j]
        if not ok:
            logpsi[r] = -np.inf
            logphi[r] = -np.inf
            continue
        ratio = 0.0
        for a in range(k, V):
            for b in range(a + 1, V):
                ratio += W[a, b] * smat[a - k, b - k]
        logpsi[r] = lp
        logphi[r] = lp + np.log(ratio) if ratio > 0.0 else -np.inf


class LaplaceEvaluator:
    """log psi~ and log phi~ of a graph at positive points, via the Laplace matrix."""

    def __init__(self, G: FeynmanGraph, s: Mapping):
        order = G.internal + G.external
        pos = np.empty(G.n_vertices, dtype=np.int64)
        for r, v in enumerate(order):
            pos[v] = r
        self.pos = pos
        self.k = len(G.internal)
        self.eu = np.array([e.u for e in G.edges], dtype=np.int64)
        self.ev = np.array([e.v for e in G.edges], dtype=np.int64)
        m = len(G.external)
        smat = np.zeros((m, m))
        for a, i in enumerate(G.external):
            for b, j in enumerate(G.external):
                if a != b:
                    li, lj = G.label(i), G.label(j)
                    key = (li, lj) if li < lj else (lj, li)
                    smat[a, b] = float(s[key])
        self.smat = smat
        self.n_internal = self.k

    def logs(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.ascontiguousarray(x, dtype=float)
        N = x.shape[0]
        lpsi = np.empty(N)
        lphi = np.empty(N)
        _laplace_logs(x, self.eu, self.ev, self.pos, self.k, self.smat, lpsi, lphi)
        return lpsi, lphi


class MonomialEvaluator:
    """Float evaluation of a polynomial at points given by log alpha."""

    def __init__(self, poly, s: Mapping | None = None):
        exps, coeffs = poly.numeric_terms(s)
        self.exps = np.array(exps, dtype=float).reshape(len(exps), poly.nvars)
        self.coeffs = np.array(coeffs, dtype=float)

    def values(self, loga: np.ndarray) -> np.ndarray:
        if self.coeffs.size == 0:
            return np.zeros(loga.shape[0])
        return np.exp(loga @ self.exps.T) @ self.coeffs


def _prepare(ci, s):
    cache = getattr(ci, "_kernel_cache", None)
    key = tuple(sorted((k, float(v)) for k, v in s.items()))
    if cache is not None and cache[0] == key:
        return cache[1]
    I = ci.integrand
    G = I.graph
    lap = LaplaceEvaluator(G, s)
    num = None
    if not (I.numerator.homogeneous_degree() == 0 and len(I.numerator) == 1):
        num = MonomialEvaluator(I.numerator, s)
    const = 1.0
    if num is None:
        const = float(next(iter(I.numerator.terms.values())).evaluate(s))
    prep = (lap, num, const, np.array([float(m) for m in I.mu]), float(I.A), float(I.B))
    object.__setattr__(ci, "_kernel_cache", (key, prep))
    return prep


def integrand_values(ci, t: np.ndarray, s: Mapping) -> np.ndarray:
    """Charted integrand (times Jacobian, without the Gamma prefactor) at cube points ``t``."""
    I = ci.integrand
    G = I.graph
    E = I.n_edges
    lap, num, const, mu, A, B = _prepare(ci, s)
    loga, logj = ci.log_alpha(t)
    logc = loga.max(axis=1)
    loga -= logc[:, None]
    V = len(G.internal)
    if I.representation == "dual":
        lpsi, lphi = lap.logs(np.exp(loga))
    else:
        # psi(a) = prod(a) psi~(1/a), and likewise for phi
        logb = -loga
        logcb = logb.max(axis=1)
        lpsi_t, lphi_t = lap.logs(np.exp(logb - logcb[:, None]))
        sum_loga = loga.sum(axis=1)
        lpsi = sum_loga + lpsi_t + V * logcb
        lphi = sum_loga + lphi_t + (V + 1) * logcb
    logf = loga @ mu - A * lphi - B * lpsi - E * logc + logj
    if num is None:
        return I.sign * const * np.exp(logf)
    return I.sign * num.values(loga) * np.exp(logf)
