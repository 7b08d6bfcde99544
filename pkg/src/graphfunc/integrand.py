"""Projective parametric integrands for graphical functions.

The dual representation integrates

    sign * prod_e a_e^(n_e + lam*nu_e - 1) * N(a) / (phi~^A * psi~^B)

over the positive simplex, where N is what remains after applying
prod_e d^n_e/da_e^n_e to 1/(phi~^M psi~^(d/2-M)) over a common denominator,
A = M + sum(n) and B = d/2 - M + sum(n).  The direct representation uses the
Cremona transformed polynomials phi, psi with numerator 1 and monomial
exponents d/2 - lam*nu_e - 1.  Both come with the scalar prefactor
Gamma(M) / prod Gamma(...) kept apart from the pointwise integrand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .convergence import ConvergenceReport, check_convergence, superficial_degree
from .forests import cremona_transform, phi_tilde, psi_tilde
from .graph import FeynmanGraph
from .poly import Poly, to_text


class DivergentGraphError(ValueError):
    def __init__(self, report: ConvergenceReport):
        self.report = report
        bad = "; ".join(f"{c.side} {c.subgraph.describe()}" for c in report.failures()[:5])
        super().__init__(f"graph is {report.verdict}: {bad}")


def choose_n(G: FeynmanGraph, override: Mapping[int, int] | None = None) -> tuple[int, ...]:
    """Smallest non-negative n_e with n_e + lam*nu_e > 0, unless overridden per edge id."""
    out = []
    for e in G.edges:
        x = G.lam * e.weight
        n = 0 if x > 0 else math.floor(-x) + 1
        if override and e.id in override:
            n = int(override[e.id])
            if n < 0 or n + x <= 0:
                raise ValueError(f"edge {e.name}: n={n} violates n + lam*nu > 0 (lam*nu = {x})")
        out.append(n)
    return tuple(out)


@dataclass(frozen=True)
class ParametricIntegrand:
    graph: FeynmanGraph
    representation: str  # "dual" or "direct"
    n: tuple[int, ...]
    A: Fraction  # exponent of phi
    B: Fraction  # exponent of psi
    numerator: Poly
    phi: Poly
    psi: Poly
    mu: tuple[Fraction, ...]  # monomial exponents a_e^mu_e
    sign: int
    gamma_num: Fraction
    gamma_den: tuple[Fraction, ...]
    M: Fraction = field(default=Fraction(0))

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    def prefactor(self) -> float:
        """Gamma(M) / prod Gamma(...) in floating point."""
        logv = math.lgamma(self.gamma_num) - sum(math.lgamma(x) for x in self.gamma_den)
        sgn = _gamma_sign(self.gamma_num)
        for x in self.gamma_den:
            sgn *= _gamma_sign(x)
        return sgn * math.exp(logv)

    def degree_balance(self) -> Fraction:
        """Total alpha-degree of the pointwise integrand plus E; zero when projective."""
        dn = self.numerator.homogeneous_degree()
        return (dn + sum(self.mu) - self.A * self.phi.homogeneous_degree()
                - self.B * self.psi.homogeneous_degree() + self.n_edges)

    def pointwise(self, alpha: Sequence, s: Mapping):
        """Integrand value at a point of the open simplex (projective, no chart).

        Exact for rational inputs when every exponent is an integer.
        """
        exact = all(isinstance(x, (int, Fraction)) for x in alpha) and all(
            isinstance(v, (int, Fraction)) for v in s.values())
        ints = all(x.denominator == 1 for x in (*self.mu, self.A, self.B))
        N = self.numerator.evaluate(alpha, s)
        P = self.phi.evaluate(alpha, s)
        Q = self.psi.evaluate(alpha, {})
        if exact and ints:
            val = Fraction(self.sign) * N / (Fraction(P) ** int(self.A) * Fraction(Q) ** int(self.B))
            for a, m in zip(alpha, self.mu):
                val *= Fraction(a) ** int(m)
            return val
        val = self.sign * float(N) / (float(P) ** float(self.A) * float(Q) ** float(self.B))
        for a, m in zip(alpha, self.mu):
            val *= float(a) ** float(m)
        return val

    def dump(self) -> dict:
        return {
            "representation": self.representation,
            "n": list(self.n),
            "A": str(self.A),
            "B": str(self.B),
            "mu": [str(m) for m in self.mu],
            "sign": self.sign,
            "prefactor": {"gamma_num": str(self.gamma_num), "gamma_den": [str(x) for x in self.gamma_den],
                          "value": self.prefactor()},
            "numerator": to_text(self.numerator),
            "phi": to_text(self.phi),
            "psi": to_text(self.psi),
        }


def _gamma_sign(x: Fraction) -> int:
    if x > 0:
        return 1
    if x.denominator == 1:
        raise ValueError("Gamma has a pole at non-positive integers")
    return -1 if math.floor(x) % 2 else 1


def _require_convergent(G: FeynmanGraph) -> None:
    report = check_convergence(G)
    if not report.convergent:
        raise DivergentGraphError(report)


def _require_positive_m(G: FeynmanGraph) -> None:
    # Convergence forces M > 0 only without edges between external vertices;
    # those edges factor out of the integral as s_ij^(-lam nu_e).
    M = superficial_degree(G)
    if M <= 0:
        raise ValueError(f"M_G = {M} is not positive; edges between external vertices factor out "
                         "as s_ij^(-lam*nu_e), remove them before building the integrand")


def apply_derivatives(G: FeynmanGraph, phi_t: Poly, psi_t: Poly, a: Fraction, b: Fraction,
                      n: Sequence[int]) -> tuple[Poly, Fraction, Fraction]:
    """Numerator of prod_e d^n_e (1 / (phi^a psi^b)) over the common denominator.

    Uses d(P/(phi^a psi^b)) = (P' phi psi - a P phi' psi - b P phi psi') / (phi^(a+1) psi^(b+1)).
    """
    P = Poly.one(G.n_edges)
    for e, k in enumerate(n):
        dphi = phi_t.partial_derivative(e)
        dpsi = psi_t.partial_derivative(e)
        for _ in range(k):
            P = (P.partial_derivative(e) * phi_t * psi_t
                 - (P * dphi * psi_t).scale(a)
                 - (P * phi_t * dpsi).scale(b))
            a += 1
            b += 1
    return P, a, b


def build_dual_integrand(G: FeynmanGraph, n: Sequence[int] | None = None,
                         check: bool = True) -> ParametricIntegrand:
    if check:
        _require_convergent(G)
    _require_positive_m(G)
    n = choose_n(G) if n is None else tuple(int(k) for k in n)
    if len(n) != G.n_edges:
        raise ValueError("need one n_e per edge")
    for e, k in zip(G.edges, n):
        if k < 0 or k + G.lam * e.weight <= 0:
            raise ValueError(f"edge {e.name}: n={k} violates n + lam*nu > 0")
    M = superficial_degree(G)
    half_d = G.dim / 2
    phi_t, psi_t = phi_tilde(G), psi_tilde(G)
    num, A, B = apply_derivatives(G, phi_t, psi_t, M, half_d - M, n)
    mu = tuple(k + G.lam * e.weight - 1 for e, k in zip(G.edges, n))
    return ParametricIntegrand(
        graph=G, representation="dual", n=n, A=A, B=B, numerator=num, phi=phi_t, psi=psi_t,
        mu=mu, sign=(-1) ** sum(n), gamma_num=M,
        gamma_den=tuple(k + G.lam * e.weight for e, k in zip(G.edges, n)), M=M,
    )


def build_direct_integrand(G: FeynmanGraph, check: bool = True) -> ParametricIntegrand:
    for e in G.edges:
        if e.weight <= 0:
            raise ValueError(f"edge {e.name} has non-positive weight; use the dual representation")
    if check:
        _require_convergent(G)
    _require_positive_m(G)
    M = superficial_degree(G)
    half_d = G.dim / 2
    E = G.n_edges
    return ParametricIntegrand(
        graph=G, representation="direct", n=(0,) * E, A=M, B=half_d - M,
        numerator=Poly.one(E), phi=cremona_transform(phi_tilde(G)), psi=cremona_transform(psi_tilde(G)),
        mu=tuple(half_d - G.lam * e.weight - 1 for e in G.edges), sign=1, gamma_num=M,
        gamma_den=tuple(G.lam * e.weight for e in G.edges), M=M,
    )


def lifted_monomial_graphs(I: ParametricIntegrand):
    """For each numerator monomial m, the graph in d' = d + 4*sum(n) dimensions
    with lam'*nu'_e = lam*nu_e + n_e + m_e, whose dual integrand at n = 0 is that
    monomial's contribution."""
    G = I.graph
    total_n = sum(I.n)
    d2 = G.dim + 4 * total_n
    lam2 = (d2 - 2) / 2
    for m in I.numerator.monomials():
        weights = [(G.lam * e.weight + k + me) / lam2 for e, k, me in zip(G.edges, I.n, m)]
        yield m, G.with_weights(weights, dim=d2)


@dataclass(frozen=True)
class ChartedIntegrand:
    """Affine chart a_{chart} = 1 with the remaining variables mapped from the unit
    cube by a = (t/(1-t))^power.

    ``power=1`` is the plain map t/(1-t) with Jacobian 1/(1-t)^2; larger powers
    damp the integrable boundary singularities (the integral is unchanged).
    """

    integrand: ParametricIntegrand
    chart: int = 0
    power: float = 1.0

    @property
    def dim(self) -> int:
        return self.integrand.n_edges - 1

    @property
    def free_edges(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.integrand.n_edges) if i != self.chart)

    def log_alpha(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(log alpha of shape (N, E), log Jacobian of shape (N,))."""
        t = np.asarray(t, dtype=float)
        N = t.shape[0]
        E = self.integrand.n_edges
        p = self.power
        logu = np.log(t) - np.log1p(-t)
        loga = np.zeros((N, E))
        loga[:, list(self.free_edges)] = p * logu
        logj = np.sum(math.log(p) + (p - 1.0) * logu - 2.0 * np.log1p(-t), axis=1)
        return loga, logj

    def evaluate(self, t: np.ndarray, s: Mapping) -> np.ndarray:
        """Pointwise integrand including monomial weights, sign and Jacobian."""
        from .kernels import integrand_values

        return integrand_values(self, np.atleast_2d(t), s)


def fix_chart(I: ParametricIntegrand, chart: int = 0, power: float = 1.0) -> ChartedIntegrand:
    if not 0 <= chart < I.n_edges:
        raise ValueError(f"chart edge {chart} out of range")
    if power <= 0:
        raise ValueError("power must be positive")
    return ChartedIntegrand(I, chart, float(power))
