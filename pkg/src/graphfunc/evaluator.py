"""Monte Carlo evaluation of charted parametric integrands.

Samples are generated in fixed-size shards.  Each shard draws from its own
counter-derived stream (``SeedSequence(seed, spawn_key=(shard,))``) and the
per-shard statistics are merged in shard order, so any number of worker
threads gives bit-identical results to a serial run.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np
from scipy.stats import qmc

from .integrand import ChartedIntegrand

logger = logging.getLogger(__name__)

SHARD_SIZE = 1 << 16
REJECTION_WARN = 1e-3


@dataclass(frozen=True)
class ExternalData:
    """Squared distances between external vertices, keyed by sorted label pairs."""

    s: dict
    z: complex | None = None

    @classmethod
    def from_z(cls, z: complex) -> "ExternalData":
        z = complex(z)
        if z == 0 or z == 1:
            raise ValueError("z must avoid {0,1}")
        s = {("0", "1"): 1.0, ("0", "z"): abs(z) ** 2, ("1", "z"): abs(1 - z) ** 2}
        return cls(s, z)

    @classmethod
    def from_s(cls, s: Mapping) -> "ExternalData":
        out = {}
        for (i, j), v in s.items():
            v = float(v)
            if not v > 0:
                raise ValueError(f"s[{i},{j}] must be positive")
            out[(i, j) if i < j else (j, i)] = v
        return cls(out)

    def conjugate(self) -> "ExternalData":
        if self.z is None:
            return self
        return ExternalData(dict(self.s), self.z.conjugate())


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 1_000_000
    seed: int = 0
    sampler: str = "plain"  # "plain" or "qmc"
    workers: int = 1
    replicates: int = 16  # randomized QMC replicates (qmc only)

    def __post_init__(self):
        if self.sampler not in ("plain", "qmc"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int
    seed: int
    sampler: str
    rejected: int = 0
    warning: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        if d["warning"] is None:
            del d["warning"]
        return d

    def agrees(self, other: "Estimate | float", nsigma: float = 3.0, scale: float = 1.0) -> bool:
        """|self - scale*other| within nsigma combined standard errors."""
        if isinstance(other, Estimate):
            err = math.hypot(self.stderr, scale * other.stderr)
            return abs(self.value - scale * other.value) <= nsigma * err
        return abs(self.value - scale * other) <= nsigma * self.stderr


@dataclass
class _Moments:
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    rejected: int = 0

    @classmethod
    def of(cls, v: np.ndarray) -> "_Moments":
        bad = ~np.isfinite(v)
        rejected = int(bad.sum())
        if rejected:
            v = np.where(bad, 0.0, v)
        mean = float(v.mean())
        return cls(v.size, mean, float(((v - mean) ** 2).sum()), rejected)

    def merge(self, o: "_Moments") -> "_Moments":
        if self.n == 0:
            return _Moments(o.n, o.mean, o.m2, o.rejected)
        n = self.n + o.n
        delta = o.mean - self.mean
        mean = self.mean + delta * o.n / n
        m2 = self.m2 + o.m2 + delta * delta * self.n * o.n / n
        return _Moments(n, mean, m2, self.rejected + o.rejected)


def _uniform(rng_points: np.ndarray) -> np.ndarray:
    # keep points strictly inside the open cube
    return np.clip(rng_points, 2.0**-60, 1.0 - 2.0**-53)


def _shard_plain(ci: ChartedIntegrand, s, seed: int, shard: int, n: int) -> _Moments:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(shard,))))
    t = _uniform(rng.random((n, ci.dim)))
    return _Moments.of(ci.evaluate(t, s))


def _shard_qmc(ci: ChartedIntegrand, s, seed: int, replicate: int, start: int, n: int) -> _Moments:
    ss = np.random.SeedSequence(seed, spawn_key=(1 << 20, replicate))
    engine = qmc.Halton(d=ci.dim, scramble=True, seed=np.random.default_rng(ss))
    if start:
        engine.fast_forward(start)
    t = _uniform(engine.random(n))
    return _Moments.of(ci.evaluate(t, s))


def _run(tasks, workers: int):
    if workers <= 1:
        return [fn(*args) for fn, args in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for fn, args in tasks]
        return [f.result() for f in futures]


def evaluate_gf(ci: ChartedIntegrand, x: ExternalData, cfg: SamplerConfig = SamplerConfig()) -> Estimate:
    """Monte Carlo estimate of the graphical function (prefactor included)."""
    pref = ci.integrand.prefactor()
    s = x.s
    if ci.dim == 0:
        v = float(ci.evaluate(np.zeros((1, 0)), s)[0])
        return Estimate(pref * v, 0.0, 1, cfg.seed, cfg.sampler)
    N = cfg.samples
    if cfg.sampler == "plain":
        tasks = []
        for shard, start in enumerate(range(0, N, SHARD_SIZE)):
            tasks.append((_shard_plain, (ci, s, cfg.seed, shard, min(SHARD_SIZE, N - start))))
        total = _Moments()
        for m in _run(tasks, cfg.workers):
            total = total.merge(m)
        mean = total.mean
        stderr = math.sqrt(total.m2 / (total.n - 1) / total.n) if total.n > 1 else math.inf
        rejected = total.rejected
    else:
        R = cfg.replicates
        per = max(1, N // R)
        tasks, owner = [], []
        for r in range(R):
            for start in range(0, per, SHARD_SIZE):
                tasks.append((_shard_qmc, (ci, s, cfg.seed, r, start, min(SHARD_SIZE, per - start))))
                owner.append(r)
        reps = [_Moments() for _ in range(R)]
        for r, m in zip(owner, _run(tasks, cfg.workers)):
            reps[r] = reps[r].merge(m)
        means = np.array([m.mean for m in reps])
        mean = float(means.mean())
        stderr = float(means.std(ddof=1) / math.sqrt(R)) if R > 1 else math.inf
        rejected = sum(m.rejected for m in reps)
        N = per * R
    warning = None
    if rejected > REJECTION_WARN * N:
        warning = f"{rejected} of {N} samples were non-finite and dropped"
        logger.warning(warning)
    return Estimate(pref * mean, abs(pref) * stderr, N, cfg.seed, cfg.sampler, rejected, warning)


@dataclass(frozen=True)
class SymmetryReport:
    z: complex
    f_z: Estimate
    f_zbar: Estimate
    conjugation_ok: bool
    positive: bool

    @property
    def ok(self) -> bool:
        return self.conjugation_ok and self.positive

    def to_json(self) -> dict:
        return {"z": [self.z.real, self.z.imag], "f_z": self.f_z.to_json(), "f_zbar": self.f_zbar.to_json(),
                "conjugation_ok": self.conjugation_ok, "positive": self.positive}


def verify_g_symmetries(ci: ChartedIntegrand, z: complex, cfg: SamplerConfig = SamplerConfig(),
                        nsigma: float = 3.0) -> SymmetryReport:
    """f(z) = f(zbar) within ``nsigma`` and both estimates positive beyond ``nsigma``.

    The two evaluations use independent seeds so the comparison is statistical.
    """
    x = ExternalData.from_z(z)
    a = evaluate_gf(ci, x, cfg)
    cfg_b = SamplerConfig(cfg.samples, cfg.seed + 1_000_003, cfg.sampler, cfg.workers, cfg.replicates)
    b = evaluate_gf(ci, x.conjugate(), cfg_b)
    positive = all(e.value > nsigma * e.stderr for e in (a, b))
    return SymmetryReport(complex(z), a, b, a.agrees(b, nsigma), positive)
