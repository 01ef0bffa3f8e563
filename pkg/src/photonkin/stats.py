"""Second-order photon correlations at zero delay and a Gaussian HBT source model."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import InvalidN, UnsupportedSource, ZeroMean
from .fock import PhotonDistribution

EPS_CLS = 1e-9
CHUNK = 1 << 16


class Classification(str, Enum):
    ANTIBUNCHED = "antibunched"
    COHERENT_BOUNDARY = "coherent_boundary"
    BUNCHED = "bunched"


def classify(value, eps=EPS_CLS):
    if value < 1.0 - eps:
        return Classification.ANTIBUNCHED
    if value > 1.0 + eps:
        return Classification.BUNCHED
    return Classification.COHERENT_BOUNDARY


@dataclass
class G2Result:
    value: float
    classification: Classification = field(init=False)
    stderr: float = 0.0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("g2 cannot be negative")
        self.classification = classify(self.value)

    def to_dict(self):
        return {
            "value": self.value,
            "classification": self.classification.value,
            "stderr": self.stderr,
        }


class SourceKind(str, Enum):
    FOCK = "fock"
    COHERENT = "coherent"
    THERMAL = "thermal"
    CHAOTIC_GAUSSIAN = "chaotic_gaussian"


@dataclass(frozen=True)
class SourceModel:
    """Light or particle source.

    ``n`` is the photon number of a Fock source, ``mean`` the mean photon
    number of coherent/thermal sources, ``radius`` the per-axis rms size of
    the Gaussian emission region and ``momentum_scale`` a typical momentum
    (it does not enter C2 in this model).
    """

    kind: SourceKind
    n: int = 1
    mean: float = 1.0
    radius: float = 1.0
    momentum_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if self.kind is SourceKind.FOCK and self.n < 1:
            raise InvalidN(f"Fock source needs N >= 1, got {self.n}")
        if self.kind in (SourceKind.COHERENT, SourceKind.THERMAL) and self.mean <= 0:
            raise ValueError("mean photon number must be positive")
        if self.kind is SourceKind.CHAOTIC_GAUSSIAN and self.radius <= 0:
            raise ValueError("source radius must be positive")

    @classmethod
    def fock(cls, n):
        return cls(SourceKind.FOCK, n=n)

    @classmethod
    def coherent(cls, mean=1.0, radius=1.0):
        return cls(SourceKind.COHERENT, mean=mean, radius=radius)

    @classmethod
    def thermal(cls, mean):
        return cls(SourceKind.THERMAL, mean=mean)

    @classmethod
    def chaotic_gaussian(cls, radius, momentum_scale=1.0):
        return cls(SourceKind.CHAOTIC_GAUSSIAN, radius=radius, momentum_scale=momentum_scale)


def g2_fock(N):
    """g2(0) = 1 - 1/N for N identical photons."""
    if int(N) != N or N <= 0:
        raise InvalidN(f"N must be a positive integer, got {N}")
    return G2Result(1.0 - 1.0 / N)


def _factorial_moments(probs):
    n = np.arange(probs.size, dtype=np.float64)
    return np.sum(n * probs), np.sum(n * (n - 1) * probs)


def g2_from_distribution(dist):
    """Normally ordered moment ratio <n(n-1)> / <n>^2."""
    probs = dist.probs if isinstance(dist, PhotonDistribution) else np.asarray(dist, dtype=float)
    m1, m2 = _factorial_moments(probs)
    if m1 <= 0:
        raise ZeroMean("distribution has zero mean photon number")
    return G2Result(float(m2 / m1**2))


def g2_from_counts(counts):
    """Sample estimate of g2(0) from photon counts with a delta-method error."""
    c = np.asarray(counts, dtype=np.float64)
    if c.size < 2:
        raise ValueError("need at least two samples")
    u = c
    v = c * (c - 1)
    mu, mv = u.mean(), v.mean()
    if mu <= 0:
        raise ZeroMean("sample has zero mean count")
    g = mv / mu**2
    cov = np.cov(np.vstack([u, v]), ddof=1) / c.size
    grad = np.array([-2 * mv / mu**3, 1 / mu**2])
    return G2Result(float(g), stderr=float(np.sqrt(grad @ cov @ grad)))


def poisson_distribution(mean, n_max):
    n = np.arange(n_max + 1)
    return PhotonDistribution(np.exp(n * np.log(mean) - mean - gammaln(n + 1)))


def thermal_distribution(mean, n_max):
    n = np.arange(n_max + 1)
    return PhotonDistribution(np.exp(n * np.log(mean) - (n + 1) * np.log1p(mean)))


def fock_distribution(N, n_max=None):
    n_max = N if n_max is None else n_max
    p = np.zeros(n_max + 1)
    p[N] = 1.0
    return PhotonDistribution(p)


def sample_counts(source, n_samples, seed):
    """Draw photon counts from a single-mode source (deterministic in ``seed``)."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    if source.kind is SourceKind.THERMAL:
        # Bose-Einstein: geometric on {0, 1, ...} with success 1/(1+mean)
        return rng.geometric(1.0 / (1.0 + source.mean), n_samples) - 1
    if source.kind is SourceKind.COHERENT:
        return rng.poisson(source.mean, n_samples)
    if source.kind is SourceKind.FOCK:
        return np.full(n_samples, source.n)
    raise UnsupportedSource(f"no photon-count model for {source.kind.value}")


def _threads():
    try:
        return max(1, int(os.environ.get("PHOTONKIN_THREADS", "1")))
    except ValueError:
        return 1


def _stream_rng(seed, stream):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _chaotic_chunk(seed, stream, size, q, radius):
    rng = _stream_rng(seed, stream)
    x1 = rng.normal(scale=radius, size=(size, 3))
    x2 = rng.normal(scale=radius, size=(size, 3))
    # |(e^{i p1.x1} e^{i p2.x2} + e^{i p1.x2} e^{i p2.x1}) / sqrt 2|^2
    w = 1.0 + np.cos((x1 - x2) @ q)
    return w.sum(), (w * w).sum()


def hbt_c2(source, p1, p2, n_samples=1_000_000, seed=0, return_error=False):
    """Monte Carlo estimate of C2(p1, p2) = P(p1, p2) / (P(p1) P(p2)).

    Chaotic source: emission points drawn independently from an isotropic
    Gaussian with per-axis rms ``radius``; each pair contributes the
    exchange-symmetrised plane-wave weight ``1 + cos(q.(x1 - x2))`` with
    ``q = p1 - p2``, so the estimator converges to ``1 + exp(-q^2 R^2)``.
    Coherent source: phase-locked emitters give a factorised two-particle
    amplitude, so every pair carries weight exactly 1.

    Samples are processed in chunks of 65536, chunk ``i`` on its own
    counter-based stream ``(seed, i)``; the result does not depend on how
    many threads ``PHOTONKIN_THREADS`` allows.
    """
    if source.kind not in (SourceKind.COHERENT, SourceKind.CHAOTIC_GAUSSIAN):
        raise UnsupportedSource(f"hbt_c2 needs a coherent or chaotic source, got {source.kind.value}")
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 1e4")
    q = np.asarray(p1, dtype=float) - np.asarray(p2, dtype=float)
    if source.kind is SourceKind.COHERENT:
        c2, err = 1.0, 0.0
    else:
        sizes = [CHUNK] * (n_samples // CHUNK)
        if n_samples % CHUNK:
            sizes.append(n_samples % CHUNK)
        jobs = [(seed, i, s, q, source.radius) for i, s in enumerate(sizes)]
        workers = min(_threads(), len(jobs))
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda a: _chaotic_chunk(*a), jobs))
        else:
            parts = [_chaotic_chunk(*a) for a in jobs]
        s1 = sum(p[0] for p in parts)
        s2 = sum(p[1] for p in parts)
        c2 = s1 / n_samples
        var = max(s2 / n_samples - c2 * c2, 0.0) * n_samples / (n_samples - 1)
        err = float(np.sqrt(var / n_samples))
    if return_error:
        return float(c2), err
    return float(c2)


def c2_gaussian_model(q, radius):
    """Analytic C2(q) = 1 + exp(-q^2 R^2) for the Gaussian chaotic source."""
    return 1.0 + np.exp(-((np.asarray(q) * radius) ** 2))


def c2_halfwidth(source):
    """Relative momentum where C2 falls to 1.5 (root of the analytic model)."""
    if source.kind is not SourceKind.CHAOTIC_GAUSSIAN:
        raise UnsupportedSource("half width is defined for the chaotic Gaussian source only")
    R = source.radius
    hi = 10.0 / R
    return brentq(lambda q: c2_gaussian_model(q, R) - 1.5, 0.0, hi, xtol=1e-15 / R, rtol=1e-14)


def c2_scan(source, q_values, direction=(1.0, 0.0, 0.0), n_samples=1_000_000, seed=0):
    """C2 along ``q * direction``; rows of ``(q, c2, mc_err)``."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    p_ref = source.momentum_scale * np.array([0.0, 0.0, 1.0])
    rows = []
    for i, q in enumerate(q_values):
        c2, err = hbt_c2(source, p_ref + q * d, p_ref, n_samples, seed=(seed, i), return_error=True)
        rows.append((float(q), c2, err))
    return rows
