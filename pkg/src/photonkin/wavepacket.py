"""Positive-energy photon propagation on a periodic 1-D grid.

The evolution ``i d psi/dt = sqrt(-d^2/dx^2) psi`` is diagonal in Fourier
space, so :func:`evolve` applies the exact multiplier ``exp(-i |k| t)``. All
kernel applications are done spectrally; the position-space kernel of
``|k|`` is never materialised.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import AliasError, DomainTooSmall, ResolutionError, WrapAroundError

PEAK_FRACTION = 0.05


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid ``x_j = x_min + j dx``, ``j = 0 .. n_points-1``."""

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        n = self.n_points
        if n < 64 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 64, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self):
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def to_dict(self):
        return {"n_points": self.n_points, "x_min": self.x_min, "x_max": self.x_max}


@dataclass(frozen=True)
class WavePacket1D:
    grid: Grid1D
    psi: np.ndarray
    t: float = 0.0
    a: float = 0.0
    k0: float = 0.0

    def norm2(self):
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def spectrum(self):
        return np.fft.fft(self.psi)

    def with_psi(self, psi, t=None):
        return replace(self, psi=psi, t=self.t if t is None else t)


def init_gaussian(grid, a, k0, x0=0.0):
    """Normalised ``exp(-(x-x0)^2 / 2a^2) exp(i k0 x)`` sampled on ``grid``."""
    if a <= 0:
        raise ValueError("width must be positive")
    if a < 8 * grid.dx:
        raise ResolutionError(f"width a={a} below 8 dx = {8 * grid.dx:.4g}")
    if abs(k0) + 6.0 / a >= np.pi / grid.dx:
        raise AliasError(f"|k0| + 6/a = {abs(k0) + 6.0 / a:.4g} reaches Nyquist {np.pi / grid.dx:.4g}")
    if grid.length < 20 * a:
        raise DomainTooSmall(f"domain length {grid.length} below 20 a = {20 * a}")
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (2 * a * a) + 1j * k0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WavePacket1D(grid, psi, 0.0, float(a), float(k0))


def _apply_multiplier(psi, mult):
    return np.fft.ifft(mult * np.fft.fft(psi))


def sqrt_laplacian_apply(wp):
    """Apply ``sqrt(-d^2/dx^2)``, i.e. multiply the spectrum by ``|k|``."""
    return wp.with_psi(_apply_multiplier(wp.psi, np.abs(wp.grid.k)))


def spectral_second_derivative(wp):
    return wp.with_psi(_apply_multiplier(wp.psi, -wp.grid.k ** 2))


def _wrap_guard(wp, t_final):
    limit = wp.grid.length / 2 - 10 * wp.a
    if abs(t_final) >= limit:
        raise WrapAroundError(f"|t| = {abs(t_final):.4g} reaches the wrap-around limit {limit:.4g}")


def evolve(wp, dt):
    """Exact propagation by ``dt``: spectrum times ``exp(-i |k| dt)``."""
    _wrap_guard(wp, wp.t + dt)
    if dt == 0:
        return wp.with_psi(wp.psi.copy())
    return wp.with_psi(_apply_multiplier(wp.psi, np.exp(-1j * np.abs(wp.grid.k) * dt)), wp.t + dt)


def _translate(psi, k, s):
    """``psi(x + s)`` on the periodic grid."""
    return _apply_multiplier(psi, np.exp(1j * k * s))


def dalembert_reconstruct(wp0, t):
    """Wave-equation form of the solution at time ``t``.

    ``psi(x,t) = (psi0(x+t) + psi0(x-t))/2 + (1/2i) [G(x+t) - G(x-t)]`` where
    ``G`` is an antiderivative of ``|k| psi0``. ``G`` comes from dividing by
    ``ik`` off zero; the zero mode of the integrand contributes its mean
    times the interval length ``2t``.
    """
    _wrap_guard(wp0, wp0.t + t)
    k = wp0.grid.k
    psi0 = wp0.psi
    if t == 0:
        return wp0.with_psi(psi0.copy())
    average = 0.5 * (_translate(psi0, k, t) + _translate(psi0, k, -t))

    velocity_hat = np.fft.fft(sqrt_laplacian_apply(wp0).psi)
    zero_mode = velocity_hat[0] / k.size
    G_hat = np.zeros_like(velocity_hat)
    nz = k != 0
    G_hat[nz] = velocity_hat[nz] / (1j * k[nz])
    G = np.fft.ifft(G_hat)
    integral = _translate(G, k, t) - _translate(G, k, -t) + zero_mode * 2 * t
    return wp0.with_psi(average + integral / 2j, wp0.t + t)


def probability_density(wp):
    return np.abs(wp.psi) ** 2


def spectral_moments(wp):
    """Mean and variance of ``k`` under ``|psi_hat|^2``."""
    w = np.abs(wp.spectrum()) ** 2
    w /= w.sum()
    k = wp.grid.k
    mean = float(np.sum(k * w))
    return mean, float(np.sum((k - mean) ** 2 * w))


def position_mean(wp):
    return float(np.sum(wp.grid.x * probability_density(wp)) * wp.grid.dx)


def energy(wp):
    """``<psi| sqrt(-d^2/dx^2) |psi>`` per unit norm."""
    w = np.abs(wp.spectrum()) ** 2
    return float(np.sum(np.abs(wp.grid.k) * w) / np.sum(w))


def forward_fraction(wp):
    """``int_{k>0} |psi_hat|^2 dk`` as a fraction of the total.

    The zero and Nyquist modes count half to each side.
    """
    w = np.abs(wp.spectrum()) ** 2
    k = wp.grid.k
    n = k.size
    edge = np.zeros(n, dtype=bool)
    edge[0] = True
    edge[n // 2] = True
    return float((w[(k > 0) & ~edge].sum() + 0.5 * w[edge].sum()) / w.sum())


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    mass: float
    index: int
    width: float = float("nan")

    def to_dict(self):
        return {"position": self.position, "height": self.height, "mass": self.mass,
                "index": self.index, "fwhm": self.width}


def _local_maxima(rho, fraction):
    left = np.roll(rho, 1)
    right = np.roll(rho, -1)
    is_max = (rho > left) & (rho >= right)
    return np.flatnonzero(is_max & (rho >= fraction * rho.max()))


def _fwhm(rho, i, dx):
    """Full width at half maximum around sample ``i`` (linear interpolation, periodic)."""
    n = rho.size
    half = 0.5 * rho[i]
    width = 0.0
    for step in (-1, 1):
        for s in range(1, n // 2):
            inner, outer = rho[(i + (s - 1) * step) % n], rho[(i + s * step) % n]
            if outer < half:
                width += s - 1 + (inner - half) / (inner - outer)
                break
        else:
            return float("nan")
    return float(width * dx)


def peak_report(wp, fraction=PEAK_FRACTION):
    """Local maxima above ``fraction`` of the global maximum, with basin masses.

    Basins on the periodic grid are bounded by the density minimum between
    neighbouring peaks; the boundary sample is shared equally.
    """
    rho = probability_density(wp)
    dx = wp.grid.dx
    n = rho.size
    idx = _local_maxima(rho, fraction)
    if idx.size == 0:
        return []
    if idx.size == 1:
        i = idx[0]
        return [Peak(float(wp.grid.x[i]), float(rho[i]), float(rho.sum() * dx), int(i), _fwhm(rho, i, dx))]
    # boundary between peak i and i+1, cyclically
    bounds = []
    for i, j in zip(idx, np.roll(idx, -1)):
        span = (np.arange(i, i + ((j - i) % n) + 1)) % n
        bounds.append(int(span[np.argmin(rho[span])]))
    peaks = []
    for p, (lo, hi) in enumerate(zip(np.roll(bounds, 1), bounds)):
        span = (np.arange(lo, lo + ((hi - lo) % n) + 1)) % n
        mass = rho[span].sum() - 0.5 * rho[lo] - 0.5 * rho[hi]
        i = idx[p]
        peaks.append(Peak(float(wp.grid.x[i]), float(rho[i]), float(mass * dx), int(i), _fwhm(rho, i, dx)))
    return peaks
