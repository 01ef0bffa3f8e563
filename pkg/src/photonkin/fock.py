"""Truncated single-mode Fock space driven by a classical current.

Conventions
-----------
The interaction-picture Hamiltonian is
``H_I(t) = -f(t) (a exp(-i w t) + a^dag exp(+i w t))`` and the exact
evolution is ``exp(i phi) D(z)`` with ``D(z) = exp(z a^dag - z^* a)`` and

    z(t) = i * integral_{t0}^{t} f(t') exp(+i w t') dt'.

For a real drive this is ``z = i * conj(F(w))`` where
``F(w) = integral f(t) exp(-i w t) dt`` is what :func:`fourier_amplitude`
returns, so ``|z|^2 = |F(w)|^2`` is the mean photon number either way.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from . import kernels
from .errors import InsufficientSupport, StepTooLarge, TruncationTooSmall

NORM_TOL = 1e-8
TRUNCATION_TOL = 1e-10
ZERO_REL = 1e-12


@dataclass
class FockVector:
    """State vector over the number basis ``|0>, ..., |dim-1>``."""

    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128).ravel()
        if self.amps.size < 1:
            raise ValueError("FockVector needs dim >= 1")

    @property
    def dim(self):
        return self.amps.size

    @classmethod
    def number_state(cls, m, dim):
        if not 0 <= m < dim:
            raise ValueError(f"number state |{m}> outside basis of dim {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[m] = 1.0
        return cls(amps)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def probabilities(self):
        return np.abs(self.amps) ** 2

    def overlap(self, other):
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def mean_a(self):
        sq = np.sqrt(np.arange(1, self.dim))
        return complex(np.sum(sq * np.conj(self.amps[:-1]) * self.amps[1:]))


@dataclass
class PhotonDistribution:
    """Photon-number probabilities ``P(n)`` for ``n = 0..dim-1``."""

    probs: np.ndarray
    z: complex = 0.0
    m: int = 0
    mean: float = field(init=False)
    deficit: float = field(init=False)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be nonnegative")
        n = np.arange(self.probs.size)
        self.mean = float(np.sum(n * self.probs))
        self.deficit = float(1.0 - np.sum(self.probs))

    @property
    def dim(self):
        return self.probs.size

    @property
    def n_max(self):
        return self.probs.size - 1

    def interior_zeros(self, rel=ZERO_REL):
        """Indices of interior local minima below ``rel * max(P)``."""
        p = self.probs
        thresh = rel * p.max()
        idx = np.arange(1, p.size - 1)
        is_min = (p[idx] <= p[idx - 1]) & (p[idx] <= p[idx + 1])
        return idx[is_min & (p[idx] < thresh)]

    def local_extrema(self, lo=0, hi=None):
        """Interior turning points of ``P(n)`` restricted to ``lo <= n <= hi``."""
        p = self.probs
        hi = p.size - 1 if hi is None else hi
        d = np.diff(p)
        out = []
        for n in range(max(lo, 1), min(hi, p.size - 2) + 1):
            if d[n - 1] * d[n] < 0 or (d[n - 1] != 0 and d[n] == 0) or p[n] == 0:
                out.append(n)
        return out


@dataclass
class DriveSignal:
    """Sampled real classical current ``f(t)`` and mode frequency ``omega``."""

    times: np.ndarray
    values: np.ndarray
    omega: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            if np.any(values.imag != 0):
                raise ValueError("drive amplitude f(t) must be real")
            values = values.real
        self.values = values.astype(np.float64)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if self.times.size < 3:
            raise ValueError("need at least three drive samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("drive sample times must be strictly increasing")

    @classmethod
    def from_function(cls, func, t0, t1, n_samples, omega):
        t = np.linspace(t0, t1, n_samples)
        return cls(t, func(t), omega)

    @classmethod
    def gaussian(cls, amplitude, tau, omega, half_width=10.0, dt=None):
        """``f(t) = amplitude * exp(-t^2 / (2 tau^2))`` on ``[-half_width*tau, half_width*tau]``."""
        if dt is None:
            # RK4 error grows with h * |f| * sqrt(n)
            dt = min(2 * np.pi / abs(omega) if omega else np.inf, tau) / (200 * max(1.0, abs(amplitude)))
        n = int(np.ceil(2 * half_width * tau / dt)) + 1
        return cls.from_function(
            lambda t: amplitude * np.exp(-(t**2) / (2 * tau**2)),
            -half_width * tau, half_width * tau, n, omega,
        )

    @classmethod
    def gaussian_for_z(cls, z_abs, tau=1.0, omega=1.0, **kw):
        """Gaussian drive whose displacement has modulus ``z_abs``."""
        amp = z_abs / (tau * np.sqrt(2 * np.pi) * np.exp(-(omega**2) * tau**2 / 2))
        return cls.gaussian(amp, tau, omega, **kw)

    def window(self, t0=None, t1=None):
        """Sample slice covering ``[t0, t1]``; endpoints snap to the nearest sample."""
        i0 = 0 if t0 is None else int(np.argmin(np.abs(self.times - t0)))
        i1 = self.times.size - 1 if t1 is None else int(np.argmin(np.abs(self.times - t1)))
        if i1 - i0 < 2:
            raise ValueError("time window must contain at least three samples")
        return slice(i0, i1 + 1)

    def midpoint_values(self, sl=slice(None)):
        """Cubic (4-point Lagrange) interpolation of ``f`` at interval midpoints."""
        t = self.times[sl]
        f = self.values[sl]
        dt = np.diff(t)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            # nonuniform grid: cubic spline keeps O(h^4)
            from scipy.interpolate import CubicSpline

            return CubicSpline(t, f)(t[:-1] + 0.5 * dt)
        if f.size < 4:
            return 0.5 * (f[:-1] + f[1:])
        mid = np.empty(f.size - 1)
        mid[1:-1] = (-f[:-3] + 9 * f[1:-2] + 9 * f[2:-1] - f[3:]) / 16
        mid[0] = (5 * f[0] + 15 * f[1] - 5 * f[2] + f[3]) / 16
        mid[-1] = (5 * f[-1] + 15 * f[-2] - 5 * f[-3] + f[-4]) / 16
        return mid


@dataclass
class Displacement:
    z: complex
    phase: float = 0.0

    def __post_init__(self):
        self.z = complex(self.z)
        if not np.isfinite(self.z):
            raise ValueError("displacement must be finite")
        self.phase = float(np.mod(self.phase, 2 * np.pi))


def _truncation_guard(z, dim):
    if abs(z) ** 2 > dim / 4:
        raise TruncationTooSmall(
            f"|z|^2 = {abs(z) ** 2:.6g} exceeds dim/4 = {dim / 4:.6g}; increase dim"
        )


def displacement_matrix(z, dim, check=True):
    """Displacement operator ``exp(z a^dag - z^* a)`` in a basis of ``dim`` states.

    The exponential of the truncated generator is computed from the
    eigensystem of the real tridiagonal matrix ``|z| (a + a^dag)``, so the
    result is unitary to rounding and its columns match ``D(z)|m>`` for
    ``m`` well inside the truncation.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if check:
        _truncation_guard(z, dim)
    z = complex(z)
    r = abs(z)
    if dim == 1 or r == 0.0:
        return np.eye(dim, dtype=np.complex128)
    theta = np.angle(z)
    off = r * np.sqrt(np.arange(1, dim, dtype=np.float64))
    lam, vec = eigh_tridiagonal(np.zeros(dim), off)
    core = (vec * np.exp(-1j * lam)) @ vec.T
    n = np.arange(dim)
    # D(z) = R Q exp(-i T) Q^dag R^dag with Q = diag(i^n), R = diag(e^{i n theta})
    phase = np.exp(1j * n * (theta + np.pi / 2))
    return phase[:, None] * core * np.conj(phase)[None, :]


def _log_laguerre(deg, alpha, x):
    """``log|L_deg^(alpha)(x)|`` and its sign by the scaled three-term recurrence.

    ``deg`` and ``alpha`` are integer arrays of equal shape.
    """
    deg = np.asarray(deg, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=np.float64)
    prev = np.ones(deg.shape)
    cur = 1.0 + alpha - x
    scale = np.zeros(deg.shape)
    val = np.where(deg == 0, prev, cur)
    val_scale = np.zeros(deg.shape)
    for k in range(1, int(deg.max(initial=0))):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
        big = np.abs(cur) > 1e150
        if np.any(big):
            cur = np.where(big, cur * 1e-150, cur)
            prev = np.where(big, prev * 1e-150, prev)
            scale = scale + np.where(big, 150 * np.log(10.0), 0.0)
        done = deg == k + 1
        val = np.where(done, cur, val)
        val_scale = np.where(done, scale, val_scale)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(val)) + val_scale
    return logabs, np.sign(val)


def displaced_number_probs(z, m, n):
    """Vectorised ``|<n|D(z)|m>|^2`` over an array of ``n``."""
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if m < 0 or np.any(n < 0):
        raise ValueError("photon numbers must be nonnegative")
    x = abs(complex(z)) ** 2
    if x == 0.0:
        return (n == m).astype(np.float64)
    lo = np.minimum(n, m)
    hi = np.maximum(n, m)
    diff = hi - lo
    log_l, sign = _log_laguerre(lo, diff, x)
    logp = gammaln(lo + 1) - gammaln(hi + 1) + diff * np.log(x) - x + 2 * log_l
    with np.errstate(under="ignore"):
        p = np.where(sign == 0, 0.0, np.exp(logp))
    return p


def displaced_number_pn(z, m, n):
    """Probability of ``n`` photons in the displaced number state ``D(z)|m>``.

    Uses ``(m!/n!) |z|^{2(n-m)} exp(-|z|^2) [L_m^{(n-m)}(|z|^2)]^2`` (indices
    swapped for ``n < m``), accumulated in log space.
    """
    return float(displaced_number_probs(z, m, [n])[0])


def distribution(z, m, n_max, tol=TRUNCATION_TOL):
    """Photon-number distribution of ``D(z)|m>`` over ``n = 0..n_max``."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    probs = displaced_number_probs(z, m, np.arange(n_max + 1))
    dist = PhotonDistribution(probs, z=complex(z), m=int(m))
    if dist.deficit > tol:
        raise TruncationTooSmall(
            f"truncation deficit {dist.deficit:.3e} exceeds {tol:.1e}; raise n_max"
        )
    return dist


def laguerre_sign_changes(z, m, n_max):
    """Number of zeros of ``L_m^{(n-m)}(|z|^2)`` as ``n`` runs over ``0..n_max``.

    Counted as sign changes plus exact zeros of the polynomial in ``n``; this
    is the oscillation count of ``P(n)`` independent of where the zeros fall.
    """
    x = abs(complex(z)) ** 2
    n = np.arange(n_max + 1)
    vals = np.array([_laguerre_general(m, k - m, x) for k in n])
    s = np.sign(vals)
    zeros = int(np.sum(s == 0))
    nz = s[s != 0]
    return zeros + int(np.sum(nz[1:] != nz[:-1]))


def _laguerre_general(deg, alpha, x):
    if deg == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + alpha - x
    for k in range(1, deg):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def column_sum_check(z, dim, n):
    """``sum_m |<n|D(z)|m>|^2`` over ``m < dim``; unity by unitarity."""
    if not 0 <= n < dim:
        raise ValueError("n must lie inside the basis")
    return float(sum(displaced_number_pn(z, m, n) for m in range(dim)))


def _support_check(drive, sl, edge_tol):
    if edge_tol is None:
        return
    f = np.abs(drive.values[sl])
    peak = f.max()
    if peak == 0:
        return
    if max(f[0], f[-1]) > edge_tol * peak:
        raise InsufficientSupport(
            f"|f| at the window edge is {max(f[0], f[-1]) / peak:.2e} of its peak "
            f"(allowed {edge_tol:.1e}); widen the sample window"
        )


def fourier_amplitude(drive, edge_tol=1e-6):
    """``F(w) = integral f(t) exp(-i w t) dt`` by the composite trapezoid rule.

    Pass ``edge_tol=None`` to skip the support check (e.g. for a stationary
    drive sampled over whole periods).
    """
    sl = slice(None)
    _support_check(drive, sl, edge_tol)
    integrand = drive.values * np.exp(-1j * drive.omega * drive.times)
    return complex(np.trapezoid(integrand, drive.times))


def _cumulative(t, y):
    y = np.asarray(y)
    if t.size < 3:
        return np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))])
    re = cumulative_simpson(y.real, x=t, initial=0.0)
    im = cumulative_simpson(y.imag, x=t, initial=0.0)
    return re + 1j * im


def coherent_amplitude(drive, t0=None, t1=None):
    """``z(t) = i integral_{t0}^{t} f e^{i w t'} dt'`` at every sample in the window."""
    sl = drive.window(t0, t1)
    t = drive.times[sl]
    g = _cumulative(t, drive.values[sl] * np.exp(1j * drive.omega * t))
    return t, 1j * g


def timeordering_phase(drive, t0=None, t1=None, edge_tol=None):
    """c-number phase ``phi(t1) = (i/2) integral [A(t'), H_I(t')] dt'``.

    The commutator reduces to ``2 i f(t) Im(g(t) e^{-i w t})`` with
    ``g(t) = integral_{t0}^{t} f e^{i w t'}``, so
    ``phi = -integral f(t) Im(g(t) e^{-i w t}) dt``. Both quadratures are
    composite Simpson.
    """
    sl = drive.window(t0, t1)
    _support_check(drive, sl, edge_tol)
    t = drive.times[sl]
    f = drive.values[sl]
    g = _cumulative(t, f * np.exp(1j * drive.omega * t))
    return float(-simpson(f * np.imag(g * np.exp(-1j * drive.omega * t)), x=t))


def drive_displacement(drive, t0=None, t1=None):
    """Closed-form evolution parameters ``(z, phi)`` for the window."""
    _, z = coherent_amplitude(drive, t0, t1)
    return Displacement(z[-1], timeordering_phase(drive, t0, t1))


def closed_form_state(psi0, drive, t0=None, t1=None):
    """``exp(i phi) D(z) psi0``: the exact solution of the driven mode."""
    disp = drive_displacement(drive, t0, t1)
    D = displacement_matrix(disp.z, psi0.dim)
    return FockVector(np.exp(1j * disp.phase) * (D @ psi0.amps))


def propagate_driven(psi0, drive, t0=None, t1=None, norm_tol=NORM_TOL,
                     leak_tol=TRUNCATION_TOL, return_mean_a=False):
    """Integrate ``i d|t>/dt = H_I(t)|t>`` with fixed-step RK4 on the drive samples.

    No renormalisation is applied; a norm drift above ``norm_tol`` raises
    :class:`StepTooLarge`. If ``return_mean_a`` is set, also returns
    ``(times, <a>(t))`` along the trajectory.
    """
    if abs(psi0.norm() - 1.0) > norm_tol:
        raise ValueError("initial state must be normalised")
    sl = drive.window(t0, t1)
    t = drive.times[sl]
    f = drive.values[sl]
    h = np.diff(t).max()
    fmax = np.abs(f).max()
    w = abs(drive.omega)
    if w > 0 and h > 2 * np.pi / w / 50:
        raise StepTooLarge(f"step {h:.3g} does not resolve the mode period 2pi/w")
    if h * fmax * 2 * np.sqrt(psi0.dim) > 2.0:
        raise StepTooLarge(
            f"step {h:.3g} exceeds the RK4 stability bound for |f| <= {fmax:.3g} "
            f"at dim {psi0.dim}"
        )
    f_mid = drive.midpoint_values(sl)
    psi, mean_a = kernels.rk4_driven(psi0.amps, t, f, f_mid, float(drive.omega))
    out = FockVector(psi)
    drift = abs(out.norm() - 1.0)
    if drift > norm_tol:
        raise StepTooLarge(f"norm drifted by {drift:.2e}; reduce the sample spacing")
    top = max(1, psi0.dim // 10)
    leak = float(np.sum(np.abs(psi[-top:]) ** 2))
    if leak > leak_tol:
        raise TruncationTooSmall(
            f"population {leak:.2e} in the top {top} basis states; increase dim"
        )
    if return_mean_a:
        return out, (t, mean_a)
    return out
