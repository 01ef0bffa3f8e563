"""Momentum-space geometry of a massless spinning particle.

The origin of momentum space carries a point monopole ``B(p) = p / |p|^3``.
Closed momentum loops pick up ``lambda * Omega`` either from composing
translations (two-cocycles) or from the path-ordered Wu-Yang holonomy, which
for spin 1 equals ``exp(i Sigma Omega)`` with ``Sigma = p_hat . S``.

Sign conventions: solid angles are positive for loops running
counterclockwise when seen from outside the sphere. The ordered product puts
the first segment leftmost, ``H = U_0 U_1 ... U_{N-1}``, which is the ordering
under which the product reproduces ``exp(+i Sigma Omega)``.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import kernels
from .errors import (
    DegeneratePath,
    NonConstantEnergy,
    PathNotClosed,
    SimplexHitsSingularity,
    SingularMomentum,
    StepTooLarge,
)

DELTA_SING = 1e-9
CLOSE_TOL = 1e-9
ENERGY_TOL = 1e-9
COCYCLE_TOL = 1e-12
MAX_STEP = 0.1

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_j, _i, _k] = -1.0

# (S_a)_{kl} = -i eps_{akl}
SPIN1 = -1j * LEVI_CIVITA


def _point(p, scale=1.0):
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (3,):
        raise ValueError("momentum must be a 3-vector")
    if np.linalg.norm(p) < DELTA_SING * scale:
        raise SingularMomentum("momentum at the monopole singularity |p| = 0")
    return p


@dataclass(frozen=True)
class Helicity:
    value: float

    def __post_init__(self):
        twice = 2 * self.value
        if abs(twice - round(twice)) > 1e-12:
            raise ValueError(f"helicity must be a half-integer, got {self.value}")

    def __float__(self):
        return float(self.value)


class MomentumPath:
    """Ordered momentum samples ``p(sigma)``; closed when first == last."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 1:
            raise ValueError("path needs an (N, 3) array of momenta")
        self.points = pts
        self.scale = float(np.max(np.linalg.norm(pts, axis=1)))
        if np.min(np.linalg.norm(pts, axis=1)) < DELTA_SING * max(self.scale, 1e-300):
            raise SingularMomentum("path passes through |p| = 0")
        if len(pts) > 1:
            u = pts / np.linalg.norm(pts, axis=1)[:, None]
            if np.any(np.sum(u[1:] * u[:-1], axis=1) <= 0.0):
                raise ValueError("consecutive points must subtend less than pi/2")

    def __len__(self):
        return len(self.points)

    @property
    def n_segments(self):
        return len(self.points) - 1

    @property
    def closed(self):
        return bool(np.linalg.norm(self.points[0] - self.points[-1]) <= CLOSE_TOL * self.scale)

    @property
    def base_point(self):
        return self.points[0]

    def reversed(self):
        return MomentumPath(self.points[::-1].copy())

    def rotated(self, R):
        return MomentumPath(self.points @ np.asarray(R).T)

    def scaled(self, c):
        return MomentumPath(self.points * c)

    def __add__(self, other):
        """Concatenate; ``other`` must start where ``self`` ends."""
        if np.linalg.norm(self.points[-1] - other.points[0]) > CLOSE_TOL * self.scale:
            raise ValueError("paths do not join")
        return MomentumPath(np.vstack([self.points, other.points[1:]]))


@dataclass
class HolonomyMatrix:
    entries: np.ndarray
    base_point: np.ndarray
    max_step: float = 0.0

    @property
    def dim(self):
        return self.entries.shape[0]

    def eigenphases(self):
        """Sorted principal eigenphases in (-pi, pi]."""
        ph = np.angle(np.linalg.eigvals(self.entries))
        ph = np.where(ph <= -np.pi, ph + 2 * np.pi, ph)
        return np.sort(ph)

    def unitarity_error(self):
        U = self.entries
        return float(np.abs(U.conj().T @ U - np.eye(self.dim)).max())


# -- paths ------------------------------------------------------------------

def geodesic_arc(a, b, n, radius=None):
    """``n`` equal-angle segments of the great circle from ``a`` to ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.linalg.norm(a) if radius is None else radius
    ua, ub = a / np.linalg.norm(a), b / np.linalg.norm(b)
    th = np.arctan2(np.linalg.norm(np.cross(ua, ub)), ua @ ub)
    s = np.linspace(0.0, 1.0, n + 1)[:, None]
    pts = (np.sin((1 - s) * th) * ua + np.sin(s * th) * ub) / np.sin(th)
    return r * pts


def octant_loop(n_per_edge, radius=1.0):
    """+x -> +y -> +z -> +x along great circles (solid angle pi/2)."""
    X, Y, Z = np.eye(3) * radius
    pts = np.vstack([
        geodesic_arc(X, Y, n_per_edge)[:-1],
        geodesic_arc(Y, Z, n_per_edge)[:-1],
        geodesic_arc(Z, X, n_per_edge),
    ])
    pts[-1] = pts[0]
    return MomentumPath(pts)


def latitude_loop(theta, n, radius=1.0, phi0=0.0):
    """Circle of constant polar angle, counterclockwise about +z."""
    phi = phi0 + np.linspace(0.0, 2 * np.pi, n + 1)
    pts = radius * np.stack([np.sin(theta) * np.cos(phi),
                             np.sin(theta) * np.sin(phi),
                             np.full_like(phi, np.cos(theta))], axis=1)
    pts[-1] = pts[0]
    return MomentumPath(pts)


def great_circle(n, radius=1.0):
    return latitude_loop(np.pi / 2, n, radius)


def meridian(phi, n, downward=True, radius=1.0):
    th = np.linspace(0.0, np.pi, n + 1)
    if not downward:
        th = th[::-1]
    return radius * np.stack([np.sin(th) * np.cos(phi), np.sin(th) * np.sin(phi), np.cos(th)], axis=1)


def lune_loop(phi_a, phi_b, n_per_meridian, radius=1.0):
    """North pole -> south pole along ``phi_a``, back up along ``phi_b``."""
    down = meridian(phi_a, n_per_meridian, True, radius)
    up = meridian(phi_b, n_per_meridian, False, radius)
    pts = np.vstack([down, up[1:]])
    pts[-1] = pts[0]
    return MomentumPath(pts)


def full_sphere_sweep(n_per_meridian, n_lunes=4, radius=1.0):
    """Lunes based at the north pole whose solid angles add to 4 pi."""
    phis = np.linspace(0.0, 2 * np.pi, n_lunes + 1)
    path = lune_loop(phis[0], phis[1], n_per_meridian, radius)
    for k in range(1, n_lunes):
        path = path + lune_loop(phis[k], phis[k + 1], n_per_meridian, radius)
    return path


# -- monopole ---------------------------------------------------------------

def monopole_field(p):
    """``B(p) = p / |p|^3``: unit-strength point monopole at the origin."""
    p = _point(p)
    return p / np.linalg.norm(p) ** 3


def _field(P):
    r = np.linalg.norm(P, axis=-1)
    return P / r[..., None] ** 3


def _triangle_origin_distance(p0, p1, p2):
    """Distance from the origin to the closed triangle ``(p0, p1, p2)``."""
    ab, ac = p1 - p0, p2 - p0
    n = np.cross(ab, ac)
    nn = n @ n
    if nn > 0:
        # barycentric coordinates of the origin's projection
        q = -p0
        v = np.cross(q, ac) @ n / nn
        w = np.cross(ab, q) @ n / nn
        if v >= 0 and w >= 0 and v + w <= 1:
            return abs(p0 @ n) / np.sqrt(nn)
    best = np.inf
    for a, b in ((p0, p1), (p1, p2), (p2, p0)):
        d = b - a
        dd = d @ d
        t = 0.0 if dd == 0 else np.clip(-(a @ d) / dd, 0.0, 1.0)
        best = min(best, np.linalg.norm(a + t * d))
    return best


_GL_CACHE = {}


def _gauss(n):
    if n not in _GL_CACHE:
        x, w = leggauss(n)
        _GL_CACHE[n] = ((x + 1) / 2, w / 2)
    return _GL_CACHE[n]


def _triangle_flux(P0, A, Bv, order):
    """Flux of the monopole through triangles ``(P0, P0+A, P0+A+Bv)``, oriented by ``A x Bv``.

    Parametrised as ``P0 + s (A + t Bv)`` on the unit square (Jacobian
    ``s (A x Bv)``); tensor Gauss-Legendre of the given order.
    """
    x, w = _gauss(order)
    s = x[:, None]
    t = x[None, :]
    W = w[:, None] * w[None, :]
    X = (P0[:, None, None, :] + s[None, :, :, None] * (A[:, None, None, :]
         + t[None, :, :, None] * Bv[:, None, None, :]))
    normal = np.cross(A, Bv)
    integrand = np.einsum("nijk,nk->nij", _field(X), normal) * s[None]
    return np.einsum("nij,ij->n", integrand, W)


def _adaptive_triangle_flux(P0, A, Bv, tol=COCYCLE_TOL, start=8, max_order=256):
    order = start
    prev = _triangle_flux(P0, A, Bv, order)
    while order < max_order:
        order *= 2
        cur = _triangle_flux(P0, A, Bv, order)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
    return prev


def two_cocycle(a, b, p, lam=1.0, tol=COCYCLE_TOL):
    """Phase ``gamma[a, b; p]`` for translating by ``a`` then ``b`` from ``p``.

    Equals ``lambda`` times the monopole flux through the simplex with
    vertices ``p, p + a, p + a + b`` (orientation ``a x b``). Quadrature
    orders are doubled until successive estimates agree to ``tol``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = _point(p)
    scale = max(np.linalg.norm(p), np.linalg.norm(p + a), np.linalg.norm(p + a + b))
    if _triangle_origin_distance(p, p + a, p + a + b) <= DELTA_SING * scale:
        raise SimplexHitsSingularity("translation simplex passes through the origin")
    flux = _adaptive_triangle_flux(p[None], a[None], b[None], tol)
    return float(lam) * float(flux[0])


def cocycle_residual(a, b, c, p, lam=1.0):
    """Left side of the two-cocycle condition; vanishes for a closed field."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    return (two_cocycle(a, b, p, lam) + two_cocycle(a + b, c, p, lam)
            - two_cocycle(b, c, np.asarray(p) + a, lam) - two_cocycle(a, b + c, p, lam))


def _require_closed(path):
    if not path.closed:
        raise PathNotClosed("path does not return to its base point")


def _fan_apex(unit_pts):
    """Unit direction used as the apex of the triangle fan over a loop."""
    c = unit_pts[:-1].mean(axis=0)
    if np.linalg.norm(c) > 1e-6:
        return c / np.linalg.norm(c)
    area = np.cross(unit_pts[:-1], unit_pts[1:]).sum(axis=0)
    if np.linalg.norm(area) > 1e-12:
        return area / np.linalg.norm(area)
    return unit_pts[0]


def loop_phase_from_cocycles(path, lam=1.0, tol=COCYCLE_TOL):
    """Total cocycle phase of the translations carrying ``p`` around a closed loop.

    The loop is entered from a fan apex ``c`` on the same energy shell; the
    composed translations ``c -> p_i -> p_{i+1}`` contribute
    ``gamma[p_i - c, p_{i+1} - p_i; c]`` each. Returns the unreduced phase
    (``lambda * Omega``; use :func:`reduce_phase` for mod 2 pi).
    """
    _require_closed(path)
    r = np.linalg.norm(path.points, axis=1)
    if np.max(np.abs(r - r[0])) > ENERGY_TOL * r[0]:
        raise NonConstantEnergy("loop leaves the constant-energy sphere")
    pts = path.points
    if len(pts) < 3:
        return 0.0
    apex = r[0] * _fan_apex(pts / r[:, None])
    P0 = np.broadcast_to(apex, (len(pts) - 1, 3))
    A = pts[:-1] - apex
    Bv = pts[1:] - pts[:-1]
    keep = np.linalg.norm(np.cross(A, Bv), axis=1) > 0
    for i in np.flatnonzero(keep):
        if _triangle_origin_distance(apex, pts[i], pts[i + 1]) <= DELTA_SING * r[0]:
            raise SimplexHitsSingularity("fan triangle passes through the origin")
    flux = _adaptive_triangle_flux(np.ascontiguousarray(P0[keep]), A[keep], Bv[keep], tol / max(1, keep.sum()))
    return float(lam) * float(np.sum(flux))


def reduce_phase(phase):
    """Map to (-pi, pi]."""
    out = np.mod(phase + np.pi, 2 * np.pi) - np.pi
    return np.where(out <= -np.pi, out + 2 * np.pi, out)


def _angle(u, v):
    return np.arctan2(np.linalg.norm(np.cross(u, v), axis=-1), np.sum(u * v, axis=-1))


def solid_angle(path):
    """Signed solid angle of the loop's radial projection on the unit sphere.

    Sum of signed spherical excesses (L'Huilier) over the triangle fan from
    the centroid direction; counterclockwise seen from outside is positive.
    """
    _require_closed(path)
    pts = path.points
    u = pts / np.linalg.norm(pts, axis=1)[:, None]
    steps = _angle(u[:-1], u[1:])
    if np.any(steps == 0.0):
        raise DegeneratePath("consecutive points project onto the same direction")
    c = _fan_apex(u)
    v1, v2 = u[:-1], u[1:]
    a = _angle(v1, v2)
    b = _angle(c[None], v2)
    cc = _angle(c[None], v1)
    s = 0.5 * (a + b + cc)
    prod = np.tan(s / 2) * np.tan((s - a) / 2) * np.tan((s - b) / 2) * np.tan((s - cc) / 2)
    excess = 4 * np.arctan(np.sqrt(np.clip(prod, 0.0, None)))
    sign = np.sign(np.einsum("k,nk->n", c, np.cross(v1, v2)))
    return float(np.sum(sign * excess))


# -- Wu-Yang connection -----------------------------------------------------

def wu_yang_components(p):
    """``A^a_k(p) = eps_{alk} p_l / |p|^2`` as an array indexed ``[a, k]``."""
    p = _point(p)
    return np.einsum("alk,l->ak", LEVI_CIVITA, p) / (p @ p)


def wu_yang_connection(p):
    """Matrices ``A_k = A^a_k S_a``; returns shape (3, 3, 3) indexed ``[k, row, col]``."""
    return np.einsum("ak,aij->kij", wu_yang_components(p), SPIN1)


def helicity_operator(p):
    """``Sigma = p_hat . S``."""
    p = _point(p)
    return np.einsum("a,aij->ij", p / np.linalg.norm(p), SPIN1)


def field_strength(p):
    """Closed form ``F^a_{kl} = eps_{klm} p_m p_a / |p|^4`` indexed ``[a, k, l]``."""
    p = _point(p)
    return np.einsum("klm,m,a->akl", LEVI_CIVITA, p, p) / (p @ p) ** 2


def _central_diff(func, p, h):
    """``[k, ...]`` array of central differences of ``func`` along each axis."""
    out = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        out.append((func(p + e) - func(p - e)) / (2 * h))
    return np.array(out)


def curvature_check(p, h):
    """Max deviation of the finite-difference Wu-Yang field strength from its closed form.

    ``F^a_{kl} = d_k A^a_l - d_l A^a_k - eps_{abc} A^b_k A^c_l`` with the
    derivatives taken by central differences of step ``h``; the residual is
    ``O(h^2)``.
    """
    p = _point(p)
    if h <= 0 or h >= 0.5 * np.linalg.norm(p):
        raise ValueError("step must satisfy 0 < h << |p|")
    dA = _central_diff(wu_yang_components, p, h)  # [k, a, l]
    A = wu_yang_components(p)
    lin = np.einsum("kal->akl", dA) - np.einsum("lak->akl", dA)
    quad = np.einsum("abc,bk,cl->akl", LEVI_CIVITA, A, A)
    return float(np.abs(lin - quad - field_strength(p)).max())


def covariant_constancy_residual(p, h):
    """Max entry of ``d_k Sigma + i [A_k, Sigma]`` with central-difference derivatives."""
    p = _point(p)
    if h <= 0 or h >= 0.5 * np.linalg.norm(p):
        raise ValueError("step must satisfy 0 < h << |p|")
    dS = _central_diff(helicity_operator, p, h)
    A = wu_yang_connection(p)
    S = helicity_operator(p)
    comm = np.einsum("kij,jl->kil", A, S) - np.einsum("ij,kjl->kil", S, A)
    return float(np.abs(dS + 1j * comm).max())


# -- holonomy ---------------------------------------------------------------

def holonomy(path, max_step=MAX_STEP):
    """Spin-1 path-ordered exponential of ``i A_k dp_k`` around a closed loop.

    Each segment contributes ``exp(i A_k(p_mid) dp_k)`` at its midpoint; for
    spin 1 this is the real rotation ``exp(-[c]_x)`` with
    ``c = p_mid x dp / |p_mid|^2``. The first segment stands leftmost.
    """
    _require_closed(path)
    if path.n_segments == 0:
        return HolonomyMatrix(np.eye(3, dtype=np.complex128), path.base_point.copy())
    H, step = kernels.spin1_ordered_product(path.points)
    if step >= max_step:
        raise StepTooLarge(f"segment exponent norm {step:.3g} exceeds {max_step}; refine the path")
    return HolonomyMatrix(np.asarray(H, dtype=np.complex128), path.base_point.copy(), step)


def expected_holonomy(p0, omega):
    """``exp(i Sigma(p0) Omega)`` via the spectral decomposition of ``Sigma``."""
    S = helicity_operator(p0)
    w, V = np.linalg.eigh(S)
    return (V * np.exp(1j * w * omega)) @ V.conj().T


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def quantization_scan(omega_total, lambda_trial, tol=1e-9):
    """True iff ``exp(i lambda * omega_total) = 1`` within ``tol``."""
    if lambda_trial <= 0:
        raise ValueError("trial helicity must be positive")
    return bool(abs(np.exp(1j * lambda_trial * omega_total) - 1.0) < tol)
