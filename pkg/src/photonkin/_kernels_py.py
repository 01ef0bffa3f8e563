"""Pure-Python/NumPy twins of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def _rhs(psi, sq, f, eminus):
    out = np.zeros_like(psi)
    out[:-1] += eminus * sq[1:] * psi[1:]
    out[1:] += np.conj(eminus) * sq[1:] * psi[:-1]
    return 1j * f * out


def _mean_a(psi, sq):
    return np.sum(sq[1:] * np.conj(psi[:-1]) * psi[1:])


def rk4_driven(psi0, times, f, f_mid, omega):
    psi = np.array(psi0, dtype=np.complex128)
    t = np.asarray(times, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    f_mid = np.asarray(f_mid, dtype=np.float64)
    sq = np.sqrt(np.arange(psi.size, dtype=np.float64))
    mean_a = np.empty(t.size, np.complex128)
    mean_a[0] = _mean_a(psi, sq)
    for j in range(t.size - 1):
        h = t[j + 1] - t[j]
        tm = t[j] + 0.5 * h
        e0 = np.exp(-1j * omega * t[j])
        em = np.exp(-1j * omega * tm)
        e1 = np.exp(-1j * omega * t[j + 1])
        k1 = _rhs(psi, sq, f[j], e0)
        k2 = _rhs(psi + 0.5 * h * k1, sq, f_mid[j], em)
        k3 = _rhs(psi + 0.5 * h * k2, sq, f_mid[j], em)
        k4 = _rhs(psi + h * k3, sq, f[j + 1], e1)
        psi = psi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mean_a[j + 1] = _mean_a(psi, sq)
    return psi, mean_a


def _cross_matrix(c):
    return np.array([[0.0, -c[2], c[1]], [c[2], 0.0, -c[0]], [-c[1], c[0], 0.0]])


def spin1_ordered_product(points):
    p = np.asarray(points, dtype=np.float64)
    mid = 0.5 * (p[1:] + p[:-1])
    d = p[1:] - p[:-1]
    c = np.cross(mid, d) / np.sum(mid * mid, axis=1)[:, None]
    th = np.linalg.norm(c, axis=1)
    small = th < 1e-4
    safe = np.where(small, 1.0, th)
    s = np.where(small, 1.0 - th**2 / 6.0, np.sin(safe) / safe)
    q = np.where(small, 0.5 - th**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    H = np.eye(3)
    for i in range(len(c)):
        K = _cross_matrix(c[i])
        H = H @ (np.eye(3) - s[i] * K + q[i] * (K @ K))
    max_step = float(th.max()) if th.size else 0.0
    return H, max_step
