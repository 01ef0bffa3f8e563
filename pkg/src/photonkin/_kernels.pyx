# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops. Pure-Python twins live in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos

cnp.import_array()


cdef inline void _rhs(const double complex[:] psi, double complex[:] out,
                      const double[:] sq, double f, double complex eminus,
                      Py_ssize_t dim) noexcept nogil:
    # d psi/dt = i f (e^{-iwt} sqrt(n+1) psi_{n+1} + e^{iwt} sqrt(n) psi_{n-1})
    cdef Py_ssize_t n
    cdef double complex eplus = eminus.conjugate()
    cdef double complex acc
    for n in range(dim):
        acc = 0
        if n + 1 < dim:
            acc = acc + eminus * sq[n + 1] * psi[n + 1]
        if n > 0:
            acc = acc + eplus * sq[n] * psi[n - 1]
        out[n] = 1j * f * acc


def rk4_driven(psi0, times, f, f_mid, double omega):
    """Fixed-step RK4 for the driven single mode on the sample grid.

    Returns ``(psi, mean_a)`` where ``mean_a[j]`` is <a> at ``times[j]``.
    """
    cdef double complex[:] psi = np.array(psi0, dtype=np.complex128)
    cdef const double[:] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[:] fm = np.ascontiguousarray(f_mid, dtype=np.float64)
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t nt = t.shape[0]
    cdef double[:] sq = np.sqrt(np.arange(dim, dtype=np.float64))
    cdef double complex[:] k1 = np.empty(dim, np.complex128)
    cdef double complex[:] k2 = np.empty(dim, np.complex128)
    cdef double complex[:] k3 = np.empty(dim, np.complex128)
    cdef double complex[:] k4 = np.empty(dim, np.complex128)
    cdef double complex[:] tmp = np.empty(dim, np.complex128)
    mean_a_arr = np.empty(nt, np.complex128)
    cdef double complex[:] mean_a = mean_a_arr
    cdef Py_ssize_t j, n
    cdef double h, tm
    cdef double complex e0, em, e1, acc

    with nogil:
        acc = 0
        for n in range(1, dim):
            acc = acc + sq[n] * psi[n - 1].conjugate() * psi[n]
        mean_a[0] = acc
        for j in range(nt - 1):
            h = t[j + 1] - t[j]
            tm = t[j] + 0.5 * h
            e0 = cos(omega * t[j]) - 1j * sin(omega * t[j])
            em = cos(omega * tm) - 1j * sin(omega * tm)
            e1 = cos(omega * t[j + 1]) - 1j * sin(omega * t[j + 1])
            _rhs(psi, k1, sq, fv[j], e0, dim)
            for n in range(dim):
                tmp[n] = psi[n] + 0.5 * h * k1[n]
            _rhs(tmp, k2, sq, fm[j], em, dim)
            for n in range(dim):
                tmp[n] = psi[n] + 0.5 * h * k2[n]
            _rhs(tmp, k3, sq, fm[j], em, dim)
            for n in range(dim):
                tmp[n] = psi[n] + h * k3[n]
            _rhs(tmp, k4, sq, fv[j + 1], e1, dim)
            acc = 0
            for n in range(dim):
                psi[n] = psi[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])
                if n > 0:
                    acc = acc + sq[n] * psi[n - 1].conjugate() * psi[n]
            mean_a[j + 1] = acc
    return np.asarray(psi), mean_a_arr


def spin1_ordered_product(points):
    """Midpoint-rule ordered product of spin-1 Wu-Yang step exponentials.

    Each step exponential exp(i A_k(p_mid) dp_k) is the real rotation
    exp(-[c]_x) with c = p_mid x dp / |p_mid|^2. Later steps multiply on the
    right. Returns ``(H, max_step)`` with ``max_step = max |c|``.
    """
    cdef const double[:, :] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n_seg = p.shape[0] - 1
    H_arr = np.eye(3)
    cdef double[:, :] H = H_arr
    cdef double U[3][3]
    cdef double R[3][3]
    cdef double m[3]
    cdef double d[3]
    cdef double c[3]
    cdef double K[3][3]
    cdef double K2[3][3]
    cdef double r2, th, s, q, max_step = 0.0
    cdef Py_ssize_t i, a, b, g

    with nogil:
        for i in range(n_seg):
            for a in range(3):
                m[a] = 0.5 * (p[i, a] + p[i + 1, a])
                d[a] = p[i + 1, a] - p[i, a]
            r2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2]
            c[0] = (m[1] * d[2] - m[2] * d[1]) / r2
            c[1] = (m[2] * d[0] - m[0] * d[2]) / r2
            c[2] = (m[0] * d[1] - m[1] * d[0]) / r2
            th = sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2])
            if th > max_step:
                max_step = th
            # exp(-K) = I - s K + q K^2, K = [c]_x
            if th < 1e-4:
                s = 1.0 - th * th / 6.0
                q = 0.5 - th * th / 24.0
            else:
                s = sin(th) / th
                q = (1.0 - cos(th)) / (th * th)
            K[0][0] = 0.0; K[0][1] = -c[2]; K[0][2] = c[1]
            K[1][0] = c[2]; K[1][1] = 0.0; K[1][2] = -c[0]
            K[2][0] = -c[1]; K[2][1] = c[0]; K[2][2] = 0.0
            for a in range(3):
                for b in range(3):
                    K2[a][b] = 0.0
                    for g in range(3):
                        K2[a][b] += K[a][g] * K[g][b]
            for a in range(3):
                for b in range(3):
                    U[a][b] = (1.0 if a == b else 0.0) - s * K[a][b] + q * K2[a][b]
            for a in range(3):
                for b in range(3):
                    R[a][b] = 0.0
                    for g in range(3):
                        R[a][b] += H[a, g] * U[g][b]
            for a in range(3):
                for b in range(3):
                    H[a, b] = R[a][b]
    return H_arr, max_step
