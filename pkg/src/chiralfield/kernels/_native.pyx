# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled determinant-path kernel.

Per-point N x N complex LU factorizations (partial pivoting) evaluate
the three determinant ratios and the bilinear off-diagonal form.
Matches kernels._fallback.nsoliton_points bit-for-bit in structure;
agreement is enforced by the test suite at 1e-12.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)


cdef double complex _lu_det(double complex* a, int* piv, int n) noexcept nogil:
    """In-place LU with partial pivoting; returns det (0 if singular)."""
    cdef int i, j, k, p
    cdef double best, mag
    cdef double complex tmp, det
    det = 1.0 + 0.0j
    for k in range(n):
        p = k
        best = cabs(a[k * n + k])
        for i in range(k + 1, n):
            mag = cabs(a[i * n + k])
            if mag > best:
                best = mag
                p = i
        piv[k] = p
        if p != k:
            det = -det
            for j in range(n):
                tmp = a[k * n + j]
                a[k * n + j] = a[p * n + j]
                a[p * n + j] = tmp
        if best == 0.0:
            return 0.0 + 0.0j
        det = det * a[k * n + k]
        for i in range(k + 1, n):
            a[i * n + k] = a[i * n + k] / a[k * n + k]
            for j in range(k + 1, n):
                a[i * n + j] = a[i * n + j] - a[i * n + k] * a[k * n + j]
    return det


cdef void _lu_solve(double complex* lu, int* piv, double complex* b, int n) noexcept nogil:
    """Solve LU x = P b in place (b holds x on exit)."""
    cdef int i, j
    cdef double complex tmp, acc
    for i in range(n):
        if piv[i] != i:
            tmp = b[i]
            b[i] = b[piv[i]]
            b[piv[i]] = tmp
    for i in range(n):
        acc = b[i]
        for j in range(i):
            acc = acc - lu[i * n + j] * b[j]
        b[i] = acc
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for j in range(i + 1, n):
            acc = acc - lu[i * n + j] * b[j]
        b[i] = acc / lu[i * n + i]


def nsoliton_points(mus_in, cs_in, L_in, Lt_in):
    """Dressed field at flat sample points; see the fallback docstring."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] mus = np.ascontiguousarray(mus_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cs = np.ascontiguousarray(cs_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] L = np.ascontiguousarray(L_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Lt = np.ascontiguousarray(Lt_in, dtype=np.float64)

    cdef int n = mus.shape[0]
    cdef Py_ssize_t npts = L.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=1] g11 = np.empty(npts, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g12 = np.empty(npts, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g22 = np.empty(npts, dtype=np.float64)

    cdef double pi_abs = 1.0
    cdef double complex mu_prod = 1.0 + 0.0j
    cdef int s, t
    for s in range(n):
        pi_abs *= cabs(mus[s])
        mu_prod = mu_prod * mus[s]
    cdef double sigma = 1.0 if creal(mu_prod) >= 0.0 else -1.0

    if n == 0:
        g11[:] = np.exp(L)
        g12[:] = 0.0
        g22[:] = np.exp(-L)
        return g11, g12, g22, 0.0

    cdef double complex* B = <double complex*> malloc(n * sizeof(double complex))
    cdef double* m = <double*> malloc(n * sizeof(double))
    cdef double complex* D = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* mat = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* m00 = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* m33 = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* u = <double complex*> malloc(n * sizeof(double complex))
    cdef double complex* v = <double complex*> malloc(n * sizeof(double complex))
    cdef int* piv = <int*> malloc(n * sizeof(int))
    if not (B and m and D and mat and m00 and m33 and u and v and piv):
        free(<void*> B)
        free(<void*> m)
        free(<void*> D)
        free(<void*> mat)
        free(<void*> m00)
        free(<void*> m33)
        free(<void*> u)
        free(<void*> v)
        free(<void*> piv)
        raise MemoryError()

    cdef double max_imag = 0.0
    cdef Py_ssize_t k
    cdef double ell, ltil, mag, half
    cdef double complex ep, em, mm, cc, denom, det_n, det_00, det_33, acc
    cdef double complex gg11, gg22, gg12

    with nogil:
        for k in range(npts):
            ell = L[k]
            ltil = Lt[k]
            for s in range(n):
                B[s] = (ell + mus[s] * ltil) / (mus[s] * mus[s] - 1.0)
            for s in range(n):
                m[s] = 0.0
                for t in range(n):
                    D[s * n + t] = ell + B[s] + B[t]
                    mag = creal(D[s * n + t])
                    if mag < 0.0:
                        mag = -mag
                    if mag > m[s]:
                        m[s] = mag
            for s in range(n):
                for t in range(n):
                    half = (m[s] + m[t]) / 2.0
                    ep = cexp(D[s * n + t] - half)
                    em = cexp(-D[s * n + t] - half)
                    mm = mus[s] * mus[t]
                    cc = cs[s] * cs[t]
                    denom = mm - 1.0
                    mat[s * n + t] = (cc * ep + em) / denom
                    m00[s * n + t] = (cc * ep + mm * em) / denom
                    m33[s * n + t] = (mm * cc * ep + em) / denom
                u[s] = cs[s] * cexp(B[s] - m[s] / 2.0) / mus[s]
                v[s] = cexp(-B[s] - m[s] / 2.0) / mus[s]

            det_00 = _lu_det(m00, piv, n)
            det_33 = _lu_det(m33, piv, n)
            det_n = _lu_det(mat, piv, n)
            _lu_solve(mat, piv, u, n)
            acc = 0.0 + 0.0j
            for s in range(n):
                acc = acc + v[s] * u[s]

            gg11 = cexp(ell) * det_00 / (pi_abs * det_n)
            gg22 = cexp(-ell) * det_33 / (pi_abs * det_n)
            gg12 = -sigma * pi_abs * acc

            g11[k] = creal(gg11)
            g12[k] = creal(gg12)
            g22[k] = creal(gg22)
            mag = cimag(gg11)
            if mag < 0.0:
                mag = -mag
            if mag > max_imag:
                max_imag = mag
            mag = cimag(gg12)
            if mag < 0.0:
                mag = -mag
            if mag > max_imag:
                max_imag = mag
            mag = cimag(gg22)
            if mag < 0.0:
                mag = -mag
            if mag > max_imag:
                max_imag = mag

    free(<void*> B)
    free(<void*> m)
    free(<void*> D)
    free(<void*> mat)
    free(<void*> m00)
    free(<void*> m33)
    free(<void*> u)
    free(<void*> v)
    free(<void*> piv)
    return g11, g12, g22, max_imag
