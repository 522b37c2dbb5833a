# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the witness inner optimization and coefficient-space distillation.

Signatures mirror :mod:`weylsimplex._pykernels`. Small Hermitian eigenproblems
go straight to LAPACK ``zheev`` through scipy's Cython bindings.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, M_PI
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MAXD = 16


cdef inline void _phase_table(int d, double complex* ph) noexcept nogil:
    cdef int i
    for i in range(d):
        ph[i] = cos(2.0 * M_PI * i / d) + 1j * sin(2.0 * M_PI * i / d)


cdef void _build_m(int d, const double* kap, const double complex* phi,
                   const double complex* ph, double complex* a) noexcept nogil:
    # a is column-major d x d; a[i + j d] = sum kappa (W phi)_i conj((W phi)_j)
    cdef int k, l, i, j
    cdef double complex v[MAXD]
    cdef double kk
    for i in range(d * d):
        a[i] = 0
    for k in range(d):
        for l in range(d):
            kk = kap[k * d + l]
            if kk == 0.0:
                continue
            for i in range(d):
                v[i] = ph[(k * i) % d] * phi[(i + l) % d]
            for j in range(d):
                for i in range(j + 1):
                    a[i + j * d] += kk * v[i] * v[j].conjugate()


cdef void _build_dual(int d, const double* kap, const double complex* eta,
                      const double complex* ph, double complex* a) noexcept nogil:
    cdef int k, l, s, i, j, src
    cdef double complex u[MAXD]
    cdef double kk
    for i in range(d * d):
        a[i] = 0
    for k in range(d):
        for l in range(d):
            kk = kap[k * d + l]
            if kk == 0.0:
                continue
            for s in range(d):
                src = (s - l + d) % d
                u[s] = ph[(k * src) % d].conjugate() * eta[src]
            for j in range(d):
                for i in range(j + 1):
                    a[i + j * d] += kk * u[i] * u[j].conjugate()


cdef double _min_eig(int d, double complex* a, double complex* vec, bint want_vec,
                     double complex* work, int lwork, double* rwork) noexcept nogil:
    # upper triangle of column-major a holds the Hermitian matrix
    cdef char jobz = b'V' if want_vec else b'N'
    cdef char uplo = b'U'
    cdef int n = d, lda = d, info = 0, i
    cdef double w[MAXD]
    zheev(&jobz, &uplo, &n, a, &lda, w, work, &lwork, rwork, &info)
    if want_vec:
        for i in range(d):
            vec[i] = a[i]
    return w[0]


def mphi(const double[:, ::1] kappa, const double complex[::1] phi):
    cdef int d = kappa.shape[0]
    if d > MAXD:
        raise ValueError("dimension too large for compiled kernel")
    cdef double complex ph[MAXD]
    cdef double complex a[MAXD * MAXD]
    _phase_table(d, ph)
    _build_m(d, &kappa[0, 0], &phi[0], ph, a)
    out = np.empty((d, d), dtype=complex)
    cdef double complex[:, ::1] o = out
    cdef int i, j
    for j in range(d):
        for i in range(j + 1):
            o[i, j] = a[i + j * d]
            o[j, i] = a[i + j * d].conjugate()
    return out


def mphi_min_eig(const double[:, ::1] kappa, const double[::1] x):
    cdef int d = kappa.shape[0]
    cdef int i
    cdef double nrm = 0.0
    cdef double complex phi[MAXD]
    cdef double complex ph[MAXD]
    cdef double complex a[MAXD * MAXD]
    cdef double complex work[64 * MAXD]
    cdef double rwork[3 * MAXD]
    for i in range(d):
        phi[i] = x[i] + 1j * x[d + i]
        nrm += x[i] * x[i] + x[d + i] * x[d + i]
    if nrm == 0.0:
        return float("inf")
    nrm = sqrt(nrm)
    for i in range(d):
        phi[i] = phi[i] / nrm
    _phase_table(d, ph)
    _build_m(d, &kappa[0, 0], phi, ph, a)
    return _min_eig(d, a, NULL, False, work, 64 * MAXD, rwork)


def alternating_descent(const double[:, ::1] kappa, starts, double tol=1e-12, int max_iter=500):
    cdef const double complex[:, ::1] st = np.ascontiguousarray(starts, dtype=complex)
    cdef int S = st.shape[0]
    cdef int d = kappa.shape[0]
    if d > MAXD:
        raise ValueError("dimension too large for compiled kernel")
    values = np.empty(S)
    phis = np.empty((S, d), dtype=complex)
    etas = np.empty((S, d), dtype=complex)
    iters = np.empty(S, dtype=np.int64)
    cdef double[::1] vals = values
    cdef double complex[:, ::1] P = phis
    cdef double complex[:, ::1] E = etas
    cdef cnp.int64_t[::1] its = iters
    cdef double complex ph[MAXD]
    cdef double complex phi[MAXD]
    cdef double complex eta[MAXD]
    cdef double complex a[MAXD * MAXD]
    cdef double complex work[64 * MAXD]
    cdef double rwork[3 * MAXD]
    cdef int j, i, it
    cdef double nrm, lam, new
    _phase_table(d, ph)
    with nogil:
        for j in range(S):
            nrm = 0.0
            for i in range(d):
                nrm += st[j, i].real * st[j, i].real + st[j, i].imag * st[j, i].imag
            nrm = sqrt(nrm)
            for i in range(d):
                phi[i] = st[j, i] / nrm
            _build_m(d, &kappa[0, 0], phi, ph, a)
            lam = _min_eig(d, a, eta, True, work, 64 * MAXD, rwork)
            it = 0
            while it < max_iter:
                it += 1
                _build_dual(d, &kappa[0, 0], eta, ph, a)
                _min_eig(d, a, phi, True, work, 64 * MAXD, rwork)
                _build_m(d, &kappa[0, 0], phi, ph, a)
                new = _min_eig(d, a, eta, True, work, 64 * MAXD, rwork)
                if lam - new < tol:
                    if new < lam:
                        lam = new
                    break
                lam = new
            vals[j] = lam
            for i in range(d):
                P[j, i] = phi[i]
                E[j, i] = eta[i]
            its[j] = it
    return values, phis, etas, iters


def product_overlaps(const double complex[::1] eta, const double complex[::1] phi):
    cdef int d = eta.shape[0]
    cdef double complex ph[MAXD]
    cdef double complex acc
    cdef int k, l, r
    _phase_table(d, ph)
    out = np.empty((d, d))
    cdef double[:, ::1] o = out
    for k in range(d):
        for l in range(d):
            acc = 0
            for r in range(d):
                acc += eta[r].conjugate() * ph[(k * r) % d] * phi[(r + l) % d]
            o[k, l] = acc.real * acc.real + acc.imag * acc.imag
    return out


def convolve_phase(c):
    cdef const double[:, ::1] cv = np.ascontiguousarray(c, dtype=float)
    cdef int d = cv.shape[0]
    out = np.zeros((d, d))
    cdef double[:, ::1] o = out
    cdef int K, k, l
    for K in range(d):
        for l in range(d):
            for k in range(d):
                o[K, l] += cv[k, l] * cv[(K - k + d) % d, l]
    return out
