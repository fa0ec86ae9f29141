# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fixed-step RK4 for d psi/dt = -i omega(t) K psi, one BLAS mat-vec per stage."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()


cdef inline void _matvec(double complex[:, ::1] K, double complex* x, double complex* y, int n) noexcept nogil:
    # K is row-major, so BLAS sees K^T and "T" gives K @ x
    cdef char trans = b'T'
    cdef int inc = 1
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    zgemv(&trans, &n, &n, &one, &K[0, 0], &n, x, &inc, &zero, y, &inc)


def rk4_evolve(double complex[:, ::1] K, psi0, double[::1] h, double[::1] w0,
               double[::1] wm, double[::1] w1, long[::1] record):
    cdef int n = K.shape[0]
    cdef Py_ssize_t steps = h.shape[0]
    cdef Py_ssize_t n_rec = record.shape[0]
    cdef Py_ssize_t step, i, r = 0
    cdef double norm, drift, max_drift = 0.0
    cdef double complex hc, c1, c2, c3, c4

    states_arr = np.empty((n_rec, n), dtype=np.complex128)
    cdef double complex[:, ::1] states = states_arr
    psi_arr = np.array(psi0, dtype=np.complex128, copy=True)
    cdef double complex[::1] psi = psi_arr
    cdef double complex[::1] tmp = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k1 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(n, dtype=np.complex128)

    with nogil:
        while r < n_rec and record[r] == 0:
            states[r, :] = psi
            r += 1
        for step in range(steps):
            c1 = -1j * w0[step]
            c2 = -1j * wm[step]
            c4 = -1j * w1[step]
            hc = h[step]
            _matvec(K, &psi[0], &k1[0], n)
            for i in range(n):
                k1[i] = c1 * k1[i]
                tmp[i] = psi[i] + 0.5 * hc * k1[i]
            _matvec(K, &tmp[0], &k2[0], n)
            for i in range(n):
                k2[i] = c2 * k2[i]
                tmp[i] = psi[i] + 0.5 * hc * k2[i]
            _matvec(K, &tmp[0], &k3[0], n)
            for i in range(n):
                k3[i] = c2 * k3[i]
                tmp[i] = psi[i] + hc * k3[i]
            _matvec(K, &tmp[0], &k4[0], n)
            norm = 0.0
            for i in range(n):
                psi[i] = psi[i] + hc / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + c4 * k4[i])
                norm += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            norm = sqrt(norm)
            drift = fabs(norm - 1.0)
            if drift > max_drift:
                max_drift = drift
            for i in range(n):
                psi[i] = psi[i] / norm
            while r < n_rec and record[r] == step + 1:
                states[r, :] = psi
                r += 1
    return states_arr, max_drift
