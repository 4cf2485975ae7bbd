# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: pivoted elimination and one-sided Jacobi."""
import numpy as np
from libc.math cimport fabs, sqrt

NAME = "cython"


def gecp_inplace(double[:, ::1] A, Py_ssize_t[::1] rows, Py_ssize_t[::1] cols,
                 double abs_tol, Py_ssize_t max_rank):
    """Gaussian elimination with complete pivoting, in place.

    Stops when the largest remaining entry is ``<= abs_tol`` or after
    ``max_rank`` pivots.  Returns the number of pivots taken.
    """
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t kmax = min(min(m, n), max_rank)
    cdef Py_ssize_t i, j, l, p, q, rank = 0
    cdef double amax, v, piv, lj, tmp
    cdef Py_ssize_t itmp
    for i in range(kmax):
        amax = 0.0
        p = i
        q = i
        for j in range(i, m):
            for l in range(i, n):
                v = fabs(A[j, l])
                if v > amax:
                    amax = v
                    p = j
                    q = l
        if amax <= abs_tol or amax == 0.0:
            break
        if p != i:
            for l in range(n):
                tmp = A[i, l]; A[i, l] = A[p, l]; A[p, l] = tmp
            itmp = rows[i]; rows[i] = rows[p]; rows[p] = itmp
        if q != i:
            for j in range(m):
                tmp = A[j, i]; A[j, i] = A[j, q]; A[j, q] = tmp
            itmp = cols[i]; cols[i] = cols[q]; cols[q] = itmp
        piv = A[i, i]
        for j in range(i + 1, m):
            lj = A[j, i] / piv
            A[j, i] = lj
            if lj != 0.0:
                for l in range(i + 1, n):
                    A[j, l] -= lj * A[i, l]
        rank += 1
    return rank


def jacobi_rows_inplace(double[:, ::1] X, double tol, int max_sweeps):
    """One-sided Jacobi orthogonalization of the rows of ``X``, in place.

    Uses cyclic-by-rows ordering.  Returns the number of sweeps performed,
    or -1 if ``max_sweeps`` was exhausted without convergence.
    """
    cdef Py_ssize_t r = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t p, q, l
    cdef int sweep, rotated
    cdef double a, b, g, zeta, t, cs, sn, xp, xq
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(r - 1):
            for q in range(p + 1, r):
                a = 0.0
                b = 0.0
                g = 0.0
                for l in range(n):
                    xp = X[p, l]
                    xq = X[q, l]
                    a += xp * xp
                    b += xq * xq
                    g += xp * xq
                if g == 0.0 or fabs(g) <= tol * sqrt(a) * sqrt(b):
                    continue
                rotated += 1
                zeta = (b - a) / (2.0 * g)
                if fabs(zeta) > 1e150:
                    t = 0.5 / zeta
                elif zeta >= 0:
                    t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = cs * t
                for l in range(n):
                    xp = X[p, l]
                    xq = X[q, l]
                    X[p, l] = cs * xp - sn * xq
                    X[q, l] = sn * xp + cs * xq
        if rotated == 0:
            return sweep + 1
    return -1
