# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled eigensolver kernel: Householder tridiagonalization + implicit-shift QL.

This is the hot inner loop of the whole package.  ``szlab._eigen_py`` holds a
pure-Python twin of the same algorithm; ``szlab.backend`` picks one at import
time.  Both return the raw (unsorted) eigenvalues and accumulated orthogonal
transformation of a real symmetric matrix.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport copysign, fabs, hypot, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF MAX_QL_SWEEPS = 64


class ConvergenceFailure(RuntimeError):
    """QL iteration failed to deflate an off-diagonal element."""


def eigh_symmetric(a):
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Parameters
    ----------
    a : (n, n) float64 array
        Symmetric input; only its values are read, the array is not modified.

    Returns
    -------
    d : (n,) float64 array
        Eigenvalues, unsorted.
    z : (n, n) float64 array
        Orthogonal matrix whose column ``k`` is the eigenvector for ``d[k]``.
    """
    A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("expected a square 2-d array")
    d_arr = np.zeros(n, dtype=np.float64)
    e_arr = np.zeros(n, dtype=np.float64)
    h_arr = np.zeros(n, dtype=np.float64)
    z_arr = np.eye(n, dtype=np.float64)
    if n == 1:
        d_arr[0] = A[0, 0]
        return d_arr, z_arr

    cdef double[:, ::1] a_v = A
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[::1] hv = h_arr
    cdef double[:, ::1] z = z_arr

    _tridiagonalize(a_v, d, e, hv, n)
    _accumulate(a_v, hv, z, n)
    cdef int status = _ql_implicit(d, e, z, n)
    if status != 0:
        raise ConvergenceFailure(
            "QL sweep limit (%d) exceeded at index %d" % (MAX_QL_SWEEPS, status - 1)
        )
    return d_arr, z_arr


cdef void _tridiagonalize(double[:, ::1] a, double[::1] d, double[::1] e,
                          double[::1] hv, Py_ssize_t n) noexcept:
    # Householder reduction; the reflector vector v of step k is left in
    # column k below the diagonal, its half square norm in hv[k].
    cdef Py_ssize_t k, i, j
    cdef double scale, unorm2, unorm, f, alpha, h, s, kcoef
    cdef double[::1] p = np.zeros(n, dtype=np.float64)
    for k in range(n - 2):
        scale = 0.0
        for i in range(k + 1, n):
            scale += fabs(a[i, k])
        if scale == 0.0:
            e[k] = 0.0
            hv[k] = 0.0
            continue
        unorm2 = 0.0
        for i in range(k + 1, n):
            a[i, k] /= scale
            unorm2 += a[i, k] * a[i, k]
        unorm = sqrt(unorm2)
        f = a[k + 1, k]
        alpha = -copysign(unorm, f)
        e[k] = scale * alpha
        a[k + 1, k] = f - alpha
        h = unorm2 - f * alpha
        hv[k] = h
        # p = B v / h over the trailing block, then the rank-2 update.
        kcoef = 0.0
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * a[j, k]
            p[i] = s / h
            kcoef += p[i] * a[i, k]
        kcoef /= 2.0 * h
        for i in range(k + 1, n):
            p[i] -= kcoef * a[i, k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i, j] -= p[i] * a[j, k] + a[i, k] * p[j]
    e[n - 2] = a[n - 1, n - 2]
    for i in range(n):
        d[i] = a[i, i]


cdef void _accumulate(double[:, ::1] a, double[::1] hv, double[:, ::1] z,
                      Py_ssize_t n) noexcept:
    # Build the accumulated orthogonal factor by applying the reflectors in
    # reverse; columns <= k are still unit vectors when step k is applied.
    cdef Py_ssize_t k, i, j
    cdef double h, s
    for k in range(n - 3, -1, -1):
        h = hv[k]
        if h == 0.0:
            continue
        for j in range(k + 1, n):
            s = 0.0
            for i in range(k + 1, n):
                s += a[i, k] * z[i, j]
            s /= h
            for i in range(k + 1, n):
                z[i, j] -= s * a[i, k]


cdef int _ql_implicit(double[::1] d, double[::1] e, double[:, ::1] z,
                      Py_ssize_t n) noexcept:
    # Implicit-shift QL on the tridiagonal (d, e); plane rotations are
    # applied to the columns of z as they are generated.
    cdef Py_ssize_t l, m, i, k
    cdef int sweeps
    cdef double dd, g, r, s, c, p, f, b, f2
    cdef double eps = 2.220446049250313e-16
    e[n - 1] = 0.0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_QL_SWEEPS:
                return <int> l + 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f2 = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f2
                    z[k, i] = c * z[k, i] - s * f2
                i -= 1
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
                continue
            # r == 0 restart: retry the same l without committing the sweep.
            continue
    return 0
