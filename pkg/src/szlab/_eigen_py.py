"""Pure-Python twin of the compiled eigensolver kernel.

Same algorithm as ``szlab._kernels`` (Householder tridiagonalization followed
by implicit-shift QL), with the inner loops expressed as numpy vector
operations instead of compiled scalar loops.  Selected by ``szlab.backend``
when the extension is unavailable or ``SZLAB_BACKEND=python`` is set.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_MAX_QL_SWEEPS = 64
_EPS = np.finfo(np.float64).eps


class ConvergenceFailure(RuntimeError):
    """QL iteration failed to deflate an off-diagonal element."""


def eigh_symmetric(a):
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Returns the raw (unsorted) eigenvalues ``d`` and the orthogonal matrix
    ``z`` whose columns are the matching eigenvectors, exactly like the
    compiled kernel.
    """
    A = np.array(a, dtype=np.float64, order="C", copy=True)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("expected a square 2-d array")
    if n == 1:
        return A[0, :].copy(), np.eye(1)
    d, e, hv = _tridiagonalize(A, n)
    z = _accumulate(A, hv, n)
    _ql_implicit(d, e, z, n)
    return d, z


def _tridiagonalize(A, n):
    d = np.zeros(n)
    e = np.zeros(n)
    hv = np.zeros(n)
    for k in range(n - 2):
        u = A[k + 1:, k]
        scale = np.sum(np.abs(u))
        if scale == 0.0:
            continue
        u /= scale
        unorm2 = float(u @ u)
        unorm = np.sqrt(unorm2)
        f = u[0]
        alpha = -np.copysign(unorm, f)
        e[k] = scale * alpha
        u[0] = f - alpha
        h = unorm2 - f * alpha
        hv[k] = h
        B = A[k + 1:, k + 1:]
        p = B @ u / h
        kcoef = float(p @ u) / (2.0 * h)
        p -= kcoef * u
        B -= np.outer(p, u) + np.outer(u, p)
    e[n - 2] = A[n - 1, n - 2]
    d[:] = np.diagonal(A)
    return d, e, hv


def _accumulate(A, hv, n):
    z = np.eye(n)
    for k in range(n - 3, -1, -1):
        h = hv[k]
        if h == 0.0:
            continue
        v = A[k + 1:, k]
        block = z[k + 1:, k + 1:]
        block -= np.outer(v, (v @ block) / h)
    return z


def _ql_implicit(d, e, z, n):
    e[n - 1] = 0.0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > _MAX_QL_SWEEPS:
                raise ConvergenceFailure(
                    f"QL sweep limit ({_MAX_QL_SWEEPS}) exceeded at index {l}"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            restarted = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    restarted = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col_i = z[:, i].copy()
                col_j = z[:, i + 1].copy()
                z[:, i + 1] = s * col_i + c * col_j
                z[:, i] = c * col_i - s * col_j
            if restarted:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
