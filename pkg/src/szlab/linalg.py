"""Self-contained dense linear algebra used by every other module.

The eigensolver is Householder tridiagonalization followed by implicit-shift
QL (see :mod:`szlab.backend` for the compiled/pure-Python kernel pair).
Complex Hermitian input is reduced through the real doubling embedding
``[[X, -Y], [Y, X]]``, whose spectrum repeats each eigenvalue of ``X + iY``
twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import eigh_symmetric
from .errors import SelfAdjointnessError, SpectralDomainError

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def projection(self, threshold: float) -> np.ndarray:
        """Orthogonal projection onto eigenspaces with eigenvalue <= threshold."""
        cols = self.eigenvectors[:, self.eigenvalues <= threshold]
        return cols @ cols.conj().T


def self_adjointness_defect(a) -> float:
    """max |A - A*| entrywise, relative to maxabs(A); 0 for the zero matrix."""
    a = np.asarray(a)
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def require_self_adjoint(a, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    defect = np.abs(a - a.conj().T)
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(defect) > rtol * scale:
        worst = np.unravel_index(int(np.argmax(defect)), defect.shape)
        raise SelfAdjointnessError(
            f"matrix is not self-adjoint: max |A - A*| = {np.max(defect):.3e} "
            f"at {worst} exceeds {rtol:.1e} * maxabs(A) = {rtol * scale:.3e}",
            max_violation=float(np.max(defect)),
            where=worst,
        )
    return a


def _fix_signs(vectors: np.ndarray) -> None:
    # First significant component of each column made positive (real part for
    # complex columns) so repeated runs produce identical decompositions.
    mags = np.abs(vectors)
    tops = np.max(mags, axis=0)
    tops[tops == 0.0] = 1.0
    for k in range(vectors.shape[1]):
        idx = int(np.argmax(mags[:, k] > 1e-8 * tops[k]))
        lead = vectors[idx, k]
        if np.iscomplexobj(vectors):
            phase = lead / abs(lead) if abs(lead) > 0 else 1.0
            vectors[:, k] /= phase
        elif lead < 0:
            vectors[:, k] = -vectors[:, k]


def eig_self_adjoint(a, rtol: float = SYMMETRY_RTOL) -> SpectralDecomposition:
    """Full spectral decomposition of a self-adjoint matrix.

    Rejects matrices violating ``max|A - A*| <= rtol * maxabs(A)`` with a
    symmetry-violation report.  Real symmetric input runs on the kernel
    directly; complex Hermitian input goes through the 2N x 2N doubling
    embedding and the duplicated eigenpairs are merged back.
    """
    a = require_self_adjoint(a, rtol=rtol)
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag)) == 0.0:
            a = a.real
        else:
            return _eig_hermitian(a)
    sym = 0.5 * (a + a.T)
    d, z = eigh_symmetric(sym)
    order = np.argsort(d, kind="stable")
    w = d[order]
    v = np.ascontiguousarray(z[:, order])
    _fix_signs(v)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def _eig_hermitian(a: np.ndarray) -> SpectralDecomposition:
    n = a.shape[0]
    x = 0.5 * (a.real + a.real.T)
    y = 0.5 * (a.imag - a.imag.T)
    big = np.block([[x, -y], [y, x]])
    d, z = eigh_symmetric(big)
    order = np.argsort(d, kind="stable")
    w2 = d[order]
    v2 = z[:, order]

    scale = max(1.0, float(np.max(np.abs(w2))))
    w = np.empty(n)
    v = np.empty((n, n), dtype=complex)
    filled = 0
    start = 0
    while start < 2 * n:
        stop = start + 1
        while stop < 2 * n and w2[stop] - w2[stop - 1] <= 1e-9 * scale:
            stop += 1
        count = stop - start
        if count % 2:  # roundoff split a duplicated pair; absorb the neighbor
            stop = min(stop + 1, 2 * n)
            count = stop - start
        take = count // 2
        cand = v2[:n, start:stop] + 1j * v2[n:, start:stop]
        basis = _complex_orthonormal(cand, take)
        w[filled:filled + take] = np.mean(w2[start:stop])
        v[:, filled:filled + take] = basis
        filled += take
        start = stop
    if filled != n:
        raise RuntimeError("doubling embedding produced an odd eigenvalue pairing")
    _fix_signs(v)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def _complex_orthonormal(cand: np.ndarray, take: int) -> np.ndarray:
    # Modified Gram-Schmidt with column pivoting; cand spans the eigenspace
    # over C twice, so exactly `take` independent directions survive.
    cols = [cand[:, j].copy() for j in range(cand.shape[1])]
    out = []
    while len(out) < take and cols:
        norms = [np.linalg.norm(c) for c in cols]
        j = int(np.argmax(norms))
        if norms[j] < 1e-10:
            break
        q = cols.pop(j) / norms[j]
        out.append(q)
        cols = [c - q * (q.conj() @ c) for c in cols]
    if len(out) < take:
        raise RuntimeError("failed to extract a complex basis from the doubling")
    return np.column_stack(out)


def matrix_function(decomp: SpectralDecomposition, f) -> np.ndarray:
    """Apply a scalar function through the spectral decomposition.

    Returns ``sum_k f(lambda_k) v_k v_k*``; raises
    :class:`~szlab.errors.SpectralDomainError` when ``f`` is undefined or
    non-finite anywhere on the spectrum.
    """
    w = decomp.eigenvalues
    try:
        with np.errstate(all="ignore"):  # non-finite values are caught below
            fw = np.asarray(f(w), dtype=complex if np.iscomplexobj(w) else float)
        if fw.shape != w.shape:
            raise TypeError
    except Exception:
        try:
            fw = np.array([f(float(x)) for x in w], dtype=float)
        except Exception as exc:
            raise SpectralDomainError(
                f"function raised {type(exc).__name__} on the spectrum "
                f"[{w.min():.6g}, {w.max():.6g}]: {exc}"
            ) from exc
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(np.real(fw))]
        raise SpectralDomainError(
            f"function is non-finite at eigenvalue(s) near {bad[:3]}"
        )
    v = decomp.eigenvectors
    out = (v * fw) @ v.conj().T
    out = 0.5 * (out + out.conj().T)
    if not np.iscomplexobj(v) and not np.iscomplexobj(fw):
        return np.real(out)
    return out


def trace_function(decomp: SpectralDecomposition, f) -> float:
    """``trace f(A)`` as the plain sum of ``f`` over the eigenvalues."""
    w = decomp.eigenvalues
    try:
        vals = np.asarray(f(w), dtype=float)
        if vals.shape != w.shape:
            raise TypeError
    except Exception:
        vals = np.array([f(float(x)) for x in w], dtype=float)
    return float(np.sum(vals))


def operator_norm(a, rtol: float = 1e-8, max_iter: int = 10000) -> float:
    """Largest singular value by power iteration on ``A* A``.

    Deterministic start vector; relative accuracy ``rtol`` on the singular
    value.  The zero matrix returns 0.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if a.size == 0 or np.max(np.abs(a)) == 0.0:
        return 0.0
    n = a.shape[1]
    v = np.ones(n, dtype=complex if np.iscomplexobj(a) else float)
    v += np.linspace(0.0, 0.5, n)  # break symmetry against structured nulls
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = a @ v
        u = a.conj().T @ w
        nu = np.linalg.norm(u)
        if nu == 0.0:
            # v landed in the null space; restart against it
            v = np.roll(v, 1) + 1e-3
            v /= np.linalg.norm(v)
            continue
        new_sigma = float(np.linalg.norm(w))
        v = u / nu
        if abs(new_sigma - sigma) <= rtol * max(new_sigma, 1e-300):
            return new_sigma
        sigma = new_sigma
    return sigma


def hilbert_schmidt_norm(a) -> float:
    """Frobenius norm (square root of the sum of squared singular values)."""
    return float(np.linalg.norm(np.asarray(a)))
