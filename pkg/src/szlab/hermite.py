"""Hermite functions, multi-index bookkeeping, and rescaled-oscillator traces.

Everything is built on the normalized three-term recurrence

    h_0(x) = pi^(-1/4) exp(-x^2/2),
    h_{k+1}(x) = x sqrt(2/(k+1)) h_k(x) - sqrt(k/(k+1)) h_{k-1}(x),

which stays O(1) for all k and never touches the unnormalized polynomials,
so degrees in the hundreds are safe from overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def hermite_function(k: int, x):
    """Normalized Hermite function h_k at points ``x`` (scalar or array)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    table = hermite_values(k, x)
    out = table[k]
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


def hermite_values(max_degree: int, x) -> np.ndarray:
    """All h_k(x) for k = 0..max_degree, stacked along the first axis."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((max_degree + 1,) + xs.shape)
    h_prev = np.pi ** (-0.25) * np.exp(-0.5 * xs * xs)
    out[0] = h_prev
    if max_degree == 0:
        return out
    h_cur = np.sqrt(2.0) * xs * h_prev
    out[1] = h_cur
    for k in range(1, max_degree):
        h_next = xs * np.sqrt(2.0 / (k + 1)) * h_cur - np.sqrt(k / (k + 1.0)) * h_prev
        out[k + 1] = h_next
        h_prev, h_cur = h_cur, h_next
    return out


@dataclass(frozen=True)
class HermiteTable:
    """h_k samples on a fixed quadrature grid for k <= max_degree."""

    max_degree: int
    nodes: np.ndarray
    values: np.ndarray  # shape (max_degree + 1, len(nodes))

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def gram(self) -> np.ndarray:
        """<h_j, h_k> by trapezoid quadrature on the table's grid."""
        w = np.full(self.nodes.shape, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return (self.values * w) @ self.values.T

    def recurrence_residual(self) -> float:
        """max over nodes/degrees of |x h_k - sqrt((k+1)/2) h_{k+1} - sqrt(k/2) h_{k-1}|."""
        worst = 0.0
        x = self.nodes
        v = self.values
        for k in range(self.max_degree):
            lower = np.sqrt(k / 2.0) * v[k - 1] if k > 0 else 0.0
            resid = x * v[k] - np.sqrt((k + 1) / 2.0) * v[k + 1] - lower
            worst = max(worst, float(np.max(np.abs(resid))))
        return worst


def build_table(max_degree: int, half_width: float | None = None,
                points: int | None = None) -> HermiteTable:
    """Sample h_0..h_max_degree on a uniform grid wide enough for orthonormality.

    The default box extends past the classical turning point
    ``sqrt(2 max_degree + 1)`` so the quadrature Gram matrix is the identity
    to well below 1e-8.
    """
    if half_width is None:
        half_width = math.sqrt(2.0 * max_degree + 1.0) + 6.0
    if points is None:
        points = max(64, 24 * int(math.ceil(half_width)))
    nodes = np.linspace(-half_width, half_width, points)
    return HermiteTable(max_degree=max_degree, nodes=nodes,
                        values=hermite_values(max_degree, nodes))


def multi_indices(n: int, max_total_degree: int):
    """Yield alpha in N_0^n with |alpha| <= max_total_degree.

    Ordered by total degree, lexicographically inside each degree shell, so
    "the first N basis elements" is a well-defined prefix.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    for total in range(max_total_degree + 1):
        yield from _compositions(total, n)


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, n - 1):
            yield (head,) + rest


def first_multi_indices(n: int, count: int) -> list[tuple[int, ...]]:
    """The first ``count`` multi-indices in shell-then-lexicographic order."""
    out = []
    total = 0
    while len(out) < count:
        for alpha in _compositions(total, n):
            out.append(alpha)
            if len(out) == count:
                return out
        total += 1
    return out


def shell_count(degree: int, n: int) -> int:
    """Number of alpha in N_0^n with |alpha| = degree (stars and bars)."""
    return math.comb(degree + n - 1, n - 1)


def eigenvalue_multiindex(alpha, n: int) -> float:
    """Oscillator eigenvalue 2|alpha| + n for the product Hermite function."""
    total = int(sum(alpha))
    if total < 0:
        raise ValueError("multi-index entries must be nonnegative")
    return float(2 * total + n)


def _shell_density_coeffs(n: int) -> np.ndarray:
    # C(j+n-1, n-1) as a polynomial in j: prod_{i=1..n-1} (j+i) / (n-1)!
    poly = np.array([1.0])
    for i in range(1, n):
        poly = np.polymul(poly, np.array([1.0, float(i)]))
    return poly / math.factorial(n - 1)


def _tail_integral(coeffs: np.ndarray, lam: float, n: int, power: int,
                   start: float) -> float:
    # Closed form of  int_start^inf  p(j) (1 + lam (2j+n))^(-power) dj
    # via the substitution s = 1 + lam (2j + n):  j = (s - 1 - lam n)/(2 lam).
    # p is re-expanded in powers of s, each monomial integrates explicitly.
    sub = np.array([1.0 / (2.0 * lam), -(1.0 + lam * n) / (2.0 * lam)])
    comp = np.array([coeffs[0]])
    for c in coeffs[1:]:
        comp = np.polyadd(np.polymul(comp, sub), np.array([c]))
    s0 = 1.0 + lam * (2.0 * start + n)
    total = 0.0
    deg = len(comp) - 1
    for idx, c in enumerate(comp):
        m = deg - idx  # monomial s^m
        expo = power - m - 1
        if expo <= 0:
            raise ValueError("tail integral diverges: need 2N > n")
        total += c * s0 ** (-expo) / expo
    return total / (2.0 * lam)


def rescaled_trace(n: int, lam: float, big_n: int, tol: float = 1e-12):
    """Trace of the inverse 2N-th power of the rescaled oscillator 1 + |lam| H.

    Sums ``C(j+n-1, n-1) (1 + |lam|(2j+n))^(-2N)`` over degree shells j and
    closes the tail with a two-sided integral sandwich: once the shell terms
    are decreasing,

        int_J^inf g  <=  tail  <=  g(J) + int_J^inf g,

    so returning ``partial + int + g(J)/2`` carries a rigorous error bound of
    ``g(J)/2``.  Shells are accumulated until that bound drops below ``tol``.

    Returns
    -------
    value, tail_bound : float, float
    """
    if big_n < 1:
        raise ValueError("the power N must be a positive integer")
    if 2 * big_n <= n:
        raise ValueError(f"divergent parameters: need 2N > n, got 2N={2*big_n}, n={n}")
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = abs(float(lam))
    power = 2 * big_n
    coeffs = _shell_density_coeffs(n)

    def shell_term(j: float) -> float:
        return float(np.polyval(coeffs, j)) * (1.0 + lam * (2.0 * j + n)) ** (-power)

    terms = []
    j = 0
    # g decreasing is guaranteed once p'/p < 2 lam power / (1 + lam(2j+n));
    # p'/p <= (n-1)/(j+1), so test the simple sufficient condition.
    while True:
        g = shell_term(j)
        decreasing = (n - 1) / (j + 1.0) < 2.0 * lam * power / (1.0 + lam * (2.0 * j + n))
        if decreasing and g <= 2.0 * tol:
            break
        terms.append(g)
        j += 1
        if j > 50_000_000:
            raise RuntimeError("shell sum failed to reach the requested tolerance")
    partial = math.fsum(terms)
    tail_mid = _tail_integral(coeffs, lam, n, power, float(j)) + 0.5 * shell_term(j)
    tail_bound = 0.5 * shell_term(j)
    return partial + tail_mid, tail_bound


def comparison_shell_sum(n: int, power: int, tol: float = 1e-12) -> float:
    """``sum_alpha (2|alpha| + n)^(-power)`` with the same sandwich closure."""
    if power <= n:
        raise ValueError("need power > n for convergence")
    coeffs = _shell_density_coeffs(n)

    def shell_term(j: float) -> float:
        return float(np.polyval(coeffs, j)) * (2.0 * j + n) ** (-power)

    terms = []
    j = 0
    while True:
        g = shell_term(j)
        decreasing = (n - 1) / (j + 1.0) < 2.0 * power / (2.0 * j + n)
        if decreasing and g <= 2.0 * tol:
            break
        terms.append(g)
        j += 1
        if j > 50_000_000:
            raise RuntimeError("shell sum failed to reach the requested tolerance")
    # same substitution trick with lam -> effective weight (2j+n) = s
    sub = np.array([0.5, -0.5 * n])
    comp = np.array([coeffs[0]])
    for c in coeffs[1:]:
        comp = np.polyadd(np.polymul(comp, sub), np.array([c]))
    s0 = 2.0 * j + n
    tail = 0.0
    deg = len(comp) - 1
    for idx, c in enumerate(comp):
        m = deg - idx
        expo = power - m - 1
        tail += c * s0 ** (-expo) / expo
    tail *= 0.5
    return math.fsum(terms) + tail + 0.5 * shell_term(j)
